//! Integer row reduction over `Z` with a tracked unimodular transform.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

pub type IntMatrix = Vec<Vec<BigInt>>;

/// Result of [`row_hermite`]: `transform * input = hermite`, where `hermite`
/// is in row Hermite normal form and its first `rank` rows are nonzero.
#[derive(Debug, Clone)]
pub struct HermiteForm {
    pub hermite: IntMatrix,
    pub transform: IntMatrix,
    pub rank: usize,
    /// Pivot column of each nonzero row.
    pub pivots: Vec<usize>,
}

fn sub_multiple(rows: &mut [Vec<BigInt>], target: usize, source: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    let (t, s) = if target < source {
        let (lo, hi) = rows.split_at_mut(source);
        (&mut lo[target], &hi[0])
    } else {
        let (lo, hi) = rows.split_at_mut(target);
        (&mut hi[0], &lo[source])
    };
    for (x, y) in t.iter_mut().zip(s.iter()) {
        if !y.is_zero() {
            *x -= q * y;
        }
    }
}

/// Row Hermite normal form: pivots positive, entries above each pivot
/// reduced into `[0, pivot)`, zero rows last. `ncols` is needed when the
/// matrix has no rows.
pub fn row_hermite(matrix: &IntMatrix, ncols: usize) -> HermiteForm {
    let n = matrix.len();
    let mut h = matrix.clone();
    let mut w: IntMatrix = (0..n)
        .map(|i| (0..n).map(|j| BigInt::from((i == j) as i32)).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut prow = 0;
    for col in 0..ncols {
        if prow == n {
            break;
        }
        loop {
            let best = (prow..n)
                .filter(|&i| !h[i][col].is_zero())
                .min_by(|&a, &b| h[a][col].abs().cmp(&h[b][col].abs()));
            let Some(best) = best else { break };
            h.swap(prow, best);
            w.swap(prow, best);
            let mut done = true;
            for i in prow + 1..n {
                if h[i][col].is_zero() {
                    continue;
                }
                let q = h[i][col].div_floor(&h[prow][col]);
                sub_multiple(&mut h, i, prow, &q);
                sub_multiple(&mut w, i, prow, &q);
                if !h[i][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[prow][col].is_zero() {
            continue;
        }
        if h[prow][col].is_negative() {
            for x in h[prow].iter_mut().chain(w[prow].iter_mut()) {
                *x = -&*x;
            }
        }
        for i in 0..prow {
            let q = h[i][col].div_floor(&h[prow][col]);
            sub_multiple(&mut h, i, prow, &q);
            sub_multiple(&mut w, i, prow, &q);
        }
        pivots.push(col);
        prow += 1;
    }
    HermiteForm {
        hermite: h,
        transform: w,
        rank: prow,
        pivots,
    }
}

/// Basis of the left integer kernel `{m : m^T M = 0}` of an integer matrix,
/// returned in Hermite normal form (canonical for the lattice).
pub fn left_kernel(matrix: &IntMatrix, ncols: usize) -> IntMatrix {
    let hf = row_hermite(matrix, ncols);
    let raw: IntMatrix = hf.transform[hf.rank..].to_vec();
    if raw.is_empty() {
        return raw;
    }
    let kn = hf.transform.len();
    let norm = row_hermite(&raw, kn);
    norm.hermite[..norm.rank].to_vec()
}
