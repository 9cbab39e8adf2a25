//! Bohr equivalence of truncated series.
//!
//! Two series with the same exponents are equivalent with respect to a basis
//! `B` (`Lambda = R B`) when `b(n) = a(n) exp(i (R Y)_n)` for one real phase
//! vector `Y` indexed by the basis. Deciding this for a truncation reduces to
//! the congruence system `R Y = theta (mod 2 pi)`, where
//! `theta(n) = arg(b(n) / a(n))`. The system is solvable exactly when every
//! integer relation `m` between the rows of `R` (`m^T R = 0`) also annihilates
//! `theta` modulo `2 pi`.

use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::basis::{compute_basis, Basis, BohrMatrix};
use crate::error::{Error, Result};
use crate::lattice::{left_kernel, row_hermite, IntMatrix};
use crate::series::{rational_to_f64, Complex, Rational, SeriesSpec};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_SEARCH_BOUND: u64 = 1_000_000;

/// Reduces an angle into `[0, 2 pi)`.
pub fn normalize_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Distance from `x` to the nearest multiple of `2 pi`.
pub fn circle_distance(x: f64) -> f64 {
    let r = normalize_angle(x);
    r.min(TAU - r)
}

/// Real phases indexed parallel to the basis elements.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector(pub Vec<f64>);

impl PhaseVector {
    pub fn zeros(k: usize) -> Self {
        Self(vec![0.0; k])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `(R Y)_n` for every row of `r`.
    pub fn image(&self, r: &BohrMatrix) -> Result<Vec<f64>> {
        if r.ncols() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: r.ncols(),
                got: self.len(),
            });
        }
        Ok(r.rows()
            .iter()
            .map(|row| {
                row.iter()
                    .map(|(&j, q)| rational_to_f64(q) * self.0[j])
                    .sum()
            })
            .collect())
    }
}

/// Multiplies coefficient `n` by `exp(i (R Y)_n)`; exponents are unchanged.
pub fn twist(spec: &SeriesSpec, basis: &Basis, r: &BohrMatrix, y: &PhaseVector) -> Result<SeriesSpec> {
    if r.nrows() != spec.len() {
        return Err(Error::DimensionMismatch {
            expected: spec.len(),
            got: r.nrows(),
        });
    }
    if basis.len() != r.ncols() {
        return Err(Error::DimensionMismatch {
            expected: r.ncols(),
            got: basis.len(),
        });
    }
    let phases = y.image(r)?;
    let coeffs: Vec<Complex> = spec
        .terms()
        .iter()
        .zip(&phases)
        .map(|(t, &p)| t.coeff * Complex::from_polar(1.0, p))
        .collect();
    spec.with_coeffs(&coeffs)
}

/// Phase constraints `theta(n) = arg(b(n)/a(n))` for the terms where the
/// coefficients do not vanish.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTargets {
    /// `(0-based term index, theta in [0, 2 pi))`.
    pub entries: Vec<(usize, f64)>,
    /// Terms where both coefficients vanish.
    pub skipped: Vec<usize>,
}

impl PhaseTargets {
    pub fn rows(&self) -> Vec<usize> {
        self.entries.iter().map(|&(n, _)| n).collect()
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.entries.iter().map(|&(_, t)| t).collect()
    }
}

fn check_aligned(a: &SeriesSpec, b: &SeriesSpec) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    for (n, (ta, tb)) in a.terms().iter().zip(b.terms()).enumerate() {
        if ta.exponent != tb.exponent {
            return Err(Error::ExponentMismatch(n + 1));
        }
    }
    Ok(())
}

pub fn extract_phase_targets(a: &SeriesSpec, b: &SeriesSpec, tol: f64) -> Result<PhaseTargets> {
    check_aligned(a, b)?;
    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for (n, (ta, tb)) in a.terms().iter().zip(b.terms()).enumerate() {
        let (ma, mb) = (ta.coeff.norm(), tb.coeff.norm());
        if ma <= tol {
            if mb <= tol {
                skipped.push(n);
                continue;
            }
            return Err(Error::SupportMismatch(n + 1));
        }
        if (ma - mb).abs() > tol * ma.max(1.0) {
            return Err(Error::ModulusMismatch(n + 1));
        }
        entries.push((n, normalize_angle((tb.coeff / ta.coeff).arg())));
    }
    Ok(PhaseTargets { entries, skipped })
}

/// Common denominator and integer matrix `d R` over `rows`.
fn integer_rows(r: &BohrMatrix, rows: &[usize]) -> (BigInt, IntMatrix) {
    let d = rows
        .iter()
        .flat_map(|&i| r.row(i).values())
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let scale = Rational::from_integer(d.clone());
    let m = rows
        .iter()
        .map(|&i| {
            (0..r.ncols())
                .map(|j| (r.entry(i, j) * &scale).to_integer())
                .collect()
        })
        .collect();
    (d, m)
}

/// Generators (Hermite-normalized) of the integer relations
/// `{m : sum_n m_n r_nj = 0 for all j}` among the selected rows. Empty iff
/// the rows are linearly independent over the rationals.
pub fn integer_kernel(r: &BohrMatrix, rows: &[usize]) -> Vec<Vec<BigInt>> {
    let (_, m) = integer_rows(r, rows);
    left_kernel(&m, r.ncols())
}

/// `m^T R` over the selected rows, in exact arithmetic.
pub fn relation_image(r: &BohrMatrix, rows: &[usize], m: &[BigInt]) -> Vec<Rational> {
    let mut acc = vec![Rational::zero(); r.ncols()];
    for (&i, c) in rows.iter().zip(m) {
        let c = Rational::from_integer(c.clone());
        for (&j, q) in r.row(i) {
            acc[j] += q * &c;
        }
    }
    acc
}

/// `|sum m_n theta_n|` measured to the nearest multiple of `2 pi`.
pub fn relation_defect(m: &[BigInt], thetas: &[f64]) -> f64 {
    // Accumulate reduced products so large multipliers do not swamp theta.
    let s: f64 = m
        .iter()
        .zip(thetas)
        .map(|(c, t)| {
            let c = c.to_f64().unwrap_or(f64::NAN);
            normalize_angle(c * t)
        })
        .sum();
    circle_distance(s)
}

fn l1(m: &[BigInt]) -> f64 {
    m.iter().map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY)).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Feasible {
        y: PhaseVector,
        /// `max_n |(R Y)_n - theta_n|` modulo `2 pi`.
        residual: f64,
    },
    Infeasible {
        /// Integer relation over the constrained rows (parallel to `rows`).
        witness: Vec<BigInt>,
        defect: f64,
    },
}

impl Verdict {
    /// Panics unless `y` solves the system to within `tol`.
    pub fn feasible(r: &BohrMatrix, rows: &[usize], thetas: &[f64], y: PhaseVector, tol: f64) -> Self {
        let residual = phase_residual(r, rows, thetas, &y);
        assert!(residual <= tol, "feasible verdict with residual {residual} > {tol}");
        Verdict::Feasible { y, residual }
    }

    /// Panics unless `witness` is an exact relation whose defect exceeds `tol`.
    pub fn infeasible(r: &BohrMatrix, rows: &[usize], thetas: &[f64], witness: Vec<BigInt>, tol: f64) -> Self {
        assert!(
            relation_image(r, rows, &witness).iter().all(Zero::is_zero),
            "witness is not an integer relation"
        );
        let defect = relation_defect(&witness, thetas);
        assert!(defect > tol, "infeasible verdict with defect {defect} <= {tol}");
        Verdict::Infeasible { witness, defect }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, Verdict::Feasible { .. })
    }
}

pub fn phase_residual(r: &BohrMatrix, rows: &[usize], thetas: &[f64], y: &PhaseVector) -> f64 {
    rows.iter()
        .zip(thetas)
        .map(|(&i, &t)| {
            let p: f64 = r
                .row(i)
                .iter()
                .map(|(&j, q)| normalize_angle(rational_to_f64(q) * y.0[j]))
                .sum();
            circle_distance(p - t)
        })
        .fold(0.0, f64::max)
}

/// The truncated system `R Y = theta (mod 2 pi)` with its relation lattice
/// and verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct CongruenceSystem {
    /// `R` restricted to the constrained rows.
    pub r: BohrMatrix,
    pub targets: PhaseTargets,
    pub kernel: Vec<Vec<BigInt>>,
    pub verdict: Verdict,
}

/// Decides `R Y = theta (mod 2 pi)` for the rows named by `targets`.
///
/// A kernel generator whose defect exceeds `tol * |m|_1` certifies
/// infeasibility. Otherwise a solution is built from the row Hermite form
/// `W (d R) = H` of the integer-scaled rows: the nonzero rows of `H` fix
/// `Y / d` up to free coordinates (set to zero), and the rows of `W` below
/// the rank are the relations the targets must satisfy.
pub fn solve_phase_system(r: &BohrMatrix, targets: &PhaseTargets, tol: f64) -> Result<CongruenceSystem> {
    let rows = targets.rows();
    if let Some(&bad) = rows.iter().find(|&&i| i >= r.nrows()) {
        return Err(Error::DimensionMismatch {
            expected: r.nrows(),
            got: bad + 1,
        });
    }
    let thetas = targets.thetas();
    let kernel = integer_kernel(r, &rows);
    let restricted = r.select_rows(&rows);
    let local: Vec<usize> = (0..rows.len()).collect();
    let finish = |verdict| CongruenceSystem {
        r: restricted.clone(),
        targets: targets.clone(),
        kernel: kernel.clone(),
        verdict,
    };

    let worst = kernel
        .iter()
        .map(|m| (m, relation_defect(m, &thetas)))
        .max_by(|a, b| (a.1 / l1(a.0)).total_cmp(&(b.1 / l1(b.0))));
    if let Some((m, defect)) = worst {
        if defect > tol * l1(m) {
            let v = Verdict::infeasible(&restricted, &local, &thetas, m.clone(), tol);
            return Ok(finish(v));
        }
    }

    let y = construct_solution(r, &rows, &thetas);
    let residual = phase_residual(&restricted, &local, &thetas, &y);
    if residual <= tol {
        return Ok(finish(Verdict::feasible(&restricted, &local, &thetas, y, tol)));
    }
    match kernel
        .iter()
        .map(|m| (m, relation_defect(m, &thetas)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
    {
        Some((m, defect)) if defect > tol => {
            let v = Verdict::infeasible(&restricted, &local, &thetas, m.clone(), tol);
            Ok(finish(v))
        }
        _ => Err(Error::Indeterminate { tol, residual }),
    }
}

fn construct_solution(r: &BohrMatrix, rows: &[usize], thetas: &[f64]) -> PhaseVector {
    let k = r.ncols();
    let (d, m) = integer_rows(r, rows);
    let hf = row_hermite(&m, k);
    // phi = W theta, reduced modulo 2 pi term by term
    let phi: Vec<f64> = hf.transform[..hf.rank]
        .iter()
        .map(|w| {
            w.iter()
                .zip(thetas)
                .map(|(c, t)| normalize_angle(c.to_f64().unwrap_or(0.0) * t))
                .sum::<f64>()
        })
        .collect();
    let mut y = vec![0.0; k];
    for i in (0..hf.rank).rev() {
        let p = hf.pivots[i];
        let mut acc = phi[i];
        for j in p + 1..k {
            let h = &hf.hermite[i][j];
            if !h.is_zero() {
                acc -= h.to_f64().unwrap_or(0.0) * y[j];
            }
        }
        y[p] = acc / hf.hermite[i][p].to_f64().unwrap_or(1.0);
    }
    let d = d.to_f64().unwrap_or(1.0);
    let y = PhaseVector(y.into_iter().map(|v| v * d).collect());
    refine(r, rows, thetas, y)
}

/// Reduces each coordinate into its column period `2 pi D_j` and removes the
/// rounding error amplified by the integer back-substitution with a few
/// least-squares correction steps.
fn refine(r: &BohrMatrix, rows: &[usize], thetas: &[f64], mut y: PhaseVector) -> PhaseVector {
    let k = r.ncols();
    for (j, v) in y.0.iter_mut().enumerate() {
        let period = rows
            .iter()
            .fold(BigInt::one(), |acc, &i| acc.lcm(r.entry(i, j).denom()));
        if let Some(p) = period.to_f64().filter(|p| p.is_finite()) {
            *v = v.rem_euclid(TAU * p);
        }
    }
    let a: Vec<Vec<f64>> = rows
        .iter()
        .map(|&i| (0..k).map(|j| rational_to_f64(&r.entry(i, j))).collect())
        .collect();
    let local: Vec<usize> = (0..rows.len()).collect();
    let restricted = r.select_rows(rows);
    let mut best = phase_residual(&restricted, &local, thetas, &y);
    for _ in 0..3 {
        let err: Vec<f64> = rows
            .iter()
            .zip(thetas)
            .map(|(&i, &t)| {
                let p: f64 = r
                    .row(i)
                    .iter()
                    .map(|(&j, q)| normalize_angle(rational_to_f64(q) * y.0[j]))
                    .sum();
                signed_angle(p - t)
            })
            .collect();
        let Some(delta) = least_squares(&a, &err) else { break };
        let next = PhaseVector(y.0.iter().zip(&delta).map(|(v, d)| v - d).collect());
        let res = phase_residual(&restricted, &local, thetas, &next);
        if res >= best {
            break;
        }
        best = res;
        y = next;
    }
    y
}

fn signed_angle(x: f64) -> f64 {
    let w = normalize_angle(x);
    if w > std::f64::consts::PI {
        w - TAU
    } else {
        w
    }
}

/// Minimizes `|A x - b|` through the normal equations; coordinates that the
/// rows do not determine are set to zero.
fn least_squares(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let k = a.first()?.len();
    let mut n = vec![vec![0.0; k + 1]; k];
    for (row, &bi) in a.iter().zip(b) {
        for i in 0..k {
            for j in 0..k {
                n[i][j] += row[i] * row[j];
            }
            n[i][k] += row[i] * bi;
        }
    }
    let scale = n.iter().enumerate().map(|(i, r)| r[i]).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let mut pivot_of = vec![None; k];
    let mut used = vec![false; k];
    for col in 0..k {
        let best = (0..k)
            .filter(|&r| !used[r])
            .max_by(|&x, &y| n[x][col].abs().total_cmp(&n[y][col].abs()))?;
        if n[best][col].abs() <= 1e-12 * scale {
            continue;
        }
        used[best] = true;
        pivot_of[col] = Some(best);
        for r in 0..k {
            if r != best && n[r][col] != 0.0 {
                let f = n[r][col] / n[best][col];
                for c in col..=k {
                    n[r][c] -= f * n[best][c];
                }
            }
        }
    }
    Some(
        (0..k)
            .map(|col| pivot_of[col].map_or(0.0, |r| n[r][k] / n[r][col]))
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub enum Equivalence {
    Equivalent {
        basis: Basis,
        r: BohrMatrix,
        y: PhaseVector,
    },
    NotEquivalent(NotEquivalentReason),
}

#[derive(Debug, Clone, PartialEq)]
pub enum NotEquivalentReason {
    ModulusMismatch(usize),
    SupportMismatch(usize),
    Relation { witness: Vec<(usize, BigInt)>, defect: f64 },
}

impl Equivalence {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Equivalence::Equivalent { .. })
    }
}

/// Decides whether two aligned truncations are Bohr equivalent.
pub fn is_equivalent_truncated(a: &SeriesSpec, b: &SeriesSpec, tol: f64) -> Result<Equivalence> {
    check_aligned(a, b)?;
    let (basis, r, _) = compute_basis(&a.exponents())?;
    let targets = match extract_phase_targets(a, b, tol) {
        Ok(t) => t,
        Err(Error::ModulusMismatch(n)) => {
            return Ok(Equivalence::NotEquivalent(NotEquivalentReason::ModulusMismatch(n)))
        }
        Err(Error::SupportMismatch(n)) => {
            return Ok(Equivalence::NotEquivalent(NotEquivalentReason::SupportMismatch(n)))
        }
        Err(e) => return Err(e),
    };
    let system = solve_phase_system(&r, &targets, tol)?;
    Ok(match system.verdict {
        Verdict::Feasible { y, .. } => Equivalence::Equivalent { basis, r, y },
        Verdict::Infeasible { witness, defect } => {
            let witness = targets.rows().into_iter().zip(witness).collect();
            Equivalence::NotEquivalent(NotEquivalentReason::Relation { witness, defect })
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosureStep {
    pub n: usize,
    pub feasible: bool,
    pub min_norm: Option<f64>,
}

/// Per-truncation feasibility of `b ~ a` for `N = 1..=n_max`, with the
/// smallest solution norm. Feasibility at every `N` together with growing
/// minimal norms is the finite trace of a series lying in the closure of an
/// equivalence class without belonging to it.
pub fn closure_demo(a: &SeriesSpec, b: &SeriesSpec, n_max: usize, search_bound: u64, tol: f64) -> Result<Vec<ClosureStep>> {
    check_aligned(a, b)?;
    if n_max > a.len() {
        return Err(Error::IndexOutOfRange {
            index: n_max,
            len: a.len(),
        });
    }
    (1..=n_max)
        .map(|n| {
            let (an, bn) = (a.truncate(n), b.truncate(n));
            let (_, r, _) = compute_basis(&an.exponents())?;
            let targets = match extract_phase_targets(&an, &bn, tol) {
                Ok(t) => t,
                Err(Error::ModulusMismatch(_) | Error::SupportMismatch(_)) => {
                    return Ok(ClosureStep {
                        n,
                        feasible: false,
                        min_norm: None,
                    })
                }
                Err(e) => return Err(e),
            };
            let system = solve_phase_system(&r, &targets, tol)?;
            let min_norm = match &system.verdict {
                Verdict::Feasible { y, .. } => min_norm_solution(&r, &targets.rows(), y, search_bound),
                Verdict::Infeasible { .. } => None,
            };
            Ok(ClosureStep {
                n,
                feasible: system.verdict.is_feasible(),
                min_norm,
            })
        })
        .collect()
}

/// Period lattice of the solution set: the columns of the returned matrix
/// generate `{Y : R Y in 2 pi Z^n}` over the selected rows. `None` if the
/// rows do not have full column rank.
pub fn period_lattice(r: &BohrMatrix, rows: &[usize]) -> Option<Vec<Vec<Rational>>> {
    let k = r.ncols();
    let (d, m) = integer_rows(r, rows);
    let hf = row_hermite(&m, k);
    if hf.rank < k {
        return None;
    }
    // Y = 2 pi d H_top^{-1} c for integer c.
    let inv = invert_upper(&hf.hermite[..k])?;
    let d = Rational::from_integer(d);
    Some(
        inv.into_iter()
            .map(|row| row.into_iter().map(|x| x * &d).collect())
            .collect(),
    )
}

fn invert_upper(h: &[Vec<BigInt>]) -> Option<Vec<Vec<Rational>>> {
    let k = h.len();
    let mut inv = vec![vec![Rational::zero(); k]; k];
    for col in 0..k {
        for i in (0..k).rev() {
            let mut acc = if i == col { Rational::one() } else { Rational::zero() };
            for j in i + 1..k {
                acc -= Rational::from_integer(h[i][j].clone()) * &inv[j][col];
            }
            if h[i][i].is_zero() {
                return None;
            }
            inv[i][col] = acc / Rational::from_integer(h[i][i].clone());
        }
    }
    Some(inv)
}

/// Smallest Euclidean norm over the solution coset `y + period lattice`.
///
/// Exact reduction for one-dimensional bases; bounded enumeration around the
/// rounded coset representative otherwise. Returns `None` when the minimum
/// lies beyond `search_bound` periods or the lattice is degenerate.
pub fn min_norm_solution(r: &BohrMatrix, rows: &[usize], y: &PhaseVector, search_bound: u64) -> Option<f64> {
    let lattice = period_lattice(r, rows)?;
    let k = r.ncols();
    if k == 0 {
        return Some(0.0);
    }
    let basis: Vec<Vec<f64>> = lattice
        .iter()
        .map(|row| row.iter().map(|q| TAU * rational_to_f64(q)).collect())
        .collect();
    if k == 1 {
        let p = basis[0][0];
        let reduced = y.0[0] - p * (y.0[0] / p).round();
        let norm = reduced.abs();
        return (norm <= TAU * search_bound as f64).then_some(norm);
    }
    // c0 = round(-L^{-1} y); L is upper triangular.
    let mut c0 = vec![0.0; k];
    for i in (0..k).rev() {
        let mut acc = -y.0[i];
        for j in i + 1..k {
            acc -= basis[i][j] * c0[j];
        }
        c0[i] = acc / basis[i][i];
    }
    let c0: Vec<i64> = c0.iter().map(|c| c.round() as i64).collect();
    let mut radius = 1i64;
    while (2 * (radius + 1) + 1).pow(k as u32) <= 1_000_000 {
        radius += 1;
    }
    let radius = radius.min(search_bound.min(i64::MAX as u64) as i64);
    let mut best = f64::INFINITY;
    let mut offset = vec![-radius; k];
    loop {
        let norm2: f64 = (0..k)
            .map(|i| {
                let v = y.0[i]
                    + (0..k)
                        .map(|j| basis[i][j] * (c0[j] + offset[j]) as f64)
                        .sum::<f64>();
                v * v
            })
            .sum();
        best = best.min(norm2);
        let mut pos = 0;
        loop {
            if pos == k {
                return Some(best.sqrt());
            }
            offset[pos] += 1;
            if offset[pos] <= radius {
                break;
            }
            offset[pos] = -radius;
            pos += 1;
        }
    }
}
