//! Rational bases of exponent sequences and the Bohr matrices relating them.
//!
//! For a finite exponent list `Lambda`, `compute_basis` selects a subsequence
//! `B` that is linearly independent over the rationals and spans the same
//! rational space, together with exact matrices `R` and `T` such that
//! `Lambda = R B` and `B = T Lambda`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::series::{ExponentVector, Rational};

/// Sparse exact rational matrix, one map per row.
#[derive(Debug, Clone, PartialEq)]
pub struct BohrMatrix {
    rows: Vec<BTreeMap<usize, Rational>>,
    ncols: usize,
}

impl BohrMatrix {
    pub fn new(ncols: usize) -> Self {
        Self {
            rows: Vec::new(),
            ncols,
        }
    }

    pub fn from_dense(rows: &[Vec<Rational>]) -> Result<Self> {
        let ncols = rows.first().map_or(0, Vec::len);
        let mut m = Self::new(ncols);
        for row in rows {
            m.push_dense(row)?;
        }
        Ok(m)
    }

    pub fn push_dense(&mut self, row: &[Rational]) -> Result<()> {
        if row.len() != self.ncols {
            return Err(Error::DimensionMismatch {
                expected: self.ncols,
                got: row.len(),
            });
        }
        self.rows.push(
            row.iter()
                .enumerate()
                .filter(|(_, q)| !q.is_zero())
                .map(|(j, q)| (j, q.clone()))
                .collect(),
        );
        Ok(())
    }

    pub fn push_sparse(&mut self, row: BTreeMap<usize, Rational>) -> Result<()> {
        if let Some((&j, _)) = row.iter().next_back() {
            if j >= self.ncols {
                return Err(Error::DimensionMismatch {
                    expected: self.ncols,
                    got: j + 1,
                });
            }
        }
        self.rows
            .push(row.into_iter().filter(|(_, q)| !q.is_zero()).collect());
        Ok(())
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &BTreeMap<usize, Rational> {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BTreeMap<usize, Rational>] {
        &self.rows
    }

    pub fn entry(&self, i: usize, j: usize) -> Rational {
        self.rows[i].get(&j).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn dense_row(&self, i: usize) -> Vec<Rational> {
        (0..self.ncols).map(|j| self.entry(i, j)).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<Rational>> {
        (0..self.nrows()).map(|i| self.dense_row(i)).collect()
    }

    /// Rows `indices` (0-based), in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        Self {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            ncols: self.ncols,
        }
    }

    pub fn scale(&self, q: &Rational) -> Self {
        Self {
            rows: self
                .rows
                .iter()
                .map(|r| {
                    r.iter()
                        .filter(|_| !q.is_zero())
                        .map(|(&j, c)| (j, c * q))
                        .collect()
                })
                .collect(),
            ncols: self.ncols,
        }
    }

    pub fn is_integral(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.values().all(|q| q.denom().is_one()))
    }

    /// Least common multiple of the entry denominators over the first `h`
    /// rows (1-based `h`; lcm of nothing is 1).
    pub fn denominator_lcm(&self, h: usize) -> Result<BigInt> {
        if h == 0 || h > self.nrows() {
            return Err(Error::IndexOutOfRange {
                index: h,
                len: self.nrows(),
            });
        }
        Ok(self.rows[..h]
            .iter()
            .flat_map(|r| r.values())
            .fold(BigInt::one(), |acc, q| acc.lcm(q.denom())))
    }

    /// Row-by-row image of a column of exponent vectors: `(M v)_i`.
    pub fn apply(&self, column: &[ExponentVector]) -> Result<Vec<ExponentVector>> {
        if column.len() != self.ncols {
            return Err(Error::DimensionMismatch {
                expected: self.ncols,
                got: column.len(),
            });
        }
        Ok(self
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .fold(ExponentVector::zero(), |acc, (&j, q)| acc.add(&column[j].scale(q)))
            })
            .collect())
    }

    /// Entries converted to `f64`, dense.
    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| {
                let mut v = vec![0.0; self.ncols];
                for (&j, q) in r {
                    v[j] = crate::series::rational_to_f64(q);
                }
                v
            })
            .collect()
    }
}

/// A basis of the rational span of an exponent list.
///
/// Element `j` equals `scale * lambda(source_indices[j])`; `scale` is one for
/// bases produced by [`compute_basis`] and `1/d_h` after
/// [`make_integral_truncated`].
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    pub elements: Vec<ExponentVector>,
    /// 0-based term indices the elements were taken from.
    pub source_indices: Vec<usize>,
    pub scale: Rational,
}

impl Basis {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Incremental exact row reduction used to pick pivots in scan order.
///
/// Each inserted vector is either independent of the kept ones (and becomes
/// a pivot) or is expressed exactly as a rational combination of them.
#[derive(Debug, Clone, Default)]
pub(crate) struct PivotReducer {
    // (reduced vector, pivot column, combination of kept originals)
    rows: Vec<(Vec<Rational>, usize, Vec<Rational>)>,
}

pub(crate) enum Reduction {
    Independent,
    Dependent(Vec<Rational>),
}

impl PivotReducer {
    pub fn insert(&mut self, v: &[Rational]) -> Reduction {
        let mut v = v.to_vec();
        let mut comb = vec![Rational::zero(); self.rows.len()];
        for (row, pivot, rcomb) in &self.rows {
            if v[*pivot].is_zero() {
                continue;
            }
            let f = &v[*pivot] / &row[*pivot];
            for (x, r) in v.iter_mut().zip(row) {
                if !r.is_zero() {
                    *x -= &f * r;
                }
            }
            for (c, r) in comb.iter_mut().zip(rcomb) {
                if !r.is_zero() {
                    *c += &f * r;
                }
            }
        }
        match v.iter().position(|x| !x.is_zero()) {
            None => Reduction::Dependent(comb),
            Some(pivot) => {
                let mut own: Vec<Rational> = comb.into_iter().map(|c| -c).collect();
                own.push(Rational::one());
                for (_, _, rcomb) in &mut self.rows {
                    rcomb.push(Rational::zero());
                }
                self.rows.push((v, pivot, own));
                Reduction::Independent
            }
        }
    }
}

/// Union of symbol names used by `exponents`, sorted.
pub(crate) fn coordinate_names(exponents: &[ExponentVector]) -> Vec<String> {
    exponents
        .iter()
        .flat_map(|e| e.coords().keys().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

pub(crate) fn coordinates(e: &ExponentVector, names: &[String]) -> Vec<Rational> {
    names.iter().map(|n| e.coord(n)).collect()
}

/// Selects a basis by scanning `exponents` in order and keeping every
/// exponent independent of those already kept. Returns `(B, R, T)` with
/// `Lambda = R B` and `B = T Lambda` exactly.
pub fn compute_basis(exponents: &[ExponentVector]) -> Result<(Basis, BohrMatrix, BohrMatrix)> {
    if exponents.is_empty() {
        return Err(Error::EmptyInput);
    }
    let names = coordinate_names(exponents);
    let mut reducer = PivotReducer::default();
    let mut sources = Vec::new();
    // Row n of R, expressed over the basis size known at the time.
    let mut raw_rows: Vec<BTreeMap<usize, Rational>> = Vec::with_capacity(exponents.len());
    for (n, e) in exponents.iter().enumerate() {
        match reducer.insert(&coordinates(e, &names)) {
            Reduction::Independent => {
                raw_rows.push(BTreeMap::from([(sources.len(), Rational::one())]));
                sources.push(n);
            }
            Reduction::Dependent(comb) => raw_rows.push(
                comb.into_iter()
                    .enumerate()
                    .filter(|(_, q)| !q.is_zero())
                    .collect(),
            ),
        }
    }
    let k = sources.len();
    let mut r = BohrMatrix::new(k);
    for row in raw_rows {
        r.push_sparse(row)?;
    }
    let mut t = BohrMatrix::new(exponents.len());
    for &src in &sources {
        t.push_sparse(BTreeMap::from([(src, Rational::one())]))?;
    }
    let basis = Basis {
        elements: sources.iter().map(|&i| exponents[i].clone()).collect(),
        source_indices: sources,
        scale: Rational::one(),
    };
    Ok((basis, r, t))
}

pub fn is_integral(r: &BohrMatrix) -> bool {
    r.is_integral()
}

pub fn denominator_lcm(r: &BohrMatrix, h: usize) -> Result<BigInt> {
    r.denominator_lcm(h)
}

/// Rescales the basis by `1/d_h` so that the first `h` rows of `R` become
/// integral. Returns the scaled basis and `d_h R` restricted to rows `1..=h`.
pub fn make_integral_truncated(
    basis: &Basis,
    r: &BohrMatrix,
    h: usize,
) -> Result<(Basis, BohrMatrix)> {
    let d = Rational::from_integer(r.denominator_lcm(h)?);
    let inv = d.recip();
    let scaled = Basis {
        elements: basis.elements.iter().map(|e| e.scale(&inv)).collect(),
        source_indices: basis.source_indices.clone(),
        scale: &basis.scale * &inv,
    };
    let rows: Vec<usize> = (0..h).collect();
    Ok((scaled, r.select_rows(&rows).scale(&d)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{rational, rational_int};

    fn sym(name: &str) -> ExponentVector {
        ExponentVector::symbol(name)
    }

    fn one(q: Rational) -> ExponentVector {
        ExponentVector::from_coords([("ONE", q)])
    }

    fn bohr3() -> Vec<ExponentVector> {
        vec![one(rational(3, 2)), one(rational(19, 6)), one(rational(51, 10))]
    }

    #[test]
    fn two_three_six() {
        let lam = vec![sym("L2"), sym("L3"), sym("L2").add(&sym("L3"))];
        let (b, r, t) = compute_basis(&lam).unwrap();
        assert_eq!(b.elements, vec![sym("L2"), sym("L3")]);
        assert_eq!(b.source_indices, vec![0, 1]);
        let q = rational_int;
        assert_eq!(
            r.to_dense(),
            vec![vec![q(1), q(0)], vec![q(0), q(1)], vec![q(1), q(1)]]
        );
        assert_eq!(
            t.to_dense(),
            vec![vec![q(1), q(0), q(0)], vec![q(0), q(1), q(0)]]
        );
        assert!(is_integral(&r));
        assert_eq!(r.apply(&b.elements).unwrap(), lam);
        assert_eq!(t.apply(&lam).unwrap(), b.elements);
    }

    #[test]
    fn bohr_example_prefix() {
        let lam = bohr3();
        let (b, r, _) = compute_basis(&lam).unwrap();
        assert_eq!(b.elements, vec![one(rational(3, 2))]);
        assert_eq!(
            r.to_dense(),
            vec![vec![rational_int(1)], vec![rational(19, 9)], vec![rational(17, 5)]]
        );
        assert!(!is_integral(&r));
        let d: Vec<BigInt> = (1..=3).map(|h| denominator_lcm(&r, h).unwrap()).collect();
        assert_eq!(d, vec![BigInt::from(1), BigInt::from(9), BigInt::from(45)]);
        assert!(denominator_lcm(&r, 0).is_err());
        assert!(denominator_lcm(&r, 4).is_err());
    }

    #[test]
    fn singleton_and_empty() {
        let (b, r, t) = compute_basis(&[sym("L2")]).unwrap();
        assert_eq!(b.elements, vec![sym("L2")]);
        assert_eq!(r.to_dense(), vec![vec![rational_int(1)]]);
        assert_eq!(t.to_dense(), vec![vec![rational_int(1)]]);
        assert_eq!(compute_basis(&[]).unwrap_err(), Error::EmptyInput);
    }

    #[test]
    fn zero_exponent_gets_zero_row() {
        let lam = vec![ExponentVector::zero(), sym("L2")];
        let (b, r, _) = compute_basis(&lam).unwrap();
        assert_eq!(b.source_indices, vec![1]);
        assert!(r.row(0).is_empty());
        assert!(is_integral(&r));
    }

    #[test]
    fn lcm_of_halves_and_thirds() {
        let r = BohrMatrix::from_dense(&[vec![rational(1, 2)], vec![rational(1, 3)]]).unwrap();
        assert_eq!(denominator_lcm(&r, 2).unwrap(), BigInt::from(6));
    }

    #[test]
    fn integral_scaling_bohr() {
        let lam = bohr3();
        let (b, r, _) = compute_basis(&lam).unwrap();

        let (b2, r2) = make_integral_truncated(&b, &r, 2).unwrap();
        assert_eq!(b2.elements, vec![one(rational(1, 6))]);
        assert_eq!(r2.to_dense(), vec![vec![rational_int(9)], vec![rational_int(19)]]);
        assert_eq!(r2.apply(&b2.elements).unwrap(), lam[..2].to_vec());

        let (b3, r3) = make_integral_truncated(&b, &r, 3).unwrap();
        assert_eq!(b3.elements, vec![one(rational(1, 30))]);
        assert_eq!(
            r3.to_dense(),
            vec![vec![rational_int(45)], vec![rational_int(95)], vec![rational_int(153)]]
        );
        assert_eq!(r3.apply(&b3.elements).unwrap(), lam);
        for h in 1..=3 {
            assert!(r3.is_integral());
            assert_eq!(r3.denominator_lcm(h).unwrap(), BigInt::one());
        }
    }

    #[test]
    fn integral_input_unchanged() {
        let lam = vec![sym("L2"), sym("L3"), sym("L2").add(&sym("L3"))];
        let (b, r, _) = compute_basis(&lam).unwrap();
        let (b2, r2) = make_integral_truncated(&b, &r, 3).unwrap();
        assert_eq!(b2.elements, b.elements);
        assert_eq!(r2, r);
    }

    #[test]
    fn idempotent_on_basis() {
        let lam = vec![
            one(rational(1, 2)),
            sym("L2").scale(&rational(3, 4)),
            one(rational(5, 3)),
            sym("L3"),
        ];
        let (b, _, _) = compute_basis(&lam).unwrap();
        let (b2, r2, _) = compute_basis(&b.elements).unwrap();
        assert_eq!(b2.elements, b.elements);
        let k = b.len();
        for i in 0..k {
            for j in 0..k {
                let expect = if i == j { rational_int(1) } else { rational_int(0) };
                assert_eq!(r2.entry(i, j), expect);
            }
        }
    }
}
