//! Exact exponent arithmetic and finite truncations of general Dirichlet series.
//!
//! A series is `f(s) = sum a(n) exp(-lambda(n) s)`. Exponents are never stored
//! as bare floats: each `lambda(n)` is a finite rational combination of named
//! real symbols (for example `L2 = log 2`, `ONE = 1`). The symbol values are
//! assumed to be linearly independent over the rationals, which makes every
//! rational relation between exponents visible to exact arithmetic.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;
pub type Complex = Complex64;

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rational_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `p/q` (q > 0) or a bare integer. Whitespace around the tokens is
/// not accepted.
pub fn parse_rational(s: &str) -> Option<Rational> {
    fn int(tok: &str) -> Option<BigInt> {
        let digits = tok.strip_prefix(['-', '+']).unwrap_or(tok);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        tok.parse().ok()
    }
    match s.split_once('/') {
        None => int(s).map(Rational::from_integer),
        Some((p, q)) => {
            let p = int(p)?;
            if q.starts_with(['-', '+']) {
                return None;
            }
            let q = int(q)?;
            if q.is_zero() {
                return None;
            }
            Some(Rational::new(p, q))
        }
    }
}

/// `p/q` or `p` when the denominator is one.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Nearest double to an exact rational. Falls back to a scaled division when
/// numerator or denominator overflow `f64`.
pub fn rational_to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() {
            return n / d;
        }
    }
    let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
    let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

#[derive(Debug, Clone, PartialEq)]
pub struct Symbol {
    pub name: String,
    pub value: f64,
}

/// Named real constants that exponents are built from. The caller vouches
/// for their linear independence over the rationals.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SymbolTable {
    symbols: Vec<Symbol>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut table = Self::new();
        for (name, value) in pairs {
            table.declare(name, value)?;
        }
        Ok(table)
    }

    pub fn declare(&mut self, name: impl Into<String>, value: f64) -> Result<()> {
        let name = name.into();
        if self.get(&name).is_some() {
            return Err(Error::DuplicateSymbol(name));
        }
        if !value.is_finite() || value == 0.0 {
            return Err(Error::BadSymbolValue { name, value });
        }
        self.symbols.push(Symbol { name, value });
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.symbols.iter().find(|s| s.name == name).map(|s| s.value)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Symbol> {
        self.symbols.iter()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Adds the symbols of `other` that are not yet declared. Symbols present
    /// in both must carry the same value.
    pub fn merge(&mut self, other: &SymbolTable) -> Result<()> {
        for s in other.iter() {
            match self.get(&s.name) {
                Some(v) if v.to_bits() == s.value.to_bits() => {}
                Some(v) => {
                    return Err(Error::BadSymbolValue {
                        name: s.name.clone(),
                        value: v,
                    })
                }
                None => self.declare(s.name.clone(), s.value)?,
            }
        }
        Ok(())
    }
}

/// A finite rational combination of symbols. Zero coordinates are never
/// stored, so structural equality is exact equality of combinations.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct ExponentVector {
    coords: BTreeMap<String, Rational>,
}

impl ExponentVector {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn symbol(name: impl Into<String>) -> Self {
        Self::from_coords([(name.into(), Rational::one())])
    }

    pub fn from_coords<I, S>(coords: I) -> Self
    where
        I: IntoIterator<Item = (S, Rational)>,
        S: Into<String>,
    {
        let mut v = Self::zero();
        for (name, q) in coords {
            v.add_term(name.into(), q);
        }
        v
    }

    fn add_term(&mut self, name: String, q: Rational) {
        if q.is_zero() {
            return;
        }
        let slot = self.coords.entry(name).or_insert_with(Rational::zero);
        *slot += q;
        if slot.is_zero() {
            self.coords.retain(|_, c| !c.is_zero());
        }
    }

    pub fn coords(&self) -> &BTreeMap<String, Rational> {
        &self.coords
    }

    pub fn coord(&self, name: &str) -> Rational {
        self.coords.get(name).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (name, q) in &other.coords {
            out.add_term(name.clone(), q.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, q: &Rational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        Self {
            coords: self
                .coords
                .iter()
                .map(|(n, c)| (n.clone(), c * q))
                .collect(),
        }
    }

    /// `sum coords[j] * value(j)` in double precision.
    pub fn numeric_value(&self, syms: &SymbolTable) -> Result<f64> {
        let mut acc = 0.0;
        for (name, q) in &self.coords {
            let value = syms
                .get(name)
                .ok_or_else(|| Error::UnknownSymbol(name.clone()))?;
            acc += rational_to_f64(q) * value;
        }
        Ok(acc)
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coords.is_empty() {
            return write!(f, "0");
        }
        for (i, (name, q)) in self.coords.iter().enumerate() {
            let sign = if q.is_negative() { "-" } else { "+" };
            if i == 0 {
                if q.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let a = q.abs();
            if a.is_one() {
                write!(f, "{name}")?;
            } else {
                write!(f, "{}*{name}", format_rational(&a))?;
            }
        }
        Ok(())
    }
}

/// Geometric majorant for the omitted part of a truncated series:
/// `coeff_bound * exp(-lambda_next * sigma) / (1 - exp(-min_gap * sigma))`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailMajorant {
    pub lambda_next: ExponentVector,
    pub coeff_bound: f64,
    pub min_gap: f64,
}

impl TailMajorant {
    pub fn new(lambda_next: ExponentVector, coeff_bound: f64, min_gap: f64) -> Result<Self> {
        if !(coeff_bound >= 0.0 && coeff_bound.is_finite() && min_gap > 0.0 && min_gap.is_finite())
        {
            return Err(Error::BadTail);
        }
        Ok(Self {
            lambda_next,
            coeff_bound,
            min_gap,
        })
    }

    pub fn bound(&self, syms: &SymbolTable, sigma: f64) -> Result<f64> {
        if !(sigma > 0.0) {
            return Err(Error::NonpositiveSigma(sigma));
        }
        if self.coeff_bound == 0.0 {
            return Ok(0.0);
        }
        let lambda = self.lambda_next.numeric_value(syms)?;
        Ok(self.coeff_bound * (-lambda * sigma).exp() / -(-self.min_gap * sigma).exp_m1())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub exponent: ExponentVector,
    pub coeff: Complex,
}

/// A validated finite truncation of a general Dirichlet series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSpec {
    symbols: SymbolTable,
    terms: Vec<Term>,
    lambdas: Vec<f64>,
    abscissa: f64,
    tail: Option<TailMajorant>,
}

impl SeriesSpec {
    /// Builds and validates a series. `abscissa` is the declared abscissa of
    /// absolute convergence of the intended infinite series (`-inf` for a
    /// genuinely finite sum).
    pub fn new(
        symbols: SymbolTable,
        terms: Vec<Term>,
        abscissa: f64,
        tail: Option<TailMajorant>,
    ) -> Result<Self> {
        let lambdas = validate_terms(&symbols, &terms)?;
        if let Some(t) = &tail {
            t.lambda_next.numeric_value(&symbols)?;
        }
        Ok(Self {
            symbols,
            terms,
            lambdas,
            abscissa,
            tail,
        })
    }

    /// Re-checks the term invariants; succeeds for every value built by `new`.
    pub fn validate(&self) -> Result<&Self> {
        validate_terms(&self.symbols, &self.terms)?;
        Ok(self)
    }

    pub fn symbols(&self) -> &SymbolTable {
        &self.symbols
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn abscissa(&self) -> f64 {
        self.abscissa
    }

    pub fn tail(&self) -> Option<&TailMajorant> {
        self.tail.as_ref()
    }

    /// Numeric exponent values, in term order.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn exponents(&self) -> Vec<ExponentVector> {
        self.terms.iter().map(|t| t.exponent.clone()).collect()
    }

    pub fn coeffs(&self) -> Vec<Complex> {
        self.terms.iter().map(|t| t.coeff).collect()
    }

    /// Same exponents, new coefficients.
    pub fn with_coeffs(&self, coeffs: &[Complex]) -> Result<Self> {
        if coeffs.len() != self.terms.len() {
            return Err(Error::DimensionMismatch {
                expected: self.terms.len(),
                got: coeffs.len(),
            });
        }
        let mut out = self.clone();
        for (term, c) in out.terms.iter_mut().zip(coeffs) {
            term.coeff = *c;
        }
        Ok(out)
    }

    /// The first `n` terms. The tail majorant is dropped unless `n` keeps
    /// every term.
    pub fn truncate(&self, n: usize) -> Self {
        if n >= self.terms.len() {
            return self.clone();
        }
        Self {
            symbols: self.symbols.clone(),
            terms: self.terms[..n].to_vec(),
            lambdas: self.lambdas[..n].to_vec(),
            abscissa: self.abscissa,
            tail: None,
        }
    }

    pub fn tail_bound(&self, sigma: f64) -> Result<Option<f64>> {
        self.tail
            .as_ref()
            .map(|t| t.bound(&self.symbols, sigma))
            .transpose()
    }

    /// `sum |a(n)| exp(-lambda(n) sigma)`, the triangle-inequality bound on
    /// `|f(sigma + it)|`.
    pub fn modulus_bound(&self, sigma: f64) -> f64 {
        self.terms
            .iter()
            .zip(&self.lambdas)
            .map(|(t, l)| t.coeff.norm() * (-l * sigma).exp())
            .sum()
    }
}

fn validate_terms(symbols: &SymbolTable, terms: &[Term]) -> Result<Vec<f64>> {
    for (i, term) in terms.iter().enumerate() {
        if terms[..i].iter().any(|t| t.exponent == term.exponent) {
            return Err(Error::DuplicateExponent(i + 1));
        }
        if !(term.coeff.re.is_finite() && term.coeff.im.is_finite()) {
            return Err(Error::NonFiniteCoefficient(i + 1));
        }
    }
    let lambdas = terms
        .iter()
        .map(|t| t.exponent.numeric_value(symbols))
        .collect::<Result<Vec<_>>>()?;
    for i in 1..lambdas.len() {
        if !(lambdas[i] > lambdas[i - 1]) {
            return Err(Error::NonIncreasingExponents(i + 1));
        }
    }
    Ok(lambdas)
}
