//! Canonical series: Bohr's counterexample, its shift times, and ordinary
//! Dirichlet series over prime-logarithm symbols.

use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::series::{
    rational, rational_to_f64, Complex, ExponentVector, Rational, SeriesSpec, SymbolTable,
    TailMajorant, Term,
};

pub const UNIT_SYMBOL: &str = "ONE";

/// `lambda(n) = 2n - 1 + 1/(2(2n - 1)) = (2(2n-1)^2 + 1) / (2(2n-1))`, `n >= 1`.
pub fn bohr_lambda(n: u64) -> Rational {
    assert!(n >= 1, "Bohr exponents are indexed from 1");
    let odd = BigInt::from(2 * n - 1);
    let two = BigInt::from(2);
    Rational::new(&two * &odd * &odd + BigInt::one(), two * odd)
}

/// First `n` terms of `sum exp(-lambda(k) s)` with Bohr's exponents, over the
/// single symbol `ONE = 1`. Abscissa 0; the tail beyond `n` is majorized
/// geometrically with gap `5/3`, the smallest consecutive exponent gap.
pub fn bohr_example(n: usize) -> SeriesSpec {
    assert!(n >= 1, "bohr_example needs at least one term");
    let symbols = SymbolTable::from_pairs([(UNIT_SYMBOL, 1.0)]).expect("valid symbol");
    let exp = |k: u64| ExponentVector::from_coords([(UNIT_SYMBOL, bohr_lambda(k))]);
    let terms = (1..=n as u64)
        .map(|k| Term {
            exponent: exp(k),
            coeff: Complex::new(1.0, 0.0),
        })
        .collect();
    let gap = rational(5, 3);
    let tail = TailMajorant::new(exp(n as u64 + 1), 1.0, rational_to_f64(&gap)).expect("valid tail");
    SeriesSpec::new(symbols, terms, 0.0, Some(tail)).expect("Bohr exponents increase")
}

/// `tau_m / pi = 2 prod_{k <= m} (2k - 1)` as an exact integer.
pub fn tau_half_turns(m: u64) -> BigInt {
    (1..=m).fold(BigInt::from(2), |acc, k| acc * BigInt::from(2 * k - 1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tau {
    pub value: f64,
    /// `tau_m / (2 pi)`.
    pub turns: BigInt,
}

/// `tau_m = 2 pi prod_{k <= m} (2k - 1)`.
pub fn tau(m: u64) -> Tau {
    assert!(m >= 1, "tau is indexed from 1");
    let turns = tau_half_turns(m) / BigInt::from(2);
    let value = TAU * rational_to_f64(&Rational::from_integer(turns.clone()));
    Tau { value, turns }
}

pub fn negate(spec: &SeriesSpec) -> SeriesSpec {
    let coeffs: Vec<Complex> = spec.coeffs().into_iter().map(|c| -c).collect();
    spec.with_coeffs(&coeffs).expect("same length")
}

fn factor(mut n: u64) -> Vec<(u64, i64)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Ordinary Dirichlet series `sum a(n) n^{-s}`: symbols `Lp = log p` for the
/// primes dividing some index, and `lambda(n) = sum e_p Lp` from the
/// factorization of `n`. Terms are sorted by `n`.
pub fn ordinary_series(coeffs: &[(u64, Complex)]) -> Result<SeriesSpec> {
    let mut sorted = coeffs.to_vec();
    sorted.sort_by_key(|&(n, _)| n);
    for w in sorted.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::BadIndex(w[0].0));
        }
    }
    if let Some(&(n, _)) = sorted.iter().find(|&&(n, _)| n == 0) {
        return Err(Error::BadIndex(n));
    }
    let mut primes: Vec<u64> = sorted
        .iter()
        .flat_map(|&(n, _)| factor(n).into_iter().map(|(p, _)| p))
        .collect();
    primes.sort_unstable();
    primes.dedup();
    let symbols = SymbolTable::from_pairs(primes.iter().map(|&p| (format!("L{p}"), (p as f64).ln())))?;
    let terms = sorted
        .iter()
        .map(|&(n, a)| Term {
            exponent: ExponentVector::from_coords(
                factor(n)
                    .into_iter()
                    .map(|(p, e)| (format!("L{p}"), Rational::from_integer(e.into()))),
            ),
            coeff: a,
        })
        .collect();
    SeriesSpec::new(symbols, terms, f64::NEG_INFINITY, None)
}
