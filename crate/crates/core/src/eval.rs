//! Evaluation of truncated series, vertical shifts and grid sup-distances.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scenarios::{bohr_lambda, tau_half_turns};
use crate::series::{Complex, Rational, SeriesSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalPoint {
    pub sigma: f64,
    pub t: f64,
}

impl EvalPoint {
    pub fn new(sigma: f64, t: f64) -> Self {
        Self { sigma, t }
    }
}

/// Closed box `[sigma_min, sigma_max] x [t_min, t_max]` sampled on a
/// `(sigma_steps + 1) x (t_steps + 1)` grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridBox {
    pub sigma_range: (f64, f64),
    pub t_range: (f64, f64),
    pub sigma_steps: usize,
    pub t_steps: usize,
}

impl GridBox {
    pub fn new(sigma_range: (f64, f64), t_range: (f64, f64), sigma_steps: usize, t_steps: usize) -> Result<Self> {
        let ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo <= hi;
        if !ok(sigma_range) || !ok(t_range) || sigma_steps == 0 || t_steps == 0 {
            return Err(Error::BadRange(format!(
                "grid box {sigma_range:?} x {t_range:?} with {sigma_steps}x{t_steps} steps"
            )));
        }
        Ok(Self {
            sigma_range,
            t_range,
            sigma_steps,
            t_steps,
        })
    }

    pub fn points(&self) -> Vec<EvalPoint> {
        let lerp = |(lo, hi): (f64, f64), i: usize, n: usize| lo + (hi - lo) * i as f64 / n as f64;
        (0..=self.sigma_steps)
            .flat_map(|i| {
                (0..=self.t_steps).map(move |j| {
                    EvalPoint::new(
                        lerp(self.sigma_range, i, self.sigma_steps),
                        lerp(self.t_range, j, self.t_steps),
                    )
                })
            })
            .collect()
    }
}

/// `sum a(n) exp(-lambda(n) (sigma + i t))`, summed in term order.
pub fn evaluate(spec: &SeriesSpec, p: EvalPoint) -> Complex {
    evaluate_at(spec, Complex::new(p.sigma, p.t))
}

pub fn evaluate_at(spec: &SeriesSpec, s: Complex) -> Complex {
    spec.terms()
        .iter()
        .zip(spec.lambdas())
        .fold(Complex::new(0.0, 0.0), |acc, (term, &lambda)| {
            if lambda == 0.0 {
                acc + term.coeff
            } else {
                acc + term.coeff * (-lambda * s).exp()
            }
        })
}

/// The series of `s -> f(s + i tau)`: coefficient `n` picks up
/// `exp(-i lambda(n) tau)`.
pub fn shift_series(spec: &SeriesSpec, tau: f64) -> SeriesSpec {
    let coeffs: Vec<Complex> = spec
        .terms()
        .iter()
        .zip(spec.lambdas())
        .map(|(term, &lambda)| term.coeff * Complex::from_polar(1.0, -lambda * tau))
        .collect();
    spec.with_coeffs(&coeffs)
        .expect("coefficient count is unchanged")
}

/// Largest `|a(p) - b(p)|` over the grid points of `grid`.
pub fn uniform_distance(a: &SeriesSpec, b: &SeriesSpec, grid: &GridBox) -> f64 {
    grid.points()
        .par_iter()
        .map(|&p| (evaluate(a, p) - evaluate(b, p)).norm())
        .reduce(|| 0.0, f64::max)
}

/// Exact phase of the `n`-th term of Bohr's example after the shift `tau_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftPhase {
    /// `lambda(n) tau_m / pi`.
    pub ratio: Rational,
    /// The phase factor `exp(-i lambda(n) tau_m)` equals `-1`.
    pub is_minus_one: bool,
    /// `ratio - k` for the odd integer `k` nearest to `ratio`; zero exactly
    /// when `is_minus_one`.
    pub residual: Rational,
}

/// `lambda(n) tau_m / pi` in exact arithmetic for Bohr's example
/// `lambda(n) = 2n - 1 + 1/(2(2n - 1))`, `tau_m = 2 pi prod_{k <= m} (2k - 1)`.
pub fn shift_phase_exact(n: u64, m: u64) -> ShiftPhase {
    let ratio = bohr_lambda(n) * Rational::from_integer(tau_half_turns(m));
    let two = BigInt::from(2);
    // nearest odd integer: 2 * round((ratio - 1) / 2) + 1
    let half = (&ratio - Rational::one()) / Rational::from_integer(two.clone());
    let k = &two * round_half_up(&half) + BigInt::one();
    let residual = &ratio - Rational::from_integer(k);
    let is_minus_one = ratio.is_integer() && ratio.to_integer().is_odd();
    debug_assert_eq!(is_minus_one, residual.is_zero());
    ShiftPhase {
        ratio,
        is_minus_one,
        residual,
    }
}

fn round_half_up(q: &Rational) -> BigInt {
    let x = q + Rational::new(BigInt::one(), BigInt::from(2));
    x.numer().div_floor(x.denom())
}
