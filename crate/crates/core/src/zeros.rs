//! Zero counting for `f - v` in rectangles by the argument principle, and the
//! abscissa `sigma*(v)` of the largest zero-free right half-plane of `f - v`.

use std::f64::consts::{FRAC_PI_4, TAU};

use crate::error::{Error, Result};
use crate::eval::{evaluate, evaluate_at, EvalPoint};
use crate::series::{Complex, SeriesSpec};

/// Subdivision cap per rectangle side.
pub const MAX_POINTS_PER_SIDE: usize = 1 << 14;
pub const DEFAULT_STEPS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle {
    pub sigma_range: (f64, f64),
    pub t_range: (f64, f64),
}

impl Rectangle {
    pub fn new(sigma_range: (f64, f64), t_range: (f64, f64)) -> Result<Self> {
        let ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo < hi;
        if !ok(sigma_range) || !ok(t_range) {
            return Err(Error::BadRange(format!("rectangle {sigma_range:?} x {t_range:?}")));
        }
        Ok(Self { sigma_range, t_range })
    }

    /// Corners in counterclockwise order starting at the lower left.
    fn corners(&self) -> [Complex; 4] {
        let (s0, s1) = self.sigma_range;
        let (t0, t1) = self.t_range;
        [
            Complex::new(s0, t0),
            Complex::new(s1, t0),
            Complex::new(s1, t1),
            Complex::new(s0, t1),
        ]
    }
}

/// Boundary winding of `f - v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Winding {
    /// Accumulated argument divided by `2 pi`, before rounding.
    pub turns: f64,
    pub zeros: i64,
    /// `|turns - zeros|`.
    pub rounding_defect: f64,
}

/// The terms of `f - v`: `v` is merged into the constant term.
fn shifted_terms(spec: &SeriesSpec, v: Complex) -> Vec<(f64, Complex)> {
    let mut terms: Vec<(f64, Complex)> = spec
        .lambdas()
        .iter()
        .copied()
        .zip(spec.coeffs())
        .collect();
    match terms.iter_mut().find(|(l, _)| *l == 0.0) {
        Some(t) => t.1 -= v,
        None => {
            let pos = terms.partition_point(|(l, _)| *l < 0.0);
            terms.insert(pos, (0.0, -v));
        }
    }
    terms.retain(|(_, c)| *c != Complex::new(0.0, 0.0));
    terms
}

struct Integrand<'a> {
    spec: &'a SeriesSpec,
    v: Complex,
    delta: f64,
}

impl Integrand<'_> {
    fn at(&self, s: Complex) -> Result<Complex> {
        let w = evaluate_at(self.spec, s) - self.v;
        if !(w.norm() >= self.delta) {
            return Err(Error::BoundaryTooClose {
                sigma: s.re,
                t: s.im,
                delta: self.delta,
            });
        }
        Ok(w)
    }

    /// Argument increment along the segment `a -> b`, subdividing until each
    /// piece turns by less than `pi/4`.
    fn segment(&self, a: Complex, wa: Complex, b: Complex, wb: Complex, budget: &mut usize, depth: u32) -> Result<f64> {
        let m = (a + b) * 0.5;
        let wm = self.at(m)?;
        if *budget == 0 || depth > 60 {
            return Err(Error::NonconvergentSubdivision);
        }
        *budget -= 1;
        let d1 = (wm / wa).arg();
        let d2 = (wb / wm).arg();
        if d1.abs() < FRAC_PI_4 && d2.abs() < FRAC_PI_4 {
            return Ok(d1 + d2);
        }
        Ok(self.segment(a, wa, m, wm, budget, depth + 1)? + self.segment(m, wm, b, wb, budget, depth + 1)?)
    }

    fn side(&self, from: Complex, to: Complex, steps: usize) -> Result<f64> {
        let mut budget = MAX_POINTS_PER_SIDE.saturating_sub(steps + 1);
        let point = |k: usize| from + (to - from) * (k as f64 / steps as f64);
        let mut prev = self.at(from)?;
        let mut total = 0.0;
        for k in 1..=steps {
            let (a, b) = (point(k - 1), point(k));
            let wb = self.at(b)?;
            total += self.segment(a, prev, b, wb, &mut budget, 0)?;
            prev = wb;
        }
        Ok(total)
    }
}

fn boundary_delta(v: Complex) -> f64 {
    1e-8 * (1.0 + v.norm())
}

/// Winding number of `f - v` around the rectangle, traversed
/// counterclockwise with `steps` initial samples per side.
pub fn winding(spec: &SeriesSpec, v: Complex, rect: &Rectangle, steps: usize) -> Result<Winding> {
    if shifted_terms(spec, v).is_empty() {
        return Err(Error::DegenerateTarget);
    }
    let f = Integrand {
        spec,
        v,
        delta: boundary_delta(v),
    };
    let steps = steps.max(1);
    let c = rect.corners();
    let mut total = 0.0;
    for i in 0..4 {
        total += f.side(c[i], c[(i + 1) % 4], steps)?;
    }
    let turns = total / TAU;
    let zeros = turns.round() as i64;
    Ok(Winding {
        turns,
        zeros,
        rounding_defect: (turns - zeros as f64).abs(),
    })
}

/// Number of zeros of `f - v` inside the rectangle, with multiplicity.
pub fn count_zeros(spec: &SeriesSpec, v: Complex, rect: &Rectangle, steps: usize) -> Result<i64> {
    winding(spec, v, rect, steps).map(|w| w.zeros)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaStar {
    Finite(f64),
    MinusInfinity,
}

impl SigmaStar {
    pub fn value(self) -> f64 {
        match self {
            SigmaStar::Finite(s) => s,
            SigmaStar::MinusInfinity => f64::NEG_INFINITY,
        }
    }
}

/// An abscissa beyond which `f - v` has no zeros: past it the leading
/// (smallest-exponent) term of `f - v` dominates the rest by a factor two.
/// `None` when `f - v` has at most one nonzero term.
pub fn sigma_top(spec: &SeriesSpec, v: Complex, sigma_floor: f64) -> Result<Option<f64>> {
    let terms = shifted_terms(spec, v);
    if terms.is_empty() {
        return Err(Error::DegenerateTarget);
    }
    if terms.len() == 1 {
        return Ok(None);
    }
    let (mu0, c0) = terms[0];
    let rest = |sigma: f64| -> f64 {
        terms[1..]
            .iter()
            .map(|(mu, c)| c.norm() * (-(mu - mu0) * sigma).exp())
            .sum()
    };
    let mut sigma = sigma_floor;
    let mut step = 1.0;
    while rest(sigma) >= 0.5 * c0.norm() {
        sigma += step;
        step *= 2.0;
    }
    Ok(Some(sigma + 1.0))
}

/// Counts zeros in `[sigma_lo, sigma_top] x t_window`. When a zero sits on
/// the contour, the contour is nudged inward and the count retried.
fn robust_count(spec: &SeriesSpec, v: Complex, sigma_lo: f64, top: f64, t_window: (f64, f64), tol: f64) -> Result<i64> {
    let width = t_window.1 - t_window.0;
    let mut last = Error::NonconvergentSubdivision;
    for k in 0..6 {
        let nudge = k as f64;
        let rect = Rectangle::new(
            (sigma_lo + nudge * tol / 16.0, top),
            (t_window.0 + nudge * 1e-7 * width, t_window.1 - nudge * 1e-7 * width),
        )?;
        match count_zeros(spec, v, &rect, DEFAULT_STEPS) {
            Ok(n) => return Ok(n),
            Err(e @ (Error::BoundaryTooClose { .. } | Error::NonconvergentSubdivision)) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// Largest real part (to within `tol`) of a zero of `f - v` with imaginary
/// part in `t_window`, found by bisection on the left edge of
/// `[sigma, sigma_top] x t_window`. Restricting to a window makes this a
/// lower bound for the full half-plane abscissa.
pub fn sigma_star(spec: &SeriesSpec, v: Complex, t_window: (f64, f64), sigma_floor: f64, tol: f64) -> Result<SigmaStar> {
    if !(tol > 0.0) {
        return Err(Error::BadRange(format!("tol {tol}")));
    }
    let Some(top) = sigma_top(spec, v, sigma_floor)? else {
        return Ok(SigmaStar::MinusInfinity);
    };
    if robust_count(spec, v, sigma_floor, top, t_window, tol)? <= 0 {
        return Ok(SigmaStar::MinusInfinity);
    }
    let (mut lo, mut hi) = (sigma_floor, top);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if robust_count(spec, v, mid, top, t_window, tol)? > 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(SigmaStar::Finite(0.5 * (lo + hi)))
}

/// Whether `f` takes the value `v` in `(sigma1, sigma2) x t_window`.
pub fn attains_value(spec: &SeriesSpec, v: Complex, sigma1: f64, sigma2: f64, t_window: (f64, f64)) -> Result<bool> {
    if !(sigma1 < sigma2) {
        return Err(Error::BadRange(format!("strip ({sigma1}, {sigma2})")));
    }
    let rect = Rectangle::new((sigma1, sigma2), t_window)?;
    Ok(count_zeros(spec, v, &rect, DEFAULT_STEPS)? >= 1)
}

/// `sigma*(f(m))` for `m = 1..=m_max`.
pub fn sigma_sequence(spec: &SeriesSpec, m_max: usize, t_window: (f64, f64), sigma_floor: f64, tol: f64) -> Result<Vec<SigmaStar>> {
    (1..=m_max)
        .map(|m| {
            let v = evaluate(spec, EvalPoint::new(m as f64, 0.0));
            sigma_star(spec, v, t_window, sigma_floor, tol)
        })
        .collect()
}
