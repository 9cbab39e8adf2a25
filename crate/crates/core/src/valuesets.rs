//! Sampled value sets of a series on strips and vertical lines.
//!
//! Two independent routes produce clouds of values:
//! * direct: evaluate `f(sigma + i t)` at random points of the strip or line;
//! * equivalence class: evaluate `g(sigma)` on the real axis for random
//!   equivalent series `g`, i.e. random phase vectors `Y`.
//!
//! For exponents with an integral basis both routes describe the same closed
//! set, which is what the Hausdorff comparison checks.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::basis::compute_basis;
use crate::equivalence::circle_distance;
use crate::error::{Error, Result};
use crate::eval::{evaluate, EvalPoint};
use crate::series::{rational_to_f64, Complex, SeriesSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    DirectStrip,
    DirectLine,
    EquivalenceClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingMeta {
    pub sigma_range: (f64, f64),
    /// Zero for equivalence-class clouds, which sample `t = 0` only.
    pub t_max: f64,
    pub count: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueCloud {
    pub points: Vec<Complex>,
    pub route: Route,
    pub meta: SamplingMeta,
}

impl ValueCloud {
    pub fn max_modulus(&self) -> f64 {
        self.points.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    pub fn min_modulus(&self) -> f64 {
        self.points.iter().map(|p| p.norm()).fold(f64::INFINITY, f64::min)
    }
}

fn check_strip(sigma1: f64, sigma2: f64, count: usize) -> Result<()> {
    if !(sigma1 < sigma2) || !sigma1.is_finite() || !sigma2.is_finite() {
        return Err(Error::BadRange(format!("strip ({sigma1}, {sigma2})")));
    }
    if count == 0 {
        return Err(Error::BadRange("count must be positive".into()));
    }
    Ok(())
}

fn check_t_max(t_max: f64) -> Result<()> {
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::BadRange(format!("t_max {t_max}")));
    }
    Ok(())
}

fn evaluate_all(spec: &SeriesSpec, pts: Vec<EvalPoint>) -> Vec<Complex> {
    pts.par_iter().map(|&p| evaluate(spec, p)).collect()
}

/// Values at `count` random points with `sigma` uniform in `(sigma1, sigma2)`
/// and `t` uniform in `[-t_max, t_max]`.
pub fn sample_strip_direct(spec: &SeriesSpec, sigma1: f64, sigma2: f64, t_max: f64, count: usize, seed: u64) -> Result<ValueCloud> {
    check_strip(sigma1, sigma2, count)?;
    check_t_max(t_max)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = (0..count)
        .map(|_| EvalPoint::new(rng.gen_range(sigma1..sigma2), rng.gen_range(-t_max..=t_max)))
        .collect();
    Ok(ValueCloud {
        points: evaluate_all(spec, pts),
        route: Route::DirectStrip,
        meta: SamplingMeta {
            sigma_range: (sigma1, sigma2),
            t_max,
            count,
            seed,
        },
    })
}

/// Values on the line `sigma = sigma0` at `t` uniform in `[-t_max, t_max]`.
pub fn sample_line(spec: &SeriesSpec, sigma0: f64, t_max: f64, count: usize, seed: u64) -> Result<ValueCloud> {
    check_t_max(t_max)?;
    if count == 0 {
        return Err(Error::BadRange("count must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = (0..count)
        .map(|_| EvalPoint::new(sigma0, rng.gen_range(-t_max..=t_max)))
        .collect();
    Ok(ValueCloud {
        points: evaluate_all(spec, pts),
        route: Route::DirectLine,
        meta: SamplingMeta {
            sigma_range: (sigma0, sigma0),
            t_max,
            count,
            seed,
        },
    })
}

/// `g(sigma)` for random `g ~ f`: each phase coordinate is uniform on
/// `[0, 2 pi d_N)` with `d_N` the denominator lcm of `R`, which covers the
/// whole closed subgroup of attainable coefficient phases.
pub fn sample_strip_via_equivalence(spec: &SeriesSpec, sigma1: f64, sigma2: f64, count: usize, seed: u64) -> Result<ValueCloud> {
    check_strip(sigma1, sigma2, count)?;
    sample_equivalence_class(spec, (sigma1, sigma2), count, seed)
}

/// Route-B cloud on a single line: `g(sigma0)` for random `g ~ f`.
pub fn sample_line_via_equivalence(spec: &SeriesSpec, sigma0: f64, count: usize, seed: u64) -> Result<ValueCloud> {
    if count == 0 {
        return Err(Error::BadRange("count must be positive".into()));
    }
    sample_equivalence_class(spec, (sigma0, sigma0), count, seed)
}

/// Phase vectors drawn the way route B draws them, with the row phases
/// `(R Y)_n` they induce.
pub fn random_class_phases(spec: &SeriesSpec, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let (_, r, _) = compute_basis(&spec.exponents())?;
    let period = TAU * rational_to_f64(&r.denominator_lcm(r.nrows())?.into());
    let rows = r.to_f64();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let y: Vec<f64> = (0..r.ncols()).map(|_| rng.gen_range(0.0..period)).collect();
            rows.iter()
                .map(|row| row.iter().zip(&y).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect())
}

fn sample_equivalence_class(spec: &SeriesSpec, sigma_range: (f64, f64), count: usize, seed: u64) -> Result<ValueCloud> {
    if spec.is_empty() {
        return Err(Error::EmptyInput);
    }
    let phases = random_class_phases(spec, count, seed)?;
    // sigma draws come from a second stream so the phase draws match
    // `random_class_phases` for the same seed
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let sigmas: Vec<f64> = (0..count)
        .map(|_| {
            if sigma_range.0 < sigma_range.1 {
                rng.gen_range(sigma_range.0..sigma_range.1)
            } else {
                sigma_range.0
            }
        })
        .collect();
    let coeffs = spec.coeffs();
    let lambdas = spec.lambdas();
    let points = phases
        .par_iter()
        .zip(sigmas.par_iter())
        .map(|(ph, &sigma)| {
            coeffs
                .iter()
                .zip(lambdas)
                .zip(ph)
                .map(|((a, l), &p)| a * Complex::from_polar((-l * sigma).exp(), p))
                .sum()
        })
        .collect();
    Ok(ValueCloud {
        points,
        route: Route::EquivalenceClass,
        meta: SamplingMeta {
            sigma_range,
            t_max: 0.0,
            count,
            seed,
        },
    })
}

/// Uniform-grid bucket index over a planar point set for nearest-neighbour
/// queries.
struct Buckets<'a> {
    points: &'a [Complex],
    origin: (f64, f64),
    cell: f64,
    dims: (i64, i64),
    cells: Vec<Vec<u32>>,
}

impl<'a> Buckets<'a> {
    fn new(points: &'a [Complex]) -> Self {
        let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            x0 = x0.min(p.re);
            y0 = y0.min(p.im);
            x1 = x1.max(p.re);
            y1 = y1.max(p.im);
        }
        let area = ((x1 - x0) * (y1 - y0)).max((x1 - x0).max(y1 - y0).powi(2) * 1e-6);
        let mut cell = (2.0 * area / points.len() as f64).sqrt();
        if !(cell > 0.0) || !cell.is_finite() {
            cell = 1.0;
        }
        let nx = ((x1 - x0) / cell).floor() as i64 + 1;
        let ny = ((y1 - y0) / cell).floor() as i64 + 1;
        let mut cells = vec![Vec::new(); (nx * ny) as usize];
        for (i, p) in points.iter().enumerate() {
            let cx = (((p.re - x0) / cell).floor() as i64).clamp(0, nx - 1);
            let cy = (((p.im - y0) / cell).floor() as i64).clamp(0, ny - 1);
            cells[(cx * ny + cy) as usize].push(i as u32);
        }
        Self {
            points,
            origin: (x0, y0),
            cell,
            dims: (nx, ny),
            cells,
        }
    }

    fn nearest(&self, q: Complex) -> f64 {
        let (nx, ny) = self.dims;
        let qx = ((q.re - self.origin.0) / self.cell).floor() as i64;
        let qy = ((q.im - self.origin.1) / self.cell).floor() as i64;
        let mut best = f64::INFINITY;
        let mut ring = 0i64;
        loop {
            let mut visit = |cx: i64, cy: i64| {
                if (0..nx).contains(&cx) && (0..ny).contains(&cy) {
                    for &i in &self.cells[(cx * ny + cy) as usize] {
                        best = best.min((self.points[i as usize] - q).norm());
                    }
                }
            };
            if ring == 0 {
                visit(qx, qy);
            } else {
                for d in -ring..=ring {
                    visit(qx + d, qy - ring);
                    visit(qx + d, qy + ring);
                }
                for d in -ring + 1..ring {
                    visit(qx - ring, qy + d);
                    visit(qx + ring, qy + d);
                }
            }
            if best <= ring as f64 * self.cell {
                return best;
            }
            let beyond = qx - ring <= 0 && qy - ring <= 0 && qx + ring >= nx - 1 && qy + ring >= ny - 1;
            if beyond {
                return best;
            }
            ring += 1;
        }
    }
}

/// Largest distance from a point of `from` to its nearest point in `to`.
pub fn directed_hausdorff(from: &[Complex], to: &[Complex]) -> Result<f64> {
    if from.is_empty() || to.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let index = Buckets::new(to);
    Ok(from
        .par_iter()
        .map(|&p| index.nearest(p))
        .reduce(|| 0.0, f64::max))
}

/// Symmetric Hausdorff distance between two finite clouds.
pub fn hausdorff(a: &ValueCloud, b: &ValueCloud) -> Result<f64> {
    hausdorff_points(&a.points, &b.points)
}

pub fn hausdorff_points(a: &[Complex], b: &[Complex]) -> Result<f64> {
    Ok(directed_hausdorff(a, b)?.max(directed_hausdorff(b, a)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KroneckerResult {
    Found { t: f64, residual: f64 },
    NotFound,
}

/// `max_j dist(-t beta_j - y_j, 2 pi Z)`.
pub fn kronecker_residual(basis_values: &[f64], target: &[f64], t: f64) -> f64 {
    basis_values
        .iter()
        .zip(target)
        .map(|(b, y)| circle_distance(-t * b - y))
        .fold(0.0, f64::max)
}

fn signed_wrap(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r > std::f64::consts::PI {
        r - TAU
    } else {
        r
    }
}

/// Smallest `t` in `[0, t_max_search]` (up to grid resolution) with
/// `-t beta_j = y_j (mod 2 pi)` to within `tol` for every `j`.
///
/// Scans a grid of step `0.25 / max|beta|`, and around each grid point that
/// could be within reach refines by minimizing the piecewise-linear
/// residual exactly.
pub fn kronecker_find_t(basis_values: &[f64], target: &[f64], tol: f64, t_max_search: f64) -> Result<KroneckerResult> {
    if basis_values.len() != target.len() {
        return Err(Error::DimensionMismatch {
            expected: basis_values.len(),
            got: target.len(),
        });
    }
    if !(tol > 0.0) || !(t_max_search >= 0.0) {
        return Err(Error::BadRange(format!("tol {tol}, t_max_search {t_max_search}")));
    }
    let bmax = basis_values.iter().fold(0.0f64, |m, b| m.max(b.abs()));
    if bmax == 0.0 {
        let r = kronecker_residual(basis_values, target, 0.0);
        return Ok(if r <= tol {
            KroneckerResult::Found { t: 0.0, residual: r }
        } else {
            KroneckerResult::NotFound
        });
    }
    let h = 0.25 / bmax;
    let reach = tol + 0.5 * h * bmax;
    let steps = (t_max_search / h).ceil() as u64;
    for i in 0..=steps {
        let t0 = (i as f64 * h).min(t_max_search);
        if kronecker_residual(basis_values, target, t0) > reach {
            continue;
        }
        let errs: Vec<f64> = basis_values
            .iter()
            .zip(target)
            .map(|(b, y)| signed_wrap(-t0 * b - y))
            .collect();
        let lo = (-0.5 * h).max(-t0);
        let hi = (0.5 * h).min(t_max_search - t0);
        let mut candidates = vec![0.0, lo, hi];
        for (j, (&ej, &bj)) in errs.iter().zip(basis_values).enumerate() {
            if bj != 0.0 {
                candidates.push(ej / bj);
            }
            for (&ek, &bk) in errs[j + 1..].iter().zip(&basis_values[j + 1..]) {
                if bj != bk {
                    candidates.push((ej - ek) / (bj - bk));
                }
                if bj != -bk {
                    candidates.push((ej + ek) / (bj + bk));
                }
            }
        }
        let best = candidates
            .into_iter()
            .filter(|d| (lo..=hi).contains(d))
            .map(|d| {
                let t = t0 + d;
                (t, kronecker_residual(basis_values, target, t))
            })
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((t, residual)) = best {
            if residual <= tol {
                return Ok(KroneckerResult::Found { t, residual });
            }
        }
    }
    Ok(KroneckerResult::NotFound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{bohr_example, ordinary_series};
    use crate::series::{ExponentVector, SymbolTable, Term};
    use std::f64::consts::{LN_2, PI};

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn constant(value: Complex) -> SeriesSpec {
        SeriesSpec::new(
            SymbolTable::new(),
            vec![Term {
                exponent: ExponentVector::zero(),
                coeff: value,
            }],
            f64::NEG_INFINITY,
            None,
        )
        .unwrap()
    }

    #[test]
    fn constant_series_clouds() {
        let f = constant(c(2.0, -1.0));
        let cloud = sample_strip_direct(&f, 0.0, 1.0, 5.0, 50, 3).unwrap();
        assert!(cloud.points.iter().all(|&p| p == c(2.0, -1.0)));
        let line = sample_line(&f, 0.3, 5.0, 20, 3).unwrap();
        assert!(line.points.iter().all(|&p| p == c(2.0, -1.0)));
        let single = sample_strip_direct(&f, 0.0, 1.0, 5.0, 1, 3).unwrap();
        assert_eq!(single.points.len(), 1);
    }

    #[test]
    fn bad_ranges() {
        let f = constant(c(1.0, 0.0));
        assert!(matches!(sample_strip_direct(&f, 1.0, 1.0, 1.0, 5, 0), Err(Error::BadRange(_))));
        assert!(matches!(sample_strip_direct(&f, 0.0, 1.0, 0.0, 5, 0), Err(Error::BadRange(_))));
        assert!(matches!(sample_strip_direct(&f, 0.0, 1.0, 1.0, 0, 0), Err(Error::BadRange(_))));
        assert!(matches!(sample_strip_via_equivalence(&f, 2.0, 1.0, 5, 0), Err(Error::BadRange(_))));
    }

    #[test]
    fn seeds_are_deterministic() {
        let f = ordinary_series(&[(2, c(1.0, 0.0)), (3, c(0.5, 0.5))]).unwrap();
        let a = sample_strip_direct(&f, 0.5, 1.0, 50.0, 500, 7).unwrap();
        let b = sample_strip_direct(&f, 0.5, 1.0, 50.0, 500, 7).unwrap();
        assert_eq!(a, b);
        let e1 = sample_strip_via_equivalence(&f, 0.5, 1.0, 500, 7).unwrap();
        let e2 = sample_strip_via_equivalence(&f, 0.5, 1.0, 500, 7).unwrap();
        assert_eq!(e1, e2);
        assert_ne!(a, sample_strip_direct(&f, 0.5, 1.0, 50.0, 500, 8).unwrap());
    }

    #[test]
    fn single_term_circles() {
        let f = ordinary_series(&[(2, c(1.0, 0.0))]).unwrap();
        let line = sample_line(&f, 1.0, 100.0, 1000, 1).unwrap();
        assert!(line.points.iter().all(|p| (p.norm() - 0.5).abs() < 1e-14));
        let cls = sample_strip_via_equivalence(&f, 1.0, 2.0, 1000, 1).unwrap();
        for p in &cls.points {
            let sigma = -p.norm().log2();
            assert!(sigma > 1.0 - 1e-12 && sigma < 2.0 + 1e-12);
        }
    }

    #[test]
    fn bohr_class_phases_follow_subgroup() {
        // phases (y, 19y/9) with y uniform on [0, 18 pi)
        let f = bohr_example(2);
        let phases = random_class_phases(&f, 1000, 11).unwrap();
        let mut max_y: f64 = 0.0;
        for ph in &phases {
            let y = ph[0];
            max_y = max_y.max(y);
            assert!((ph[1] - 19.0 * y / 9.0).abs() < 1e-9);
        }
        assert!(max_y > 2.0 * PI && max_y < 18.0 * PI);
    }

    #[test]
    fn hausdorff_examples() {
        let a = [c(0.0, 0.0)];
        let b = [c(3.0, 0.0), c(0.0, 4.0)];
        assert_eq!(hausdorff_points(&a, &b).unwrap(), 4.0);
        assert_eq!(hausdorff_points(&b, &b).unwrap(), 0.0);
        assert_eq!(hausdorff_points(&[], &b), Err(Error::EmptyCloud));
    }

    #[test]
    fn bucket_search_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let n = rng.gen_range(1..300);
            let m = rng.gen_range(1..300);
            let spread = rng.gen_range(0.01..10.0);
            let a: Vec<Complex> = (0..n)
                .map(|_| c(rng.gen_range(-spread..spread), rng.gen_range(-1.0..1.0)))
                .collect();
            let b: Vec<Complex> = (0..m)
                .map(|_| c(rng.gen_range(-1.0..1.0) + 3.0, rng.gen_range(-spread..spread)))
                .collect();
            let brute = a
                .iter()
                .map(|p| b.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max);
            assert_eq!(directed_hausdorff(&a, &b).unwrap(), brute);
        }
    }

    #[test]
    fn kronecker_single() {
        let found = kronecker_find_t(&[LN_2], &[PI], 1e-9, 100.0).unwrap();
        let KroneckerResult::Found { t, residual } = found else {
            panic!("not found")
        };
        assert!((t - PI / LN_2).abs() < 1e-9, "{t}");
        assert!(residual < 1e-12);
    }

    #[test]
    fn kronecker_window_too_small() {
        let beta = [LN_2, 3f64.ln()];
        let r = kronecker_find_t(&beta, &[PI, 0.0], 1e-12, 1.0).unwrap();
        assert_eq!(r, KroneckerResult::NotFound);
    }

    #[test]
    fn kronecker_two_logs() {
        let beta = [LN_2, 3f64.ln()];
        let target = [PI, 0.0];
        let KroneckerResult::Found { t, residual } = kronecker_find_t(&beta, &target, 0.1, 1e5).unwrap() else {
            panic!("not found")
        };
        assert!(residual < 0.1);
        assert!((kronecker_residual(&beta, &target, t) - residual).abs() < 1e-15);
        // oracle: plain scan with step 1e-3 reaches the same tolerance no
        // earlier than the returned t minus one coarse step
        let first = (0..=((t + 1.0) / 1e-3) as u64)
            .map(|i| i as f64 * 1e-3)
            .find(|&s| kronecker_residual(&beta, &target, s) < 0.1)
            .expect("oracle finds a time");
        assert!(first <= t + 1e-3 && t - first < 0.25 / 3f64.ln() + 1e-3, "{first} vs {t}");
    }
}
