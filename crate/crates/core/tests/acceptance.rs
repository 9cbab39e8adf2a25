//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bohr_core::basis::{compute_basis, BohrMatrix};
use bohr_core::equivalence::{
    circle_distance, closure_demo, is_equivalent_truncated, solve_phase_system, twist, Equivalence,
    PhaseTargets, PhaseVector, DEFAULT_SEARCH_BOUND,
};
use bohr_core::eval::{shift_phase_exact, shift_series, uniform_distance, GridBox};
use bohr_core::scenarios::{bohr_example, negate, ordinary_series, tau};
use bohr_core::series::{rational_to_f64, Complex, ExponentVector, Rational, SeriesSpec, SymbolTable, Term};
use bohr_core::valuesets::{hausdorff, sample_line, sample_line_via_equivalence, sample_strip_direct};
use bohr_core::zeros::{count_zeros, sigma_star, Rectangle, SigmaStar};
use bohr_core::Error;

type Outcome = (bool, String);

fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

fn one_plus_two() -> SeriesSpec {
    ordinary_series(&[(1, c(1.0, 0.0)), (2, c(1.0, 0.0))]).unwrap()
}

fn counterexample_convergence() -> Outcome {
    let f = bohr_example(10);
    let grid = GridBox::new((1.0, 1.5), (-1.0, 1.0), 20, 40).unwrap();
    let g = negate(&f);
    let d: Vec<f64> = (1..=3)
        .map(|m| uniform_distance(&shift_series(&f, tau(m).value), &g, &grid))
        .collect();
    let ok = d[0] > d[1] && d[1] > d[2] && d[1] <= 0.015 && d[2] <= 0.002;
    (ok, format!("D = {:.3e}, {:.3e}, {:.3e}", d[0], d[1], d[2]))
}

fn exact_phase_cancellation() -> Outcome {
    let mut bad = Vec::new();
    for m in 1..=6 {
        for n in 1..=m {
            if !shift_phase_exact(n, m).is_minus_one {
                bad.push((n, m));
            }
        }
    }
    (bad.is_empty(), format!("21 pairs, failures {bad:?}"))
}

const PRIMES: [u64; 4] = [2, 3, 5, 7];

/// Distinct nonnegative integer exponents over `ln p` symbols, sorted by
/// value, with an integral Bohr matrix.
fn random_integral_spec(rng: &mut ChaCha8Rng) -> SeriesSpec {
    loop {
        let k = rng.gen_range(1..=4);
        let n = rng.gen_range(1..=20);
        let names: Vec<String> = PRIMES[..k].iter().map(|p| format!("L{p}")).collect();
        let symbols = SymbolTable::from_pairs(PRIMES[..k].iter().map(|&p| (format!("L{p}"), (p as f64).ln()))).unwrap();
        let mut exps: Vec<ExponentVector> = Vec::new();
        let mut tries = 0;
        while exps.len() < n && tries < 200 {
            tries += 1;
            let e = ExponentVector::from_coords(
                names
                    .iter()
                    .map(|s| (s.clone(), Rational::from_integer(rng.gen_range(0..=3).into()))),
            );
            if !e.is_zero() && !exps.contains(&e) {
                exps.push(e);
            }
        }
        exps.sort_by(|a, b| {
            a.numeric_value(&symbols)
                .unwrap()
                .total_cmp(&b.numeric_value(&symbols).unwrap())
        });
        let terms = exps
            .into_iter()
            .map(|exponent| Term {
                exponent,
                coeff: Complex::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..TAU)),
            })
            .collect();
        let spec = SeriesSpec::new(symbols, terms, f64::NEG_INFINITY, None).unwrap();
        let (_, r, _) = compute_basis(&spec.exponents()).unwrap();
        if r.is_integral() {
            return spec;
        }
    }
}

fn equivalence_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut equivalent = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let f = random_integral_spec(&mut rng);
        let (basis, r, _) = compute_basis(&f.exponents()).unwrap();
        let y = PhaseVector((0..basis.len()).map(|_| rng.gen_range(0.0..TAU)).collect());
        let g = twist(&f, &basis, &r, &y).unwrap();
        if let Ok(Equivalence::Equivalent { r, y, .. }) = is_equivalent_truncated(&f, &g, 1e-9) {
            equivalent += 1;
            let phases = y.image(&r).unwrap();
            for ((a, b), p) in f.coeffs().iter().zip(g.coeffs()).zip(phases) {
                worst = worst.max(circle_distance((b / a).arg() - p));
            }
        } else {
            worst = f64::INFINITY;
        }
    }
    (
        equivalent == 100 && worst < 1e-9,
        format!("{equivalent}/100 equivalent, max phase residual {worst:.2e}"),
    )
}

struct RandomSystem {
    rows: Vec<Vec<Rational>>,
    theta: Vec<f64>,
}

fn row_lcm(row: &[Rational]) -> BigInt {
    row.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

/// Pivot rows `e_j` plus random rows `p/q` with one denominator `q <= 6`
/// per row and entries bounded by 2, shuffled. Feasible targets are `R Y0`;
/// infeasible ones add `pi / L` to a non-pivot row with entry lcm `L`, so
/// that the relation `L row - sum (L r_j) e_j` has defect `pi` and the best
/// achievable max residual is at least `pi / 42`.
fn random_system(rng: &mut ChaCha8Rng, feasible: bool) -> RandomSystem {
    let k = rng.gen_range(1..=3);
    let n = rng.gen_range(k + 1..=5);
    let mut rows: Vec<(Vec<Rational>, bool)> = (0..k)
        .map(|j| {
            let mut row = vec![Rational::zero(); k];
            row[j] = Rational::one();
            (row, true)
        })
        .collect();
    for _ in k..n {
        let q: i64 = rng.gen_range(1..=6);
        let row = (0..k)
            .map(|_| Rational::new(rng.gen_range(-2 * q..=2 * q).into(), q.into()))
            .collect();
        rows.push((row, false));
    }
    rows.shuffle(rng);
    let y0: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..TAU)).collect();
    let mut theta: Vec<f64> = rows
        .iter()
        .map(|(row, _)| {
            let v: f64 = row.iter().zip(&y0).map(|(q, y)| rational_to_f64(q) * y).sum();
            v.rem_euclid(TAU)
        })
        .collect();
    if !feasible {
        let free: Vec<usize> = (0..n).filter(|&i| !rows[i].1).collect();
        let i = *free.choose(rng).expect("at least one non-pivot row");
        let l = rational_to_f64(&Rational::from_integer(row_lcm(&rows[i].0)));
        theta[i] = (theta[i] + PI / l).rem_euclid(TAU);
    }
    RandomSystem {
        rows: rows.into_iter().map(|(r, _)| r).collect(),
        theta,
    }
}

/// Exhaustive search of the grid with step `2 pi / 720` over one period box
/// per coordinate for a point whose residual is at most `threshold` on every
/// row. Coordinates are fixed left to right; a row is checked as soon as its
/// support is assigned, and its window restricts the candidates for the
/// coordinate that completes it.
fn grid_oracle(sys: &RandomSystem, threshold: f64) -> bool {
    let k = sys.rows[0].len();
    let step = TAU / 720.0;
    let rf: Vec<Vec<f64>> = sys.rows.iter().map(|r| r.iter().map(rational_to_f64).collect()).collect();
    let periods: Vec<usize> = (0..k)
        .map(|j| {
            let d = sys.rows.iter().fold(BigInt::one(), |acc, r| acc.lcm(r[j].denom()));
            720 * usize::try_from(d).unwrap()
        })
        .collect();
    let last: Vec<Option<usize>> = rf.iter().map(|r| r.iter().rposition(|&x| x != 0.0)).collect();
    let residual = |i: usize, y: &[f64]| {
        let v: f64 = rf[i].iter().zip(y).map(|(a, b)| a * b).sum();
        circle_distance(v - sys.theta[i])
    };
    for i in 0..rf.len() {
        if last[i].is_none() && residual(i, &[]) > threshold {
            return false;
        }
    }

    fn dfs(
        j: usize,
        y: &mut Vec<f64>,
        k: usize,
        step: f64,
        periods: &[usize],
        rf: &[Vec<f64>],
        last: &[Option<usize>],
        theta: &[f64],
        threshold: f64,
        residual: &dyn Fn(usize, &[f64]) -> f64,
    ) -> bool {
        if j == k {
            return true;
        }
        let closing: Vec<usize> = (0..rf.len()).filter(|&i| last[i] == Some(j)).collect();
        let count = periods[j];
        let mut candidates: Vec<usize> = Vec::new();
        if let Some(&i) = closing.first() {
            let cj = rf[i][j];
            let s: f64 = rf[i][..j].iter().zip(y.iter()).map(|(a, b)| a * b).sum();
            let span = cj * count as f64 * step;
            let (lo, hi) = (span.min(0.0) - threshold, span.max(0.0) + threshold);
            let base = theta[i] - s;
            let l0 = ((lo - base) / TAU).floor() as i64 - 1;
            let l1 = ((hi - base) / TAU).ceil() as i64 + 1;
            for l in l0..=l1 {
                let centre = (base + TAU * l as f64) / cj;
                let half = threshold / cj.abs();
                let a = ((centre - half) / step).floor().max(0.0) as i64;
                let b = (((centre + half) / step).ceil() as i64).min(count as i64 - 1);
                candidates.extend((a..=b).filter(|&x| x >= 0).map(|x| x as usize));
            }
            candidates.sort_unstable();
            candidates.dedup();
        } else {
            candidates.extend(0..count);
        }
        for idx in candidates {
            y.push(idx as f64 * step);
            if closing.iter().all(|&i| residual(i, y) <= threshold)
                && dfs(j + 1, y, k, step, periods, rf, last, theta, threshold, residual)
            {
                return true;
            }
            y.pop();
        }
        false
    }

    dfs(0, &mut Vec::new(), k, step, &periods, &rf, &last, &sys.theta, threshold, &residual)
}

fn solver_vs_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut agree = 0;
    let mut feasible = 0;
    let mut notes = Vec::new();
    for s in 0..50 {
        let sys = random_system(&mut rng, s % 2 == 0);
        let r = BohrMatrix::from_dense(&sys.rows).unwrap();
        let targets = PhaseTargets {
            entries: sys.theta.iter().copied().enumerate().collect(),
            skipped: Vec::new(),
        };
        let solver = solve_phase_system(&r, &targets, 1e-9).map(|cs| cs.verdict.is_feasible());
        let oracle = grid_oracle(&sys, 0.05);
        match solver {
            Ok(v) if v == oracle => {
                agree += 1;
                feasible += usize::from(v);
            }
            other => notes.push(format!("system {s}: solver {other:?}, oracle {oracle}")),
        }
    }
    (
        agree == 50,
        format!("{agree}/50 agree ({feasible} feasible) {}", notes.join("; ")),
    )
}

fn closure_signature() -> Outcome {
    let f = bohr_example(3);
    let steps = closure_demo(&f, &negate(&f), 3, DEFAULT_SEARCH_BOUND, 1e-9).unwrap();
    let expect = [PI, 9.0 * PI, 45.0 * PI];
    let ok = steps.len() == 3
        && steps.iter().zip(expect).all(|(s, e)| {
            s.feasible && s.min_norm.is_some_and(|m| (m - e).abs() <= 1e-9 * e)
        });
    let norms: Vec<String> = steps
        .iter()
        .map(|s| match s.min_norm {
            Some(m) => format!("{:.6}pi", m / PI),
            None => "none".into(),
        })
        .collect();
    (ok, format!("min norms {}", norms.join(", ")))
}

fn dual_route_value_sets() -> Outcome {
    let f = ordinary_series(&[(2, c(1.0, 0.0)), (3, c(1.0, 0.0))]).unwrap();
    let a = sample_line(&f, 1.0, 1e4, 100_000, 61).unwrap();
    let b = sample_line_via_equivalence(&f, 1.0, 100_000, 62).unwrap();
    let h = hausdorff(&a, &b).unwrap();
    let (lo, hi) = (1.0 / 6.0 - 0.01, 5.0 / 6.0 + 0.01);
    let inside = [&a, &b]
        .iter()
        .all(|cl| cl.min_modulus() >= lo && cl.max_modulus() <= hi);
    (
        h <= 0.02 && inside,
        format!(
            "hausdorff {h:.4}, moduli A [{:.4}, {:.4}] B [{:.4}, {:.4}]",
            a.min_modulus(),
            a.max_modulus(),
            b.min_modulus(),
            b.max_modulus()
        ),
    )
}

fn strip_statistical_check() -> Outcome {
    let one = c(1.0, 0.0);
    let f = ordinary_series(&[(2, one), (3, one), (6, one)]).unwrap();
    let (basis, r, _) = compute_basis(&f.exponents()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let y = PhaseVector((0..basis.len()).map(|_| rng.gen_range(0.0..TAU)).collect());
    let g = twist(&f, &basis, &r, &y).unwrap();
    let a = sample_strip_direct(&f, 0.5, 1.0, 200.0, 50_000, 71).unwrap();
    let b = sample_strip_direct(&g, 0.5, 1.0, 200.0, 50_000, 72).unwrap();
    let h = hausdorff(&a, &b).unwrap();
    (h <= 0.05, format!("hausdorff {h:.4}"))
}

fn sigma_star_closed_forms() -> Outcome {
    let f = one_plus_two();
    let window = (0.0, 20.0);
    let s0 = sigma_star(&f, c(0.0, 0.0), window, -5.0, 1e-3);
    let s3 = sigma_star(&f, c(3.0, 0.0), window, -5.0, 1e-3);
    let s1 = sigma_star(&f, c(1.0, 0.0), window, -5.0, 1e-3);
    let near = |s: &Result<SigmaStar, Error>, x: f64| matches!(s, Ok(SigmaStar::Finite(v)) if (v - x).abs() <= 1e-3);
    let ok = near(&s0, 0.0) && near(&s3, -1.0) && s1 == Ok(SigmaStar::MinusInfinity);
    (ok, format!("v=0: {s0:?}, v=3: {s3:?}, v=1: {s1:?}"))
}

fn zero_counts_and_additivity() -> Outcome {
    let f = one_plus_two();
    let zero = c(0.0, 0.0);
    let count = |s: (f64, f64), t: (f64, f64)| count_zeros(&f, zero, &Rectangle::new(s, t).unwrap(), 64);
    let n1 = count((-1.0, 1.0), (0.0, 10.0));
    let n2 = count((-1.0, 1.0), (6.0, 12.0));
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut checked = 0;
    let mut failures = Vec::new();
    while checked < 20 {
        let s = (rng.gen_range(-2.0..-0.5), rng.gen_range(0.5..2.0));
        let t = (rng.gen_range(-10.0..5.0), rng.gen_range(10.0..25.0));
        let Ok(whole) = count(s, t) else { continue };
        let mut sc = vec![s.0, s.1];
        let mut tc = vec![t.0, t.1];
        for _ in 0..rng.gen_range(0..=2) {
            sc.push(rng.gen_range(s.0..s.1));
        }
        for _ in 0..rng.gen_range(1..=3) {
            tc.push(rng.gen_range(t.0..t.1));
        }
        sc.sort_by(f64::total_cmp);
        tc.sort_by(f64::total_cmp);
        let mut parts = 0;
        let mut admissible = true;
        for sw in sc.windows(2) {
            for tw in tc.windows(2) {
                match count((sw[0], sw[1]), (tw[0], tw[1])) {
                    Ok(n) => parts += n,
                    Err(Error::BoundaryTooClose { .. } | Error::NonconvergentSubdivision) => admissible = false,
                    Err(e) => panic!("{e}"),
                }
            }
        }
        if !admissible {
            continue;
        }
        checked += 1;
        if parts != whole {
            failures.push(format!("{s:?}x{t:?}: {whole} vs {parts}"));
        }
    }
    (
        n1 == Ok(1) && n2 == Ok(0) && failures.is_empty(),
        format!("counts {n1:?}, {n2:?}; 20 partitions, failures {failures:?}"),
    )
}

fn exact_reconstruction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut good = 0;
    for _ in 0..200 {
        let k = rng.gen_range(1..=4);
        let n = rng.gen_range(1..=12);
        let exps: Vec<ExponentVector> = (0..n)
            .map(|_| {
                ExponentVector::from_coords((0..k).map(|j| {
                    let q: i64 = rng.gen_range(1..=7);
                    (format!("S{j}"), Rational::new(rng.gen_range(-9..=9).into(), q.into()))
                }))
            })
            .collect();
        let (basis, r, t) = compute_basis(&exps).unwrap();
        if r.apply(&basis.elements).unwrap() == exps && t.apply(&exps).unwrap() == basis.elements {
            good += 1;
        }
    }
    let (_, r, _) = compute_basis(&bohr_example(3).exponents()).unwrap();
    let d: Vec<BigInt> = (1..=3).map(|h| r.denominator_lcm(h).unwrap()).collect();
    let expect: Vec<BigInt> = [1, 9, 45].into_iter().map(BigInt::from).collect();
    assert!(d.iter().all(|x| x.is_positive()));
    (
        good == 200 && d == expect,
        format!("{good}/200 exact, d = {d:?}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, f64, fn() -> Outcome); 10] = [
        ("counterexample convergence", 1.0, counterexample_convergence),
        ("exact phase cancellation", 0.1, exact_phase_cancellation),
        ("equivalence round-trip", 5.0, equivalence_round_trip),
        ("solver vs grid oracle", 60.0, solver_vs_oracle),
        ("closure without equivalence", 1.0, closure_signature),
        ("dual-route value sets", 60.0, dual_route_value_sets),
        ("strip value sets of equivalent series", 60.0, strip_statistical_check),
        ("sigma* closed forms", 10.0, sigma_star_closed_forms),
        ("zero counts and additivity", 10.0, zero_counts_and_additivity),
        ("exact basis reconstruction", 5.0, exact_reconstruction),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs_f64(*budget);
        let pass = ok && in_time;
        failed += usize::from(!pass);
        println!(
            "{} {:>2} {name}: {detail} [{:.3}s of {budget}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
