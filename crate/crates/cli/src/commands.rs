use std::ffi::OsString;
use std::path::Path;

use serde_json::{json, Value};

use bohr_core::basis::{compute_basis, make_integral_truncated, BohrMatrix};
use bohr_core::equivalence::{
    circle_distance, closure_demo, extract_phase_targets, is_equivalent_truncated, normalize_angle,
    solve_phase_system, twist, Equivalence, NotEquivalentReason, PhaseTargets, PhaseVector, Verdict,
    DEFAULT_TOL,
};
use bohr_core::eval::{evaluate, shift_series, uniform_distance, EvalPoint, GridBox};
use bohr_core::scenarios::{bohr_example, negate, tau};
use bohr_core::series::format_rational;
use bohr_core::valuesets::{
    kronecker_find_t, sample_line, sample_line_via_equivalence, sample_strip_direct,
    sample_strip_via_equivalence, KroneckerResult, ValueCloud,
};
use bohr_core::zeros::{sigma_sequence, sigma_star, winding, Rectangle, SigmaStar};
use bohr_core::{Complex, SeriesSpec};

use crate::error::{CliError, EXIT_NEGATIVE, EXIT_OK};
use crate::file::{emit_series, read_series};
use crate::report::{complex, inputs_digest, num, points_csv, write_output, Record};
use crate::{Command, Common, Format, Range, RouteArg};

const SIGMA_STAR_TOL: f64 = 1e-3;
const KRONECKER_TOL: f64 = 1e-2;

struct Ctx<'a> {
    name: &'static str,
    args: &'a [OsString],
    files: Vec<Vec<u8>>,
}

impl Ctx<'_> {
    fn load(&mut self, path: &Path) -> Result<SeriesSpec, CliError> {
        let (spec, bytes) = read_series(path)?;
        self.files.push(bytes);
        Ok(spec)
    }

    fn record(&self, result: Value, witnesses: Value, residuals: Value, seed: Option<u64>) -> Record {
        let files: Vec<&[u8]> = self.files.iter().map(Vec::as_slice).collect();
        Record {
            command: self.name.to_string(),
            inputs_digest: inputs_digest(self.args, &files),
            result,
            witnesses,
            residuals,
            seed,
        }
    }
}

fn matrix(r: &BohrMatrix) -> Value {
    r.to_dense()
        .iter()
        .map(|row| row.iter().map(format_rational).collect::<Vec<_>>())
        .collect()
}

fn finish(common: &Common, content: &str, code: u8) -> Result<u8, CliError> {
    write_output(common.out.as_deref(), content)?;
    Ok(code)
}

fn grid_box(grid: crate::Grid, r: &Range) -> Result<GridBox, CliError> {
    Ok(GridBox::new((r.sigma_min, r.sigma_max), (r.t_min, r.t_max), grid.0, grid.1)?)
}

fn sigma_star_value(s: SigmaStar) -> Value {
    match s {
        SigmaStar::Finite(x) => num(x),
        SigmaStar::MinusInfinity => json!("minusInfinity"),
    }
}

/// Largest `|arg(b(n)/a(n)) - (R Y)_n|` over terms with `a(n) != 0`.
fn coefficient_residual(a: &SeriesSpec, b: &SeriesSpec, r: &BohrMatrix, y: &PhaseVector) -> Result<f64, CliError> {
    let phases = y.image(r)?;
    Ok(a.coeffs()
        .iter()
        .zip(b.coeffs())
        .zip(phases)
        .filter(|((x, _), _)| x.norm() > 0.0)
        .map(|((x, z), p)| circle_distance((z / x).arg() - p))
        .fold(0.0, f64::max))
}

fn cloud_output(ctx: &Ctx, cloud: &ValueCloud, format: Format, seed: u64) -> String {
    match format {
        Format::Csv => points_csv(&cloud.points),
        Format::Json => ctx
            .record(
                json!({
                    "route": format!("{:?}", cloud.route),
                    "count": cloud.points.len(),
                    "sigmaRange": [num(cloud.meta.sigma_range.0), num(cloud.meta.sigma_range.1)],
                    "tMax": num(cloud.meta.t_max),
                    "maxModulus": num(cloud.max_modulus()),
                    "minModulus": num(cloud.min_modulus()),
                    "points": cloud.points.iter().map(|&p| complex(p)).collect::<Vec<_>>(),
                }),
                Value::Null,
                Value::Null,
                Some(seed),
            )
            .to_json(),
    }
}

pub fn execute(command: Command, args: &[OsString]) -> Result<u8, CliError> {
    let mut ctx = Ctx {
        name: "",
        args,
        files: Vec::new(),
    };
    match command {
        Command::Basis { series, h, common } => {
            ctx.name = "basis";
            let f = ctx.load(&series)?;
            let (basis, r, t) = compute_basis(&f.exponents())?;
            let lcms = (1..=r.nrows())
                .map(|k| r.denominator_lcm(k).map(|d| d.to_string()))
                .collect::<Result<Vec<_>, _>>()?;
            let mut result = json!({
                "basis": basis.elements.iter().zip(&basis.source_indices).map(|(e, &i)| json!({
                    "term": i + 1,
                    "exponent": e.to_string(),
                })).collect::<Vec<_>>(),
                "R": matrix(&r),
                "T": matrix(&t),
                "integral": r.is_integral(),
                "denominatorLcm": lcms,
            });
            if let Some(h) = h {
                let (scaled, ri) = make_integral_truncated(&basis, &r, h)?;
                result["integralTruncated"] = json!({
                    "h": h,
                    "scale": format_rational(&scaled.scale),
                    "basis": scaled.elements.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
                    "R": matrix(&ri),
                });
            }
            let rec = ctx.record(result, Value::Null, Value::Null, None);
            finish(&common, &rec.to_json(), EXIT_OK)
        }
        Command::Twist { series, y, common } => {
            let f = ctx.load(&series)?;
            let (basis, r, _) = compute_basis(&f.exponents())?;
            let g = twist(&f, &basis, &r, &PhaseVector(y.0))?;
            finish(&common, &emit_series(&g), EXIT_OK)
        }
        Command::SolvePhases {
            series,
            series2,
            theta,
            common,
        } => {
            ctx.name = "solve-phases";
            let tol = common.tol.unwrap_or(DEFAULT_TOL);
            let f = ctx.load(&series)?;
            let (_, r, _) = compute_basis(&f.exponents())?;
            let targets = match (series2, theta) {
                (Some(p), _) => {
                    let g = ctx.load(&p)?;
                    extract_phase_targets(&f, &g, tol)?
                }
                (None, Some(theta)) => {
                    if theta.0.len() != f.len() {
                        return Err(CliError::Usage(format!(
                            "--theta has {} entries, the series has {} terms",
                            theta.0.len(),
                            f.len()
                        )));
                    }
                    PhaseTargets {
                        entries: theta.0.iter().map(|&t| normalize_angle(t)).enumerate().collect(),
                        skipped: Vec::new(),
                    }
                }
                (None, None) => return Err(CliError::Usage("need --series2 or --theta".into())),
            };
            let system = solve_phase_system(&r, &targets, tol)?;
            let rows = targets.rows();
            let kernel: Vec<Vec<String>> = system
                .kernel
                .iter()
                .map(|m| m.iter().map(ToString::to_string).collect())
                .collect();
            let (result, witnesses, residuals, code) = match &system.verdict {
                Verdict::Feasible { y, residual } => (
                    json!({ "feasible": true, "y": y.0.iter().map(|&v| num(v)).collect::<Vec<_>>() }),
                    Value::Null,
                    json!({ "residual": num(*residual) }),
                    EXIT_OK,
                ),
                Verdict::Infeasible { witness, defect } => (
                    json!({ "feasible": false }),
                    json!(rows
                        .iter()
                        .zip(witness)
                        .filter(|(_, m)| !num_traits_is_zero(m))
                        .map(|(&n, m)| json!({ "term": n + 1, "multiplier": m.to_string() }))
                        .collect::<Vec<_>>()),
                    json!({ "defect": num(*defect) }),
                    EXIT_NEGATIVE,
                ),
            };
            let mut result = result;
            result["constrainedTerms"] = json!(rows.iter().map(|n| n + 1).collect::<Vec<_>>());
            result["kernel"] = json!(kernel);
            let rec = ctx.record(result, witnesses, residuals, None);
            finish(&common, &rec.to_json(), code)
        }
        Command::Equiv {
            series,
            series2,
            common,
        } => {
            ctx.name = "equiv";
            let tol = common.tol.unwrap_or(DEFAULT_TOL);
            let f = ctx.load(&series)?;
            let g = ctx.load(&series2)?;
            let (result, witnesses, residuals, code) = match is_equivalent_truncated(&f, &g, tol)? {
                Equivalence::Equivalent { basis, r, y } => {
                    let residual = coefficient_residual(&f, &g, &r, &y)?;
                    (
                        json!({
                            "equivalent": true,
                            "basis": basis.elements.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
                            "y": y.0.iter().map(|&v| num(v)).collect::<Vec<_>>(),
                        }),
                        Value::Null,
                        json!({ "residual": num(residual) }),
                        EXIT_OK,
                    )
                }
                Equivalence::NotEquivalent(reason) => {
                    let (w, res) = match reason {
                        NotEquivalentReason::ModulusMismatch(n) => {
                            (json!({ "kind": "modulusMismatch", "term": n }), Value::Null)
                        }
                        NotEquivalentReason::SupportMismatch(n) => {
                            (json!({ "kind": "supportMismatch", "term": n }), Value::Null)
                        }
                        NotEquivalentReason::Relation { witness, defect } => (
                            json!({
                                "kind": "relation",
                                "relation": witness
                                    .iter()
                                    .filter(|(_, m)| !num_traits_is_zero(m))
                                    .map(|(n, m)| json!({ "term": n + 1, "multiplier": m.to_string() }))
                                    .collect::<Vec<_>>(),
                            }),
                            json!({ "defect": num(defect) }),
                        ),
                    };
                    (json!({ "equivalent": false }), w, res, EXIT_NEGATIVE)
                }
            };
            let rec = ctx.record(result, witnesses, residuals, None);
            finish(&common, &rec.to_json(), code)
        }
        Command::ClosureDemo {
            series,
            series2,
            n,
            search_bound,
            common,
        } => {
            ctx.name = "closure-demo";
            let tol = common.tol.unwrap_or(DEFAULT_TOL);
            let f = ctx.load(&series)?;
            let g = match series2 {
                Some(p) => ctx.load(&p)?,
                None => negate(&f),
            };
            let steps = closure_demo(&f, &g, n.unwrap_or(f.len()), search_bound, tol)?;
            let result = json!(steps
                .iter()
                .map(|s| json!({
                    "n": s.n,
                    "feasible": s.feasible,
                    "minNorm": s.min_norm.map_or(Value::Null, num),
                    "minNormOverPi": s.min_norm.map_or(Value::Null, |m| num(m / std::f64::consts::PI)),
                }))
                .collect::<Vec<_>>());
            let rec = ctx.record(result, Value::Null, Value::Null, None);
            finish(&common, &rec.to_json(), EXIT_OK)
        }
        Command::Eval {
            series,
            sigma,
            t,
            grid,
            range,
            format,
            common,
        } => {
            ctx.name = "eval";
            let f = ctx.load(&series)?;
            let points = match (grid, sigma) {
                (Some(g), _) => grid_box(g, &range)?.points(),
                (None, Some(s)) => vec![EvalPoint::new(s, t)],
                (None, None) => return Err(CliError::Usage("eval needs --sigma or --grid".into())),
            };
            let values: Vec<(EvalPoint, Complex)> = points.iter().map(|&p| (p, evaluate(&f, p))).collect();
            let content = match format {
                Format::Csv => {
                    let mut s = String::from("sigma,t,re,im\n");
                    for (p, v) in &values {
                        s.push_str(&format!("{},{},{},{}\n", p.sigma, p.t, v.re, v.im));
                    }
                    s
                }
                Format::Json => ctx
                    .record(
                        json!(values
                            .iter()
                            .map(|(p, v)| json!({ "sigma": num(p.sigma), "t": num(p.t), "value": complex(*v) }))
                            .collect::<Vec<_>>()),
                        Value::Null,
                        Value::Null,
                        None,
                    )
                    .to_json(),
            };
            finish(&common, &content, EXIT_OK)
        }
        Command::Tail { series, sigma, common } => {
            ctx.name = "tail";
            let f = ctx.load(&series)?;
            let bound = f.tail_bound(sigma)?;
            let result = json!({
                "sigma": num(sigma),
                "tailBound": bound.map_or(Value::Null, num),
                "modulusBound": num(f.modulus_bound(sigma)),
            });
            let rec = ctx.record(result, Value::Null, Value::Null, None);
            finish(&common, &rec.to_json(), EXIT_OK)
        }
        Command::UniformDistance {
            series,
            series2,
            grid,
            range,
            common,
        } => {
            ctx.name = "uniform-distance";
            let f = ctx.load(&series)?;
            let g = ctx.load(&series2)?;
            let gb = grid_box(grid, &range)?;
            let d = uniform_distance(&f, &g, &gb);
            let result = json!({
                "distance": num(d),
                "sigmaRange": [num(range.sigma_min), num(range.sigma_max)],
                "tRange": [num(range.t_min), num(range.t_max)],
                "grid": [grid.0, grid.1],
            });
            let rec = ctx.record(result, Value::Null, Value::Null, None);
            finish(&common, &rec.to_json(), EXIT_OK)
        }
        Command::ValueSet {
            series,
            range,
            count,
            seed,
            route,
            format,
            common,
        } => {
            ctx.name = "value-set";
            let f = ctx.load(&series)?;
            let cloud = match route {
                RouteArg::Direct => {
                    sample_strip_direct(&f, range.sigma_min, range.sigma_max, range.t_max, count, seed)?
                }
                RouteArg::Equivalence => {
                    sample_strip_via_equivalence(&f, range.sigma_min, range.sigma_max, count, seed)?
                }
            };
            finish(&common, &cloud_output(&ctx, &cloud, format, seed), EXIT_OK)
        }
        Command::LineSet {
            series,
            sigma,
            t_max,
            count,
            seed,
            route,
            format,
            common,
        } => {
            ctx.name = "line-set";
            let f = ctx.load(&series)?;
            let cloud = match route {
                RouteArg::Direct => sample_line(&f, sigma, t_max, count, seed)?,
                RouteArg::Equivalence => sample_line_via_equivalence(&f, sigma, count, seed)?,
            };
            finish(&common, &cloud_output(&ctx, &cloud, format, seed), EXIT_OK)
        }
        Command::SigmaStar {
            series,
            v_re,
            v_im,
            t_min,
            t_max,
            sigma_floor,
            sequence,
            common,
        } => {
            ctx.name = "sigma-star";
            let tol = common.tol.unwrap_or(SIGMA_STAR_TOL);
            let f = ctx.load(&series)?;
            let window = (t_min, t_max);
            let result = match sequence {
                Some(m) => {
                    let seq = sigma_sequence(&f, m, window, sigma_floor, tol)?;
                    json!({
                        "tWindow": [num(t_min), num(t_max)],
                        "sequence": seq.into_iter().map(sigma_star_value).collect::<Vec<_>>(),
                    })
                }
                None => {
                    let v = Complex::new(v_re, v_im);
                    json!({
                        "v": complex(v),
                        "tWindow": [num(t_min), num(t_max)],
                        "sigmaStar": sigma_star_value(sigma_star(&f, v, window, sigma_floor, tol)?),
                    })
                }
            };
            let rec = ctx.record(result, Value::Null, json!({ "tol": num(tol) }), None);
            finish(&common, &rec.to_json(), EXIT_OK)
        }
        Command::Zeros {
            series,
            v_re,
            v_im,
            range,
            steps,
            common,
        } => {
            ctx.name = "zeros";
            let f = ctx.load(&series)?;
            let rect = Rectangle::new((range.sigma_min, range.sigma_max), (range.t_min, range.t_max))?;
            let w = winding(&f, Complex::new(v_re, v_im), &rect, steps)?;
            let result = json!({
                "count": w.zeros,
                "sigmaRange": [num(range.sigma_min), num(range.sigma_max)],
                "tRange": [num(range.t_min), num(range.t_max)],
            });
            let residuals = json!({ "turns": num(w.turns), "roundingDefect": num(w.rounding_defect) });
            let rec = ctx.record(result, Value::Null, residuals, None);
            finish(&common, &rec.to_json(), EXIT_OK)
        }
        Command::Kronecker {
            beta,
            series,
            target,
            t_max_search,
            common,
        } => {
            ctx.name = "kronecker";
            let tol = common.tol.unwrap_or(KRONECKER_TOL);
            let beta = match (beta, series) {
                (Some(b), _) => b.0,
                (None, Some(p)) => {
                    let f = ctx.load(&p)?;
                    let (basis, _, _) = compute_basis(&f.exponents())?;
                    basis
                        .elements
                        .iter()
                        .map(|e| e.numeric_value(f.symbols()))
                        .collect::<Result<_, _>>()?
                }
                (None, None) => return Err(CliError::Usage("need --beta or --series".into())),
            };
            let (result, residuals, code) = match kronecker_find_t(&beta, &target.0, tol, t_max_search)? {
                KroneckerResult::Found { t, residual } => (
                    json!({ "found": true, "t": num(t) }),
                    json!({ "residual": num(residual) }),
                    EXIT_OK,
                ),
                KroneckerResult::NotFound => (json!({ "found": false }), Value::Null, EXIT_NEGATIVE),
            };
            let mut result = result;
            result["beta"] = json!(beta.iter().map(|&b| num(b)).collect::<Vec<_>>());
            let rec = ctx.record(result, Value::Null, residuals, None);
            finish(&common, &rec.to_json(), code)
        }
        Command::BohrExample {
            n,
            negate: neg,
            shift_m,
            common,
        } => {
            if n == 0 {
                return Err(CliError::Usage("--n must be at least 1".into()));
            }
            let mut f = bohr_example(n);
            if let Some(m) = shift_m {
                if m == 0 {
                    return Err(CliError::Usage("--shift-m must be at least 1".into()));
                }
                f = shift_series(&f, tau(m).value);
            }
            if neg {
                f = negate(&f);
            }
            finish(&common, &emit_series(&f), EXIT_OK)
        }
    }
}

fn num_traits_is_zero(m: &num_bigint::BigInt) -> bool {
    m.sign() == num_bigint::Sign::NoSign
}
