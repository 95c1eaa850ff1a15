//! Subcommand handlers.
//!
//! Every analysis command prints one report document and returns the exit
//! code: 0 on success, 2 when a verification hook fails, 3 when the
//! destabilization budget runs out. Input problems are returned as `Err`
//! and become exit 1 in `main`. Reports identify the input only by the
//! canonical digest, never by path, so a gallery reference and its emitted
//! expansion produce identical bytes.

use crate::repfile::{canonical_form, load, LoadedRep};
use crate::report::{
    assemble, jf, jint, jints, jopt, jrows, jstr, jvec, jvec_opt, obj, render, write_csv, Hook,
};
use gradmap::convexgeom::{FaceDescriptor, GeneratedCone, GeneratedPolytope};
use gradmap::flows::{invert_moment, norm_square_flow, orbit_min_norm, FlowError, FlowOpts};
use gradmap::linalg::Mat;
use gradmap::repmodel::{gallery, KnVariant, ProjPoint, Representation, SUPPORT_TOL};
use gradmap::stability::{
    classify_point_linear, classify_point_projective, destabilize_reductive, face_orbit_table,
    face_orbit_table_projective, hm_witness, khull_sample, maximal_weight,
    null_cone_decomposition, Arithmetic, DestabilizeRoute, FaceOrbitRow, LinearClass,
    MaxWeightDirection, PointAnalysis, ProjectiveClass, StabilityClass, WitnessTarget,
};
use serde_json::Value;
use std::path::Path;

/// Slack for `<= -1` separation certificates and exact-zero pairings.
const SEP_SLACK: f64 = 1e-9;
/// Norm bound for recomputed zero combinations and residuals.
const CERT_TOL: f64 = 1e-8;
const LIMIT_ERROR_MAX: f64 = 1e-6;
const MONOTONE_SLACK: f64 = 1e-12;
const LIFT_ERROR_MAX: f64 = 1e-6;
const DISCREPANCY_MAX: f64 = 1e-4;
const PROJECTION_MAX: f64 = 1e-8;
const LAMBDA_MAX: f64 = -1e-8;

fn err<E: std::fmt::Display + std::fmt::Debug>(e: E) -> String {
    format!("{e} [{e:?}]")
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn parse_point(s: &str, expected: usize, what: &str) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad {what} coordinate {t:?}")))
        .collect::<Result<_, _>>()?;
    if v.len() != expected {
        return Err(format!("{what} needs {expected} coordinates, got {}", v.len()));
    }
    Ok(v)
}

/// Effective arithmetic label: the input's declaration unless the
/// GRADMAP_ARITHMETIC environment variable overrides it.
fn effective_arithmetic(lr: &LoadedRep) -> Result<(Arithmetic, &'static str), String> {
    let declared = if lr.declared_exact {
        (Arithmetic::Exact, "exact")
    } else {
        (Arithmetic::Float, "float")
    };
    match std::env::var("GRADMAP_ARITHMETIC") {
        Err(_) => Ok(declared),
        Ok(v) if v == "float" => Ok((Arithmetic::Float, "float")),
        Ok(v) if v == "exact" => Ok((Arithmetic::Exact, "exact")),
        Ok(other) => Err(format!("GRADMAP_ARITHMETIC must be float or exact, got {other:?}")),
    }
}

fn finish(doc: &Value, all_pass: bool) -> i32 {
    print!("{}", render(doc));
    if all_pass {
        0
    } else {
        2
    }
}

// ── diag ─────────────────────────────────────────────────────────────────

pub fn diag(rep_arg: &str) -> Result<i32, String> {
    let lr = load(rep_arg)?;
    let rep = &lr.rep;
    let (_, arith) = effective_arithmetic(&lr)?;
    let n = rep.dim();
    let m = rep.abelian_dim();

    let mut recon_err = 0.0f64;
    for a in 0..m {
        let mut rec = Mat::zeros(n, n);
        for i in 0..n {
            let vi = rep.basis().col(i);
            let w = rep.weights()[i][a];
            for r in 0..n {
                for c in 0..n {
                    rec[(r, c)] += w * vi[r] * vi[c];
                }
            }
        }
        recon_err = recon_err.max(rec.sub(rep.abelian_basis()[a].mat()).max_abs());
    }
    let ortho_err = rep
        .basis()
        .transpose()
        .matmul(rep.basis())
        .sub(&Mat::identity(n))
        .max_abs();

    let k_kind = match rep.k_action() {
        None => Value::Null,
        Some(gallery::KAction::PlaneRotation) => jstr("plane_rotation"),
        Some(gallery::KAction::BinaryRotation { degree }) => {
            jstr(&format!("binary_rotation({degree})"))
        }
    };
    let basis_rows: Vec<Vec<f64>> = (0..n).map(|i| rep.basis().row(i).to_vec()).collect();
    let results = obj(vec![
        ("dimension", jint(n)),
        ("abelian_dim", jint(m)),
        ("extra_p_generators", jint(rep.p_basis().map_or(0, |p| p.len() - m))),
        ("k_action", k_kind),
        ("exact_certified", Value::Bool(rep.exact_weights().is_some())),
        ("weights", jrows(rep.weights())),
        ("basis", jrows(&basis_rows)),
    ]);
    let hooks = vec![
        Hook::new(
            "generators_reconstructed",
            recon_err <= CERT_TOL,
            obj(vec![("max_entry_error", jf(recon_err))]),
        ),
        Hook::new(
            "basis_orthonormal",
            ortho_err <= 1e-10,
            obj(vec![("max_gram_error", jf(ortho_err))]),
        ),
    ];
    let (doc, ok) = assemble(
        obj(vec![("name", jstr("diag"))]),
        Some(&lr.digest),
        Some(arith),
        obj(vec![("reconstruction_max", jf(CERT_TOL)), ("orthonormality_max", jf(1e-10))]),
        results,
        hooks,
    );
    Ok(finish(&doc, ok))
}

// ── analyze ──────────────────────────────────────────────────────────────

fn orbit_row_value(r: &FaceOrbitRow) -> Value {
    obj(vec![
        ("indices", jints(&r.face.indices)),
        ("dim", jint(r.face.dim)),
        ("witness", jvec(&r.face.witness)),
        ("limit", jvec(&r.limit)),
        ("moment", jvec(&r.moment)),
        ("relint_ok", Value::Bool(r.relint_ok)),
    ])
}

pub fn analyze(rep_arg: &str, point: &str) -> Result<i32, String> {
    let lr = load(rep_arg)?;
    let rep = &lr.rep;
    let (_, arith) = effective_arithmetic(&lr)?;
    let x = parse_point(point, rep.dim(), "point")?;
    let supp = rep.support_of(&x, SUPPORT_TOL).map_err(err)?;
    let rows: Vec<Vec<f64>> =
        supp.indices.iter().map(|&i| rep.weights()[i].clone()).collect();

    let cone_table = face_orbit_table(rep, &x).map_err(err)?;
    let cone_value = if supp.is_empty() {
        Value::Null
    } else {
        let cone = GeneratedCone::new(rows.clone()).map_err(err)?;
        obj(vec![
            ("generators", jrows(&rows)),
            ("zero_in_relint", Value::Bool(cone.zero_in_relint())),
            ("faces", Value::Array(cone_table.iter().map(orbit_row_value).collect())),
        ])
    };

    let (poly_value, poly_table) = if supp.is_empty() {
        (Value::Null, None)
    } else {
        let p = ProjPoint::new(x.clone()).map_err(err)?;
        let table = face_orbit_table_projective(rep, &p).map_err(err)?;
        let poly = GeneratedPolytope::new(rows.clone()).map_err(err)?;
        let mn = poly.min_norm_point();
        let value = obj(vec![
            ("generators", jrows(&rows)),
            (
                "min_norm",
                obj(vec![("point", jvec(&mn.point)), ("norm", jf(mn.norm()))]),
            ),
            ("faces", Value::Array(table.iter().map(orbit_row_value).collect())),
        ]);
        (value, Some(table))
    };

    let results = obj(vec![
        (
            "support",
            obj(vec![
                ("indices", jints(&supp.indices)),
                ("coords", jvec(&supp.coords)),
                ("smallest_kept", jf(supp.smallest_kept)),
                ("largest_dropped", jf(supp.largest_dropped)),
            ]),
        ),
        ("cone", cone_value),
        ("polytope", poly_value),
    ]);

    let cone_bad = cone_table.iter().filter(|r| !r.relint_ok).count();
    let poly_bad = poly_table.as_ref().map(|t| t.iter().filter(|r| !r.relint_ok).count());
    let hooks = vec![
        Hook::new(
            "cone_face_moments_in_relint",
            cone_bad == 0,
            obj(vec![("faces", jint(cone_table.len())), ("failures", jint(cone_bad))]),
        ),
        Hook::new(
            "polytope_face_moments_in_relint",
            poly_bad.unwrap_or(0) == 0,
            match poly_table {
                Some(ref t) => obj(vec![
                    ("faces", jint(t.len())),
                    ("failures", jint(poly_bad.unwrap())),
                ]),
                None => obj(vec![("note", jstr("zero vector, no projective side"))]),
            },
        ),
    ];
    let (doc, ok) = assemble(
        obj(vec![("name", jstr("analyze")), ("point", jvec(&x))]),
        Some(&lr.digest),
        Some(arith),
        obj(vec![("support_tol", jf(SUPPORT_TOL))]),
        results,
        hooks,
    );
    Ok(finish(&doc, ok))
}

// ── classify ─────────────────────────────────────────────────────────────

fn face_value(f: &FaceDescriptor<f64>) -> Value {
    obj(vec![
        ("indices", jints(&f.indices)),
        ("dim", jint(f.dim)),
        ("witness", jvec(&f.witness)),
    ])
}

fn analysis_value(x: &[f64], a: &PointAnalysis) -> Value {
    obj(vec![
        ("point", jvec(x)),
        ("class", jstr(a.class.as_str())),
        ("support_indices", jints(&a.support.indices)),
        ("stabilizer_dim", a.stabilizer_dim.map_or(Value::Null, jint)),
        ("zero_coefficients", jvec_opt(&a.zero_coefficients)),
        ("zero_slack", jopt(a.zero_slack)),
        ("destabilizing_xi", jvec_opt(&a.destabilizing_xi)),
        ("lambda", jopt(a.lambda)),
        ("zero_face", a.zero_face.as_ref().map_or(Value::Null, face_value)),
        ("balancing_xi", jvec_opt(&a.balancing_xi)),
        ("balancing_residual", jopt(a.balancing_residual)),
    ])
}

/// Recomputes each certificate from the weight table and the raw point.
fn verify_analysis(rep: &Representation, a: &PointAnalysis) -> (bool, Value) {
    let rows: Vec<&[f64]> =
        a.support.indices.iter().map(|&i| rep.weights()[i].as_slice()).collect();
    let combo = |c: &[f64]| -> f64 {
        let m = rep.abelian_dim();
        let mut s = vec![0.0; m];
        for (ck, row) in c.iter().zip(&rows) {
            for (si, ri) in s.iter_mut().zip(*row) {
                *si += ck * ri;
            }
        }
        norm(&s)
    };
    match a.class {
        StabilityClass::Linear(LinearClass::ClosedOrbit) => {
            if rows.is_empty() {
                return (true, obj(vec![("note", jstr("zero vector, orbit already closed"))]));
            }
            match &a.zero_coefficients {
                Some(c) if c.len() == rows.len() => {
                    let e = combo(c);
                    let min_c = c.iter().cloned().fold(f64::INFINITY, f64::min);
                    (
                        e <= CERT_TOL && min_c > 0.0,
                        obj(vec![("combination_norm", jf(e)), ("min_coefficient", jf(min_c))]),
                    )
                }
                _ => (false, obj(vec![("note", jstr("missing relint combination"))])),
            }
        }
        StabilityClass::Linear(LinearClass::NullCone) => match &a.destabilizing_xi {
            Some(xi) => {
                let worst =
                    rows.iter().map(|r| dot(r, xi)).fold(f64::NEG_INFINITY, f64::max);
                (worst <= -1.0 + SEP_SLACK, obj(vec![("worst_pairing", jf(worst))]))
            }
            None => (false, obj(vec![("note", jstr("missing separating functional"))])),
        },
        StabilityClass::Linear(LinearClass::NonclosedNonnull) => match &a.zero_face {
            Some(f) => {
                let mut on_face_max = 0.0f64;
                let mut off_face_max = f64::NEG_INFINITY;
                for &i in &a.support.indices {
                    let v = dot(&rep.weights()[i], &f.witness);
                    if f.indices.contains(&i) {
                        on_face_max = on_face_max.max(v.abs());
                    } else {
                        off_face_max = off_face_max.max(v);
                    }
                }
                let pass = on_face_max <= SEP_SLACK
                    && (off_face_max == f64::NEG_INFINITY || off_face_max <= -1.0 + SEP_SLACK);
                (
                    pass,
                    obj(vec![
                        ("face_pairing_max", jf(on_face_max)),
                        (
                            "off_face_pairing_max",
                            if off_face_max == f64::NEG_INFINITY {
                                Value::Null
                            } else {
                                jf(off_face_max)
                            },
                        ),
                    ]),
                )
            }
            None => (false, obj(vec![("note", jstr("missing lineality face"))])),
        },
        StabilityClass::Projective(ProjectiveClass::Stable)
        | StabilityClass::Projective(ProjectiveClass::PolystableNotStable) => {
            let residual = a.balancing_residual.unwrap_or(f64::INFINITY);
            let rank_ok = match a.class {
                StabilityClass::Projective(ProjectiveClass::Stable) => {
                    a.stabilizer_dim == Some(0)
                }
                _ => a.stabilizer_dim.map_or(false, |d| d > 0),
            };
            let comb_ok = match &a.zero_coefficients {
                Some(c) if c.len() == rows.len() => {
                    let sum: f64 = c.iter().sum();
                    combo(c) <= CERT_TOL
                        && (sum - 1.0).abs() <= SEP_SLACK
                        && c.iter().all(|&v| v > 0.0)
                }
                _ => false,
            };
            (
                residual <= CERT_TOL && rank_ok && comb_ok,
                obj(vec![
                    ("balancing_residual", jf(residual.min(f64::MAX))),
                    ("relint_combination_ok", Value::Bool(comb_ok)),
                    ("rank_consistent", Value::Bool(rank_ok)),
                ]),
            )
        }
        StabilityClass::Projective(ProjectiveClass::SemistableNotPolystable) => {
            match &a.zero_coefficients {
                Some(c) if c.len() == rows.len() => {
                    let sum: f64 = c.iter().sum();
                    let e = combo(c);
                    (
                        e <= CERT_TOL && (sum - 1.0).abs() <= SEP_SLACK,
                        obj(vec![("combination_norm", jf(e)), ("coefficient_sum", jf(sum))]),
                    )
                }
                _ => (
                    true,
                    obj(vec![(
                        "note",
                        jstr("boundary fallback verdict, no combination produced"),
                    )]),
                ),
            }
        }
        StabilityClass::Projective(ProjectiveClass::Unstable) => match &a.destabilizing_xi {
            Some(xi) => {
                let worst =
                    rows.iter().map(|r| dot(r, xi)).fold(f64::NEG_INFINITY, f64::max);
                let unit_err = (norm(xi) - 1.0).abs();
                let lambda_err = a.lambda.map_or(f64::INFINITY, |l| (l - worst).abs());
                (
                    worst < 0.0 && unit_err <= SEP_SLACK && lambda_err <= SEP_SLACK,
                    obj(vec![
                        ("maximal_pairing", jf(worst)),
                        ("unit_norm_error", jf(unit_err)),
                    ]),
                )
            }
            None => (false, obj(vec![("note", jstr("missing destabilizing direction"))])),
        },
    }
}

pub fn classify(
    rep_arg: &str,
    point: Option<&str>,
    points_file: Option<&Path>,
    projective: bool,
) -> Result<i32, String> {
    let lr = load(rep_arg)?;
    let rep = &lr.rep;
    let (arith, arith_str) = effective_arithmetic(&lr)?;
    let specs: Vec<String> = match (point, points_file) {
        (Some(p), None) => vec![p.to_string()],
        (None, Some(path)) => std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect(),
        _ => return Err("exactly one of --point and --points-file is required".to_string()),
    };
    if specs.is_empty() {
        return Err("no points to classify".to_string());
    }

    let mut entries = Vec::with_capacity(specs.len());
    let mut failures = Vec::new();
    let mut details = Vec::new();
    for (k, spec) in specs.iter().enumerate() {
        let x = parse_point(spec, rep.dim(), "point")?;
        let analysis = if projective {
            let p = ProjPoint::new(x.clone()).map_err(err)?;
            classify_point_projective(rep, &p, arith).map_err(err)?
        } else {
            classify_point_linear(rep, &x, arith).map_err(err)?
        };
        let (pass, detail) = verify_analysis(rep, &analysis);
        if !pass {
            failures.push(k);
        }
        details.push(detail);
        entries.push(analysis_value(&x, &analysis));
    }

    let results = obj(vec![("points", Value::Array(entries))]);
    let hooks = vec![Hook::new(
        "certificates_verified",
        failures.is_empty(),
        obj(vec![
            ("points", jint(specs.len())),
            ("failing_indices", jints(&failures)),
            ("checks", Value::Array(details)),
        ]),
    )];
    let (doc, ok) = assemble(
        obj(vec![
            ("name", jstr("classify")),
            ("projective", Value::Bool(projective)),
        ]),
        Some(&lr.digest),
        Some(arith_str),
        obj(vec![
            ("support_tol", jf(SUPPORT_TOL)),
            ("certificate_tol", jf(CERT_TOL)),
            ("separation_slack", jf(SEP_SLACK)),
        ]),
        results,
        hooks,
    );
    Ok(finish(&doc, ok))
}

// ── nullcone ─────────────────────────────────────────────────────────────

pub fn nullcone(rep_arg: &str) -> Result<i32, String> {
    let lr = load(rep_arg)?;
    let rep = &lr.rep;
    let (_, arith) = effective_arithmetic(&lr)?;
    let decomp = null_cone_decomposition(rep).map_err(err)?;

    let mut worst = f64::NEG_INFINITY;
    let comps: Vec<Value> = decomp
        .components
        .iter()
        .map(|c| {
            for &i in &c.indices {
                worst = worst.max(dot(&rep.weights()[i], &c.xi));
            }
            obj(vec![
                ("indices", jints(&c.indices)),
                ("xi", jvec(&c.xi)),
                ("basis", jrows(&c.basis)),
            ])
        })
        .collect();
    let results = obj(vec![
        ("component_count", jint(decomp.components.len())),
        ("components", Value::Array(comps)),
    ]);
    let pass = decomp.components.is_empty() || worst <= -1.0 + SEP_SLACK;
    let hooks = vec![Hook::new(
        "separation_certified",
        pass,
        obj(vec![(
            "worst_pairing",
            if worst == f64::NEG_INFINITY { Value::Null } else { jf(worst) },
        )]),
    )];
    let (doc, ok) = assemble(
        obj(vec![("name", jstr("nullcone"))]),
        Some(&lr.digest),
        Some(arith),
        obj(vec![("separation_slack", jf(SEP_SLACK))]),
        results,
        hooks,
    );
    Ok(finish(&doc, ok))
}

// ── witness ──────────────────────────────────────────────────────────────

fn parse_target(s: &str) -> Result<WitnessTarget, String> {
    if s == "zero" {
        return Ok(WitnessTarget::Zero);
    }
    if let Some(list) = s.strip_prefix("face:") {
        let idx: Vec<usize> = list
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| format!("bad face index {t:?}")))
            .collect::<Result<_, _>>()?;
        return Ok(WitnessTarget::Face(idx));
    }
    Err(format!("target must be zero or face:<indices>, got {s:?}"))
}

pub fn witness(rep_arg: &str, point: &str, target: &str) -> Result<i32, String> {
    let lr = load(rep_arg)?;
    let rep = &lr.rep;
    let (_, arith) = effective_arithmetic(&lr)?;
    let x = parse_point(point, rep.dim(), "point")?;
    let w = hm_witness(rep, &x, parse_target(target)?).map_err(err)?;
    let results = obj(vec![
        ("a", jvec(&w.a)),
        ("xi", jvec(&w.xi)),
        ("predicted_limit", jvec(&w.predicted_limit)),
        ("limit_error", jf(w.limit_error)),
    ]);
    let hooks = vec![Hook::new(
        "limit_confirmed",
        w.limit_error <= LIMIT_ERROR_MAX,
        obj(vec![("limit_error", jf(w.limit_error))]),
    )];
    let (doc, ok) = assemble(
        obj(vec![
            ("name", jstr("witness")),
            ("point", jvec(&x)),
            ("target", jstr(target)),
        ]),
        Some(&lr.digest),
        Some(arith),
        obj(vec![("limit_error_max", jf(LIMIT_ERROR_MAX))]),
        results,
        hooks,
    );
    Ok(finish(&doc, ok))
}

// ── invert ───────────────────────────────────────────────────────────────

pub fn invert(
    rep_arg: &str,
    point: &str,
    target: &str,
    projective: bool,
    tol: f64,
) -> Result<i32, String> {
    let lr = load(rep_arg)?;
    let rep = &lr.rep;
    let (_, arith) = effective_arithmetic(&lr)?;
    let x = parse_point(point, rep.dim(), "point")?;
    let c = parse_point(target, rep.abelian_dim(), "target")?;
    let variant = if projective { KnVariant::Projective } else { KnVariant::Linear };
    let newton = match invert_moment(rep, &x, &c, variant, tol) {
        Ok(n) => n,
        Err(FlowError::MaxIterations { best }) => best,
        Err(e) => return Err(err(e)),
    };

    let y = rep.act(&newton.xi, 1.0, &x).map_err(err)?;
    let mu = if projective {
        rep.moment_projective(&ProjPoint::new(y).map_err(err)?).map_err(err)?
    } else {
        rep.moment(&y).map_err(err)?
    };
    let verified: f64 =
        mu.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let verify_tol = 10.0 * tol;

    let results = obj(vec![
        ("xi", jvec(&newton.xi)),
        ("iterations", jint(newton.iterations)),
        ("residual", jf(newton.residual)),
        ("converged", Value::Bool(newton.converged)),
        ("verified_residual", jf(verified)),
    ]);
    let hooks = vec![
        Hook::new(
            "newton_converged",
            newton.converged,
            obj(vec![("iterations", jint(newton.iterations))]),
        ),
        Hook::new(
            "residual_verified",
            verified <= verify_tol,
            obj(vec![("verified_residual", jf(verified))]),
        ),
    ];
    let (doc, ok) = assemble(
        obj(vec![
            ("name", jstr("invert")),
            ("point", jvec(&x)),
            ("target", jvec(&c)),
            ("projective", Value::Bool(projective)),
        ]),
        Some(&lr.digest),
        Some(arith),
        obj(vec![("tol", jf(tol)), ("verify_tol", jf(verify_tol))]),
        results,
        hooks,
    );
    Ok(finish(&doc, ok))
}

// ── flow ─────────────────────────────────────────────────────────────────

pub fn flow(
    rep_arg: &str,
    point: &str,
    t_max: f64,
    dt: f64,
    stop_tol: f64,
    trace_out: &Path,
) -> Result<i32, String> {
    let lr = load(rep_arg)?;
    let rep = &lr.rep;
    let (_, arith) = effective_arithmetic(&lr)?;
    let x = parse_point(point, rep.dim(), "point")?;
    let p = ProjPoint::new(x).map_err(err)?;
    let opts = FlowOpts { dt, t_max, stop_tol, abelian_only: false, with_lift: true };
    let trace = norm_square_flow(rep, &p, &opts).map_err(err)?;

    let mut header = vec!["t".to_string(), "f".to_string(), "grad_norm".to_string()];
    header.extend((0..rep.dim()).map(|i| format!("x_{i}")));
    let rows: Vec<Vec<f64>> = (0..trace.times.len())
        .map(|k| {
            let mut row = vec![trace.times[k], trace.f_values[k], trace.grad_norms[k]];
            row.extend_from_slice(trace.points[k].coords());
            row
        })
        .collect();
    write_csv(trace_out, &header, &rows)?;

    let max_increase = trace
        .f_values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    let lift_error = trace.lift_error.unwrap_or(0.0);
    let results = obj(vec![
        ("steps", jint(trace.times.len())),
        ("t_end", jf(*trace.times.last().unwrap())),
        ("f_start", jf(trace.f_values[0])),
        ("f_end", jf(*trace.f_values.last().unwrap())),
        ("grad_norm_end", jf(*trace.grad_norms.last().unwrap())),
        ("limit", jvec(trace.limit.coords())),
        ("limit_mu_norm", jf(trace.limit_mu_norm)),
        ("decay_estimate", jopt(trace.decay_estimate)),
        ("lift_error", jopt(trace.lift_error)),
    ]);
    let hooks = vec![
        Hook::new(
            "energy_monotone",
            max_increase <= MONOTONE_SLACK,
            obj(vec![(
                "max_step_increase",
                if max_increase == f64::NEG_INFINITY { jf(0.0) } else { jf(max_increase) },
            )]),
        ),
        Hook::new(
            "lift_consistent",
            lift_error <= LIFT_ERROR_MAX,
            obj(vec![("lift_error", jf(lift_error))]),
        ),
    ];
    let (doc, ok) = assemble(
        obj(vec![
            ("name", jstr("flow")),
            ("point", jvec(p.coords())),
            ("trace_file", jstr(&trace_out.display().to_string())),
        ]),
        Some(&lr.digest),
        Some(arith),
        obj(vec![
            ("dt", jf(dt)),
            ("t_max", jf(t_max)),
            ("stop_tol", jf(stop_tol)),
            ("monotone_slack", jf(MONOTONE_SLACK)),
            ("lift_error_max", jf(LIFT_ERROR_MAX)),
        ]),
        results,
        hooks,
    );
    Ok(finish(&doc, ok))
}

// ── minnorm ──────────────────────────────────────────────────────────────

pub fn minnorm(rep_arg: &str, point: &str, projective: bool) -> Result<i32, String> {
    let lr = load(rep_arg)?;
    let rep = &lr.rep;
    let (_, arith) = effective_arithmetic(&lr)?;
    let x = parse_point(point, rep.dim(), "point")?;
    let p = ProjPoint::new(x).map_err(err)?;
    let report = orbit_min_norm(rep, &p).map_err(err)?;
    let results = obj(vec![
        ("value", jf(report.value)),
        ("dual_value", jf(report.dual_value)),
        ("flow_value", jf(report.flow_value)),
        ("discrepancy", jf(report.discrepancy)),
        ("minimizer", jvec(&report.minimizer)),
        ("limit", jvec(report.limit.coords())),
    ]);
    let hooks = vec![Hook::new(
        "methods_agree",
        report.ok,
        obj(vec![("discrepancy", jf(report.discrepancy))]),
    )];
    let (doc, ok) = assemble(
        obj(vec![
            ("name", jstr("minnorm")),
            ("point", jvec(p.coords())),
            ("projective", Value::Bool(projective)),
        ]),
        Some(&lr.digest),
        Some(arith),
        obj(vec![("discrepancy_max", jf(DISCREPANCY_MAX))]),
        results,
        hooks,
    );
    Ok(finish(&doc, ok))
}

// ── khull ────────────────────────────────────────────────────────────────

pub fn khull(
    rep_arg: &str,
    point: &str,
    samples: usize,
    seed: u64,
    a_only: bool,
    cloud_out: &Path,
) -> Result<i32, String> {
    let lr = load(rep_arg)?;
    let rep = &lr.rep;
    let (_, arith) = effective_arithmetic(&lr)?;
    let x = parse_point(point, rep.dim(), "point")?;
    let p = ProjPoint::new(x).map_err(err)?;
    let sample = khull_sample(rep, &p, samples, a_only, seed).map_err(err)?;

    let k = rep.p_basis().map_or(rep.abelian_dim(), <[_]>::len);
    let header: Vec<String> = (0..k).map(|i| format!("mu_{i}")).collect();
    write_csv(cloud_out, &header, &sample.cloud)?;

    let results = obj(vec![
        ("samples", jint(samples)),
        ("projection_max_violation", jf(sample.projection_max_violation)),
        ("min_moment_norm", jf(sample.min_moment_norm)),
        ("max_moment_norm", jf(sample.max_moment_norm)),
        ("hull_area", jopt(sample.hull_area)),
        (
            "hull_vertices",
            sample.hull_vertices.as_ref().map_or(Value::Null, |v| jrows(v)),
        ),
    ]);
    let hooks = vec![Hook::new(
        "projections_in_polytope",
        sample.projection_max_violation <= PROJECTION_MAX,
        obj(vec![("max_violation", jf(sample.projection_max_violation))]),
    )];
    let (doc, ok) = assemble(
        obj(vec![
            ("name", jstr("khull")),
            ("point", jvec(p.coords())),
            ("samples", jint(samples)),
            ("seed", jint(seed as usize)),
            ("a_only", Value::Bool(a_only)),
            ("cloud_file", jstr(&cloud_out.display().to_string())),
        ]),
        Some(&lr.digest),
        Some(arith),
        obj(vec![("projection_max", jf(PROJECTION_MAX))]),
        results,
        hooks,
    );
    Ok(finish(&doc, ok))
}

// ── destabilize ──────────────────────────────────────────────────────────

pub fn destabilize(rep_arg: &str, point: &str, seed: u64) -> Result<i32, String> {
    let lr = load(rep_arg)?;
    let rep = &lr.rep;
    let (_, arith) = effective_arithmetic(&lr)?;
    let x = parse_point(point, rep.dim(), "point")?;
    let p = ProjPoint::new(x).map_err(err)?;
    let command = obj(vec![
        ("name", jstr("destabilize")),
        ("point", jvec(p.coords())),
        ("seed", jint(seed as usize)),
    ]);
    let tolerances = obj(vec![("lambda_max", jf(LAMBDA_MAX)), ("recheck_tol", jf(CERT_TOL))]);

    match destabilize_reductive(rep, &p, seed).map_err(err)? {
        None => {
            let results = obj(vec![
                ("found", Value::Bool(false)),
                ("note", jstr("search budget exhausted; not a semistability certificate")),
            ]);
            let (doc, _) = assemble(command, Some(&lr.digest), Some(arith), tolerances, results, vec![]);
            print!("{}", render(&doc));
            Ok(3)
        }
        Some(d) => {
            let recheck = maximal_weight(rep, &p, MaxWeightDirection::PElement(&d.xi))
                .map_err(err)?;
            let route = match d.route {
                DestabilizeRoute::AbelianSeparating => "abelian_separating",
                DestabilizeRoute::FlowAssisted => "flow_assisted",
                DestabilizeRoute::SphereSearch => "sphere_search",
            };
            let n = d.xi.n();
            let xi_rows: Vec<Vec<f64>> =
                (0..n).map(|r| d.xi.mat().row(r).to_vec()).collect();
            let results = obj(vec![
                ("found", Value::Bool(true)),
                ("route", jstr(route)),
                ("lambda", jf(d.lambda)),
                ("coefficients", jvec(&d.coefficients)),
                ("xi_matrix", jrows(&xi_rows)),
            ]);
            let hooks = vec![
                Hook::new(
                    "rate_negative",
                    d.lambda < LAMBDA_MAX,
                    obj(vec![("lambda", jf(d.lambda))]),
                ),
                Hook::new(
                    "rate_recomputed",
                    (recheck - d.lambda).abs() <= CERT_TOL,
                    obj(vec![("recomputed", jf(recheck))]),
                ),
            ];
            let (doc, ok) =
                assemble(command, Some(&lr.digest), Some(arith), tolerances, results, hooks);
            Ok(finish(&doc, ok))
        }
    }
}

// ── gallery ──────────────────────────────────────────────────────────────

pub fn gallery_list() -> Result<i32, String> {
    for (name, description) in gallery::list() {
        println!("{name}: {description}");
    }
    Ok(0)
}

pub fn gallery_emit(name: &str, params: &[i64]) -> Result<i32, String> {
    let rep = gallery::build(name, params).map_err(err)?;
    let exact = rep.exact_weights().is_some();
    print!("{}", canonical_form(&rep, exact));
    Ok(0)
}
