//! Subcommand implementations.

use std::str::FromStr;

use anyhow::{anyhow, Context};
use num_rational::BigRational;
use serde::Deserialize;
use serde_json::{json, Value};

use sl2trace_core::arithmeticity::{
    normalize_cusped, square_rationality_check, squarefree_class, structure_check,
    takeuchi_report,
};
use sl2trace_core::field::{FieldElem, FieldKind};
use sl2trace_core::fricke::{
    embed_generators, estimate_delta, orbit_ball, relation_residual, solve_tail,
    trace_collision_scan, OrbitOptions, SolveOptions,
};
use sl2trace_core::matgroup::{enumerate_ball, growth_classify, BallOptions, TraceSet};
use sl2trace_core::qrs::{verify_gcd_bounded, QrsSeq};
use sl2trace_core::zaffine::{
    build_trace_family, dirichlet_s, intersect, Intersection, Period, Real,
    ZAffine,
};

use crate::formats::{CoordsFile, SpecFile};
use crate::reports::{emit_csv, emit_json, Format, Meta};
use crate::sieve_cache::sieve_with_cache;
use crate::{
    ArithCheckArgs, ConfigFile, DirichletArgs, Failure, FamilyBuildArgs, FrickeArgs,
    QrsVerifyArgs, TraceGrowthArgs, ZaffineDensityArgs,
};

type CmdResult = Result<(), Failure>;

fn require<T>(value: Option<T>, flag: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::usage(anyhow!("missing required --{flag} (flag or config file)")))
}

/// Geometric subsample of 2..=nmax used for growth classification.
fn growth_sample_points(nmax: u64) -> Vec<u64> {
    let mut pts = Vec::new();
    let mut x = 2f64;
    while (x as u64) <= nmax {
        let n = x as u64;
        if pts.last() != Some(&n) {
            pts.push(n);
        }
        x *= 1.4;
    }
    pts
}

pub fn trace_growth(args: TraceGrowthArgs, cfg: &ConfigFile, seed: u64) -> CmdResult {
    let spec_path = require(args.spec.or_else(|| cfg.spec.clone()), "spec")?;
    let l = args.l.or(cfg.l).unwrap_or(8);
    let nmax = args.nmax.or(cfg.nmax).unwrap_or(20);
    let cap = args.cap.or(cfg.cap).unwrap_or(1_000_000);
    let format = match args.format.or_else(|| cfg.format.clone()) {
        None => Format::Csv,
        Some(s) => Format::from_str(&s).map_err(Failure::usage)?,
    };
    let spec_file = SpecFile::load(&spec_path).map_err(Failure::usage)?;
    let spec = spec_file.to_group_spec().map_err(Failure::usage)?;
    let ball = enumerate_ball(&spec, l, BallOptions { max_elements: cap })?;
    let ts = TraceSet::from_ball(&ball);
    let rows = ts.counting_rows(nmax);
    let samples: Vec<(u64, u64)> = growth_sample_points(nmax)
        .into_iter()
        .map(|n| (n, ts.count_within(n)))
        .collect();
    let growth = if samples.len() >= 4 {
        let fit = growth_classify(&samples)?;
        json!({ "class": fit.class.to_string(), "residual": fit.residual })
    } else {
        Value::Null
    };
    let config_echo = json!({
        "spec": spec_path, "L": l, "nmax": nmax, "cap": cap,
        "format": if format == Format::Csv { "csv" } else { "json" },
    });
    let meta = Meta::new("trace-growth", config_echo, "exact", None, seed)
        .with_extras(json!({ "element_count": ball.len(), "distinct_traces": ts.len() }));
    match format {
        Format::Csv => emit_csv(
            args.out.as_deref(),
            "n,count",
            rows.iter().map(|(n, c)| format!("{n},{c}")),
            &meta,
        )?,
        Format::Json => {
            let data = json!({
                "rows": rows,
                "growth": growth,
            });
            emit_json(args.out.as_deref(), &data, &meta)?;
        }
    }
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct QrsInput {
    a: String,
    #[serde(rename = "F0")]
    f0: String,
    #[serde(rename = "F1")]
    f1: String,
    horizon: Option<usize>,
    pair: Option<QrsPair>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct QrsPair {
    #[serde(rename = "G0")]
    g0: String,
    #[serde(rename = "G1")]
    g1: String,
}

fn parse_rational(s: &str) -> Result<BigRational, Failure> {
    BigRational::from_str(s.trim())
        .map_err(|_| Failure::usage(anyhow!("cannot parse rational {s:?}")))
}

pub fn qrs_verify(args: QrsVerifyArgs, cfg: &ConfigFile, seed: u64) -> CmdResult {
    let input_path = require(args.input.or_else(|| cfg.input.clone()), "input")?;
    let text = std::fs::read_to_string(&input_path)
        .with_context(|| format!("reading {}", input_path.display()))
        .map_err(Failure::usage)?;
    let input: QrsInput = serde_json::from_str(&text)
        .map_err(|e| Failure::usage(anyhow!("invalid qrs input: {e}")))?;
    let horizon = args.horizon.or(input.horizon).or(cfg.horizon).unwrap_or(120);
    let seq = QrsSeq::standard(
        parse_rational(&input.a)?,
        parse_rational(&input.f0)?,
        parse_rational(&input.f1)?,
    );
    let bound = seq.verify_boundedness(horizon)?;
    // Valuations of the scaled sequence at every prime of q.
    let q = seq.q();
    let mut valuation_trace = Vec::new();
    if let Ok(qu) = u64::try_from(&q) {
        if qu >= 2 {
            for (r, _) in sl2trace_core::primes::factorize_u64(qu) {
                let values: Vec<Option<u64>> =
                    (0..=horizon.min(60)).map(|n| seq.scaled_valuation(r, n).ok()).collect();
                valuation_trace.push(json!({ "r": r, "values": values }));
            }
        }
    }
    let mut gcd_section = Value::Null;
    let mut max_gcd = Value::Null;
    let mut all_plateau = bound.plateau;
    if let Some(pair) = &input.pair {
        let other = QrsSeq::standard(
            seq.a().clone(),
            parse_rational(&pair.g0)?,
            parse_rational(&pair.g1)?,
        );
        let rep = verify_gcd_bounded(&seq, &other, horizon)?;
        all_plateau &= rep.plateau;
        max_gcd = json!(rep.max_gcd.to_string());
        gcd_section = json!({
            "max_gcd": rep.max_gcd.to_string(),
            "max_gcd_half": rep.max_gcd_half.to_string(),
            "argmax": rep.argmax,
            "plateau": rep.plateau,
        });
    }
    let data = json!({
        "max_gcd": max_gcd,
        "denominator_window": {
            "min": bound.denominator_window.0.to_string(),
            "max": bound.denominator_window.1.to_string(),
        },
        "numerator_window": {
            "min": bound.numerator_window.0.to_string(),
            "max": bound.numerator_window.1.to_string(),
        },
        "valuation_trace": valuation_trace,
        "plateau": all_plateau,
        "ratio_plateau": bound.plateau,
        "window_bound": bound.bound.to_string(),
        "skipped_zero_terms": bound.skipped_zero_terms,
        "gcd": gcd_section,
    });
    let config_echo = json!({ "input": input_path, "horizon": horizon });
    let meta = Meta::new("qrs-verify", config_echo, "exact", None, seed);
    emit_json(args.out.as_deref(), &data, &meta)?;
    if !all_plateau {
        return Err(Failure::verification("plateau check failed".into()));
    }
    Ok(())
}

fn parse_space(x: &str, y: &str) -> Result<ZAffine, Failure> {
    let offset = FieldElem::from_str(x)
        .map_err(|e| Failure::usage(anyhow!("offset: {e}")))?;
    if y.trim() == "inf" {
        return Ok(ZAffine::singleton(offset));
    }
    let period = FieldElem::from_str(y)
        .map_err(|e| Failure::usage(anyhow!("period: {e}")))?;
    if !period.is_positive() {
        return Err(Failure::usage(anyhow!("period must be positive")));
    }
    Ok(ZAffine::exact(offset, period))
}

fn density_string(space: &ZAffine) -> String {
    match space.density() {
        Real::Exact(d) => d.to_string(),
        Real::Approx(d) => d.to_string(),
    }
}

pub fn zaffine_density(args: ZaffineDensityArgs, cfg: &ConfigFile, seed: u64) -> CmdResult {
    let _ = cfg;
    let x = require(args.x.clone(), "x")?;
    let y = require(args.y.clone(), "y")?;
    let space = parse_space(&x, &y)?;
    let mut data = json!({ "density": density_string(&space) });
    if let (Some(lo), Some(hi)) = (args.lo, args.hi) {
        let count = space.count_in_interval(&Real::from_integer(lo), &Real::from_integer(hi));
        data["count"] = json!(count);
        data["interval"] = json!([lo, hi]);
    }
    if let (Some(x2), Some(y2)) = (&args.x2, &args.y2) {
        let other = parse_space(x2, y2)?;
        let inter = intersect(&space, &other)?;
        let section = match &inter {
            Intersection::Empty => json!({ "kind": "empty" }),
            Intersection::Point(v) => json!({ "kind": "point", "value": v.to_string() }),
            Intersection::Affine(s) => {
                let period = match s.period() {
                    Period::Finite(Real::Exact(p)) => p.to_string(),
                    _ => unreachable!("exact intersection"),
                };
                let offset = match s.offset() {
                    Real::Exact(o) => o.to_string(),
                    _ => unreachable!("exact intersection"),
                };
                json!({ "kind": "affine", "offset": offset, "period": period,
                        "density": density_string(s) })
            }
        };
        data["intersection"] = section;
    }
    let config_echo = json!({
        "x": x, "y": y, "x2": args.x2, "y2": args.y2, "lo": args.lo, "hi": args.hi,
    });
    let meta = Meta::new("zaffine-density", config_echo, "exact", None, seed);
    emit_json(args.out.as_deref(), &data, &meta)?;
    Ok(())
}

pub fn dirichlet(args: DirichletArgs, cfg: &ConfigFile, seed: u64) -> CmdResult {
    let xs = require(args.x.or_else(|| cfg.x.clone()), "x")?;
    let a = require(args.a.or(cfg.a), "a")?;
    let m = require(args.m.or(cfg.m), "m")?;
    if xs.is_empty() {
        return Err(Failure::usage(anyhow!("--x needs at least one value")));
    }
    let limit = *xs.iter().max().unwrap();
    let sieve = sieve_with_cache(limit)?;
    let mut rows = Vec::new();
    for &x in &xs {
        let d = dirichlet_s(x, a, m, &sieve)?;
        rows.push(d);
    }
    let config_echo = json!({ "x": xs, "a": a, "m": m, "sieve_limit": sieve.limit() });
    let meta = Meta::new("dirichlet", config_echo, "float", None, seed);
    if let Some(csv_path) = &args.csv {
        emit_csv(
            Some(csv_path),
            "x,a,m,s",
            rows.iter().map(|d| format!("{},{},{},{}", d.x, d.a, d.m, d.s)),
            &meta,
        )?;
        return Ok(());
    }
    let data: Vec<Value> = rows
        .iter()
        .map(|d| {
            json!({
                "x": d.x, "a": d.a, "m": d.m, "s": d.s,
                "reciprocal_sum": d.reciprocal_sum,
                "loglog_term": d.loglog_term,
                "primes_counted": d.primes_counted,
                "phi_m": d.phi_m,
            })
        })
        .collect();
    emit_json(args.out.as_deref(), &data, &meta)?;
    Ok(())
}

pub fn family_build(args: FamilyBuildArgs, cfg: &ConfigFile, seed: u64) -> CmdResult {
    let spec_path = require(args.spec.or_else(|| cfg.spec.clone()), "spec")?;
    let spec_file = SpecFile::load(&spec_path).map_err(Failure::usage)?;
    let spec = spec_file.to_group_spec().map_err(Failure::usage)?;
    let matrix = spec
        .generators()
        .first()
        .ok_or_else(|| Failure::usage(anyhow!("spec has no generators")))?
        .clone();
    let beta2 = args.beta2.or(cfg.beta2).or(spec_file.n).unwrap_or(1);
    let nmin = args.nmin.or(cfg.nmin).unwrap_or(1);
    let nmax = args.nmax.map(|v| v as usize).or(cfg.nmax.map(|v| v as usize)).unwrap_or(6);
    let budget = args.budget.or(cfg.budget).unwrap_or(1000);
    let family = build_trace_family(&matrix, beta2, nmin..=nmax, budget)?;
    let entries: Vec<Value> = family
        .entries
        .iter()
        .map(|e| {
            let offset = match e.space.offset() {
                Real::Exact(o) => o.to_string(),
                Real::Approx(o) => o.to_string(),
            };
            let period = match e.space.period() {
                Period::Finite(Real::Exact(p)) => p.to_string(),
                _ => unreachable!("family periods are exact and finite"),
            };
            json!({
                "n": e.n, "l": e.l.to_string(), "offset": offset, "period": period,
                "witness": e.witness, "witness_prime": e.witness_prime,
            })
        })
        .collect();
    let diagnostics: Vec<Value> = family
        .diagnostics
        .iter()
        .map(|d| {
            json!({
                "n": d.n, "K": d.k.to_string(), "S": d.s.to_string(), "T": d.t.to_string(),
                "L": d.lcm.to_string(), "selected": d.selected,
                "density_sum": d.density_sum.to_string(),
                "e_over_c_partial": d.e_over_c_partial,
            })
        })
        .collect();
    let data = json!({ "entries": entries, "diagnostics": diagnostics });
    let config_echo = json!({
        "spec": spec_path, "beta2": beta2, "nmin": nmin, "nmax": nmax, "budget": budget,
    });
    let meta = Meta::new("family-build", config_echo, "exact", None, seed);
    emit_json(args.out.as_deref(), &data, &meta)?;
    Ok(())
}

fn parse_field_flag(s: &str) -> Result<FieldKind, Failure> {
    if s == "rational" {
        return Ok(FieldKind::Rational);
    }
    if let Some(d) = s.strip_prefix("quadratic:") {
        let d: u64 = d
            .parse()
            .map_err(|_| Failure::usage(anyhow!("bad field spec {s:?}")))?;
        return Ok(FieldKind::Quadratic { d });
    }
    Err(Failure::usage(anyhow!(
        "bad field spec {s:?} (expected \"rational\" or \"quadratic:D\")"
    )))
}

pub fn arith_check(args: ArithCheckArgs, cfg: &ConfigFile, seed: u64) -> CmdResult {
    let spec_path = require(args.spec.or_else(|| cfg.spec.clone()), "spec")?;
    let l = args.ball_length.or(cfg.ball_length).unwrap_or(6);
    let cap = args.cap.or(cfg.cap).unwrap_or(1_000_000);
    let spec_file = SpecFile::load(&spec_path).map_err(Failure::usage)?;
    let spec = spec_file.to_group_spec().map_err(Failure::usage)?;
    let field = match args.field.as_deref().or(cfg.field.as_deref()) {
        Some(s) => parse_field_flag(s)?,
        None => *spec.field(),
    };
    let ball = enumerate_ball(&spec, l, BallOptions { max_elements: cap })?;
    let traces: Vec<FieldElem> = ball.elements().iter().map(|m| m.trace()).collect();
    let takeuchi = takeuchi_report(&traces, &field)?;
    let integral_count = takeuchi.per_trace.iter().filter(|p| p.integral).count();
    let takeuchi_json = json!({
        "field": field.to_string(),
        "traces_sampled": takeuchi.per_trace.len(),
        "traces_integral": integral_count,
        "non_integral": takeuchi.per_trace.iter()
            .filter(|p| !p.integral)
            .take(16)
            .map(|p| p.trace.to_string())
            .collect::<Vec<_>>(),
        "condition1": takeuchi.condition1.to_string(),
        "condition2": takeuchi.condition2.to_string(),
        "embedding_sup": takeuchi.embedding_sup,
    });
    let n_value = args.n.or(cfg.n).map(num_bigint::BigInt::from).or_else(|| spec.cusp_n().cloned());
    let structure_json = match &n_value {
        None => Value::Null,
        Some(n) => match structure_check(ball.elements(), n) {
            Ok(rep) => json!({
                "N": n.to_string(),
                "pass": rep.pass,
                "first_violation": rep.first_violation.map(|v| json!({
                    "matrix_index": v.matrix_index,
                    "entry": v.entry.to_string(),
                    "value": v.value.to_string(),
                })),
            }),
            Err(e) => json!({ "N": n.to_string(), "error": e.to_string() }),
        },
    };
    let sq_report = square_rationality_check(spec.generators(), spec.cusp_n());
    let square_json = json!({
        "all_pass": sq_report.all_pass,
        "flagged": sq_report.flagged,
        "per_matrix": sq_report.per_matrix.iter().map(|m| json!({
            "scalar": m.scalar.as_ref().map(|c| c.to_string()),
            "c_squared_rational": m.c_squared_rational,
            "square_is_rational": m.square_is_rational,
            "corner_span_dim": m.corner_span_dim,
            "pass": m.pass,
        })).collect::<Vec<_>>(),
    });
    let squarefree_json: Vec<Value> = spec
        .generators()
        .iter()
        .map(|g| match squarefree_class(g) {
            Ok(c) => json!({ "d": c.d.to_string() }),
            Err(e) => json!({ "error": e.to_string() }),
        })
        .collect();
    // Cusp normalization summary when the canonical pair is present.
    let cusp_json = match spec.cusp_n() {
        Some(_) => Value::Null, // already canonical
        None => {
            let parabolics: Vec<&sl2trace_core::mat::ExactMat2> = spec
                .generators()
                .iter()
                .filter(|g| {
                    let t = g.trace();
                    (t == FieldElem::from_integer(2) || t == FieldElem::from_integer(-2))
                        && !g.is_identity()
                })
                .collect();
            if parabolics.len() >= 2 {
                match normalize_cusped(&spec, parabolics[0], parabolics[1]) {
                    Ok(norm) => json!({
                        "N": norm.n.to_string(),
                        "second_inverted": norm.second_inverted,
                    }),
                    Err(e) => json!({ "error": e.to_string() }),
                }
            } else {
                Value::Null
            }
        }
    };
    let data = json!({
        "takeuchi": takeuchi_json,
        "structure": structure_json,
        "square_rationality": square_json,
        "squarefree_classes": squarefree_json,
        "cusp_normalization": cusp_json,
    });
    let config_echo = json!({
        "spec": spec_path, "ball_length": l, "cap": cap,
        "field": field.to_string(),
        "N": n_value.map(|n| n.to_string()),
    });
    let meta = Meta::new("arith-check", config_echo, "exact", None, seed)
        .with_extras(json!({ "element_count": ball.len() }));
    emit_json(args.out.as_deref(), &data, &meta)?;
    Ok(())
}

pub fn fricke(args: FrickeArgs, cfg: &ConfigFile, seed: u64) -> CmdResult {
    let coords_path = require(args.coords.or_else(|| cfg.coords.clone()), "coords")?;
    let rmax = args.rmax.or(cfg.rmax).unwrap_or(10.0);
    let cap = args.cap.or(cfg.cap).unwrap_or(500);
    let n_radii = args.radii.or(cfg.radii).unwrap_or(16).max(5);
    let tolerance = args.tolerance.or(cfg.tolerance).unwrap_or(1e-9);
    let coords_file = CoordsFile::load(&coords_path).map_err(Failure::usage)?;
    let mut fc = coords_file.to_fricke().map_err(Failure::usage)?;
    let tail = match fc.tail {
        Some(t) if !t.residual.is_nan() => t,
        _ => {
            let solved = solve_tail(&fc, SolveOptions { seed, ..Default::default() })?;
            fc.tail = Some(solved);
            solved
        }
    };
    fc.tail = Some(tail);
    let gens = embed_generators(&fc)?;
    let residual = relation_residual(&gens);
    // The first 2g−3 generators span the free subgroup; the last is the
    // special diagonal element.
    let sub = &gens[..2 * fc.genus - 3];
    let special = gens[2 * fc.genus - 1];
    let orbit = orbit_ball(sub, rmax, OrbitOptions { dedup_tolerance: tolerance, ..Default::default() })?;
    let radii: Vec<f64> = (1..=n_radii).map(|j| rmax * j as f64 / n_radii as f64).collect();
    let counts = orbit.counts(&radii);
    let (delta_hat, ci, fit) = match estimate_delta(&counts) {
        Ok(d) => (
            json!(d.delta),
            json!(d.ci),
            json!({
                "window_start": d.window_start, "points_used": d.points_used,
                "residual_rms": d.residual_rms,
            }),
        ),
        Err(e) => (Value::Null, Value::Null, json!({ "error": e.to_string() })),
    };
    let scan = trace_collision_scan(sub, &special, cap, tolerance);
    let data = json!({
        "delta_hat": delta_hat,
        "ci": ci,
        "residual": residual,
        "collisions": scan.pairs.iter().map(|p| json!({
            "word_a": p.word_a, "word_b": p.word_b,
            "trace_a": p.trace_a, "trace_b": p.trace_b,
        })).collect::<Vec<_>>(),
        "tail": {
            "a": tail.a, "b": tail.b, "c": tail.c, "d": tail.d, "nu": tail.nu,
            "residual": tail.residual,
        },
        "fit": fit,
        "orbit_elements": orbit.members.len(),
        "dedup_warnings": orbit.collisions.len(),
        "collision_elements_scanned": scan.elements_scanned,
    });
    let config_echo = json!({
        "coords": coords_path, "rmax": rmax, "cap": cap, "radii": n_radii,
        "tolerance": tolerance,
    });
    let meta = Meta::new("fricke", config_echo, "float", Some(tolerance), seed);
    if let Some(csv_path) = &args.out_csv {
        emit_csv(
            Some(csv_path),
            "R,N",
            counts.radii.iter().zip(&counts.counts).map(|(r, n)| format!("{r},{n}")),
            &meta,
        )?;
    }
    emit_json(args.out_json.as_deref(), &data, &meta)?;
    Ok(())
}
