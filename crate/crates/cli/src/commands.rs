//! One function per subcommand. Each returns a verdict, a JSON result and any
//! CSV series; writing files is left to the caller.

use adjcone_core::geometry::{GeneratedCone, Polytope};
use adjcone_core::gqvi::{
    hypothesis_report, sion_check, solve, verify_candidate, ConstraintMap, GqviInstance, Minimax, SolveStatus,
    TracePoint,
};
use adjcone_core::linalg::{box_grid, norm};
use adjcone_core::normal_op::{
    adjusted_normal_cone, closedness_probe, global_base, normalized_base, quasimonotonicity_probe,
    strict_normal_cone, usc_probe, Atlas, ProbeConfig, DEFAULT_RADII,
};
use adjcone_core::quasiconvex::{
    adjusted_convexity_check, quasiconvexity_check, sandwich_check, Function, SamplingPlan, StepLevelFunction,
};
use adjcone_core::quasiopt::{solve_quasiopt, TOL_OPT};
use adjcone_core::Error;
use anyhow::{bail, Result};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::instance::Loaded;
use crate::output::{coord_header, csv_bytes, Artifact, Outcome, Verdict};
use crate::Command;

/// Sequences for the closedness probe and pairs for the quasimonotonicity probe.
const PROBE_BUDGET: usize = 1000;
/// Random points for the informational hypothesis check of `K`.
const HYPOTHESIS_SAMPLES: usize = 100;
/// Largest grid `adjusted-set` will sample.
const MAX_SET_GRID: usize = 1_000_000;

pub fn dispatch(command: Command, inst: &Loaded, cfg: &RunConfig) -> Result<Outcome> {
    let name = command.name();
    match command {
        Command::CheckQuasiconvex => check_quasiconvex(inst, cfg, name),
        Command::AdjustedSet => adjusted_set(inst, cfg, name),
        Command::NormalCone => normal_cone(inst, cfg, name),
        Command::BuildAtlas => build_atlas(inst, cfg, name),
        Command::BaseMap => base_map(inst, cfg, name),
        Command::UscProbe => usc(inst, cfg, name),
        Command::ClosednessProbe => closedness(inst, cfg, name),
        Command::QuasimonoProbe => quasimono(inst, cfg, name),
        Command::SolveGqvi => solve_gqvi(inst, cfg, name),
        Command::SolveQuasiopt => quasiopt(inst, cfg, name),
        Command::Verify => verify(inst, cfg, name),
    }
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn coords(x: &[f64]) -> impl Iterator<Item = String> + '_ {
    x.iter().map(|v| num(*v))
}

fn outcome(verdict: Verdict, result: Value) -> Outcome {
    Outcome {
        verdict,
        result,
        artifacts: Vec::new(),
    }
}

fn check_quasiconvex(inst: &Loaded, cfg: &RunConfig, name: &str) -> Result<Outcome> {
    let f = inst.function(cfg.tol, name)?;
    let plan = SamplingPlan {
        seed: cfg.seed,
        ..SamplingPlan::default()
    };
    let q = quasiconvexity_check(&f, &plan)?;
    let a = adjusted_convexity_check(&f, &plan)?;
    let s = sandwich_check(&f, &plan)?;
    let pass = q.pass && a.pass && s.violations == 0;
    Ok(outcome(
        Verdict::from_pass(pass),
        json!({
            "function_type": function_type(&f),
            "plan": plan,
            "quasiconvexity": q,
            "adjusted_convexity": a,
            "sandwich": s,
            "checks_agree": q.pass == a.pass,
        }),
    ))
}

fn function_type(f: &Function) -> &'static str {
    match f {
        Function::Step(_) => "step",
        Function::Analytic(_) => "analytic",
    }
}

fn domain_box(f: &Function) -> Result<(Vec<f64>, Vec<f64>)> {
    match f {
        Function::Analytic(a) => Ok(a.domain().bounding_box()?),
        Function::Step(s) => {
            let (mut lo, mut hi) = s.polytopes()[0].bounding_box()?;
            for p in &s.polytopes()[1..] {
                let (l, h) = p.bounding_box()?;
                for i in 0..lo.len() {
                    lo[i] = lo[i].min(l[i]);
                    hi[i] = hi[i].max(h[i]);
                }
            }
            Ok((lo, hi))
        }
    }
}

/// Grid members of `S_{f(x)}`, `S^<_{f(x)}` and `S^a_f(x)`.
const SET_NAMES: [&str; 3] = ["level", "strict", "adjusted"];

fn adjusted_set(inst: &Loaded, cfg: &RunConfig, name: &str) -> Result<Outcome> {
    let f = inst.function(cfg.tol, name)?;
    let n = f.dim();
    let x = cfg.at(name, n)?;
    let value = f.evaluate(x)?;
    if !value.is_finite() {
        bail!("--at {x:?} lies outside the domain of f");
    }
    let (in_argmin, rho) = match &f {
        Function::Step(s) => {
            let m = s.in_argmin(x)?;
            (m, if m { Value::Null } else { json!(s.rho(x)?) })
        }
        Function::Analytic(a) => {
            let m = a.in_argmin(x)?;
            (m, if m { Value::Null } else { json!(a.rho(x)?) })
        }
    };
    let view = f.adjusted(x)?;

    let (lo, hi) = domain_box(&f)?;
    let side = lo.iter().zip(&hi).map(|(l, h)| h - l).fold(0.0, f64::max);
    let cells = match n {
        1 => 400.0,
        2 => 100.0,
        _ => 20.0,
    };
    let h = cfg.mesh.unwrap_or(side / cells);
    let counts: Vec<usize> = lo.iter().zip(&hi).map(|(l, u)| ((u - l) / h).ceil() as usize + 1).collect();
    if counts.iter().try_fold(1usize, |acc, c| acc.checked_mul(*c)).is_none_or(|t| t > MAX_SET_GRID) {
        bail!("a grid at mesh {h} over {lo:?}..{hi:?} exceeds {MAX_SET_GRID} points; raise --mesh");
    }
    let grid = box_grid(&lo, &hi, h);
    let member: Vec<[bool; 3]> = grid
        .iter()
        .map(|y| -> Result<[bool; 3]> {
            let fy = f.evaluate(y)?;
            Ok([fy <= value, fy < value, view.contains(y)?])
        })
        .collect::<Result<_>>()?;

    let mut totals = [0usize; 3];
    let mut violations = 0;
    let mut witness = None;
    for (y, m) in grid.iter().zip(&member) {
        for k in 0..3 {
            totals[k] += m[k] as usize;
        }
        if (m[1] && !m[2]) || (m[2] && !m[0]) {
            violations += 1;
            witness.get_or_insert_with(|| y.clone());
        }
    }

    let mut artifacts = Vec::new();
    if n == 2 {
        // box_grid runs the first axis fastest.
        let (n0, n1) = (
            ((hi[0] - lo[0]) / h - 1e-9).ceil().max(0.0) as usize + 1,
            ((hi[1] - lo[1]) / h - 1e-9).ceil().max(0.0) as usize + 1,
        );
        debug_assert_eq!(n0 * n1, grid.len());
        let at = |i: usize, j: usize| j * n0 + i;
        let mut rows = Vec::new();
        for (k, set) in SET_NAMES.iter().enumerate() {
            for j in 0..n1 {
                for i in 0..n0 {
                    if !member[at(i, j)][k] {
                        continue;
                    }
                    let edge = i == 0 || j == 0 || i + 1 == n0 || j + 1 == n1;
                    let open = edge
                        || !member[at(i - 1, j)][k]
                        || !member[at(i + 1, j)][k]
                        || !member[at(i, j - 1)][k]
                        || !member[at(i, j + 1)][k];
                    if open {
                        let mut row = vec![set.to_string()];
                        row.extend(coords(&grid[at(i, j)]));
                        rows.push(row);
                    }
                }
            }
        }
        artifacts.push(Artifact {
            name: "boundary.csv",
            bytes: csv_bytes(&coord_header(&["set"], 2, &[]), rows)?,
        });
    }

    Ok(Outcome {
        verdict: Verdict::from_pass(violations == 0),
        result: json!({
            "x": x,
            "value": value,
            "in_argmin": in_argmin,
            "rho": rho,
            "grid": { "lo": lo, "hi": hi, "mesh": h, "points": grid.len() },
            "members": { "level": totals[0], "strict": totals[1], "adjusted": totals[2] },
            "sandwich_violations": violations,
            "witness": witness,
        }),
        artifacts,
    })
}

fn normal_cone(inst: &Loaded, cfg: &RunConfig, name: &str) -> Result<Outcome> {
    let f = inst.step(cfg.tol, name)?;
    let x = cfg.at(name, f.dim())?;
    let Some(index) = f.level_index(x)? else {
        bail!("--at {x:?} lies outside the domain of f");
    };
    let in_argmin = index == 0;
    let strict = if in_argmin { None } else { Some(strict_normal_cone(&f, x)?) };
    let adjusted = adjusted_normal_cone(&f, x)?;
    let base = if adjusted.is_zero() {
        None
    } else {
        Some(normalized_base(&f, x)?.vertices()?.to_vec())
    };
    let inside = match &strict {
        None => None,
        Some(s) => {
            let mut all = true;
            for g in adjusted.generators() {
                all &= s.contains(g, cfg.tol.cone)?;
            }
            Some(all)
        }
    };
    Ok(outcome(
        Verdict::from_pass(inside != Some(false)),
        json!({
            "x": x,
            "value": f.levels()[index],
            "level_index": index,
            "in_argmin": in_argmin,
            "strict_generators": strict.as_ref().map(|s| s.generators()),
            "adjusted_generators": adjusted.generators(),
            "normalized_base_vertices": base,
            "adjusted_in_strict": inside,
        }),
    ))
}

#[derive(Serialize)]
struct PartitionStats {
    grid_points: usize,
    holes: usize,
    first_hole: Option<Vec<f64>>,
    max_sum_error: f64,
    support_violations: usize,
}

fn partition_stats(atlas: &Atlas) -> Result<PartitionStats> {
    let grid = atlas.verification_grid()?;
    let mut s = PartitionStats {
        grid_points: grid.len(),
        holes: 0,
        first_hole: None,
        max_sum_error: 0.0,
        support_violations: 0,
    };
    for p in &grid {
        let w = atlas.weights(p);
        if w.is_empty() {
            s.holes += 1;
            s.first_hole.get_or_insert_with(|| p.clone());
            continue;
        }
        let sum: f64 = w.iter().map(|w| w.1).sum();
        s.max_sum_error = s.max_sum_error.max((sum - 1.0).abs());
        s.support_violations += w
            .iter()
            .filter(|(i, wi)| !(*wi >= 0.0) || !atlas.charts()[*i].in_ball(p, 0.0))
            .count();
    }
    Ok(s)
}

fn build_atlas(inst: &Loaded, cfg: &RunConfig, name: &str) -> Result<Outcome> {
    let f = inst.step(cfg.tol, name)?;
    let atlas = inst.atlas(&f, cfg.mesh, name)?;
    let stats = partition_stats(&atlas)?;
    let pass = stats.holes == 0 && stats.max_sum_error <= 1e-12 && stats.support_violations == 0;
    Ok(Outcome {
        verdict: Verdict::from_pass(pass),
        result: json!({
            "charts": atlas.charts().len(),
            "cover_step": atlas.cover_step(),
            "region_box": atlas.region().bounding_box()?,
            "excludes_argmin": atlas.excluded().is_some(),
            "partition": stats,
        }),
        artifacts: vec![Artifact {
            name: "atlas.json",
            bytes: crate::output::to_json_bytes(&atlas)?,
        }],
    })
}

#[derive(Serialize)]
struct BaseCheck {
    x: Vec<f64>,
    ok: bool,
    active_charts: usize,
    base_vertices: usize,
    min_norm: f64,
    max_vertex_norm: f64,
    cone_equal: bool,
    error: Option<String>,
}

fn check_base(atlas: &Atlas, f: &StepLevelFunction, x: &[f64], cfg: &RunConfig) -> Result<(BaseCheck, Option<Value>)> {
    let failed = |e: Error| BaseCheck {
        x: x.to_vec(),
        ok: false,
        active_charts: 0,
        base_vertices: 0,
        min_norm: f64::NAN,
        max_vertex_norm: f64::NAN,
        cone_equal: false,
        error: Some(e.to_string()),
    };
    let b = match global_base(atlas, f, x) {
        Ok(b) => b,
        Err(e) => return Ok((failed(e), None)),
    };
    let na = match adjusted_normal_cone(f, x) {
        Ok(c) => c,
        Err(e) => return Ok((failed(e), None)),
    };
    let cone_equal = na.equals(&GeneratedCone::from_base(&b.base)?, cfg.tol.cone)?;
    let min_norm = b.base.distance(&vec![0.0; x.len()])?;
    let vertices = b.base.vertices()?;
    let max_vertex_norm = vertices.iter().map(|v| norm(v)).fold(0.0, f64::max);
    let ok = cone_equal && min_norm >= cfg.tol.zero && max_vertex_norm <= 1.0 + 1e-9;
    let detail = json!({
        "active_charts": b.active_charts,
        "base_vertices": vertices,
        "cone_generators": b.cone.generators(),
    });
    Ok((
        BaseCheck {
            x: x.to_vec(),
            ok,
            active_charts: b.active_charts.len(),
            base_vertices: vertices.len(),
            min_norm,
            max_vertex_norm,
            cone_equal,
            error: None,
        },
        Some(detail),
    ))
}

fn base_map(inst: &Loaded, cfg: &RunConfig, name: &str) -> Result<Outcome> {
    let f = inst.step(cfg.tol, name)?;
    let atlas = inst.atlas(&f, None, name)?;
    let points = match &cfg.at {
        Some(_) => vec![cfg.at(name, f.dim())?.to_vec()],
        None => atlas.verification_grid()?,
    };
    let checks: Vec<(BaseCheck, Option<Value>)> = points
        .par_iter()
        .map(|p| check_base(&atlas, &f, p, cfg))
        .collect::<Result<_>>()?;
    let failures = checks.iter().filter(|c| !c.0.ok).count();
    let first_failure = checks.iter().find(|c| !c.0.ok).map(|c| &c.0);
    let min_norm = checks.iter().filter(|c| c.0.error.is_none()).map(|c| c.0.min_norm).fold(f64::INFINITY, f64::min);
    let max_vertex_norm = checks.iter().filter(|c| c.0.error.is_none()).map(|c| c.0.max_vertex_norm).fold(0.0, f64::max);

    let n = f.dim();
    let rows = checks.iter().map(|(c, _)| {
        let mut row: Vec<String> = coords(&c.x).collect();
        row.extend([
            c.active_charts.to_string(),
            c.base_vertices.to_string(),
            num(c.min_norm),
            num(c.max_vertex_norm),
            c.ok.to_string(),
        ]);
        row
    });
    let header = coord_header(&[], n, &["active_charts", "base_vertices", "min_norm", "max_vertex_norm", "ok"]);
    let bytes = csv_bytes(&header, rows)?;
    let detail = if cfg.at.is_some() { checks[0].1.clone() } else { None };
    Ok(Outcome {
        verdict: Verdict::from_pass(failures == 0),
        result: json!({
            "points": checks.len(),
            "failures": failures,
            "first_failure": first_failure,
            "min_norm": min_norm,
            "max_vertex_norm": max_vertex_norm,
            "detail": detail,
        }),
        artifacts: vec![Artifact { name: "base.csv", bytes }],
    })
}

fn usc(inst: &Loaded, cfg: &RunConfig, name: &str) -> Result<Outcome> {
    let f = inst.step(cfg.tol, name)?;
    let atlas = inst.atlas(&f, cfg.mesh, name)?;
    let x = cfg.at(name, f.dim())?;
    let probe = ProbeConfig {
        radii: cfg.radii.clone().unwrap_or_else(|| DEFAULT_RADII.to_vec()),
        seed: cfg.seed,
        ..ProbeConfig::default()
    };
    let report = usc_probe(|y: &[f64]| global_base(&atlas, &f, y).map(|b| b.base), x, &probe)?;
    let rows = report
        .radii
        .iter()
        .zip(&report.deviations)
        .map(|(r, d)| vec![num(*r), num(*d)]);
    let bytes = csv_bytes(&["radius".to_string(), "deviation".to_string()], rows)?;
    Ok(Outcome {
        verdict: Verdict::from_pass(report.pass),
        result: json!({ "probe": report, "samples_per_radius": probe.samples_per_radius }),
        artifacts: vec![Artifact { name: "usc.csv", bytes }],
    })
}

fn closedness(inst: &Loaded, cfg: &RunConfig, name: &str) -> Result<Outcome> {
    let f = inst.step(cfg.tol, name)?;
    let x = cfg.at(name, f.dim())?;
    let report = closedness_probe(&f, x, PROBE_BUDGET, cfg.seed)?;
    Ok(outcome(Verdict::from_pass(report.pass), json!(report)))
}

fn quasimono(inst: &Loaded, cfg: &RunConfig, name: &str) -> Result<Outcome> {
    let f = inst.step(cfg.tol, name)?;
    let report = quasimonotonicity_probe(&f, PROBE_BUDGET, cfg.seed)?;
    Ok(outcome(Verdict::from_pass(report.pass), json!(report)))
}

fn status_verdict(status: SolveStatus) -> Verdict {
    match status {
        SolveStatus::Solved => Verdict::Solved,
        SolveStatus::ResidualFloor => Verdict::ResidualFloor,
        SolveStatus::Infeasible => Verdict::Infeasible,
    }
}

fn trace_artifact(trace: &[TracePoint], n: usize) -> Result<Artifact> {
    let rows = trace.iter().map(|t| {
        let mut row = vec![t.start.to_string(), t.iteration.to_string(), num(t.residual)];
        row.extend(coords(&t.x));
        row
    });
    Ok(Artifact {
        name: "trace.csv",
        bytes: csv_bytes(&coord_header(&["start", "iteration", "residual"], n, &[]), rows)?,
    })
}

fn solve_gqvi(inst: &Loaded, cfg: &RunConfig, name: &str) -> Result<Outcome> {
    let mut g = inst.gqvi(cfg.tol, name)?;
    g.solver.seed = cfg.seed;
    g.solver.trace = cfg.trace;
    if let Some(m) = cfg.mesh {
        g.solver.mesh = m;
    }
    g.validate()?;
    let mut report = solve(&g)?;
    let trace = std::mem::take(&mut report.trace);
    let sion = if report.status == SolveStatus::Infeasible {
        None
    } else {
        Some(sion_check(&g.t.eval(&report.x)?, &g.k.at(&report.x)?, &report.x)?)
    };
    let hypotheses = hypothesis_report(&g.k, HYPOTHESIS_SAMPLES, cfg.seed, &[])?;
    let mut artifacts = Vec::new();
    if cfg.trace {
        artifacts.push(trace_artifact(&trace, g.k.dim())?);
    }
    Ok(Outcome {
        verdict: status_verdict(report.status),
        result: json!({
            "solve": report,
            "sion": sion,
            "hypotheses": hypotheses,
            "solver": g.solver,
        }),
        artifacts,
    })
}

fn quasiopt(inst: &Loaded, cfg: &RunConfig, name: &str) -> Result<Outcome> {
    let mut q = inst.quasiopt(cfg.tol, name)?;
    q.solver.seed = cfg.seed;
    q.solver.trace = cfg.trace;
    if let Some(m) = cfg.mesh {
        q.verify_mesh = m;
    }
    let mut report = solve_quasiopt(&q)?;
    let trace = std::mem::take(&mut report.gqvi.trace);
    let verdict = match report.gqvi.status {
        SolveStatus::Solved if report.verified => Verdict::Solved,
        SolveStatus::Solved => Verdict::Fail,
        other => status_verdict(other),
    };
    let mut artifacts = Vec::new();
    if cfg.trace {
        artifacts.push(trace_artifact(&trace, q.f.dim())?);
    }
    Ok(Outcome {
        verdict,
        result: json!({
            "quasiopt": report,
            "verify_mesh": q.verify_mesh,
            "atlas_charts": q.atlas.charts().len(),
        }),
        artifacts,
    })
}

#[derive(Serialize)]
struct Candidate {
    feasible: bool,
    minimax: Option<Minimax>,
    verified: bool,
    error: Option<String>,
}

/// Membership and residual at `x`; a point where `K` or `T` is undefined is
/// reported rather than raised.
fn check_candidate(g: &GqviInstance, x: &[f64]) -> Result<Candidate> {
    let feasible = match g.k.at(x) {
        Ok(kx) => kx.contains(x, g.tol.feas)?,
        Err(Error::EmptyPolytope) => false,
        Err(e) => return Err(e.into()),
    };
    Ok(match verify_candidate(g, x) {
        Ok((verified, m)) => Candidate {
            feasible,
            minimax: Some(m),
            verified,
            error: None,
        },
        Err(e @ (Error::EmptyPolytope | Error::CoverageHole { .. } | Error::Precondition(_))) => Candidate {
            feasible,
            minimax: None,
            verified: false,
            error: Some(e.to_string()),
        },
        Err(e) => return Err(e.into()),
    })
}

fn grid_min(f: &StepLevelFunction, kx: &Polytope, h: f64) -> Result<f64> {
    let (lo, hi) = kx.bounding_box()?;
    let mut best = f64::INFINITY;
    for y in box_grid(&lo, &hi, h) {
        if kx.contains(&y, 1e-12)? {
            best = best.min(f.evaluate(&y)?);
        }
    }
    for v in kx.vertices()? {
        best = best.min(f.evaluate(v)?);
    }
    Ok(best)
}

fn verify(inst: &Loaded, cfg: &RunConfig, name: &str) -> Result<Outcome> {
    if !inst.is_quasiopt() {
        let g = inst.gqvi(cfg.tol, name)?;
        let x = cfg.at(name, g.k.dim())?;
        let c = check_candidate(&g, x)?;
        return Ok(outcome(Verdict::from_pass(c.verified), json!({ "x": x, "candidate": c })));
    }
    let mut q = inst.quasiopt(cfg.tol, name)?;
    if let Some(m) = cfg.mesh {
        q.verify_mesh = m;
    }
    let x = cfg.at(name, q.f.dim())?;
    let c = check_candidate(&q.gqvi()?, x)?;
    let value = q.f.evaluate(x)?;
    let in_argmin = q.f.in_argmin(x)?;
    let h = (q.verify_mesh * q.k.fixed_point_set()?.diameter()?).max(1e-9);
    let gmin = if c.feasible { Some(grid_min(&q.f, &q.k.at(x)?, h)?) } else { None };
    let optimal = in_argmin || gmin.is_some_and(|m| value <= m + TOL_OPT);
    Ok(outcome(
        Verdict::from_pass(c.verified && optimal),
        json!({
            "x": x,
            "candidate": c,
            "value": value,
            "grid_min": gmin,
            "grid_mesh": h,
            "in_argmin": in_argmin,
            "optimal": optimal,
        }),
    ))
}
