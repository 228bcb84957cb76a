//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::time::{Duration, Instant};

use adjcone_core::geometry::Polytope;
use adjcone_core::gqvi::{
    grid_minmax, minimax_value, sion_check, solve, ConstraintMap, GqviInstance, MovingPolytope, PolytopeOperator,
    SolveStatus,
};
use adjcone_core::instances;
use adjcone_core::linalg::{box_grid, dot, norm};
use adjcone_core::normal_op::{
    build_atlas, build_atlas_excluding_argmin, closedness_probe, global_base, quasimonotonicity_probe,
    strict_normal_cone, usc_probe, Atlas, ProbeConfig,
};
use adjcone_core::quasiconvex::{
    adjusted_convexity_check, quasiconvexity_check, sandwich_check, Function, SamplingPlan, StepLevelFunction,
};
use adjcone_core::quasiopt::{brute_force_quasiopt, solve_quasiopt, QuasioptInstance, TOL_OPT};
use adjcone_core::stream_rng;
use rand::Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg)
    }
}

fn within(elapsed: Duration, limit_s: f64, what: &str) -> Result<(), String> {
    check(
        elapsed.as_secs_f64() < limit_s,
        format!("{what} took {:.1} s, limit {limit_s} s", elapsed.as_secs_f64()),
    )
}

struct Shipped {
    name: &'static str,
    f: StepLevelFunction,
    atlas: Atlas,
    /// Grid spacing for the base checks.
    base_mesh: f64,
}

fn shipped_atlases() -> Vec<Shipped> {
    let step1d = instances::step1d();
    let sq2d = instances::sq2d();
    let nested = instances::random_nested_3d(7);
    vec![
        Shipped {
            name: "step1d",
            atlas: build_atlas(&step1d, &Polytope::from_box(&[0.25], &[1.75]).unwrap(), 0.25).unwrap(),
            f: step1d,
            base_mesh: 0.01,
        },
        Shipped {
            name: "sq2d",
            atlas: build_atlas_excluding_argmin(&sq2d, &Polytope::cube(2, 2.0).unwrap(), 0.25).unwrap(),
            f: sq2d,
            base_mesh: 0.2,
        },
        Shipped {
            name: "nested3d",
            atlas: build_atlas_excluding_argmin(
                &nested,
                &Polytope::from_box(&[1.5, -0.25, -0.25], &[2.0, 0.25, 0.25]).unwrap(),
                0.25,
            )
            .unwrap(),
            f: nested,
            base_mesh: 0.1,
        },
    ]
}

fn base_grid(s: &Shipped) -> Vec<Vec<f64>> {
    let (lo, hi) = s.atlas.region().bounding_box().unwrap();
    box_grid(&lo, &hi, s.base_mesh)
        .into_iter()
        .filter(|p| s.atlas.in_domain(p).unwrap())
        .collect()
}

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let plan = SamplingPlan {
        base_points: 100,
        pairs: 10,
        seed: 42,
    };
    let mut pairs = 0;
    for (name, f) in [
        ("step1d", instances::step1d()),
        ("sq2d", instances::sq2d()),
        ("nested3d", instances::random_nested_3d(7)),
    ] {
        let r = sandwich_check(&Function::Step(f), &plan).map_err(|e| e.to_string())?;
        check(r.violations == 0, format!("{name}: {} violations, witness {:?}", r.violations, r.witness))?;
        check(r.pairs >= 1000, format!("{name}: only {} pairs", r.pairs))?;
        pairs += r.pairs;
    }
    within(started.elapsed(), 10.0, "sandwich")?;
    Ok(format!("{pairs} pairs on 3 instances, 0 violations, {:.1} s", started.elapsed().as_secs_f64()))
}

fn criterion_2() -> Outcome {
    let started = Instant::now();
    let plan = SamplingPlan::default();
    let cases = [
        ("step1d", Function::Step(instances::step1d()), true),
        ("sq2d", Function::Step(instances::sq2d()), true),
        ("two_wells", Function::Analytic(instances::two_wells()), false),
        ("corrupted_gap", Function::Step(instances::corrupted_gap()), false),
    ];
    for (name, f, quasiconvex) in &cases {
        let q = quasiconvexity_check(f, &plan).map_err(|e| e.to_string())?;
        let a = adjusted_convexity_check(f, &plan).map_err(|e| e.to_string())?;
        if *quasiconvex {
            check(q.pass && a.pass, format!("{name}: expected both checks to pass ({} / {})", q.pass, a.pass))?;
        } else {
            check(
                !q.pass && !a.pass && q.witness.is_some() && a.witness.is_some(),
                format!("{name}: expected both checks to fail with witnesses ({} / {})", q.pass, a.pass),
            )?;
        }
    }
    within(started.elapsed(), 30.0, "equivalence")?;
    Ok(format!("4 instances agree, {:.1} s", started.elapsed().as_secs_f64()))
}

fn criterion_3(atlases: &[Shipped]) -> Outcome {
    let mut summary = Vec::new();
    for s in atlases {
        let grid = base_grid(s);
        check(grid.len() >= 100, format!("{}: grid has only {} points", s.name, grid.len()))?;
        let tol = s.f.tolerances();
        let origin = vec![0.0; s.f.dim()];
        let mut min_norm = f64::INFINITY;
        let mut max_vertex: f64 = 0.0;
        for p in &grid {
            // global_base itself fails on any invariant violation; recheck the numbers here.
            let b = global_base(&s.atlas, &s.f, p).map_err(|e| format!("{} at {p:?}: {e}", s.name))?;
            let cone = adjcone_core::geometry::GeneratedCone::from_base(&b.base).unwrap();
            check(cone.equals(&b.cone, 1e-6).unwrap(), format!("{}: cone mismatch at {p:?}", s.name))?;
            min_norm = min_norm.min(b.base.distance(&origin).unwrap());
            for v in b.base.vertices().unwrap() {
                max_vertex = max_vertex.max(norm(v));
            }
        }
        check(min_norm >= tol.zero, format!("{}: min-norm {min_norm}", s.name))?;
        check(max_vertex <= 1.0 + 1e-9, format!("{}: vertex norm {max_vertex}", s.name))?;
        summary.push(format!("{} {} pts min-norm {:.3} max-norm {:.3}", s.name, grid.len(), min_norm, max_vertex));
    }
    Ok(summary.join("; "))
}

fn criterion_4(atlases: &[Shipped]) -> Outcome {
    let mut points = 0;
    for s in atlases {
        for p in s.atlas.verification_grid().unwrap() {
            let w = s.atlas.weights(&p);
            check(!w.is_empty(), format!("{}: hole at {p:?}", s.name))?;
            let sum: f64 = w.iter().map(|w| w.1).sum();
            check((sum - 1.0).abs() <= 1e-12, format!("{}: weights sum to {sum} at {p:?}", s.name))?;
            for (i, ch) in s.atlas.charts().iter().enumerate() {
                let wi = w.iter().find(|w| w.0 == i).map_or(0.0, |w| w.1);
                check(wi >= 0.0, format!("{}: negative weight", s.name))?;
                check(wi == 0.0 || ch.in_ball(&p, 0.0), format!("{}: chart {i} weighs outside its ball", s.name))?;
            }
            points += 1;
        }
    }
    Ok(format!("{points} verification points on {} atlases", atlases.len()))
}

fn criterion_5(atlases: &[Shipped]) -> Outcome {
    let mut checked = 0;
    let mut worst = f64::INFINITY;
    for s in atlases {
        for (ci, ch) in s.atlas.charts().iter().enumerate() {
            let mut rng = stream_rng(5, ci as u64);
            let mut drawn = 0;
            let mut attempts = 0;
            while drawn < 50 && attempts < 10_000 {
                attempts += 1;
                let x: Vec<f64> = ch.z.iter().map(|z| z + ch.eps * rng.gen_range(-1.0..1.0)).collect();
                if !ch.in_ball(&x, 0.0) || s.f.level_index(&x).unwrap().is_none() {
                    continue;
                }
                drawn += 1;
                let cone = strict_normal_cone(&s.f, &x).map_err(|e| format!("{}: {e}", s.name))?;
                for g in cone.generators() {
                    let slack = dot(g, &ch.c) - ch.eps * norm(g);
                    worst = worst.min(slack);
                    check(slack >= -1e-9, format!("{} chart {ci} at {x:?}: slack {slack}", s.name))?;
                    checked += 1;
                }
            }
            check(drawn == 50, format!("{} chart {ci}: only {drawn} in-domain points", s.name))?;
        }
    }
    Ok(format!("{checked} generator checks, smallest slack {worst:.3e}"))
}

fn criterion_6(atlases: &[Shipped]) -> Outcome {
    let cfg = ProbeConfig::default();
    let mut failures = Vec::new();
    let mut worst_terminal: f64 = 0.0;
    let mut probes = 0;
    for s in atlases {
        let mut points = Vec::new();
        if s.name == "step1d" {
            points.push(vec![1.0]);
        }
        let grid = base_grid(s);
        let stride = (grid.len() / 20).max(1);
        points.extend(grid.iter().step_by(stride).take(20 - points.len()).cloned());
        check(points.len() >= 20, format!("{}: only {} probe points", s.name, points.len()))?;
        for x in &points {
            let r = usc_probe(|y| Ok(global_base(&s.atlas, &s.f, y)?.base), x, &cfg).map_err(|e| e.to_string())?;
            probes += 1;
            worst_terminal = worst_terminal.max(r.terminal_deviation);
            if !r.pass {
                failures.push(format!("{} {:?}: {:?}", s.name, x, r.deviations));
            }
        }
    }
    let jump = usc_probe(
        |y| Polytope::singleton(&[if y[0] < 1.0 { 0.25 } else { 0.3 }]),
        &[1.0],
        &cfg,
    )
    .map_err(|e| e.to_string())?;
    check(!jump.pass, "injected discontinuity passed the probe".into())?;
    if failures.is_empty() {
        Ok(format!("{probes} probe points, worst terminal deviation {worst_terminal:.2e}; jump double rejected"))
    } else {
        Err(format!(
            "{} of {probes} probe points exceed the terminal threshold (worst {worst_terminal:.2e}); first: {}",
            failures.len(),
            failures[0]
        ))
    }
}

fn criterion_7() -> Outcome {
    let mut summary = Vec::new();
    // On a facet of the domain about half of the approach directions leave it,
    // so that point draws more sequences.
    let cases: [(&str, StepLevelFunction, Vec<f64>, usize); 3] = [
        ("step1d", instances::step1d(), vec![1.0], 1000),
        ("sq2d", instances::sq2d(), vec![2.0, 0.0], 2200),
        ("nested3d", instances::random_nested_3d(7), vec![2.0, 0.0, 0.0], 1000),
    ];
    for (name, f, x, sequences) in &cases {
        let c = closedness_probe(f, x, *sequences, 7).map_err(|e| e.to_string())?;
        check(c.pass, format!("{name}: {} closedness violations, e.g. {:?}", c.violations, c.witnesses.first()))?;
        check(c.checked >= 1000, format!("{name}: only {} sequences stay in the domain", c.checked))?;
        let q = quasimonotonicity_probe(f, 1000, 7).map_err(|e| e.to_string())?;
        check(q.pass, format!("{name}: {} quasimonotonicity violations", q.violations))?;
        summary.push(format!("{name} {}+{}", c.checked, q.pairs));
    }
    let bad = quasimonotonicity_probe(&instances::corrupted_far_level(), 1000, 7).map_err(|e| e.to_string())?;
    check(bad.violations >= 1, "corrupted instance shows no violation".into())?;
    Ok(format!(
        "sequences+pairs {}, 0 violations; corrupted instance {} violations",
        summary.join(", "),
        bad.violations
    ))
}

fn segment_instance() -> GqviInstance {
    let t = Polytope::from_vertices(&[vec![1.0, 0.0], vec![0.2, 1.0]]).unwrap();
    GqviInstance::new(
        MovingPolytope::moving_window(Polytope::cube(2, 1.0).unwrap(), 0.5),
        PolytopeOperator::constant(t),
    )
    .unwrap()
}

fn criterion_8() -> Outcome {
    let cases = [
        ("moving_interval", instances::moving_interval()),
        ("segment2d", segment_instance()),
        ("normal_base_step1d", instances::quasiopt_step1d_window().gqvi().unwrap()),
        ("normal_base_sq2d", instances::quasiopt_sq2d_window().gqvi().unwrap()),
    ];
    let mut worst_gap: f64 = 0.0;
    let mut worst_grid: f64 = 0.0;
    for (ci, (name, inst)) in cases.iter().enumerate() {
        let fix = inst.k.fixed_point_set().unwrap();
        let mut rng = stream_rng(8, ci as u64);
        let mut probed = 0;
        let mut attempts = 0;
        while probed < 100 {
            attempts += 1;
            check(attempts < 10_000, format!("{name}: too few evaluable points"))?;
            let x = fix.sample(&mut rng, 1).unwrap().remove(0);
            let Ok(tx) = inst.t.eval(&x) else { continue };
            let kx = inst.k.at(&x).unwrap();
            let s = sion_check(&tx, &kx, &x).map_err(|e| e.to_string())?;
            worst_gap = worst_gap.max(s.gap);
            check(s.gap <= 1e-8, format!("{name} at {x:?}: gap {}", s.gap))?;
            if probed < 3 {
                let h = if x.len() == 1 { 1e-4 } else { 5e-4 };
                let g = grid_minmax(&tx, &kx, &x, h).unwrap();
                worst_grid = worst_grid.max((g - s.minmax).abs());
                check((g - s.minmax).abs() <= 1e-3, format!("{name} at {x:?}: grid {g} vs {}", s.minmax))?;
            }
            probed += 1;
        }
    }
    Ok(format!("4 instances x 100 points, worst gap {worst_gap:.1e}, worst grid deviation {worst_grid:.1e}"))
}

fn criterion_9() -> Outcome {
    let inst = instances::moving_interval();
    let r = solve(&inst).map_err(|e| e.to_string())?;
    check(r.status == SolveStatus::Solved, format!("status {:?}", r.status))?;
    check((r.x[0] + 2.0).abs() <= 1e-6, format!("x = {:?}", r.x))?;
    check(r.residual >= -1e-6, format!("residual {}", r.residual))?;
    let fix = inst.k.fixed_point_set().unwrap();
    let (lo, hi) = fix.bounding_box().unwrap();
    let h = fix.diameter().unwrap() / 64.0;
    let mut best = (f64::NEG_INFINITY, vec![]);
    for x in box_grid(&lo, &hi, h) {
        let m = minimax_value(&inst.t.eval(&x).unwrap(), &inst.k.at(&x).unwrap(), &x).unwrap();
        if m.value > best.0 {
            best = (m.value, x);
        }
    }
    check((best.0 - r.residual).abs() <= 1e-3, format!("grid residual {} vs {}", best.0, r.residual))?;
    check((best.1[0] + 2.0).abs() <= h, format!("grid maximizer {:?}", best.1))?;
    Ok(format!("x = {:.6}, residual {:.1e}, grid max {:.1e} at {:?}", r.x[0], r.residual, best.0, best.1))
}

fn criterion_10() -> Outcome {
    let started = Instant::now();
    let cases: [(&str, QuasioptInstance); 3] = [
        ("step1d_window", instances::quasiopt_step1d_window()),
        ("sq2d_window", instances::quasiopt_sq2d_window()),
        ("step1d_box", instances::quasiopt_step1d_box()),
    ];
    let mut summary = Vec::new();
    for (name, inst) in &cases {
        let r = solve_quasiopt(inst).map_err(|e| format!("{name}: {e}"))?;
        check(r.verified, format!("{name}: not verified: {r:?}"))?;
        check(r.value <= r.grid_min + TOL_OPT, format!("{name}: f = {} > grid min {}", r.value, r.grid_min))?;
        if *name == "step1d_box" {
            let (lo, hi) = inst.k.bounds().bounding_box().unwrap();
            let classical = box_grid(&lo, &hi, r.brute_force.mesh)
                .iter()
                .map(|y| inst.f.evaluate(y).unwrap())
                .fold(f64::INFINITY, f64::min);
            check(r.value == classical, format!("{name}: f = {} vs classical min {classical}", r.value))?;
            let argmin = brute_force_quasiopt(inst, r.brute_force.mesh).unwrap();
            check(
                argmin.iter().all(|y| inst.f.evaluate(y).unwrap() == classical),
                format!("{name}: brute force disagrees with the grid argmin"),
            )?;
        }
        summary.push(format!("{name} x={:?} f={}", r.x, r.value));
    }
    within(started.elapsed(), 300.0, "quasiopt suite")?;
    Ok(format!("{}; {:.1} s", summary.join(", "), started.elapsed().as_secs_f64()))
}

fn main() {
    let atlases = shipped_atlases();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("sandwich property", Box::new(criterion_1)),
        ("quasiconvexity equivalence", Box::new(criterion_2)),
        ("compact base", Box::new(|| criterion_3(&atlases))),
        ("partition of unity", Box::new(|| criterion_4(&atlases))),
        ("chart estimate", Box::new(|| criterion_5(&atlases))),
        ("upper semicontinuity probe", Box::new(|| criterion_6(&atlases))),
        ("closedness and quasimonotonicity", Box::new(criterion_7)),
        ("minimax gap", Box::new(criterion_8)),
        ("GQVI hand instance", Box::new(criterion_9)),
        ("quasioptimization end to end", Box::new(criterion_10)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(run))
            .unwrap_or_else(|_| Err("panicked".into()));
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {:>2} {name}: PASS ({msg}) [{secs:.1} s]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({msg}) [{secs:.1} s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
