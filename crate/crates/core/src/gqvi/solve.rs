use std::cmp::Ordering;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::minimax::{minimax_value, Minimax};
use super::{ConstraintMap, GqviInstance};
use crate::error::{Error, Result};
use crate::geometry::Polytope;
use crate::linalg::{box_grid, norm};
use crate::stream_rng;

/// Largest grid the exhaustive fallback will scan.
const MAX_GRID_POINTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Random starts drawn from fix K, in addition to its vertices and
    /// Chebyshev center.
    pub starts: usize,
    pub gamma: f64,
    pub max_iter: usize,
    /// Fallback grid spacing as a fraction of the diameter of fix K.
    pub mesh: f64,
    pub tol_solve: f64,
    pub seed: u64,
    pub trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            starts: 8,
            gamma: 0.5,
            max_iter: 200,
            mesh: 1.0 / 32.0,
            tol_solve: 1e-6,
            seed: 42,
            trace: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::InvalidArgument(format!("damping {} must lie in (0, 1]", self.gamma)));
        }
        if !(self.mesh > 0.0 && self.tol_solve > 0.0) {
            return Err(Error::InvalidArgument("mesh and solve tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Solved,
    ResidualFloor,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TracePoint {
    pub start: usize,
    pub iteration: usize,
    pub x: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub residual: f64,
    pub x_star: Vec<f64>,
    pub iterations: usize,
    /// `multistart` or `grid`.
    pub source: &'static str,
    #[serde(skip)]
    pub wall_time: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TracePoint>,
}

#[derive(Debug, Clone)]
struct Candidate {
    x: Vec<f64>,
    m: Minimax,
    feasible: bool,
    iterations: usize,
}

impl Candidate {
    fn solved(&self, tol: f64) -> bool {
        self.feasible && self.m.value >= -tol
    }
}

/// Total order: solved first, then larger residual, smaller norm, and
/// lexicographically smaller point.
fn better(a: &Candidate, b: &Candidate, tol: f64) -> Ordering {
    b.solved(tol)
        .cmp(&a.solved(tol))
        .then(b.m.value.total_cmp(&a.m.value))
        .then(norm(&a.x).total_cmp(&norm(&b.x)))
        .then_with(|| {
            a.x.iter()
                .zip(&b.x)
                .map(|(p, q)| p.total_cmp(q))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
}

fn is_hole(e: &Error) -> bool {
    matches!(
        e,
        Error::CoverageHole { .. } | Error::Precondition(_) | Error::EmptyPolytope
    )
}

/// Evaluates `K(x)`, `T(x)` and the minimax value; `None` where either map is
/// undefined.
fn evaluate(inst: &GqviInstance, x: &[f64]) -> Result<Option<Candidate>> {
    let kx = match inst.k.at(x) {
        Ok(k) => k,
        Err(e) if is_hole(&e) => return Ok(None),
        Err(e) => return Err(e),
    };
    let tx = match inst.t.eval(x) {
        Ok(t) => t,
        Err(e) if is_hole(&e) => return Ok(None),
        Err(e) => return Err(e),
    };
    let m = minimax_value(&tx, &kx, x)?;
    Ok(Some(Candidate {
        x: x.to_vec(),
        feasible: kx.contains(x, inst.tol.feas)?,
        m,
        iterations: 0,
    }))
}

/// Recomputes membership and residual at `x` from scratch.
pub fn verify_candidate(inst: &GqviInstance, x: &[f64]) -> Result<(bool, Minimax)> {
    let kx = inst.k.at(x)?;
    let tx = inst.t.eval(x)?;
    let m = minimax_value(&tx, &kx, x)?;
    let ok = kx.contains(x, inst.tol.feas)? && m.value >= -inst.solver.tol_solve;
    Ok((ok, m))
}

fn run_start(
    inst: &GqviInstance,
    fix: &Polytope,
    idx: usize,
    start: &[f64],
) -> Result<(Option<Candidate>, Vec<TracePoint>)> {
    let cfg = &inst.solver;
    let mut x = fix.project(start)?.point;
    let mut best: Option<Candidate> = None;
    let mut trace = Vec::new();
    for it in 0..cfg.max_iter {
        let Some(mut c) = evaluate(inst, &x)? else {
            break;
        };
        c.iterations = it + 1;
        if cfg.trace {
            trace.push(TracePoint {
                start: idx,
                iteration: it,
                x: x.clone(),
                residual: c.m.value,
            });
        }
        let next: Vec<f64> = x
            .iter()
            .zip(&c.m.y_star)
            .map(|(a, y)| (1.0 - cfg.gamma) * a + cfg.gamma * y)
            .collect();
        let done = c.solved(cfg.tol_solve);
        if best.as_ref().is_none_or(|b| better(&c, b, cfg.tol_solve).is_lt()) {
            best = Some(c);
        }
        if done {
            break;
        }
        x = fix.project(&next)?.point;
    }
    Ok((best, trace))
}

/// Damped fixed-point iteration `x <- (1 - gamma) x + gamma y*(x)` from the
/// vertices, Chebyshev center and random points of fix K, kept in fix K by
/// projection. Without a verified solution, every lattice point of fix K at
/// spacing `mesh * diam` is scored and the best one returned.
pub fn solve(inst: &GqviInstance) -> Result<SolveReport> {
    inst.validate()?;
    let started = Instant::now();
    let cfg = &inst.solver;
    let fix = match inst.k.fixed_point_set() {
        Ok(f) => f,
        Err(Error::EmptyPolytope) => {
            return Ok(SolveReport {
                status: SolveStatus::Infeasible,
                x: Vec::new(),
                residual: f64::NEG_INFINITY,
                x_star: Vec::new(),
                iterations: 0,
                source: "multistart",
                wall_time: started.elapsed().as_secs_f64(),
                trace: Vec::new(),
            })
        }
        Err(e) => return Err(e),
    };
    let mut starts: Vec<Vec<f64>> = fix.vertices()?.to_vec();
    starts.push(fix.chebyshev_center()?.0);
    let mut rng = stream_rng(cfg.seed, 0);
    starts.extend(fix.sample(&mut rng, cfg.starts)?);

    let runs: Vec<(Option<Candidate>, Vec<TracePoint>)> = starts
        .par_iter()
        .enumerate()
        .map(|(i, s)| run_start(inst, &fix, i, s))
        .collect::<Result<_>>()?;
    let mut trace = Vec::new();
    let mut best: Option<Candidate> = None;
    for (c, t) in runs {
        trace.extend(t);
        if let Some(c) = c {
            if best.as_ref().is_none_or(|b| better(&c, b, cfg.tol_solve).is_lt()) {
                best = Some(c);
            }
        }
    }
    let mut source = "multistart";
    if !best.as_ref().is_some_and(|b| b.solved(cfg.tol_solve)) {
        let (lo, hi) = fix.bounding_box()?;
        let h = (cfg.mesh * fix.diameter()?).max(1e-12);
        let grid: Vec<Vec<f64>> = box_grid(&lo, &hi, h)
            .into_iter()
            .filter(|p| fix.contains_unchecked(p, inst.tol.feas))
            .collect();
        if grid.len() > MAX_GRID_POINTS {
            return Err(Error::ScaleBound {
                what: "fallback grid points",
                value: grid.len(),
                limit: MAX_GRID_POINTS,
            });
        }
        let scored: Vec<Option<Candidate>> =
            grid.par_iter().map(|p| evaluate(inst, p)).collect::<Result<_>>()?;
        for c in scored.into_iter().flatten() {
            if best.as_ref().is_none_or(|b| better(&c, b, cfg.tol_solve).is_lt()) {
                source = "grid";
                best = Some(c);
            }
        }
    }
    let Some(best) = best else {
        return Err(Error::Verification("no start or grid point could be evaluated".into()));
    };
    let status = if best.solved(cfg.tol_solve) {
        let (ok, _) = verify_candidate(inst, &best.x)?;
        if !ok {
            return Err(Error::Verification(format!("candidate {:?} failed re-verification", best.x)));
        }
        SolveStatus::Solved
    } else {
        SolveStatus::ResidualFloor
    };
    Ok(SolveReport {
        status,
        residual: best.m.value,
        x_star: best.m.x_star.clone(),
        x: best.x,
        iterations: best.iterations,
        source,
        wall_time: started.elapsed().as_secs_f64(),
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gqvi::{MovingPolytope, PolytopeOperator};
    use crate::instances;

    #[test]
    fn hand_instance_solves_to_left_end() {
        let r = solve(&instances::moving_interval()).unwrap();
        assert_eq!(r.status, SolveStatus::Solved);
        assert!((r.x[0] + 2.0).abs() < 1e-9, "{r:?}");
        assert!(r.residual >= -1e-6 && r.residual <= 1e-12);
    }

    #[test]
    fn interior_start_converges() {
        let mut inst = instances::moving_interval();
        inst.k = MovingPolytope::new(
            vec![vec![1.0], vec![-1.0]],
            vec![1.0, 1.0],
            vec![vec![0.5], vec![-0.5]],
            Polytope::from_box(&[-2.0], &[2.0]).unwrap(),
        )
        .unwrap();
        let fix = inst.k.fixed_point_set().unwrap();
        let (c, _) = run_start(&inst, &fix, 0, &[1.0]).unwrap();
        let c = c.unwrap();
        assert!(c.solved(1e-6));
        assert!((c.x[0] + 2.0).abs() < 1e-5);
        assert!(c.iterations > 10);
    }

    #[test]
    fn zero_operator_accepts_smallest_point() {
        let mut inst = instances::moving_interval();
        inst.t = PolytopeOperator::constant(Polytope::singleton(&[0.0]).unwrap());
        let r = solve(&inst).unwrap();
        assert_eq!(r.status, SolveStatus::Solved);
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn trace_is_recorded_on_request() {
        let mut inst = instances::moving_interval();
        inst.solver.trace = true;
        let r = solve(&inst).unwrap();
        assert!(!r.trace.is_empty());
        inst.solver.trace = false;
        assert!(solve(&inst).unwrap().trace.is_empty());
    }

    #[test]
    fn empty_fix_reports_infeasible() {
        let k = MovingPolytope::new(
            vec![vec![1.0], vec![-1.0]],
            vec![1.0, -1.0],
            vec![vec![1.0], vec![-1.0]],
            Polytope::from_box(&[-5.0], &[5.0]).unwrap(),
        )
        .unwrap();
        let inst = crate::gqvi::GqviInstance::new(k, PolytopeOperator::constant(Polytope::singleton(&[1.0]).unwrap()))
            .unwrap();
        assert_eq!(solve(&inst).unwrap().status, SolveStatus::Infeasible);
    }
}
