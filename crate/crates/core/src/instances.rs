//! Small reference instances used by tests, examples and the CLI.

use rand::Rng;

use crate::geometry::{Halfspace, Polytope};
use crate::gqvi::{GqviInstance, MovingPolytope, PolytopeOperator};
use crate::quasiopt::QuasioptInstance;
use crate::linalg::normalized;
use crate::quasiconvex::{AnalyticFunction, AnalyticKind, StepLevelFunction};
use crate::stream_rng;
use crate::tolerance::ToleranceConfig;

fn interval(lo: f64, hi: f64) -> Polytope {
    Polytope::from_box(&[lo], &[hi]).expect("valid interval")
}

/// Levels 0, 1, 2 on `[-1,0] ⊆ [-1,1] ⊆ [-1,2]`.
pub fn step1d() -> StepLevelFunction {
    StepLevelFunction::new(
        vec![0.0, 1.0, 2.0],
        vec![interval(-1.0, 0.0), interval(-1.0, 1.0), interval(-1.0, 2.0)],
        ToleranceConfig::default(),
    )
    .expect("nested family")
}

/// Levels 1, 2 on the squares `[-1,1]^2 ⊆ [-2,2]^2`.
pub fn sq2d() -> StepLevelFunction {
    StepLevelFunction::new(
        vec![1.0, 2.0],
        vec![Polytope::cube(2, 1.0).unwrap(), Polytope::cube(2, 2.0).unwrap()],
        ToleranceConfig::default(),
    )
    .expect("nested family")
}

/// Non-nested family `[-2,-1]`, `[0.5,2]` at levels 0, 1: the domain has a gap.
pub fn corrupted_gap() -> StepLevelFunction {
    StepLevelFunction::new_unchecked(
        vec![0.0, 1.0],
        vec![interval(-2.0, -1.0), interval(0.5, 2.0)],
        ToleranceConfig::default(),
    )
    .expect("valid levels")
}

/// Non-nested family whose level-2 piece `[10,11]` sits far from the lower
/// ones, so the strict sublevel realization at level 3 points the wrong way.
pub fn corrupted_far_level() -> StepLevelFunction {
    StepLevelFunction::new_unchecked(
        vec![0.0, 1.0, 2.0, 3.0],
        vec![
            interval(0.0, 1.0),
            interval(0.0, 3.0),
            interval(10.0, 11.0),
            interval(0.0, 11.0),
        ],
        ToleranceConfig::default(),
    )
    .expect("valid levels")
}

/// Four nested random polytopes in R^3: eight random facets at offsets
/// `1 + 0.5 j` intersected with the cube of half-width `2 + 0.5 j`.
pub fn random_nested_3d(seed: u64) -> StepLevelFunction {
    let mut rng = stream_rng(seed, 0);
    let normals: Vec<Vec<f64>> = (0..8)
        .map(|_| loop {
            let v: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if let Some(u) = normalized(&v) {
                break u;
            }
        })
        .collect();
    let polys = (0..4)
        .map(|j| {
            let s = 0.5 * j as f64;
            let mut hs: Vec<Halfspace> = normals.iter().map(|n| Halfspace::new(n.clone(), 1.0 + s)).collect();
            for i in 0..3 {
                for sign in [1.0, -1.0] {
                    let mut e = vec![0.0; 3];
                    e[i] = sign;
                    hs.push(Halfspace::new(e, 2.0 + s));
                }
            }
            Polytope::new(3, hs).expect("contains the unit ball")
        })
        .collect();
    StepLevelFunction::new(vec![0.0, 1.0, 2.0, 3.0], polys, ToleranceConfig::default())
        .expect("nested by construction")
}

/// `| x^2 - 1 |` on `[-2, 2]`.
pub fn two_wells() -> AnalyticFunction {
    AnalyticFunction::new(AnalyticKind::TwoWells, interval(-2.0, 2.0), ToleranceConfig::default())
        .expect("valid box")
}

/// `max_i |x_i|` on `[-2, 2]^n`.
pub fn max_abs(n: usize) -> AnalyticFunction {
    AnalyticFunction::new(AnalyticKind::MaxAbs, Polytope::cube(n, 2.0).unwrap(), ToleranceConfig::default())
        .expect("valid box")
}

/// `|x|` on `[-2, 2]^n`.
pub fn norm(n: usize) -> AnalyticFunction {
    AnalyticFunction::new(AnalyticKind::Norm, Polytope::cube(n, 2.0).unwrap(), ToleranceConfig::default())
        .expect("valid box")
}

/// `K(x) = [x/2 - 1, x/2 + 1] ∩ [-2, 2]`.
pub fn moving_interval_constraint() -> MovingPolytope {
    MovingPolytope::new(
        vec![vec![1.0], vec![-1.0]],
        vec![1.0, 1.0],
        vec![vec![0.5], vec![-0.5]],
        interval(-2.0, 2.0),
    )
    .expect("consistent shapes")
}

/// The moving interval with `T(x) = {1}`; its only solution is `x = -2`.
pub fn moving_interval() -> GqviInstance {
    GqviInstance::new(
        moving_interval_constraint(),
        PolytopeOperator::constant(Polytope::singleton(&[1.0]).unwrap()),
    )
    .expect("valid instance")
}

/// STEP1D with the window `K(x) = [x - 0.5, x + 0.5] ∩ [-1, 2]`.
pub fn quasiopt_step1d_window() -> QuasioptInstance {
    QuasioptInstance::new(step1d(), MovingPolytope::moving_window(interval(-1.0, 2.0), 0.5), 0.25)
        .expect("valid instance")
}

/// STEP1D with `K(x) = [-1, 2]` for every `x`.
pub fn quasiopt_step1d_box() -> QuasioptInstance {
    QuasioptInstance::new(step1d(), MovingPolytope::constant_box(interval(-1.0, 2.0)), 0.25)
        .expect("valid instance")
}

/// SQ2D with the moving box `K(x) = (x + [-0.5, 0.5]^2) ∩ [-2, 2]^2`.
pub fn quasiopt_sq2d_window() -> QuasioptInstance {
    QuasioptInstance::new(sq2d(), MovingPolytope::moving_window(Polytope::cube(2, 2.0).unwrap(), 0.5), 0.25)
        .expect("valid instance")
}
