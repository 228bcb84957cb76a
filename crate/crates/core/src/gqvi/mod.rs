//! Generalized quasivariational inequalities: find `x in K(x)` and
//! `x* in T(x)` with `<x*, y - x> >= 0` for all `y in K(x)`, where `K` moves
//! affinely with `x` and `T` is polytope-valued.
mod hypotheses;
mod minimax;
mod operator;
mod solve;

pub use hypotheses::{hypothesis_report, HypothesisReport, LscProbe, LSC_RADII, LSC_TOL};
pub use minimax::{grid_minmax, minimax_value, sion_check, Minimax, SionReport};
pub use operator::{PolytopeOperator, Tabulation};
pub use solve::{solve, verify_candidate, SolveReport, SolveStatus, SolverConfig, TracePoint};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{Halfspace, Polytope};
use crate::linalg::dot;
use crate::tolerance::ToleranceConfig;

/// A set-valued constraint map over an ambient box.
pub trait ConstraintMap: Sync {
    fn dim(&self) -> usize;
    fn ambient(&self) -> &Polytope;
    fn at(&self, x: &[f64]) -> Result<Polytope>;

    /// The fixed-point set, when the map can compute it exactly.
    fn fixed_points(&self) -> Option<Result<Polytope>> {
        None
    }
}

/// `K(x) = {y : A y <= b + D x} ∩ box`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MovingPolytopeJson")]
pub struct MovingPolytope {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    #[serde(rename = "D")]
    d: Vec<Vec<f64>>,
    #[serde(rename = "box")]
    bounds: Polytope,
}

#[derive(Deserialize)]
struct MovingPolytopeJson {
    #[serde(rename = "A", default)]
    a: Vec<Vec<f64>>,
    #[serde(default)]
    b: Vec<f64>,
    #[serde(rename = "D", default)]
    d: Vec<Vec<f64>>,
    #[serde(rename = "box")]
    bounds: Polytope,
}

impl TryFrom<MovingPolytopeJson> for MovingPolytope {
    type Error = Error;

    fn try_from(j: MovingPolytopeJson) -> Result<Self> {
        MovingPolytope::new(j.a, j.b, j.d, j.bounds)
    }
}

impl MovingPolytope {
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>, d: Vec<Vec<f64>>, bounds: Polytope) -> Result<Self> {
        let n = bounds.dim();
        check_dim(a.len(), b.len())?;
        check_dim(a.len(), d.len())?;
        for (ra, rd) in a.iter().zip(&d) {
            check_dim(n, ra.len())?;
            check_dim(n, rd.len())?;
        }
        Ok(Self { a, b, d, bounds })
    }

    /// `K(x) = box` for every `x`.
    pub fn constant_box(bounds: Polytope) -> Self {
        Self {
            a: Vec::new(),
            b: Vec::new(),
            d: Vec::new(),
            bounds,
        }
    }

    /// `K(x) = (x + [-r, r]^n) ∩ box`.
    pub fn moving_window(bounds: Polytope, r: f64) -> Self {
        let n = bounds.dim();
        let mut a = Vec::new();
        let mut d = Vec::new();
        for i in 0..n {
            for s in [1.0, -1.0] {
                let mut e = vec![0.0; n];
                e[i] = s;
                a.push(e.clone());
                d.push(e);
            }
        }
        Self {
            b: vec![r; a.len()],
            a,
            d,
            bounds,
        }
    }

    pub fn bounds(&self) -> &Polytope {
        &self.bounds
    }

    /// `{x : (A - D) x <= b} ∩ box`.
    pub fn fixed_point_set(&self) -> Result<Polytope> {
        let n = self.dim();
        let mut hs: Vec<Halfspace> = self
            .a
            .iter()
            .zip(&self.d)
            .zip(&self.b)
            .map(|((ra, rd), &bi)| Halfspace::new((0..n).map(|k| ra[k] - rd[k]).collect(), bi))
            .collect();
        hs.extend(self.bounds.halfspaces().iter().cloned());
        Polytope::new(n, hs)
    }
}

impl ConstraintMap for MovingPolytope {
    fn dim(&self) -> usize {
        self.bounds.dim()
    }

    fn ambient(&self) -> &Polytope {
        &self.bounds
    }

    fn at(&self, x: &[f64]) -> Result<Polytope> {
        check_dim(self.dim(), x.len())?;
        let mut hs: Vec<Halfspace> = self
            .a
            .iter()
            .zip(&self.d)
            .zip(&self.b)
            .map(|((ra, rd), &bi)| Halfspace::new(ra.clone(), bi + dot(rd, x)))
            .collect();
        hs.extend(self.bounds.halfspaces().iter().cloned());
        Polytope::new(self.dim(), hs)
    }

    fn fixed_points(&self) -> Option<Result<Polytope>> {
        Some(self.fixed_point_set())
    }
}

/// `fix K` of an affine moving polytope.
pub fn fixed_point_set(k: &MovingPolytope) -> Result<Polytope> {
    k.fixed_point_set()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GqviInstance {
    #[serde(rename = "K")]
    pub k: MovingPolytope,
    #[serde(rename = "T")]
    pub t: PolytopeOperator,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub tol: ToleranceConfig,
}

impl GqviInstance {
    pub fn new(k: MovingPolytope, t: PolytopeOperator) -> Result<Self> {
        let inst = Self {
            k,
            t,
            solver: SolverConfig::default(),
            tol: ToleranceConfig::default(),
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        check_dim(self.k.dim(), self.t.dim())?;
        self.tol.validate()?;
        self.solver.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;

    #[test]
    fn fixed_point_examples() {
        let k = instances::moving_interval_constraint();
        let fix = k.fixed_point_set().unwrap();
        assert_eq!(fix.bounding_box().unwrap(), (vec![-2.0], vec![2.0]));

        let boxed = Polytope::from_box(&[-1.0, -1.0], &[1.0, 1.0]).unwrap();
        let c = [0.3, -0.2];
        let constant = MovingPolytope::new(
            vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]],
            vec![c[0], -c[0], c[1], -c[1]],
            vec![vec![0.0; 2]; 4],
            boxed.clone(),
        )
        .unwrap();
        let fix = constant.fixed_point_set().unwrap();
        let v = fix.vertices().unwrap();
        assert_eq!(v.len(), 1);
        assert!(crate::linalg::dist(&v[0], &c) < 1e-12);

        let fix = MovingPolytope::constant_box(boxed.clone()).fixed_point_set().unwrap();
        assert_eq!(fix.bounding_box().unwrap(), boxed.bounding_box().unwrap());
    }

    #[test]
    fn moving_window_values() {
        let k = MovingPolytope::moving_window(Polytope::from_box(&[-1.0], &[2.0]).unwrap(), 0.5);
        assert_eq!(k.at(&[1.8]).unwrap().bounding_box().unwrap(), (vec![1.3], vec![2.0]));
        assert_eq!(k.fixed_point_set().unwrap().bounding_box().unwrap(), (vec![-1.0], vec![2.0]));
    }

    #[test]
    fn empty_fix_is_rejected() {
        // K(x) = {x + 1} has no fixed point.
        let k = MovingPolytope::new(
            vec![vec![1.0], vec![-1.0]],
            vec![1.0, -1.0],
            vec![vec![1.0], vec![-1.0]],
            Polytope::from_box(&[-5.0], &[5.0]).unwrap(),
        )
        .unwrap();
        assert_eq!(k.fixed_point_set().unwrap_err(), Error::EmptyPolytope);
    }

    #[test]
    fn json_round_trip() {
        let inst = instances::moving_interval();
        let text = serde_json::to_string(&inst).unwrap();
        assert!(text.contains("\"K\"") && text.contains("\"box\"") && text.contains("\"kind\""));
        let back: GqviInstance = serde_json::from_str(&text).unwrap();
        assert_eq!(back.k, inst.k);
        let bad = text.replace("\"D\":[[0.5],[-0.5]]", "\"D\":[[0.5]]");
        assert!(serde_json::from_str::<GqviInstance>(&bad).is_err());
    }
}
