use serde::{Deserialize, Serialize};

use super::cones::adjusted_normal_cone;
use crate::error::{check_dim, Error, Result};
use crate::geometry::{GeneratedCone, Polytope};
use crate::linalg::{dist, norm, sub};
use crate::quasiconvex::StepLevelFunction;

/// Local chart around `z`: a level `level < f(z)`, an interior point `z0` of
/// the strict sublevel set at that level, a radius `eps` with
/// `z0 + 2 eps B` inside that set and `f > level` on `z + eps B`, and the
/// section normal `c = z - z0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChartJson")]
pub struct LocalChart {
    pub z: Vec<f64>,
    #[serde(rename = "lambda")]
    pub level: f64,
    pub z0: Vec<f64>,
    pub eps: f64,
    #[serde(skip)]
    pub c: Vec<f64>,
}

#[derive(Deserialize)]
struct ChartJson {
    z: Vec<f64>,
    lambda: f64,
    z0: Vec<f64>,
    eps: f64,
}

impl TryFrom<ChartJson> for LocalChart {
    type Error = Error;

    fn try_from(j: ChartJson) -> Result<Self> {
        LocalChart::new(j.z, j.lambda, j.z0, j.eps)
    }
}

impl LocalChart {
    pub fn new(z: Vec<f64>, level: f64, z0: Vec<f64>, eps: f64) -> Result<Self> {
        check_dim(z.len(), z0.len())?;
        if !(eps > 0.0) {
            return Err(Error::InvalidChart(format!("radius {eps} must be positive")));
        }
        let c = sub(&z, &z0);
        Ok(Self { z, level, z0, eps, c })
    }

    pub fn in_ball(&self, x: &[f64], slack: f64) -> bool {
        dist(x, &self.z) <= self.eps + slack
    }

    /// Hat bump `max(0, eps - |x - z|)`.
    pub fn bump(&self, x: &[f64]) -> f64 {
        (self.eps - dist(x, &self.z)).max(0.0)
    }

    /// Section of `cone` by `<x*, c> = eps`.
    pub fn section(&self, cone: &GeneratedCone) -> Result<Polytope> {
        cone.section(&self.c, self.eps)
    }
}

/// Chart at `z` with `level` halfway between the previous level and `f(z)`,
/// `z0` the Chebyshev center of the strict sublevel polytope (radius `r`) and
/// `eps = min(0.9 dist(z, S_level), r / 2)`.
pub fn build_chart(f: &StepLevelFunction, z: &[f64]) -> Result<LocalChart> {
    let j = match f.level_index(z)? {
        None => return Err(Error::Precondition(format!("{z:?} is outside the domain"))),
        Some(0) => return Err(Error::Precondition(format!("{z:?} is a minimizer"))),
        Some(j) => j,
    };
    let level = 0.5 * (f.levels()[j - 1] + f.levels()[j]);
    let strict = f
        .strict_sublevel(level)
        .realization
        .expect("a lower level exists");
    let (z0, r) = strict.chebyshev_center()?;
    if r <= f.tolerances().feas {
        return Err(Error::Precondition(format!(
            "strict sublevel set below {z:?} has empty interior"
        )));
    }
    let sub_level = f.sublevel(level).realization.expect("a lower level exists");
    let d = sub_level.distance(z)?;
    let eps = (0.9 * d).min(0.5 * r);
    LocalChart::new(z.to_vec(), level, z0, eps)
}

/// `N^a(x) ∩ {<x*, c> = eps}` for `x` in the chart ball; every vertex must lie
/// in the dual unit ball.
pub fn chart_base(chart: &LocalChart, f: &StepLevelFunction, x: &[f64]) -> Result<Polytope> {
    let tol = f.tolerances();
    if !chart.in_ball(x, tol.feas) {
        return Err(Error::Precondition(format!("{x:?} is outside the chart ball")));
    }
    if f.in_argmin(x)? {
        return Err(Error::Precondition(format!("{x:?} is a minimizer")));
    }
    let cone = adjusted_normal_cone(f, x)?;
    let base = chart.section(&cone)?;
    check_in_unit_ball(&base, tol.feas)?;
    Ok(base)
}

pub(crate) fn check_in_unit_ball(base: &Polytope, feas: f64) -> Result<()> {
    for v in base.vertices()? {
        if norm(v) > 1.0 + feas {
            return Err(Error::Verification(format!(
                "base vertex {v:?} has norm {} > 1",
                norm(v)
            )));
        }
    }
    Ok(())
}
