use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::Polytope;
use crate::linalg::{dist, max_abs, norm};
use crate::tolerance::ToleranceConfig;

/// Registered closed-form functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyticKind {
    /// `| |x|^2 - 1 |`, not quasiconvex.
    TwoWells,
    /// `max_i |x_i|`.
    MaxAbs,
    /// Euclidean norm.
    Norm,
}

impl AnalyticKind {
    pub fn name(self) -> &'static str {
        match self {
            AnalyticKind::TwoWells => "two_wells",
            AnalyticKind::MaxAbs => "max_abs",
            AnalyticKind::Norm => "norm",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "two_wells" => Ok(AnalyticKind::TwoWells),
            "max_abs" => Ok(AnalyticKind::MaxAbs),
            "norm" => Ok(AnalyticKind::Norm),
            other => Err(Error::Schema {
                field: "name".into(),
                message: format!("unknown analytic function {other:?}"),
            }),
        }
    }

    pub fn is_quasiconvex(self) -> bool {
        !matches!(self, AnalyticKind::TwoWells)
    }

    fn eval(self, x: &[f64]) -> f64 {
        match self {
            AnalyticKind::TwoWells => (x.iter().map(|v| v * v).sum::<f64>() - 1.0).abs(),
            AnalyticKind::MaxAbs => max_abs(x),
            AnalyticKind::Norm => norm(x),
        }
    }
}

/// Level offsets used to approximate the open strict sublevel set from inside.
pub const RHO_LADDER: [f64; 3] = [1e-2, 1e-3, 1e-4];

const GRID_POINT_CAP: usize = 100_000;

/// Closed-form function restricted to a box; `+inf` outside the box.
#[derive(Debug)]
pub struct AnalyticFunction {
    kind: AnalyticKind,
    domain: Polytope,
    tol: ToleranceConfig,
    grid: OnceLock<Grid>,
}

impl Clone for AnalyticFunction {
    fn clone(&self) -> Self {
        Self {
            kind: self.kind,
            domain: self.domain.clone(),
            tol: self.tol,
            grid: OnceLock::new(),
        }
    }
}

#[derive(Debug)]
struct Grid {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
    mesh: f64,
}

/// Distance estimate with the spread across [`RHO_LADDER`] as an error bar.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhoEstimate {
    pub value: f64,
    pub spread: f64,
    pub ladder: Vec<(f64, f64)>,
}

impl AnalyticFunction {
    pub fn new(kind: AnalyticKind, domain: Polytope, tol: ToleranceConfig) -> Result<Self> {
        tol.validate()?;
        domain.bounding_box()?;
        Ok(Self {
            kind,
            domain,
            tol,
            grid: OnceLock::new(),
        })
    }

    pub fn kind(&self) -> AnalyticKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &Polytope {
        &self.domain
    }

    pub fn tolerances(&self) -> &ToleranceConfig {
        &self.tol
    }

    pub fn advertised_quasiconvex(&self) -> bool {
        self.kind.is_quasiconvex()
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        if !self.domain.contains_unchecked(x, self.tol.feas) {
            return Ok(f64::INFINITY);
        }
        Ok(self.kind.eval(x))
    }

    fn grid(&self) -> &Grid {
        self.grid.get_or_init(|| {
            let n = self.dim();
            let (lo, hi) = self.domain.bounding_box().expect("checked in new");
            let per_axis = ((GRID_POINT_CAP as f64).powf(1.0 / n as f64).floor() as usize).clamp(2, 2001);
            let mut points = Vec::new();
            let mut idx = vec![0usize; n];
            loop {
                let p: Vec<f64> = (0..n)
                    .map(|i| lo[i] + (hi[i] - lo[i]) * idx[i] as f64 / (per_axis - 1) as f64)
                    .collect();
                if self.domain.contains_unchecked(&p, self.tol.feas) {
                    points.push(p);
                }
                let mut k = 0;
                while k < n {
                    idx[k] += 1;
                    if idx[k] < per_axis {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == n {
                    break;
                }
            }
            let values = points.iter().map(|p| self.kind.eval(p)).collect();
            let mesh = (0..n)
                .map(|i| (hi[i] - lo[i]) / (per_axis - 1) as f64)
                .fold(0.0, f64::max);
            Grid {
                points,
                values,
                mesh,
            }
        })
    }

    /// Grid spacing of the distance oracle.
    pub fn mesh(&self) -> f64 {
        self.grid().mesh
    }

    /// Allowance for grid error in distance comparisons: `2 h sqrt(n)`.
    pub fn mesh_slack(&self) -> f64 {
        2.0 * self.mesh() * (self.dim() as f64).sqrt()
    }

    /// Grid distance from `y` to `{f <= level}`; `None` if no grid point qualifies.
    pub fn sublevel_distance(&self, y: &[f64], level: f64) -> Option<f64> {
        let g = self.grid();
        g.points
            .iter()
            .zip(&g.values)
            .filter(|(_, v)| **v <= level)
            .map(|(p, _)| dist(p, y))
            .min_by(f64::total_cmp)
    }

    /// No grid point lies a full ladder step below `f(x)`.
    pub fn in_argmin(&self, x: &[f64]) -> Result<bool> {
        let fx = self.evaluate(x)?;
        if !fx.is_finite() {
            return Ok(false);
        }
        let smallest = RHO_LADDER[RHO_LADDER.len() - 1];
        Ok(!self.grid().values.iter().any(|v| *v <= fx - smallest))
    }

    /// `dist(x, S_{f(x) - delta})` along the ladder.
    pub fn rho(&self, x: &[f64]) -> Result<RhoEstimate> {
        let fx = self.evaluate(x)?;
        if !fx.is_finite() {
            return Err(Error::Precondition(format!("{x:?} is outside the domain")));
        }
        let mut ladder = Vec::with_capacity(RHO_LADDER.len());
        for delta in RHO_LADDER {
            if let Some(d) = self.sublevel_distance(x, fx - delta) {
                ladder.push((delta, d));
            }
        }
        let Some(&(_, value)) = ladder.last().filter(|_| ladder.len() == RHO_LADDER.len()) else {
            return Err(Error::Precondition(format!(
                "{x:?} is a minimizer at grid resolution"
            )));
        };
        let lo = ladder.iter().map(|l| l.1).fold(f64::INFINITY, f64::min);
        let hi = ladder.iter().map(|l| l.1).fold(0.0, f64::max);
        Ok(RhoEstimate {
            value,
            spread: hi - lo,
            ladder,
        })
    }

    pub fn adjusted_set(&self, x: &[f64]) -> Result<AnalyticAdjustedSet<'_>> {
        let level = self.evaluate(x)?;
        if !level.is_finite() {
            return Err(Error::Precondition(format!("{x:?} is outside the domain")));
        }
        let rho = if self.in_argmin(x)? {
            None
        } else {
            Some(self.rho(x)?.value)
        };
        Ok(AnalyticAdjustedSet {
            f: self,
            level,
            rho,
        })
    }

    pub fn adjusted_contains(&self, x: &[f64], y: &[f64]) -> Result<bool> {
        check_dim(self.dim(), y.len())?;
        self.adjusted_set(x)?.contains(y)
    }
}

/// Grid approximation of the adjusted sublevel set; distances are compared
/// with [`AnalyticFunction::mesh_slack`] of allowance.
#[derive(Debug, Clone)]
pub struct AnalyticAdjustedSet<'a> {
    f: &'a AnalyticFunction,
    pub level: f64,
    pub rho: Option<f64>,
}

impl AnalyticAdjustedSet<'_> {
    pub fn contains(&self, y: &[f64]) -> Result<bool> {
        let fy = self.f.evaluate(y)?;
        if !(fy <= self.level + self.f.tol.feas) {
            return Ok(false);
        }
        let Some(rho) = self.rho else {
            return Ok(true);
        };
        let strict_level = self.level - RHO_LADDER[RHO_LADDER.len() - 1];
        if fy <= strict_level {
            return Ok(true);
        }
        Ok(self
            .f
            .sublevel_distance(y, strict_level)
            .is_some_and(|d| d <= rho + self.f.mesh_slack()))
    }
}
