//! Quasiconvex functions with computable sublevel, strict sublevel and
//! adjusted sublevel sets.

mod analytic;
mod checks;
mod step;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use analytic::{AnalyticAdjustedSet, AnalyticFunction, AnalyticKind, RhoEstimate, RHO_LADDER};
pub use checks::{
    adjusted_convexity_check, quasiconvexity_check, sandwich_check, AdjustedWitness, CheckReport,
    SandwichReport, SamplingPlan, SegmentWitness,
};
pub use step::{AdjustedSet, LevelKind, LevelSetHandle, StepLevelFunction};

use crate::error::Result;
use crate::geometry::Polytope;
use crate::tolerance::ToleranceConfig;

/// Either representation, for code that only needs values and adjusted sets.
#[derive(Debug, Clone)]
pub enum Function {
    Step(StepLevelFunction),
    Analytic(AnalyticFunction),
}

/// Membership oracle for `S^a_f(x)` at a fixed `x`.
#[derive(Debug, Clone)]
pub enum AdjustedView<'a> {
    Step(AdjustedSet<'a>),
    Analytic(AnalyticAdjustedSet<'a>),
}

impl AdjustedView<'_> {
    pub fn contains(&self, y: &[f64]) -> Result<bool> {
        match self {
            AdjustedView::Step(s) => s.contains(y),
            AdjustedView::Analytic(s) => s.contains(y),
        }
    }
}

impl Function {
    pub fn dim(&self) -> usize {
        match self {
            Function::Step(f) => f.dim(),
            Function::Analytic(f) => f.dim(),
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        match self {
            Function::Step(f) => f.evaluate(x),
            Function::Analytic(f) => f.evaluate(x),
        }
    }

    pub fn adjusted(&self, x: &[f64]) -> Result<AdjustedView<'_>> {
        Ok(match self {
            Function::Step(f) => AdjustedView::Step(f.adjusted_set(x)?),
            Function::Analytic(f) => AdjustedView::Analytic(f.adjusted_set(x)?),
        })
    }

    pub fn as_step(&self) -> Option<&StepLevelFunction> {
        match self {
            Function::Step(f) => Some(f),
            Function::Analytic(_) => None,
        }
    }

    /// Random point of the region where the function is interesting.
    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> Result<Vec<f64>> {
        match self {
            Function::Step(f) => f.sample_point(rng),
            Function::Analytic(f) => Ok(f.domain().sample(rng, 1)?.remove(0)),
        }
    }

    /// Random point biased toward `S_{level}`.
    pub(crate) fn sample_below<R: Rng>(&self, rng: &mut R, level: f64) -> Result<Vec<f64>> {
        match self {
            Function::Step(f) => f.sample_below(rng, level),
            Function::Analytic(f) => Ok(f.domain().sample(rng, 1)?.remove(0)),
        }
    }

    pub fn from_json(spec: FunctionJson, tol: ToleranceConfig) -> Result<Self> {
        match spec {
            FunctionJson::Step {
                levels,
                polytopes,
                allow_non_nested,
            } => Ok(Function::Step(if allow_non_nested {
                StepLevelFunction::new_unchecked(levels, polytopes, tol)?
            } else {
                StepLevelFunction::new(levels, polytopes, tol)?
            })),
            FunctionJson::Analytic { name, domain } => Ok(Function::Analytic(AnalyticFunction::new(
                AnalyticKind::from_name(&name)?,
                domain,
                tol,
            )?)),
        }
    }

    pub fn to_json(&self) -> FunctionJson {
        match self {
            Function::Step(f) => FunctionJson::Step {
                levels: f.levels().to_vec(),
                polytopes: f.polytopes().to_vec(),
                allow_non_nested: !f.is_nested(),
            },
            Function::Analytic(f) => FunctionJson::Analytic {
                name: f.kind().name().to_string(),
                domain: f.domain().clone(),
            },
        }
    }
}

pub(crate) fn union_box(ps: &[Polytope]) -> Result<(Vec<f64>, Vec<f64>)> {
    let (mut lo, mut hi) = ps[0].bounding_box()?;
    for p in &ps[1..] {
        let (l, h) = p.bounding_box()?;
        for i in 0..lo.len() {
            lo[i] = lo[i].min(l[i]);
            hi[i] = hi[i].max(h[i]);
        }
    }
    Ok((lo, hi))
}

/// `{"type":"step","levels":[...],"polytopes":[...]}` or
/// `{"type":"analytic","name":"...","box":{...}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FunctionJson {
    Step {
        levels: Vec<f64>,
        polytopes: Vec<Polytope>,
        /// Skip the nestedness check, for deliberately broken families.
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        allow_non_nested: bool,
    },
    Analytic {
        name: String,
        #[serde(rename = "box")]
        domain: Polytope,
    },
}
