use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::Polytope;
use crate::linalg::{dist, scale};
use crate::quasiopt::NormalBaseOperator;

/// Values on a finite point set, extended to the whole space by nearest
/// neighbour (lowest index on ties).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TabulationJson")]
pub struct Tabulation {
    points: Vec<Vec<f64>>,
    values: Vec<Polytope>,
}

#[derive(Deserialize)]
struct TabulationJson {
    points: Vec<Vec<f64>>,
    values: Vec<Polytope>,
}

impl TryFrom<TabulationJson> for Tabulation {
    type Error = Error;

    fn try_from(j: TabulationJson) -> Result<Self> {
        Tabulation::new(j.points, j.values)
    }
}

impl Tabulation {
    pub fn new(points: Vec<Vec<f64>>, values: Vec<Polytope>) -> Result<Self> {
        check_dim(points.len(), values.len())?;
        let Some(first) = values.first() else {
            return Err(Error::InvalidArgument("empty tabulation".into()));
        };
        for (p, v) in points.iter().zip(&values) {
            check_dim(first.dim(), p.len())?;
            check_dim(first.dim(), v.dim())?;
        }
        Ok(Self { points, values })
    }

    pub fn lookup(&self, x: &[f64]) -> Result<&Polytope> {
        check_dim(self.values[0].dim(), x.len())?;
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = dist(p, x);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        Ok(&self.values[best])
    }
}

/// Polytope-valued operator `T(x)` in the dual space.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolytopeOperator {
    Constant { value: Polytope },
    Tabulated(Tabulation),
    NormalBase(NormalBaseOperator),
}

impl PolytopeOperator {
    pub fn constant(value: Polytope) -> Self {
        Self::Constant { value }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Constant { value } => value.dim(),
            Self::Tabulated(t) => t.values[0].dim(),
            Self::NormalBase(op) => op.dim(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<Polytope> {
        check_dim(self.dim(), x.len())?;
        match self {
            Self::Constant { value } => Ok(value.clone()),
            Self::Tabulated(t) => t.lookup(x).cloned(),
            Self::NormalBase(op) => op.eval(x),
        }
    }

    /// Every value multiplied by `s > 0`. Not available for the normal base
    /// operator, whose scale is fixed by its charts.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s > 0.0) {
            return Err(Error::InvalidArgument(format!("scale {s} must be positive")));
        }
        let scale_poly = |p: &Polytope| -> Result<Polytope> {
            let vs: Vec<Vec<f64>> = p.vertices()?.iter().map(|v| scale(v, s)).collect();
            Polytope::from_vertices(&vs)
        };
        match self {
            Self::Constant { value } => Ok(Self::constant(scale_poly(value)?)),
            Self::Tabulated(t) => Ok(Self::Tabulated(Tabulation::new(
                t.points.clone(),
                t.values.iter().map(scale_poly).collect::<Result<_>>()?,
            )?)),
            Self::NormalBase(_) => Err(Error::InvalidArgument(
                "the normal base operator cannot be rescaled".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabulated_lookup_is_nearest() {
        let t = Tabulation::new(
            vec![vec![0.0], vec![1.0]],
            vec![Polytope::singleton(&[1.0]).unwrap(), Polytope::singleton(&[-1.0]).unwrap()],
        )
        .unwrap();
        assert_eq!(t.lookup(&[0.4]).unwrap().vertices().unwrap(), &[vec![1.0]]);
        assert_eq!(t.lookup(&[0.5]).unwrap().vertices().unwrap(), &[vec![1.0]]);
        assert_eq!(t.lookup(&[0.6]).unwrap().vertices().unwrap(), &[vec![-1.0]]);
    }

    #[test]
    fn scaling_doubles_vertices() {
        let op = PolytopeOperator::constant(Polytope::from_box(&[1.0], &[2.0]).unwrap());
        let s = op.scaled(2.0).unwrap();
        assert_eq!(s.eval(&[0.0]).unwrap().bounding_box().unwrap(), (vec![2.0], vec![4.0]));
        assert!(op.scaled(0.0).is_err());
    }

    #[test]
    fn json_kinds() {
        let op = PolytopeOperator::constant(Polytope::singleton(&[1.0]).unwrap());
        let text = serde_json::to_string(&op).unwrap();
        assert!(text.contains("\"kind\":\"constant\""));
        let back: PolytopeOperator = serde_json::from_str(&text).unwrap();
        assert_eq!(back.eval(&[0.0]).unwrap(), op.eval(&[0.0]).unwrap());
    }
}
