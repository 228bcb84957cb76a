use rand::Rng;
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::geometry::Polytope;
use crate::tolerance::ToleranceConfig;

/// Quasiconvex function given by a nested polytope family:
/// `f(x) = min{levels[j] : x in polytopes[j]}`, `+inf` outside the last one.
#[derive(Debug, Clone)]
pub struct StepLevelFunction {
    dim: usize,
    levels: Vec<f64>,
    polytopes: Vec<Polytope>,
    tol: ToleranceConfig,
    nested: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelKind {
    Sublevel,
    StrictSublevel,
}

/// A sublevel or strict sublevel set, realized by one polytope of the
/// family. `realization == None` means the set is empty.
#[derive(Debug, Clone, Serialize)]
pub struct LevelSetHandle<'a> {
    pub kind: LevelKind,
    pub level: f64,
    pub index: Option<usize>,
    pub realization: Option<&'a Polytope>,
    /// Step-function strict sublevel sets are closed polytopes.
    pub closed: bool,
}

impl LevelSetHandle<'_> {
    pub fn is_empty(&self) -> bool {
        self.realization.is_none()
    }
}

impl StepLevelFunction {
    /// Validates strictly increasing levels and nestedness `P_j ⊆ P_{j+1}`
    /// (vertex membership at `tol.feas`).
    pub fn new(levels: Vec<f64>, polytopes: Vec<Polytope>, tol: ToleranceConfig) -> Result<Self> {
        let f = Self::new_unchecked(levels, polytopes, tol)?;
        for j in 0..f.polytopes.len() - 1 {
            for v in f.polytopes[j].vertices()? {
                if !f.polytopes[j + 1].contains_unchecked(v, tol.feas) {
                    return Err(Error::InvalidArgument(format!(
                        "polytope {j} is not contained in polytope {}: vertex {v:?}",
                        j + 1
                    )));
                }
            }
        }
        Ok(f)
    }

    /// Skips the nestedness check. Used to build deliberately broken families;
    /// level ordering and dimensions are still validated.
    pub fn new_unchecked(
        levels: Vec<f64>,
        polytopes: Vec<Polytope>,
        tol: ToleranceConfig,
    ) -> Result<Self> {
        tol.validate()?;
        if levels.is_empty() || levels.len() != polytopes.len() {
            return Err(Error::InvalidArgument(format!(
                "{} levels for {} polytopes",
                levels.len(),
                polytopes.len()
            )));
        }
        if levels.iter().any(|l| !l.is_finite()) || levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!(
                "levels must be finite and strictly increasing: {levels:?}"
            )));
        }
        let dim = polytopes[0].dim();
        for p in &polytopes {
            check_dim(dim, p.dim())?;
        }
        let nested = polytopes.windows(2).all(|w| match w[0].vertices() {
            Ok(vs) => vs.iter().all(|v| w[1].contains_unchecked(v, tol.feas)),
            Err(_) => false,
        });
        Ok(Self {
            dim,
            levels,
            polytopes,
            tol,
            nested,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn polytopes(&self) -> &[Polytope] {
        &self.polytopes
    }

    pub fn tolerances(&self) -> &ToleranceConfig {
        &self.tol
    }

    pub fn is_nested(&self) -> bool {
        self.nested
    }

    /// Every polytope has an inscribed ball of positive radius. For a nested
    /// family this is the nonempty-interior hypothesis at every level.
    pub fn is_full_dimensional(&self) -> Result<bool> {
        for p in &self.polytopes {
            if p.chebyshev_center()?.1 <= self.tol.feas {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Index of the least level whose polytope contains `x`.
    pub fn level_index(&self, x: &[f64]) -> Result<Option<usize>> {
        check_dim(self.dim, x.len())?;
        Ok(self
            .polytopes
            .iter()
            .position(|p| p.contains_unchecked(x, self.tol.feas)))
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        Ok(self
            .level_index(x)?
            .map_or(f64::INFINITY, |j| self.levels[j]))
    }

    fn handle(&self, kind: LevelKind, level: f64, index: Option<usize>) -> LevelSetHandle<'_> {
        LevelSetHandle {
            kind,
            level,
            index,
            realization: index.map(|j| &self.polytopes[j]),
            closed: true,
        }
    }

    /// `P_j` for the largest `j` with `levels[j] <= level`.
    pub fn sublevel(&self, level: f64) -> LevelSetHandle<'_> {
        let idx = self.levels.iter().rposition(|l| *l <= level);
        self.handle(LevelKind::Sublevel, level, idx)
    }

    /// `P_j` for the largest `j` with `levels[j] < level`.
    pub fn strict_sublevel(&self, level: f64) -> LevelSetHandle<'_> {
        let idx = self.levels.iter().rposition(|l| *l < level);
        self.handle(LevelKind::StrictSublevel, level, idx)
    }

    pub fn in_argmin(&self, x: &[f64]) -> Result<bool> {
        check_dim(self.dim, x.len())?;
        Ok(self.polytopes[0].contains_unchecked(x, self.tol.feas))
    }

    /// Level index of `x` together with the strict sublevel polytope below it,
    /// for `x` in the domain but outside the argmin.
    fn strict_below(&self, x: &[f64]) -> Result<(usize, &Polytope)> {
        match self.level_index(x)? {
            None => Err(Error::Precondition(format!("{x:?} is outside the domain"))),
            Some(0) => Err(Error::Precondition(format!("{x:?} is a minimizer"))),
            Some(j) => {
                let strict = self
                    .strict_sublevel(self.levels[j])
                    .realization
                    .expect("a lower level exists");
                Ok((j, strict))
            }
        }
    }

    /// Distance from `x` to the strict sublevel set at `f(x)`.
    pub fn rho(&self, x: &[f64]) -> Result<f64> {
        let (_, strict) = self.strict_below(x)?;
        strict.distance(x)
    }

    /// Precomputes what membership in the adjusted sublevel set of `x` needs.
    pub fn adjusted_set(&self, x: &[f64]) -> Result<AdjustedSet<'_>> {
        let Some(j) = self.level_index(x)? else {
            return Err(Error::Precondition(format!("{x:?} is outside the domain")));
        };
        if j == 0 {
            return Ok(AdjustedSet {
                f: self,
                level: self.levels[0],
                index: 0,
                strict: None,
                rho: 0.0,
            });
        }
        let (_, strict) = self.strict_below(x)?;
        Ok(AdjustedSet {
            f: self,
            level: self.levels[j],
            index: j,
            strict: Some(strict),
            rho: strict.distance(x)?,
        })
    }

    pub fn adjusted_contains(&self, x: &[f64], y: &[f64]) -> Result<bool> {
        check_dim(self.dim, y.len())?;
        self.adjusted_set(x)?.contains(y)
    }

    /// A point of a uniformly chosen polytope of the family most of the time,
    /// occasionally anywhere in the padded bounding box of the family.
    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> Result<Vec<f64>> {
        if rng.gen_bool(0.25) {
            let (lo, hi) = super::union_box(&self.polytopes)?;
            Ok(lo
                .iter()
                .zip(&hi)
                .map(|(l, h)| {
                    let pad = 0.1 * (h - l);
                    rng.gen_range(l - pad..=h + pad)
                })
                .collect())
        } else {
            let k = rng.gen_range(0..self.polytopes.len());
            Ok(self.polytopes[k].sample(rng, 1)?.remove(0))
        }
    }

    /// A point of a uniformly chosen polytope whose level is at most `level`.
    pub fn sample_below<R: Rng>(&self, rng: &mut R, level: f64) -> Result<Vec<f64>> {
        let top = self.levels.iter().rposition(|l| *l <= level).unwrap_or(0);
        let k = rng.gen_range(0..=top);
        Ok(self.polytopes[k].sample(rng, 1)?.remove(0))
    }
}

/// `S_{f(x)}` intersected with the `rho_x`-enlargement of the strict sublevel
/// set (just `S_{f(x)}` on the argmin).
#[derive(Debug, Clone)]
pub struct AdjustedSet<'a> {
    f: &'a StepLevelFunction,
    pub level: f64,
    pub index: usize,
    pub strict: Option<&'a Polytope>,
    pub rho: f64,
}

impl<'a> AdjustedSet<'a> {
    pub fn contains(&self, y: &[f64]) -> Result<bool> {
        if !(self.f.evaluate(y)? <= self.level) {
            return Ok(false);
        }
        match self.strict {
            None => Ok(true),
            Some(s) => {
                if s.contains_unchecked(y, self.f.tol.feas) {
                    return Ok(true);
                }
                s.enlarged_contains(self.rho, y, self.f.tol.feas)
            }
        }
    }

    /// The polytope realizing `S_{f(x)}`.
    pub fn sublevel(&self) -> &'a Polytope {
        &self.f.polytopes[self.index]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;

    #[test]
    fn evaluate_examples() {
        let f = instances::step1d();
        assert_eq!(f.evaluate(&[-0.5]).unwrap(), 0.0);
        assert_eq!(f.evaluate(&[0.5]).unwrap(), 1.0);
        assert_eq!(f.evaluate(&[3.0]).unwrap(), f64::INFINITY);
    }

    #[test]
    fn sublevel_examples() {
        let f = instances::step1d();
        assert_eq!(f.sublevel(1.0).index, Some(1));
        assert_eq!(f.sublevel(1.5).index, Some(1));
        assert!(f.sublevel(-1.0).is_empty());
        assert_eq!(f.strict_sublevel(1.0).index, Some(0));
        assert!(f.strict_sublevel(0.0).is_empty());
        assert_eq!(f.strict_sublevel(2.0).index, Some(1));
        assert!(f.strict_sublevel(2.0).closed);
    }

    #[test]
    fn argmin_examples() {
        let f = instances::step1d();
        assert!(f.in_argmin(&[-0.5]).unwrap());
        assert!(!f.in_argmin(&[0.5]).unwrap());
        assert!(f.in_argmin(&[0.0]).unwrap());
    }

    #[test]
    fn rho_examples() {
        let f = instances::step1d();
        assert!((f.rho(&[0.5]).unwrap() - 0.5).abs() < 1e-15);
        assert!((f.rho(&[1.0]).unwrap() - 1.0).abs() < 1e-15);
        let g = instances::sq2d();
        assert!((g.rho(&[2.0, 2.0]).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert!(f.rho(&[-0.5]).is_err());
        assert!(f.rho(&[5.0]).is_err());
    }

    #[test]
    fn adjusted_examples() {
        let f = instances::step1d();
        assert!(f.adjusted_contains(&[0.5], &[0.25]).unwrap());
        assert!(f.adjusted_contains(&[0.5], &[0.5]).unwrap());
        assert!(!f.adjusted_contains(&[0.5], &[0.75]).unwrap());
        assert!(f.adjusted_contains(&[-0.5], &[0.0]).unwrap());
        assert!(!f.adjusted_contains(&[-0.5], &[0.1]).unwrap());
        assert!(f.adjusted_contains(&[3.0], &[0.0]).is_err());
    }

    #[test]
    fn nestedness_is_enforced() {
        let tol = ToleranceConfig::default();
        let a = Polytope::from_box(&[-2.0], &[-1.0]).unwrap();
        let b = Polytope::from_box(&[0.5], &[2.0]).unwrap();
        assert!(StepLevelFunction::new(vec![0.0, 1.0], vec![a.clone(), b.clone()], tol).is_err());
        let g = StepLevelFunction::new_unchecked(vec![0.0, 1.0], vec![a, b], tol).unwrap();
        assert!(!g.is_nested());
        assert!(instances::step1d().is_nested());
        let c = Polytope::from_box(&[0.0], &[1.0]).unwrap();
        assert!(StepLevelFunction::new(vec![1.0, 0.0], vec![c.clone(), c], tol).is_err());
    }
}
