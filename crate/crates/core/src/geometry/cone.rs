use serde::{Deserialize, Serialize};

use super::Polytope;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, binomial, dot, for_each_subset, norm, normalized, scale};
use crate::lp::{LinearProgram, LpOutcome, Relation};

/// Finitely generated convex cone `{sum_k t_k g_k : t_k >= 0}`. No generators
/// means the trivial cone `{0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedCone {
    dim: usize,
    generators: Vec<Vec<f64>>,
}

const MAX_RAY_BASES: usize = 500_000;

impl GeneratedCone {
    pub fn new(dim: usize, generators: Vec<Vec<f64>>, min_norm: f64) -> Result<Self> {
        for g in &generators {
            check_dim(dim, g.len())?;
            let n = norm(g);
            if !(n >= min_norm) || !n.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "generator {g:?} has norm {n} below {min_norm}"
                )));
            }
        }
        Ok(Self { dim, generators })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            generators: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Vec<f64>] {
        &self.generators
    }

    pub fn is_zero(&self) -> bool {
        self.generators.is_empty()
    }

    /// `v` is a nonnegative combination of generators up to `tol` (measured
    /// after normalizing `v` and the generators).
    pub fn contains(&self, v: &[f64], tol: f64) -> Result<bool> {
        check_dim(self.dim, v.len())?;
        let Some(u) = normalized(v) else {
            return Ok(true);
        };
        if norm(v) <= tol {
            return Ok(true);
        }
        if self.generators.is_empty() {
            return Ok(false);
        }
        let gens: Vec<Vec<f64>> = self.generators.iter().filter_map(|g| normalized(g)).collect();
        let k = gens.len();
        let mut lp = LinearProgram::minimize(vec![0.0; k]);
        lp.all_nonneg();
        for d in 0..self.dim {
            let row: Vec<f64> = gens.iter().map(|g| g[d]).collect();
            lp.add(row.clone(), Relation::Le, u[d] + tol);
            lp.add(row, Relation::Ge, u[d] - tol);
        }
        Ok(matches!(lp.solve()?, LpOutcome::Optimal { .. }))
    }

    /// Mutual containment of generators.
    pub fn equals(&self, other: &GeneratedCone, tol: f64) -> Result<bool> {
        for g in &other.generators {
            if !self.contains(g, tol)? {
                return Ok(false);
            }
        }
        for g in &self.generators {
            if !other.contains(g, tol)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Drops parallel duplicates and generators that lie in the cone of the
    /// remaining ones.
    pub fn irredundant(&self, tol: f64) -> Result<GeneratedCone> {
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        for g in &self.generators {
            let u = normalized(g).expect("generators are nonzero");
            if !dirs.iter().any(|d| linalg::dist(d, &u) <= 1e-9) {
                dirs.push(u);
            }
        }
        let mut i = 0;
        while i < dirs.len() {
            let others: Vec<Vec<f64>> = dirs
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, d)| d.clone())
                .collect();
            let rest = GeneratedCone {
                dim: self.dim,
                generators: others,
            };
            if !rest.is_zero() && rest.contains(&dirs[i], tol)? {
                dirs.remove(i);
            } else {
                i += 1;
            }
        }
        Ok(GeneratedCone {
            dim: self.dim,
            generators: dirs,
        })
    }

    /// Section of the cone by the hyperplane `<x*, c> = eps`: the polytope
    /// with vertices `eps * g / <g, c>`.
    pub fn section(&self, c: &[f64], eps: f64) -> Result<Polytope> {
        check_dim(self.dim, c.len())?;
        if self.generators.is_empty() {
            return Err(Error::Precondition("section of the zero cone is empty".into()));
        }
        if !(eps > 0.0) {
            return Err(Error::InvalidArgument(format!("section level {eps} must be positive")));
        }
        let mut pts = Vec::with_capacity(self.generators.len());
        for g in &self.generators {
            let gc = dot(g, c);
            if !(gc > 0.0) {
                return Err(Error::InvalidChart(format!(
                    "generator {g:?} has <g, c> = {gc} <= 0"
                )));
            }
            pts.push(scale(g, eps / gc));
        }
        Polytope::from_vertices(&pts)
    }

    /// Convex hull of the unit-normalized irredundant generators.
    pub fn normalized_base(&self, tol: f64) -> Result<Polytope> {
        let red = self.irredundant(tol)?;
        if red.is_zero() {
            return Err(Error::Precondition("zero cone has no base".into()));
        }
        Polytope::from_vertices(&red.generators)
    }

    /// Cone generated by a base polytope's vertices.
    pub fn from_base(base: &Polytope) -> Result<GeneratedCone> {
        let gens = base.vertices()?.to_vec();
        GeneratedCone::new(base.dim(), gens, 0.0)
    }

    /// Polar cone `{x* : <x*, w> <= 0 for all w in dirs}` as generators.
    ///
    /// The lineality space `L = null(W)` contributes `+-` basis vectors; the
    /// pointed part `W x <= 0, x in L^perp` contributes its extreme rays, each
    /// cut out by `n - 1` independent tight rows.
    pub fn polar_of(dim: usize, dirs: &[Vec<f64>]) -> Result<GeneratedCone> {
        for d in dirs {
            check_dim(dim, d.len())?;
        }
        let rows: Vec<Vec<f64>> = dirs.iter().filter_map(|d| normalized(d)).collect();
        let lineality = linalg::null_space(&rows, dim, 1e-10);
        let mut gens: Vec<Vec<f64>> = Vec::new();
        for l in &lineality {
            gens.push(l.clone());
            gens.push(l.iter().map(|v| -v).collect());
        }
        let pointed_dim = dim - lineality.len();
        if pointed_dim > 0 {
            let pick = pointed_dim - 1;
            let combos = binomial(rows.len(), pick);
            if combos > MAX_RAY_BASES {
                return Err(Error::ScaleBound {
                    what: "polar ray bases",
                    value: combos,
                    limit: MAX_RAY_BASES,
                });
            }
            for_each_subset(rows.len(), pick, |idx| {
                let mut sys: Vec<Vec<f64>> = lineality.clone();
                sys.extend(idx.iter().map(|&i| rows[i].clone()));
                let ns = linalg::null_space(&sys, dim, 1e-10);
                if ns.len() != 1 {
                    return;
                }
                for sign in [1.0, -1.0] {
                    let r = scale(&ns[0], sign);
                    if rows.iter().all(|w| dot(w, &r) <= 1e-9) {
                        if !gens.iter().any(|g| linalg::dist(g, &r) <= 1e-9) {
                            gens.push(r);
                        }
                        break;
                    }
                }
            });
        }
        GeneratedCone {
            dim,
            generators: gens,
        }
        .irredundant(1e-9)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cone(gens: Vec<Vec<f64>>) -> GeneratedCone {
        let d = gens[0].len();
        GeneratedCone::new(d, gens, 1e-9).unwrap()
    }

    #[test]
    fn membership_examples() {
        let k = cone(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(k.contains(&[1.0, 1.0], 1e-6).unwrap());
        let k1 = cone(vec![vec![1.0, 0.0]]);
        assert!(!k1.contains(&[0.0, 1.0], 1e-6).unwrap());
        // (2,1) = 1*(1,0) + 1*(1,1)
        let k2 = cone(vec![vec![1.0, 0.0], vec![1.0, 1.0]]);
        assert!(k2.contains(&[2.0, 1.0], 1e-6).unwrap());
        assert!(!k2.contains(&[1.0, 2.0], 1e-6).unwrap());
        assert!(GeneratedCone::zero(2).contains(&[0.0, 0.0], 1e-6).unwrap());
        assert!(!GeneratedCone::zero(2).contains(&[0.0, 1.0], 1e-6).unwrap());
    }

    #[test]
    fn rejects_short_generators() {
        assert!(GeneratedCone::new(2, vec![vec![1e-12, 0.0]], 1e-9).is_err());
    }

    #[test]
    fn section_examples() {
        let s = cone(vec![vec![1.0]]).section(&[1.0], 0.25).unwrap();
        assert_eq!(s.vertices().unwrap(), &[vec![0.25]]);

        let s = cone(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).section(&[1.0, 1.0], 1.0).unwrap();
        assert_eq!(s.vertices().unwrap().len(), 2);
        assert!(s.contains(&[0.5, 0.5], 1e-9).unwrap());
        assert!(s.contains(&[1.0, 0.0], 1e-9).unwrap() && s.contains(&[0.0, 1.0], 1e-9).unwrap());

        let s = cone(vec![vec![2.0, 0.0]]).section(&[1.0, 0.0], 0.5).unwrap();
        assert!(linalg::dist(&s.vertices().unwrap()[0], &[0.5, 0.0]) < 1e-15);

        let bad = cone(vec![vec![1.0, 0.0], vec![-1.0, 0.0]]).section(&[1.0, 0.0], 0.5);
        assert!(matches!(bad, Err(Error::InvalidChart(_))));
    }

    #[test]
    fn polar_of_translated_square() {
        // polar of [-1,1]^2 - (2,2): rays (3,-1) and (-1,3) directions
        let mut dirs = Vec::new();
        for a in [-1.0, 1.0] {
            for b in [-1.0, 1.0] {
                dirs.push(vec![a - 2.0, b - 2.0]);
            }
        }
        let p = GeneratedCone::polar_of(2, &dirs).unwrap();
        assert_eq!(p.generators().len(), 2);
        let expect = cone(vec![vec![3.0, -1.0], vec![-1.0, 3.0]]);
        assert!(p.equals(&expect, 1e-9).unwrap());
        assert!(p.contains(&[1.0, 0.0], 1e-9).unwrap());
    }

    #[test]
    fn polar_with_lineality() {
        // polar of a single direction in 2D: a halfplane
        let p = GeneratedCone::polar_of(2, &[vec![1.0, 0.0]]).unwrap();
        assert!(p.contains(&[-1.0, 5.0], 1e-9).unwrap());
        assert!(p.contains(&[0.0, -1.0], 1e-9).unwrap());
        assert!(!p.contains(&[1.0, 0.0], 1e-9).unwrap());
        // polar of a spanning set of a line: the orthogonal line
        let q = GeneratedCone::polar_of(2, &[vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        assert!(q.contains(&[0.0, 1.0], 1e-9).unwrap() && q.contains(&[0.0, -1.0], 1e-9).unwrap());
        assert!(!q.contains(&[1.0, 1.0], 1e-9).unwrap());
    }

    #[test]
    fn normalized_base_prunes_interior_rays() {
        let k = cone(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]);
        let b = k.normalized_base(1e-9).unwrap();
        assert_eq!(b.vertices().unwrap().len(), 2);
        assert!(b.contains(&[0.5, 0.5], 1e-9).unwrap());
    }
}
