use std::collections::BTreeSet;

use super::Polytope;
use crate::error::{check_dim, Result};
use crate::linalg::norm;

/// A proper closed face, described by the halfspaces tight on all of it and
/// the indices (into [`Polytope::vertices`]) of its vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Face {
    pub active: Vec<usize>,
    pub vertices: Vec<usize>,
}

const ACTIVE_TOL: f64 = 1e-9;

fn tight(p: &Polytope, i: usize, x: &[f64]) -> bool {
    let h = &p.halfspaces()[i];
    h.slack(x).abs() <= ACTIVE_TOL * (1.0_f64.max(norm(&h.normal) * norm(x)))
}

impl Polytope {
    /// All proper closed faces (facets down to vertices); the polytope itself
    /// is excluded. Faces are generated as nonempty intersections of the
    /// vertex sets cut out by individual halfspaces.
    pub fn proper_faces(&self) -> Result<Vec<Face>> {
        let vs = self.vertices()?;
        let m = self.halfspaces().len();
        let all: BTreeSet<usize> = (0..vs.len()).collect();
        let mut family: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
        for i in 0..m {
            let set: BTreeSet<usize> = (0..vs.len()).filter(|&v| tight(self, i, &vs[v])).collect();
            if !set.is_empty() && set != all {
                family.insert(set);
            }
        }
        loop {
            let current: Vec<BTreeSet<usize>> = family.iter().cloned().collect();
            let mut grew = false;
            for (a, fa) in current.iter().enumerate() {
                for fb in &current[a + 1..] {
                    let meet: BTreeSet<usize> = fa.intersection(fb).copied().collect();
                    if !meet.is_empty() && family.insert(meet) {
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
        let mut faces: Vec<Face> = family
            .into_iter()
            .map(|verts| {
                let active = (0..m)
                    .filter(|&i| verts.iter().all(|&v| tight(self, i, &vs[v])))
                    .collect();
                Face {
                    active,
                    vertices: verts.into_iter().collect(),
                }
            })
            .collect();
        faces.sort_by(|a, b| b.vertices.len().cmp(&a.vertices.len()).then(a.vertices.cmp(&b.vertices)));
        Ok(faces)
    }

    /// `x` lies on the given face: inside the polytope with every face row tight.
    pub fn on_face(&self, face: &Face, x: &[f64], tol: f64) -> Result<bool> {
        check_dim(self.dim(), x.len())?;
        Ok(self.contains_unchecked(x, tol) && face.active.iter().all(|&i| tight(self, i, x)))
    }

    /// Relative-interior test: `x` is in the polytope and strictly satisfies
    /// every row that is not an implicit equality of the affine hull.
    pub fn is_inside_point(&self, x: &[f64], tol: f64) -> Result<bool> {
        check_dim(self.dim(), x.len())?;
        if !self.contains_unchecked(x, tol) {
            return Ok(false);
        }
        let vs = self.vertices()?;
        for (i, h) in self.halfspaces().iter().enumerate() {
            let implicit_eq = vs.iter().all(|v| tight(self, i, v));
            if !implicit_eq && h.slack(x) <= ACTIVE_TOL * (1.0_f64.max(norm(&h.normal) * norm(x))) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
