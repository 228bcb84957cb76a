//! Exact polyhedral geometry in low dimension.
//!
//! A [`Polytope`] is a nonempty bounded polyhedron `{x : <a_i, x> <= b_i}`.
//! Its vertex list is computed lazily (combinatorial basis enumeration) and
//! cached; polytopes built from points keep the hull vertices directly.

mod cone;
mod enumerate;
mod faces;
mod minkowski;
mod project;

use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, norm};
use crate::lp::{LinearProgram, LpOutcome, Relation};

pub use cone::GeneratedCone;
pub use enumerate::MAX_ENUM_DIM;
pub use faces::Face;
pub use minkowski::{weighted_minkowski, MAX_MINKOWSKI_COMBINATIONS};
pub use project::Projection;

/// Closed halfspace `<normal, x> <= offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Halfspace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Self {
        Self { normal, offset }
    }

    /// `offset - <normal, x>`; negative when violated.
    pub fn slack(&self, x: &[f64]) -> f64 {
        self.offset - dot(&self.normal, x)
    }
}

#[derive(Debug, Clone)]
pub struct Polytope {
    dim: usize,
    halfspaces: Vec<Halfspace>,
    vertices: OnceLock<Vec<Vec<f64>>>,
}

impl PartialEq for Polytope {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.halfspaces == other.halfspaces
    }
}

impl Polytope {
    /// Builds a polytope from its H-representation, rejecting empty or
    /// unbounded inputs.
    pub fn new(dim: usize, halfspaces: Vec<Halfspace>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        for h in &halfspaces {
            check_dim(dim, h.normal.len())?;
            if !h.offset.is_finite() || h.normal.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "non-finite halfspace {h:?}"
                )));
            }
        }
        let p = Self {
            dim,
            halfspaces,
            vertices: OnceLock::new(),
        };
        p.check_nonempty()?;
        p.check_bounded()?;
        Ok(p)
    }

    /// Builds from `A x <= b` given row-major.
    pub fn from_rows(a: &[Vec<f64>], b: &[f64]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                got: b.len(),
            });
        }
        let dim = a.first().map_or(0, |r| r.len());
        let hs = a
            .iter()
            .zip(b)
            .map(|(r, &o)| Halfspace::new(r.clone(), o))
            .collect();
        Self::new(dim, hs)
    }

    /// Axis-aligned box `[lo_i, hi_i]`.
    pub fn from_box(lo: &[f64], hi: &[f64]) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        if lo.iter().zip(hi).any(|(l, h)| !(l <= h)) {
            return Err(Error::EmptyPolytope);
        }
        let n = lo.len();
        let mut hs = Vec::with_capacity(2 * n);
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            hs.push(Halfspace::new(e.clone(), hi[i]));
            e[i] = -1.0;
            hs.push(Halfspace::new(e, -lo[i]));
        }
        Self::new(n, hs)
    }

    /// The cube `[-r, r]^n`.
    pub fn cube(n: usize, r: f64) -> Result<Self> {
        Self::from_box(&vec![-r; n], &vec![r; n])
    }

    pub fn singleton(p: &[f64]) -> Result<Self> {
        Self::from_vertices(&[p.to_vec()])
    }

    /// Convex hull of a point set.
    pub fn from_vertices(points: &[Vec<f64>]) -> Result<Self> {
        enumerate::hull(points)
    }

    pub(crate) fn from_parts(
        dim: usize,
        halfspaces: Vec<Halfspace>,
        vertices: Option<Vec<Vec<f64>>>,
    ) -> Self {
        let cell = OnceLock::new();
        if let Some(v) = vertices {
            let _ = cell.set(v);
        }
        Self {
            dim,
            halfspaces,
            vertices: cell,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    /// `<a_i, x> <= b_i + tol` for all rows.
    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool> {
        check_dim(self.dim, x.len())?;
        Ok(self.contains_unchecked(x, tol))
    }

    pub(crate) fn contains_unchecked(&self, x: &[f64], tol: f64) -> bool {
        self.halfspaces.iter().all(|h| h.slack(x) >= -tol)
    }

    /// Largest constraint violation (0 when inside).
    pub fn violation(&self, x: &[f64]) -> f64 {
        self.halfspaces
            .iter()
            .map(|h| -h.slack(x))
            .fold(0.0, f64::max)
    }

    /// `dist(x, P) <= r + feas_tol`.
    pub fn enlarged_contains(&self, r: f64, x: &[f64], feas_tol: f64) -> Result<bool> {
        if !(r >= 0.0) {
            return Err(Error::InvalidArgument(format!("negative radius {r}")));
        }
        Ok(self.project(x)?.distance <= r + feas_tol)
    }

    /// Vertex list (cached). Errors above [`MAX_ENUM_DIM`].
    pub fn vertices(&self) -> Result<&[Vec<f64>]> {
        if let Some(v) = self.vertices.get() {
            return Ok(v);
        }
        let v = enumerate::vertices(self.dim, &self.halfspaces)?;
        if v.is_empty() {
            return Err(Error::EmptyPolytope);
        }
        Ok(self.vertices.get_or_init(|| v))
    }

    /// Finite-dimensional closed convex sets always belong to the class of
    /// convex sets containing the inside points of their closure.
    pub fn in_class_d(&self) -> bool {
        true
    }

    /// Center and radius of the largest inscribed Euclidean ball.
    pub fn chebyshev_center(&self) -> Result<(Vec<f64>, f64)> {
        let n = self.dim;
        let mut obj = vec![0.0; n + 1];
        obj[n] = -1.0;
        let mut lp = LinearProgram::minimize(obj);
        lp.set_nonneg(n);
        for h in &self.halfspaces {
            let mut row = h.normal.clone();
            row.push(norm(&h.normal));
            lp.add(row, Relation::Le, h.offset);
        }
        match lp.solve()? {
            LpOutcome::Optimal { mut x, .. } => {
                let r = x.pop().unwrap().max(0.0);
                Ok((x, r))
            }
            LpOutcome::Infeasible => Err(Error::EmptyPolytope),
            LpOutcome::Unbounded => Err(Error::Unbounded {
                direction: Vec::new(),
            }),
        }
    }

    /// Componentwise `(min, max)` over the vertices.
    pub fn bounding_box(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let vs = self.vertices()?;
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for v in vs {
            for i in 0..self.dim {
                lo[i] = lo[i].min(v[i]);
                hi[i] = hi[i].max(v[i]);
            }
        }
        Ok((lo, hi))
    }

    pub fn diameter(&self) -> Result<f64> {
        let vs = self.vertices()?;
        let mut d: f64 = 0.0;
        for (i, a) in vs.iter().enumerate() {
            for b in &vs[i + 1..] {
                d = d.max(crate::linalg::dist(a, b));
            }
        }
        Ok(d)
    }

    /// Draws `count` points of the polytope: rejection from the bounding box,
    /// topped up with random convex combinations of vertices when the
    /// acceptance rate is poor (lower-dimensional polytopes).
    pub fn sample<R: Rng>(&self, rng: &mut R, count: usize) -> Result<Vec<Vec<f64>>> {
        let (lo, hi) = self.bounding_box()?;
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0;
        while out.len() < count && attempts < 20 * count + 100 {
            attempts += 1;
            let p: Vec<f64> = lo
                .iter()
                .zip(&hi)
                .map(|(l, h)| if h > l { rng.gen_range(*l..=*h) } else { *l })
                .collect();
            if self.contains_unchecked(&p, 1e-12) {
                out.push(p);
            }
        }
        let vs = self.vertices()?;
        while out.len() < count {
            let w: Vec<f64> = (0..vs.len()).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
            let s: f64 = w.iter().sum();
            let mut p = vec![0.0; self.dim];
            for (wi, v) in w.iter().zip(vs) {
                crate::linalg::axpy(&mut p, wi / s, v);
            }
            out.push(p);
        }
        Ok(out)
    }

    fn check_nonempty(&self) -> Result<()> {
        let mut lp = LinearProgram::minimize(vec![0.0; self.dim]);
        for h in &self.halfspaces {
            lp.add(h.normal.clone(), Relation::Le, h.offset);
        }
        match lp.solve()? {
            LpOutcome::Infeasible => Err(Error::EmptyPolytope),
            _ => Ok(()),
        }
    }

    fn check_bounded(&self) -> Result<()> {
        // Fast path: both signs of every coordinate axis are present.
        let mut pos = vec![false; self.dim];
        let mut neg = vec![false; self.dim];
        for h in &self.halfspaces {
            let nz: Vec<usize> = (0..self.dim).filter(|&i| h.normal[i] != 0.0).collect();
            if nz.len() == 1 {
                let i = nz[0];
                if h.normal[i] > 0.0 {
                    pos[i] = true;
                } else {
                    neg[i] = true;
                }
            }
        }
        if pos.iter().chain(&neg).all(|b| *b) {
            return Ok(());
        }
        for i in 0..self.dim {
            for sign in [1.0, -1.0] {
                let mut obj = vec![0.0; self.dim];
                obj[i] = -sign;
                let mut lp = LinearProgram::minimize(obj.clone());
                for h in &self.halfspaces {
                    lp.add(h.normal.clone(), Relation::Le, h.offset);
                }
                if let LpOutcome::Unbounded = lp.solve()? {
                    let mut direction = vec![0.0; self.dim];
                    direction[i] = sign;
                    return Err(Error::Unbounded { direction });
                }
            }
        }
        Ok(())
    }
}

/// JSON form: `{"A": [[...]], "b": [...], "V": [[...]]}` with `V` optional.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolytopeJson {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    #[serde(rename = "V", default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<Vec<f64>>>,
}

impl From<&Polytope> for PolytopeJson {
    fn from(p: &Polytope) -> Self {
        Self {
            a: p.halfspaces.iter().map(|h| h.normal.clone()).collect(),
            b: p.halfspaces.iter().map(|h| h.offset).collect(),
            v: p.vertices().ok().map(|v| v.to_vec()),
        }
    }
}

impl TryFrom<PolytopeJson> for Polytope {
    type Error = Error;

    fn try_from(j: PolytopeJson) -> Result<Self> {
        let p = Polytope::from_rows(&j.a, &j.b)?;
        if let Some(vs) = j.v {
            for v in &vs {
                if !p.contains(v, 1e-9)? {
                    return Err(Error::Schema {
                        field: "V".into(),
                        message: format!("vertex {v:?} violates the halfspaces"),
                    });
                }
            }
        }
        Ok(p)
    }
}

impl Serialize for Polytope {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolytopeJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polytope {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = PolytopeJson::deserialize(d)?;
        Polytope::try_from(j).map_err(serde::de::Error::custom)
    }
}
