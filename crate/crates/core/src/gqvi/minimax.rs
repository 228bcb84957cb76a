use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::geometry::Polytope;
use crate::linalg::{box_grid, dot, sub};
use crate::lp::{LinearProgram, LpOutcome, Relation};

/// `min_{y in K(x)} max_j <v_j, y - x>` over the vertices `v_j` of `T(x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Minimax {
    pub value: f64,
    pub y_star: Vec<f64>,
    pub x_star: Vec<f64>,
}

fn lp_failure(what: &str, out: LpOutcome) -> Error {
    match out {
        LpOutcome::Infeasible => Error::EmptyPolytope,
        other => Error::Lp(format!("{what}: {other:?}")),
    }
}

/// One LP in `(y, t)`: minimize `t` subject to `<v_j, y> - t <= <v_j, x>` and
/// `y in K(x)`. `x_star` is the first vertex attaining the max at `y_star`.
pub fn minimax_value(tx: &Polytope, kx: &Polytope, x: &[f64]) -> Result<Minimax> {
    let n = kx.dim();
    check_dim(n, tx.dim())?;
    check_dim(n, x.len())?;
    let mut obj = vec![0.0; n + 1];
    obj[n] = 1.0;
    let mut lp = LinearProgram::minimize(obj);
    let verts = tx.vertices()?;
    for v in verts {
        let mut row = v.clone();
        row.push(-1.0);
        lp.add(row, Relation::Le, dot(v, x));
    }
    for h in kx.halfspaces() {
        let mut row = h.normal.clone();
        row.push(0.0);
        lp.add(row, Relation::Le, h.offset);
    }
    let (sol, _) = match lp.solve()? {
        LpOutcome::Optimal { x, value } => (x, value),
        other => return Err(lp_failure("minimax", other)),
    };
    let y_star = sol[..n].to_vec();
    let d = sub(&y_star, x);
    let (j, value) = verts
        .iter()
        .map(|v| dot(v, &d))
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (j, s)| if s > best.1 { (j, s) } else { best });
    Ok(Minimax {
        value,
        y_star,
        x_star: verts[j].clone(),
    })
}

/// Both sides of the minimax equality on polytope data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SionReport {
    pub minmax: f64,
    /// `max_{x* in T(x)} min_{y in K(x)} <x*, y - x>`, solved as one LP over
    /// the dual of the inner minimization.
    pub maxmin: f64,
    /// The same maximum restricted to the vertices of `T(x)`; a lower bound
    /// that can be strict when no single vertex is a saddle strategy.
    pub vertex_maxmin: f64,
    pub gap: f64,
}

fn inner_min(v: &[f64], kx: &Polytope, x: &[f64]) -> Result<f64> {
    let mut lp = LinearProgram::minimize(v.to_vec());
    for h in kx.halfspaces() {
        lp.add(h.normal.clone(), Relation::Le, h.offset);
    }
    match lp.solve()? {
        LpOutcome::Optimal { value, .. } => Ok(value - dot(v, x)),
        other => Err(lp_failure("inner minimum", other)),
    }
}

/// Max-min via LP duality: with `K(x) = {y : G y <= h}`,
/// `max sum_j l_j (-<v_j, x>) - <h, m>` over `l` in the simplex and `m >= 0`
/// with `G^T m + sum_j l_j v_j = 0`.
fn dual_maxmin(verts: &[Vec<f64>], kx: &Polytope, x: &[f64]) -> Result<f64> {
    let n = kx.dim();
    let k = verts.len();
    let hs = kx.halfspaces();
    let m = hs.len();
    let mut obj: Vec<f64> = verts.iter().map(|v| dot(v, x)).collect();
    obj.extend(hs.iter().map(|h| h.offset));
    let mut lp = LinearProgram::minimize(obj);
    lp.all_nonneg();
    let mut simplex = vec![1.0; k];
    simplex.extend(vec![0.0; m]);
    lp.add(simplex, Relation::Eq, 1.0);
    for i in 0..n {
        let mut row: Vec<f64> = verts.iter().map(|v| v[i]).collect();
        row.extend(hs.iter().map(|h| h.normal[i]));
        lp.add(row, Relation::Eq, 0.0);
    }
    match lp.solve()? {
        LpOutcome::Optimal { value, .. } => Ok(-value),
        other => Err(lp_failure("dual max-min", other)),
    }
}

pub fn sion_check(tx: &Polytope, kx: &Polytope, x: &[f64]) -> Result<SionReport> {
    let minmax = minimax_value(tx, kx, x)?.value;
    let verts = tx.vertices()?;
    let maxmin = dual_maxmin(verts, kx, x)?;
    let mut vertex_maxmin = f64::NEG_INFINITY;
    for v in verts {
        vertex_maxmin = vertex_maxmin.max(inner_min(v, kx, x)?);
    }
    Ok(SionReport {
        minmax,
        maxmin,
        vertex_maxmin,
        gap: (minmax - maxmin).abs(),
    })
}

/// Grid estimate of the min-max: the minimum over lattice points of `K(x)`
/// (spacing `h`, plus its vertices) of `max_j <v_j, y - x>`.
pub fn grid_minmax(tx: &Polytope, kx: &Polytope, x: &[f64], h: f64) -> Result<f64> {
    check_dim(kx.dim(), x.len())?;
    let (lo, hi) = kx.bounding_box()?;
    let verts = tx.vertices()?;
    let score = |y: &[f64]| -> f64 {
        let d = sub(y, x);
        verts.iter().map(|v| dot(v, &d)).fold(f64::NEG_INFINITY, f64::max)
    };
    let mut best = f64::INFINITY;
    for y in box_grid(&lo, &hi, h) {
        if kx.contains_unchecked(&y, 1e-12) {
            best = best.min(score(&y));
        }
    }
    for y in kx.vertices()? {
        best = best.min(score(y));
    }
    Ok(best)
}
