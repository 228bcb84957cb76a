//! Vertex enumeration (H -> V) and convex hulls (V -> H).

use super::{Halfspace, Polytope};
use crate::error::{Error, Result};
use crate::linalg::{self, binomial, dot, for_each_subset, max_abs, norm, sub};
use crate::lp::{LinearProgram, LpOutcome, Relation};

/// Enumeration-based operations are limited to this dimension.
pub const MAX_ENUM_DIM: usize = 4;

const MAX_BASES: usize = 2_000_000;
const MERGE_RADIUS: f64 = 1e-9;

fn merge_key_close(a: &[f64], b: &[f64]) -> bool {
    let scale = 1.0_f64.max(max_abs(a)).max(max_abs(b));
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= MERGE_RADIUS * scale)
}

pub(crate) fn dedup_points(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(points.len());
    for p in points {
        if !out.iter().any(|q| merge_key_close(p, q)) {
            out.push(p.clone());
        }
    }
    out
}

/// Every feasible basic solution of `dim` linearly independent active rows,
/// duplicates merged.
pub(crate) fn vertices(dim: usize, hs: &[Halfspace]) -> Result<Vec<Vec<f64>>> {
    if dim > MAX_ENUM_DIM {
        return Err(Error::ScaleBound {
            what: "vertex enumeration dimension",
            value: dim,
            limit: MAX_ENUM_DIM,
        });
    }
    let combos = binomial(hs.len(), dim);
    if combos > MAX_BASES {
        return Err(Error::ScaleBound {
            what: "vertex enumeration bases",
            value: combos,
            limit: MAX_BASES,
        });
    }
    let mut out: Vec<Vec<f64>> = Vec::new();
    for_each_subset(hs.len(), dim, |idx| {
        let rows: Vec<Vec<f64>> = idx.iter().map(|&i| hs[i].normal.clone()).collect();
        let rhs: Vec<f64> = idx.iter().map(|&i| hs[i].offset).collect();
        let Some(v) = linalg::solve_square(&rows, &rhs) else {
            return;
        };
        let vn = norm(&v);
        let feasible = hs
            .iter()
            .all(|h| h.slack(&v) >= -1e-9 * (1.0_f64.max(norm(&h.normal) * vn)));
        if feasible && !out.iter().any(|q| merge_key_close(&v, q)) {
            out.push(v);
        }
    });
    Ok(out)
}

/// Removes points lying in the convex hull of the others (LP test).
fn extreme_points(points: Vec<Vec<f64>>) -> Result<Vec<Vec<f64>>> {
    let mut keep = points;
    let mut i = 0;
    while i < keep.len() {
        let others: Vec<&Vec<f64>> = keep
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, p)| p)
            .collect();
        if others.is_empty() {
            break;
        }
        let k = others.len();
        let n = keep[i].len();
        let mut lp = LinearProgram::minimize(vec![0.0; k]);
        lp.all_nonneg();
        lp.add(vec![1.0; k], Relation::Eq, 1.0);
        for d in 0..n {
            lp.add(others.iter().map(|p| p[d]).collect(), Relation::Eq, keep[i][d]);
        }
        if let LpOutcome::Optimal { .. } = lp.solve()? {
            keep.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(keep)
}

/// Convex hull as a polytope. Works for lower-dimensional point sets by
/// splitting the affine hull off as equality pairs.
pub(crate) fn hull(points: &[Vec<f64>]) -> Result<Polytope> {
    let Some(first) = points.first() else {
        return Err(Error::EmptyPolytope);
    };
    let n = first.len();
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    for p in points {
        crate::error::check_dim(n, p.len())?;
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite point {p:?}")));
        }
    }
    let mut pts = dedup_points(points);
    if pts.len() > 64 && n > 2 {
        pts = extreme_points(pts)?;
    }
    let origin = pts[0].clone();
    let diffs: Vec<Vec<f64>> = pts.iter().map(|p| sub(p, &origin)).collect();
    let basis = linalg::row_space(&diffs, n, 1e-10);
    let complement = linalg::null_space(&basis, n, 1e-10);
    let k = basis.len();

    let mut hs = Vec::new();
    for w in &complement {
        let off = dot(w, &origin);
        hs.push(Halfspace::new(w.clone(), off));
        hs.push(Halfspace::new(w.iter().map(|v| -v).collect(), -off));
    }
    // Local coordinates inside the affine hull.
    let local: Vec<Vec<f64>> = diffs
        .iter()
        .map(|d| basis.iter().map(|b| dot(b, d)).collect())
        .collect();
    let lift = |nv: &[f64], off: f64| -> Halfspace {
        let mut a = vec![0.0; n];
        for (c, b) in nv.iter().zip(&basis) {
            linalg::axpy(&mut a, *c, b);
        }
        Halfspace::new(a.clone(), off + dot(&a, &origin))
    };

    let mut extreme: Vec<usize> = Vec::new();
    match k {
        0 => extreme.push(0),
        1 => {
            let (mut imin, mut imax) = (0, 0);
            for (i, q) in local.iter().enumerate() {
                if q[0] < local[imin][0] {
                    imin = i;
                }
                if q[0] > local[imax][0] {
                    imax = i;
                }
            }
            hs.push(lift(&[1.0], local[imax][0]));
            hs.push(lift(&[-1.0], -local[imin][0]));
            extreme.extend([imin, imax]);
        }
        2 => {
            let ring = monotone_chain(&local);
            for w in 0..ring.len() {
                let a = &local[ring[w]];
                let b = &local[ring[(w + 1) % ring.len()]];
                // Counter-clockwise ring: outward normal is (dy, -dx).
                let nv = [b[1] - a[1], -(b[0] - a[0])];
                let nn = norm(&nv);
                let nv = [nv[0] / nn, nv[1] / nn];
                hs.push(lift(&nv, dot(&nv, a)));
            }
            extreme = ring;
        }
        _ => {
            let facets = brute_facets(&local, k)?;
            for (nv, off) in &facets {
                hs.push(lift(nv, *off));
            }
            for (i, q) in local.iter().enumerate() {
                let tight: Vec<Vec<f64>> = facets
                    .iter()
                    .filter(|(nv, off)| (dot(nv, q) - off).abs() <= 1e-9 * (1.0 + off.abs()))
                    .map(|(nv, _)| nv.clone())
                    .collect();
                if linalg::rank(&tight, k, 1e-9) == k {
                    extreme.push(i);
                }
            }
        }
    }
    let mut verts: Vec<Vec<f64>> = extreme.iter().map(|&i| pts[i].clone()).collect();
    verts = dedup_points(&verts);
    Ok(Polytope::from_parts(n, hs, Some(verts)))
}

fn cross(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain; returns indices of hull vertices counter-clockwise,
/// collinear points dropped.
fn monotone_chain(pts: &[Vec<f64>]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&a, &b| {
        pts[a][0]
            .total_cmp(&pts[b][0])
            .then(pts[a][1].total_cmp(&pts[b][1]))
    });
    let scale = pts.iter().map(|p| max_abs(p)).fold(1.0, f64::max);
    let eps = 1e-12 * scale * scale;
    let mut lower: Vec<usize> = Vec::new();
    for &i in &idx {
        while lower.len() >= 2
            && cross(&pts[lower[lower.len() - 2]], &pts[lower[lower.len() - 1]], &pts[i]) <= eps
        {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in idx.iter().rev() {
        while upper.len() >= 2
            && cross(&pts[upper[upper.len() - 2]], &pts[upper[upper.len() - 1]], &pts[i]) <= eps
        {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Facets of a full-dimensional point cloud in `R^k` by trying every
/// `k`-subset as a supporting hyperplane.
fn brute_facets(pts: &[Vec<f64>], k: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    let combos = binomial(pts.len(), k);
    if combos > MAX_BASES {
        return Err(Error::ScaleBound {
            what: "hull facet candidates",
            value: combos,
            limit: MAX_BASES,
        });
    }
    let scale = pts.iter().map(|p| max_abs(p)).fold(1.0, f64::max);
    let mut facets: Vec<(Vec<f64>, f64)> = Vec::new();
    for_each_subset(pts.len(), k, |idx| {
        let base = &pts[idx[0]];
        let rows: Vec<Vec<f64>> = idx[1..].iter().map(|&i| sub(&pts[i], base)).collect();
        let ns = linalg::null_space(&rows, k, 1e-10);
        if ns.len() != 1 {
            return;
        }
        let nv = &ns[0];
        let off = dot(nv, base);
        let tol = 1e-9 * scale;
        let (mut above, mut below) = (false, false);
        for p in pts {
            let s = dot(nv, p) - off;
            if s > tol {
                above = true;
            } else if s < -tol {
                below = true;
            }
        }
        let oriented = match (above, below) {
            (true, true) | (false, false) => return,
            (false, true) => (nv.clone(), off),
            (true, false) => (nv.iter().map(|v| -v).collect(), -off),
        };
        let dup = facets.iter().any(|(m, o)| {
            m.iter().zip(&oriented.0).all(|(a, b)| (a - b).abs() < 1e-9)
                && (o - oriented.1).abs() < 1e-9 * scale
        });
        if !dup {
            facets.push(oriented);
        }
    });
    Ok(facets)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn square_and_interval_vertices() {
        let sq = Polytope::cube(2, 1.0).unwrap();
        let v = sorted(sq.vertices().unwrap().to_vec());
        assert_eq!(
            v,
            vec![
                vec![-1.0, -1.0],
                vec![-1.0, 1.0],
                vec![1.0, -1.0],
                vec![1.0, 1.0]
            ]
        );
        let iv = Polytope::from_box(&[-1.0], &[0.0]).unwrap();
        assert_eq!(sorted(iv.vertices().unwrap().to_vec()), vec![vec![-1.0], vec![0.0]]);
    }

    #[test]
    fn dimension_bound_enforced() {
        let p = Polytope::cube(5, 1.0).unwrap();
        assert!(matches!(p.vertices(), Err(Error::ScaleBound { .. })));
    }

    #[test]
    fn hull_of_lower_dimensional_sets() {
        let seg = Polytope::from_vertices(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]]).unwrap();
        assert_eq!(seg.vertices().unwrap().len(), 2);
        assert!(seg.contains(&[0.25, 0.75], 1e-9).unwrap());
        assert!(!seg.contains(&[0.25, 0.25], 1e-9).unwrap());
        assert!(!seg.contains(&[1.5, -0.5], 1e-9).unwrap());

        let pt = Polytope::singleton(&[0.27]).unwrap();
        assert_eq!(pt.vertices().unwrap(), &[vec![0.27]]);
        assert!(pt.contains(&[0.27], 1e-12).unwrap());
        assert!(!pt.contains(&[0.2701], 1e-9).unwrap());
    }

    #[test]
    fn hull_of_cube_points_3d() {
        let mut pts = Vec::new();
        for a in [-1.0, 1.0] {
            for b in [-1.0, 1.0] {
                for c in [-1.0, 1.0] {
                    pts.push(vec![a, b, c]);
                }
            }
        }
        pts.push(vec![0.0, 0.0, 0.0]);
        pts.push(vec![0.5, -0.5, 1.0]);
        let p = Polytope::from_vertices(&pts).unwrap();
        assert_eq!(p.vertices().unwrap().len(), 8);
        assert_eq!(p.halfspaces().len(), 6);
        assert!(p.contains(&[0.9, 0.9, 0.9], 1e-9).unwrap());
        assert!(!p.contains(&[1.1, 0.0, 0.0], 1e-9).unwrap());
    }
}
