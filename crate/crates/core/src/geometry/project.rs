//! Euclidean projection onto a polytope.
//!
//! Primal active-set method on `min 0.5 |y - x|^2 s.t. A y <= b`, started at
//! the nearest vertex. Pivots are capped at `10 * rows`; past the cap the
//! problem is handed to Dykstra's alternating projections.

use super::Polytope;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, dot, norm, sub};
use crate::lp::{LinearProgram, LpOutcome, Relation};

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub point: Vec<f64>,
    pub distance: f64,
}

const FEAS_TOL: f64 = 1e-9;

impl Polytope {
    /// Nearest point of the polytope to `x` and its distance.
    pub fn project(&self, x: &[f64]) -> Result<Projection> {
        check_dim(self.dim(), x.len())?;
        if self.contains_unchecked(x, 0.0) {
            return Ok(Projection {
                point: x.to_vec(),
                distance: 0.0,
            });
        }
        let y = match self.active_set(x) {
            Some(y) => y,
            None => self.dykstra(x)?,
        };
        let distance = linalg::dist(x, &y);
        Ok(Projection { point: y, distance })
    }

    /// Distance only.
    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        Ok(self.project(x)?.distance)
    }

    fn start_point(&self, x: &[f64]) -> Option<Vec<f64>> {
        if let Ok(vs) = self.vertices() {
            return vs
                .iter()
                .min_by(|a, b| linalg::dist(a, x).total_cmp(&linalg::dist(b, x)))
                .cloned();
        }
        let mut lp = LinearProgram::minimize(vec![0.0; self.dim()]);
        for h in self.halfspaces() {
            lp.add(h.normal.clone(), Relation::Le, h.offset);
        }
        match lp.solve() {
            Ok(LpOutcome::Optimal { x, .. }) => Some(x),
            _ => None,
        }
    }

    fn active_set(&self, x: &[f64]) -> Option<Vec<f64>> {
        let hs = self.halfspaces();
        let m = hs.len();
        let mut y = self.start_point(x)?;
        let mut working: Vec<usize> = Vec::new();
        let scale = 1.0 + norm(x);
        for _ in 0..10 * m + 10 {
            let g = sub(x, &y);
            let (p, mult) = if working.is_empty() {
                (g.clone(), Vec::new())
            } else {
                let rows: Vec<&[f64]> = working.iter().map(|&i| hs[i].normal.as_slice()).collect();
                let gram: Vec<Vec<f64>> = rows
                    .iter()
                    .map(|a| rows.iter().map(|b| dot(a, b)).collect())
                    .collect();
                let rhs: Vec<f64> = rows.iter().map(|a| dot(a, &g)).collect();
                let mu = linalg::solve_square(&gram, &rhs)?;
                let mut p = g.clone();
                for (a, m) in rows.iter().zip(&mu) {
                    linalg::axpy(&mut p, -m, a);
                }
                (p, mu)
            };
            if norm(&p) <= 1e-13 * scale {
                // Stationary on the working face; multipliers decide.
                let worst = mult
                    .iter()
                    .enumerate()
                    .filter(|(_, m)| **m < -1e-13 * scale)
                    .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)));
                match worst {
                    None => {
                        return (self.violation(&y) <= FEAS_TOL).then_some(y);
                    }
                    Some((k, _)) => {
                        working.remove(k);
                        continue;
                    }
                }
            }
            let pn = norm(&p);
            let mut alpha = 1.0;
            let mut blocking = None;
            for (i, h) in hs.iter().enumerate() {
                if working.contains(&i) {
                    continue;
                }
                let ap = dot(&h.normal, &p);
                if ap > 1e-14 * norm(&h.normal) * pn {
                    let step = (h.offset - dot(&h.normal, &y)).max(0.0) / ap;
                    if step < alpha {
                        alpha = step;
                        blocking = Some(i);
                    }
                }
            }
            linalg::axpy(&mut y, alpha, &p);
            if let Some(i) = blocking {
                working.push(i);
            }
        }
        None
    }

    fn dykstra(&self, x: &[f64]) -> Result<Vec<f64>> {
        let hs = self.halfspaces();
        let mut y = x.to_vec();
        let mut corr = vec![vec![0.0; x.len()]; hs.len()];
        const CAP: usize = 200_000;
        for _ in 0..CAP {
            let prev = y.clone();
            for (h, c) in hs.iter().zip(corr.iter_mut()) {
                let z: Vec<f64> = y.iter().zip(c.iter()).map(|(a, b)| a + b).collect();
                let aa = dot(&h.normal, &h.normal);
                let az = dot(&h.normal, &z);
                let mut next = z.clone();
                if az > h.offset && aa > 0.0 {
                    linalg::axpy(&mut next, -(az - h.offset) / aa, &h.normal);
                }
                for k in 0..z.len() {
                    c[k] = z[k] - next[k];
                }
                y = next;
            }
            if linalg::dist(&prev, &y) <= 1e-14 * (1.0 + norm(&y)) && self.violation(&y) <= FEAS_TOL {
                return Ok(y);
            }
        }
        Err(Error::NonConvergence {
            what: "polytope projection",
            iterations: CAP,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Halfspace;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn interval_and_corner() {
        let p = Polytope::from_box(&[-1.0], &[0.0]).unwrap();
        let pr = p.project(&[0.5]).unwrap();
        assert_eq!(pr.point, vec![0.0]);
        assert!((pr.distance - 0.5).abs() < 1e-15);

        let sq = Polytope::cube(2, 1.0).unwrap();
        let pr = sq.project(&[2.0, 2.0]).unwrap();
        assert!(linalg::dist(&pr.point, &[1.0, 1.0]) < 1e-12);
        assert!((pr.distance - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn projection_onto_facet_of_triangle() {
        let tri = Polytope::from_rows(
            &[vec![-1.0, 0.0], vec![0.0, -1.0], vec![1.0, 1.0]],
            &[0.0, 0.0, 1.0],
        )
        .unwrap();
        let pr = tri.project(&[1.0, 1.0]).unwrap();
        assert!(linalg::dist(&pr.point, &[0.5, 0.5]) < 1e-12);
    }

    #[test]
    fn dykstra_agrees_with_active_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut hs = Vec::new();
        for _ in 0..9 {
            let n: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            hs.push(Halfspace::new(n, 1.0));
        }
        for i in 0..3 {
            let mut e = vec![0.0; 3];
            e[i] = 1.0;
            hs.push(Halfspace::new(e.clone(), 2.0));
            e[i] = -1.0;
            hs.push(Halfspace::new(e, 2.0));
        }
        let p = Polytope::new(3, hs).unwrap();
        for _ in 0..50 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-4.0..4.0)).collect();
            let a = p.project(&x).unwrap().point;
            let b = p.dykstra(&x).unwrap();
            assert!(linalg::dist(&a, &b) < 1e-7, "{a:?} vs {b:?}");
        }
    }
}
