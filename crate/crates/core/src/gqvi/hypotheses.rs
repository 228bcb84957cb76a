use rand::Rng;
use serde::Serialize;

use super::ConstraintMap;
use crate::error::{Error, Result};
use crate::geometry::Polytope;
use crate::linalg::normalized;
use crate::stream_rng;

/// Radii for the inner-continuity probe.
pub const LSC_RADII: [f64; 3] = [1e-2, 1e-4, 1e-6];
/// Largest admissible inner deviation at the smallest radius.
pub const LSC_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Serialize)]
pub struct LscWitness {
    pub x: Vec<f64>,
    pub x_prime: Vec<f64>,
    pub y: Vec<f64>,
    pub distance: f64,
}

/// `max dist(y, K(x'))` over `y` a vertex of `K(x)` and `|x' - x| = r`, per
/// radius.
#[derive(Debug, Clone, Serialize)]
pub struct LscProbe {
    pub radii: Vec<f64>,
    pub deviations: Vec<f64>,
    pub witness: Option<LscWitness>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub points: usize,
    /// Every sampled `K(x)` lies in the ambient box.
    pub bounded: bool,
    pub empty_values: usize,
    pub nonempty: bool,
    /// Values are polytopes, hence closed and convex.
    pub values_convex_closed: bool,
    /// `None` when the map does not expose its fixed-point set.
    pub fix_closed: Option<bool>,
    pub lsc: LscProbe,
    /// All of the above hold.
    pub applies: bool,
}

fn clamp_into(bounds: &Polytope, x: Vec<f64>) -> Result<Vec<f64>> {
    if bounds.contains(&x, 0.0)? {
        Ok(x)
    } else {
        Ok(bounds.project(&x)?.point)
    }
}

/// Informational check of the existence hypotheses on `samples` random points
/// of the ambient box plus the caller's `extra` points.
pub fn hypothesis_report<K: ConstraintMap + ?Sized>(
    k: &K,
    samples: usize,
    seed: u64,
    extra: &[Vec<f64>],
) -> Result<HypothesisReport> {
    let n = k.dim();
    let ambient = k.ambient();
    let mut rng = stream_rng(seed, 0);
    let mut points = extra.to_vec();
    points.extend(ambient.sample(&mut rng, samples)?);

    let mut bounded = true;
    let mut empty = 0;
    let mut deviations = vec![0.0_f64; LSC_RADII.len()];
    let mut witness: Option<LscWitness> = None;
    for x in &points {
        let kx = match k.at(x) {
            Ok(p) => p,
            Err(Error::EmptyPolytope) => {
                empty += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let verts = kx.vertices()?.to_vec();
        if verts.iter().any(|v| !ambient.contains_unchecked(v, 1e-9)) {
            bounded = false;
        }
        let mut dirs: Vec<Vec<f64>> = Vec::with_capacity(2 * n + 1);
        for i in 0..n {
            for s in [1.0, -1.0] {
                let mut e = vec![0.0; n];
                e[i] = s;
                dirs.push(e);
            }
        }
        let g: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        dirs.extend(normalized(&g));
        for (ri, &r) in LSC_RADII.iter().enumerate() {
            for d in &dirs {
                let xp = clamp_into(ambient, x.iter().zip(d).map(|(a, b)| a + r * b).collect())?;
                let kp = match k.at(&xp) {
                    Ok(p) => p,
                    Err(Error::EmptyPolytope) => {
                        empty += 1;
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                for y in &verts {
                    let dist = kp.distance(y)?;
                    if dist > deviations[ri] {
                        deviations[ri] = dist;
                        if ri + 1 == LSC_RADII.len() {
                            witness = Some(LscWitness {
                                x: x.clone(),
                                x_prime: xp.clone(),
                                y: y.clone(),
                                distance: dist,
                            });
                        }
                    }
                }
            }
        }
    }
    let terminal = *deviations.last().expect("nonempty ladder");
    let lsc = LscProbe {
        radii: LSC_RADII.to_vec(),
        deviations,
        pass: terminal <= LSC_TOL,
        witness: if terminal > LSC_TOL { witness } else { None },
    };
    let fix_closed = k.fixed_points().map(|r| r.is_ok());
    let nonempty = empty == 0;
    Ok(HypothesisReport {
        points: points.len(),
        bounded,
        empty_values: empty,
        nonempty,
        values_convex_closed: true,
        fix_closed,
        applies: bounded && nonempty && lsc.pass && fix_closed != Some(false),
        lsc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gqvi::MovingPolytope;
    use crate::instances;

    struct Jump {
        ambient: Polytope,
    }

    impl ConstraintMap for Jump {
        fn dim(&self) -> usize {
            1
        }
        fn ambient(&self) -> &Polytope {
            &self.ambient
        }
        fn at(&self, x: &[f64]) -> Result<Polytope> {
            if x[0] < 0.5 {
                Polytope::from_box(&[0.0], &[0.2])
            } else {
                Polytope::from_box(&[0.8], &[1.0])
            }
        }
    }

    #[test]
    fn moving_interval_passes() {
        let r = hypothesis_report(&instances::moving_interval_constraint(), 200, 1, &[]).unwrap();
        assert!(r.applies, "{r:?}");
        assert_eq!(r.fix_closed, Some(true));
    }

    #[test]
    fn constant_box_passes() {
        let k = MovingPolytope::constant_box(Polytope::cube(2, 1.0).unwrap());
        let r = hypothesis_report(&k, 50, 1, &[]).unwrap();
        assert!(r.applies);
        assert_eq!(r.lsc.deviations, vec![0.0; 3]);
    }

    #[test]
    fn jump_fails_with_witness() {
        let k = Jump {
            ambient: Polytope::from_box(&[0.0], &[1.0]).unwrap(),
        };
        let r = hypothesis_report(&k, 20, 1, &[vec![0.5]]).unwrap();
        assert!(!r.lsc.pass && !r.applies);
        let w = r.lsc.witness.unwrap();
        assert_eq!(w.x, vec![0.5]);
        assert!(w.distance >= 0.6 - 1e-12);
        assert_eq!(r.fix_closed, None);
    }
}
