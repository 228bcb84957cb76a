use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cones::adjusted_normal_cone;
use crate::error::{Error, Result};
use crate::geometry::{GeneratedCone, Polytope};
use crate::linalg::{dot, normalized, sub};
use crate::quasiconvex::StepLevelFunction;
use crate::stream_rng;

/// Default radii ladder for the semicontinuity probe.
pub const DEFAULT_RADII: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];
/// Default terminal deviation threshold.
pub const DEFAULT_PROBE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub radii: Vec<f64>,
    pub samples_per_radius: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            radii: DEFAULT_RADII.to_vec(),
            samples_per_radius: 20,
            seed: 42,
            tol: DEFAULT_PROBE_TOL,
        }
    }
}

/// Upper Hausdorff deviation of a polytope-valued map around `x`, per radius.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub x: Vec<f64>,
    pub radii: Vec<f64>,
    pub deviations: Vec<f64>,
    pub holes: usize,
    pub monotone: bool,
    pub terminal_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

fn uniform_in_ball<R: Rng>(rng: &mut R, x: &[f64], r: f64) -> Vec<f64> {
    let n = x.len();
    let dir = loop {
        let g: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if let Some(u) = normalized(&g) {
            break u;
        }
    };
    let s = r * rng.gen::<f64>().powf(1.0 / n as f64);
    x.iter().zip(&dir).map(|(a, d)| a + s * d).collect()
}

fn is_hole(e: &Error) -> bool {
    matches!(e, Error::CoverageHole { .. } | Error::Precondition(_))
}

/// For each radius `r`, the largest distance from a vertex of `map(x')` to
/// `map(x)` over sampled `|x' - x| <= r`; the first `2n` samples sit at
/// `x +- r e_i`. Passes when the curve is non-increasing down the ladder and
/// ends at or below `cfg.tol`.
pub fn usc_probe<M>(map: M, x: &[f64], cfg: &ProbeConfig) -> Result<ProbeReport>
where
    M: Fn(&[f64]) -> Result<Polytope> + Sync,
{
    if cfg.radii.is_empty() || cfg.radii.windows(2).any(|w| w[1] >= w[0]) || cfg.radii[0] <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "radii must be positive and strictly decreasing: {:?}",
            cfg.radii
        )));
    }
    let center = map(x)?;
    let n = x.len();
    let mut deviations = Vec::with_capacity(cfg.radii.len());
    let mut holes = 0;
    for (k, &r) in cfg.radii.iter().enumerate() {
        let per: Vec<Option<f64>> = (0..cfg.samples_per_radius)
            .into_par_iter()
            .map(|s| -> Result<Option<f64>> {
                let xp = if s < 2 * n {
                    let mut p = x.to_vec();
                    p[s / 2] += if s % 2 == 0 { r } else { -r };
                    p
                } else {
                    let mut rng = stream_rng(cfg.seed, (k * cfg.samples_per_radius + s) as u64);
                    uniform_in_ball(&mut rng, x, r)
                };
                let val = match map(&xp) {
                    Ok(v) => v,
                    Err(e) if is_hole(&e) => return Ok(None),
                    Err(e) => return Err(e),
                };
                let mut worst: f64 = 0.0;
                for v in val.vertices()? {
                    worst = worst.max(center.distance(v)?);
                }
                Ok(Some(worst))
            })
            .collect::<Result<_>>()?;
        holes += per.iter().filter(|p| p.is_none()).count();
        deviations.push(per.into_iter().flatten().fold(0.0, f64::max));
    }
    let monotone = deviations.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let terminal = *deviations.last().expect("nonempty ladder");
    Ok(ProbeReport {
        x: x.to_vec(),
        radii: cfg.radii.clone(),
        deviations,
        holes,
        monotone,
        terminal_deviation: terminal,
        tol: cfg.tol,
        pass: monotone && terminal <= cfg.tol,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosednessWitness {
    pub point: Vec<f64>,
    pub direction: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosednessReport {
    pub x: Vec<f64>,
    pub sequences: usize,
    pub checked: usize,
    pub violations: usize,
    pub witnesses: Vec<ClosednessWitness>,
    pub pass: bool,
}

const SEQUENCE_START: f64 = 0.1;
const SEQUENCE_LENGTH: i32 = 16;
const TAIL: i32 = 3;
const MAX_WITNESSES: usize = 10;

/// Sequences `x_k = x + 0.1 * 2^-k d` approach `x` along sampled directions
/// (the first `2n` along `+-e_i`); the unit generators of `N^a(x_k)` on the
/// tail of each sequence must lie in `N^a(x)` within `tol.cone`.
pub fn closedness_probe(f: &StepLevelFunction, x: &[f64], sequences: usize, seed: u64) -> Result<ClosednessReport> {
    if f.in_argmin(x)? {
        return Err(Error::Precondition(format!("{x:?} is a minimizer")));
    }
    let tol = f.tolerances();
    let limit = adjusted_normal_cone(f, x)?;
    let n = x.len();
    let per: Vec<(usize, Vec<ClosednessWitness>)> = (0..sequences)
        .into_par_iter()
        .map(|s| -> Result<_> {
            let d = if s < 2 * n {
                let mut e = vec![0.0; n];
                e[s / 2] = if s % 2 == 0 { 1.0 } else { -1.0 };
                e
            } else {
                let mut rng = stream_rng(seed, s as u64);
                let p = uniform_in_ball(&mut rng, &vec![0.0; n], 1.0);
                normalized(&p).unwrap_or_else(|| {
                    let mut e = vec![0.0; n];
                    e[0] = 1.0;
                    e
                })
            };
            let mut checked = 0;
            let mut bad = Vec::new();
            for k in (SEQUENCE_LENGTH - TAIL + 1)..=SEQUENCE_LENGTH {
                let step = SEQUENCE_START * 2f64.powi(-k);
                let xk: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + step * b).collect();
                match f.level_index(&xk)? {
                    None | Some(0) => continue,
                    Some(_) => {}
                }
                checked += 1;
                for g in adjusted_normal_cone(f, &xk)?.generators() {
                    let u = normalized(g).expect("nonzero generator");
                    if !limit.contains(&u, tol.cone)? {
                        bad.push(ClosednessWitness {
                            point: xk.clone(),
                            direction: u,
                        });
                    }
                }
            }
            Ok((checked.min(1), bad))
        })
        .collect::<Result<_>>()?;
    let mut report = ClosednessReport {
        x: x.to_vec(),
        sequences,
        checked: 0,
        violations: 0,
        witnesses: Vec::new(),
        pass: true,
    };
    for (c, bad) in per {
        report.checked += c;
        report.violations += bad.len();
        for w in bad {
            if report.witnesses.len() < MAX_WITNESSES {
                report.witnesses.push(w);
            }
        }
    }
    report.pass = report.violations == 0;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct QuasimonotoneWitness {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub x_star: Vec<f64>,
    pub y_star: Vec<f64>,
    pub forward: f64,
    pub backward: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct QuasimonotoneReport {
    pub pairs: usize,
    pub violations: usize,
    pub witnesses: Vec<QuasimonotoneWitness>,
    pub pass: bool,
}

fn sample_outside_argmin<R: Rng>(f: &StepLevelFunction, rng: &mut R) -> Result<Vec<f64>> {
    for _ in 0..10_000 {
        let p = f.sample_point(rng)?;
        if matches!(f.level_index(&p)?, Some(j) if j > 0) {
            return Ok(p);
        }
    }
    Err(Error::Precondition("domain minus argmin is too thin to sample".into()))
}

fn unit_generators(cone: &GeneratedCone) -> Vec<Vec<f64>> {
    cone.generators().iter().filter_map(|g| normalized(g)).collect()
}

/// Sampled pairs outside the argmin: whenever a unit generator `x*` of
/// `N^a(x)` has `<x*, y - x> > tol.cone`, every unit generator `y*` of
/// `N^a(y)` must have `<y*, y - x> >= -tol.cone`.
pub fn quasimonotonicity_probe(f: &StepLevelFunction, pairs: usize, seed: u64) -> Result<QuasimonotoneReport> {
    let tol = f.tolerances().cone;
    let per: Vec<Vec<QuasimonotoneWitness>> = (0..pairs)
        .into_par_iter()
        .map(|i| -> Result<_> {
            let mut rng = stream_rng(seed, i as u64);
            let x = sample_outside_argmin(f, &mut rng)?;
            let y = sample_outside_argmin(f, &mut rng)?;
            let gx = unit_generators(&adjusted_normal_cone(f, &x)?);
            let gy = unit_generators(&adjusted_normal_cone(f, &y)?);
            let d = sub(&y, &x);
            let mut bad = Vec::new();
            for xs in &gx {
                let forward = dot(xs, &d);
                if forward <= tol {
                    continue;
                }
                for ys in &gy {
                    let backward = dot(ys, &d);
                    if backward < -tol {
                        bad.push(QuasimonotoneWitness {
                            x: x.clone(),
                            y: y.clone(),
                            x_star: xs.clone(),
                            y_star: ys.clone(),
                            forward,
                            backward,
                        });
                    }
                }
            }
            Ok(bad)
        })
        .collect::<Result<_>>()?;
    let mut report = QuasimonotoneReport {
        pairs,
        violations: 0,
        witnesses: Vec::new(),
        pass: true,
    };
    for bad in per {
        report.violations += bad.len();
        for w in bad {
            if report.witnesses.len() < MAX_WITNESSES {
                report.witnesses.push(w);
            }
        }
    }
    report.pass = report.violations == 0;
    Ok(report)
}
