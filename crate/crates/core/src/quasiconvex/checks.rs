use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Function;
use crate::error::{Error, Result};
use crate::stream_rng;

/// Seeded sampling budget: `base_points` base points, `pairs` partners each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub base_points: usize,
    pub pairs: usize,
    pub seed: u64,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        Self {
            base_points: 1000,
            pairs: 100,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport<W> {
    pub pass: bool,
    pub checked: usize,
    pub violations: usize,
    pub witness: Option<W>,
}

/// `f(t x + (1-t) y) > max(f(x), f(y))`. Infinite violations serialize as `null`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentWitness {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
    pub value_at_mix: f64,
    pub max_endpoint: f64,
    pub violation: f64,
}

/// `y1, y2` in the adjusted sublevel set of `x` whose mix leaves it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjustedWitness {
    pub x: Vec<f64>,
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
    pub t: f64,
    pub mix: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    pub pairs: usize,
    pub violations: usize,
    pub witness: Option<(Vec<f64>, Vec<f64>)>,
}

fn mix(t: f64, a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(p, q)| t * p + (1.0 - t) * q).collect()
}

fn feas(f: &Function) -> f64 {
    match f {
        Function::Step(s) => s.tolerances().feas,
        Function::Analytic(a) => a.tolerances().feas,
    }
}

/// Samples segment triples and reports the worst violation of
/// `f(t x + (1-t) y) <= max(f(x), f(y))`.
pub fn quasiconvexity_check(f: &Function, plan: &SamplingPlan) -> Result<CheckReport<SegmentWitness>> {
    let tol = feas(f);
    let per_base: Vec<(usize, usize, Option<SegmentWitness>)> = (0..plan.base_points)
        .into_par_iter()
        .map(|i| -> Result<_> {
            let mut rng = stream_rng(plan.seed, i as u64);
            let x = f.sample_point(&mut rng)?;
            let fx = f.evaluate(&x)?;
            let mut checked = 0;
            let mut violations = 0;
            let mut worst: Option<SegmentWitness> = None;
            for _ in 0..plan.pairs {
                let y = f.sample_point(&mut rng)?;
                let t: f64 = rng.gen();
                let fy = f.evaluate(&y)?;
                let top = fx.max(fy);
                if !top.is_finite() {
                    continue;
                }
                checked += 1;
                let m = mix(t, &x, &y);
                let fm = f.evaluate(&m)?;
                let violation = fm - top;
                if violation > tol {
                    violations += 1;
                    if worst.as_ref().is_none_or(|w| violation > w.violation) {
                        worst = Some(SegmentWitness {
                            x: x.clone(),
                            y,
                            t,
                            value_at_mix: fm,
                            max_endpoint: top,
                            violation,
                        });
                    }
                }
            }
            Ok((checked, violations, worst))
        })
        .collect::<Result<_>>()?;
    let mut report = CheckReport {
        pass: true,
        checked: 0,
        violations: 0,
        witness: None,
    };
    for (c, v, w) in per_base {
        report.checked += c;
        report.violations += v;
        if let Some(w) = w {
            if report.witness.as_ref().is_none_or(|b: &SegmentWitness| w.violation > b.violation) {
                report.witness = Some(w);
            }
        }
    }
    report.pass = report.violations == 0;
    Ok(report)
}

/// Samples pairs inside the adjusted sublevel set of each base point and
/// tests that their mixes stay inside.
pub fn adjusted_convexity_check(f: &Function, plan: &SamplingPlan) -> Result<CheckReport<AdjustedWitness>> {
    let per_base: Vec<(usize, usize, Option<AdjustedWitness>)> = (0..plan.base_points)
        .into_par_iter()
        .map(|i| -> Result<_> {
            let mut rng = stream_rng(plan.seed ^ 0x5a5a_5a5a, i as u64);
            let x = f.sample_point(&mut rng)?;
            let fx = f.evaluate(&x)?;
            if !fx.is_finite() {
                return Ok((0, 0, None));
            }
            // Base points that are minimizers at grid resolution carry no
            // decidable adjusted set.
            let view = match f.adjusted(&x) {
                Ok(v) => v,
                Err(Error::Precondition(_)) => return Ok((0, 0, None)),
                Err(e) => return Err(e),
            };
            let mut pool = vec![x.clone()];
            for _ in 0..4 * plan.pairs {
                if pool.len() >= plan.pairs.max(2) {
                    break;
                }
                let y = f.sample_below(&mut rng, fx)?;
                if view.contains(&y)? {
                    pool.push(y);
                }
            }
            if pool.len() < 2 {
                return Ok((0, 0, None));
            }
            let mut checked = 0;
            let mut violations = 0;
            let mut first = None;
            for k in 0..plan.pairs {
                let a = &pool[k % pool.len()];
                let b = &pool[rng.gen_range(0..pool.len())];
                let t: f64 = rng.gen();
                let m = mix(t, a, b);
                checked += 1;
                if !view.contains(&m)? {
                    violations += 1;
                    if first.is_none() {
                        first = Some(AdjustedWitness {
                            x: x.clone(),
                            y1: a.clone(),
                            y2: b.clone(),
                            t,
                            mix: m,
                        });
                    }
                }
            }
            Ok((checked, violations, first))
        })
        .collect::<Result<_>>()?;
    let mut report = CheckReport {
        pass: true,
        checked: 0,
        violations: 0,
        witness: None,
    };
    for (c, v, w) in per_base {
        report.checked += c;
        report.violations += v;
        if report.witness.is_none() {
            report.witness = w;
        }
    }
    report.pass = report.violations == 0;
    Ok(report)
}

/// Counts pairs breaking `S^<_{f(x)} ⊆ S^a_f(x) ⊆ S_{f(x)}`, with the outer
/// sets decided directly from function values.
pub fn sandwich_check(f: &Function, plan: &SamplingPlan) -> Result<SandwichReport> {
    let per_base: Vec<(usize, usize, Option<(Vec<f64>, Vec<f64>)>)> = (0..plan.base_points)
        .into_par_iter()
        .map(|i| -> Result<_> {
            let mut rng = stream_rng(plan.seed ^ 0x3c3c_3c3c, i as u64);
            let mut x = f.sample_point(&mut rng)?;
            let mut fx = f.evaluate(&x)?;
            for _ in 0..100 {
                if fx.is_finite() {
                    break;
                }
                x = f.sample_point(&mut rng)?;
                fx = f.evaluate(&x)?;
            }
            if !fx.is_finite() {
                return Ok((0, 0, None));
            }
            let view = match f.adjusted(&x) {
                Ok(v) => v,
                Err(Error::Precondition(_)) => return Ok((0, 0, None)),
                Err(e) => return Err(e),
            };
            let mut bad = 0;
            let mut witness = None;
            for _ in 0..plan.pairs {
                let y = f.sample_point(&mut rng)?;
                let fy = f.evaluate(&y)?;
                let inside = view.contains(&y)?;
                let ok = (!(fy < fx) || inside) && (!inside || fy <= fx);
                if !ok {
                    bad += 1;
                    witness.get_or_insert((x.clone(), y));
                }
            }
            Ok((plan.pairs, bad, witness))
        })
        .collect::<Result<_>>()?;
    let mut report = SandwichReport {
        pairs: 0,
        violations: 0,
        witness: None,
    };
    for (p, v, w) in per_base {
        report.pairs += p;
        report.violations += v;
        if report.witness.is_none() {
            report.witness = w;
        }
    }
    Ok(report)
}
