use crate::error::{check_dim, Error, Result};
use crate::geometry::{GeneratedCone, Polytope};
use crate::linalg::{dot, norm, normalized, sub};
use crate::quasiconvex::StepLevelFunction;
use crate::stream_rng;

/// Number of sampled points of the adjusted sublevel set used to verify a
/// computed adjusted normal cone.
pub const VERIFY_SAMPLES: usize = 1000;

/// Deterministic seed derived from the bits of a point.
pub(crate) fn point_seed(x: &[f64]) -> u64 {
    x.iter().fold(0xcbf2_9ce4_8422_2325, |h: u64, v| {
        (h ^ v.to_bits()).wrapping_mul(0x0100_0000_01b3)
    })
}

fn active_normals(p: &Polytope, x: &[f64], feas: f64) -> Vec<Vec<f64>> {
    p.halfspaces()
        .iter()
        .filter(|h| h.slack(x).abs() <= feas * norm(&h.normal).max(1.0))
        .filter_map(|h| normalized(&h.normal))
        .collect()
}

/// Polar of the strict sublevel polytope translated by `-x`.
pub fn strict_normal_cone(f: &StepLevelFunction, x: &[f64]) -> Result<GeneratedCone> {
    check_dim(f.dim(), x.len())?;
    let j = match f.level_index(x)? {
        None => return Err(Error::Precondition(format!("{x:?} is outside the domain"))),
        Some(0) => {
            return Err(Error::Precondition(format!(
                "{x:?} is a minimizer; the strict normal cone is the whole space"
            )))
        }
        Some(j) => j,
    };
    let strict = f
        .strict_sublevel(f.levels()[j])
        .realization
        .expect("a lower level exists");
    let dirs: Vec<Vec<f64>> = strict.vertices()?.iter().map(|v| sub(v, x)).collect();
    GeneratedCone::polar_of(f.dim(), &dirs)
}

/// Normal cone to the adjusted sublevel set at `x`.
///
/// Outside the argmin the generators are the active facet normals of the
/// sublevel polytope plus the enlargement ray `(x - p) / rho`; the result is
/// checked against sampled points of the adjusted set and recomputed as a
/// polar of those points if the check fails.
pub fn adjusted_normal_cone(f: &StepLevelFunction, x: &[f64]) -> Result<GeneratedCone> {
    adjusted_normal_cone_with(f, x, VERIFY_SAMPLES)
}

pub fn adjusted_normal_cone_with(
    f: &StepLevelFunction,
    x: &[f64],
    verify_samples: usize,
) -> Result<GeneratedCone> {
    check_dim(f.dim(), x.len())?;
    let tol = *f.tolerances();
    let set = f.adjusted_set(x)?;
    let sub_poly = set.sublevel();
    let mut gens = active_normals(sub_poly, x, tol.feas);
    let Some(strict) = set.strict else {
        return GeneratedCone::new(f.dim(), gens, tol.gen)?.irredundant(tol.cone);
    };
    let p = strict.project(x)?;
    if p.distance <= tol.feas {
        return Err(Error::Verification(format!(
            "{x:?} lies on its strict sublevel set"
        )));
    }
    gens.push(sub(x, &p.point).iter().map(|v| v / p.distance).collect());
    let cone = GeneratedCone::new(f.dim(), gens, tol.gen)?.irredundant(tol.cone)?;

    let mut rng = stream_rng(point_seed(x), 1);
    let mut members: Vec<Vec<f64>> = strict.vertices()?.to_vec();
    for v in sub_poly.vertices()? {
        if set.contains(v)? {
            members.push(v.clone());
        }
    }
    let mut drawn = 0;
    for _ in 0..20 {
        if drawn >= verify_samples {
            break;
        }
        for y in sub_poly.sample(&mut rng, verify_samples)? {
            if drawn >= verify_samples {
                break;
            }
            if set.contains(&y)? {
                members.push(y);
                drawn += 1;
            }
        }
    }
    let valid = cone.generators().iter().all(|g| {
        let u = normalized(g).expect("nonzero generator");
        members.iter().all(|y| dot(&u, &sub(y, x)) <= tol.cone)
    });
    if valid {
        return Ok(cone);
    }
    let hull = Polytope::from_vertices(&members)?;
    let dirs: Vec<Vec<f64>> = hull.vertices()?.iter().map(|v| sub(v, x)).collect();
    GeneratedCone::polar_of(f.dim(), &dirs)
}

/// Hull of the unit-normalized irredundant generators of the adjusted cone.
pub fn normalized_base(f: &StepLevelFunction, x: &[f64]) -> Result<Polytope> {
    if f.in_argmin(x)? {
        return Err(Error::Precondition(format!("{x:?} is a minimizer")));
    }
    let cone = adjusted_normal_cone(f, x)?;
    cone.normalized_base(f.tolerances().cone)
}
