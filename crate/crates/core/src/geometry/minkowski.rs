use super::Polytope;
use crate::error::{check_dim, Error, Result};
use crate::linalg::axpy;

/// Largest number of vertex selections a weighted Minkowski sum may expand.
pub const MAX_MINKOWSKI_COMBINATIONS: usize = 100_000;

/// `{sum_i w_i q_i : q_i in Q_i}` as the hull of all weighted vertex sums.
/// Weights must be nonnegative and sum to one within `1e-12`.
pub fn weighted_minkowski(terms: &[(f64, &Polytope)]) -> Result<Polytope> {
    let Some((_, first)) = terms.first() else {
        return Err(Error::InvalidArgument("empty Minkowski sum".into()));
    };
    let dim = first.dim();
    let mut sum = 0.0;
    for (w, q) in terms {
        check_dim(dim, q.dim())?;
        if !(*w >= 0.0) {
            return Err(Error::InvalidWeights { sum: *w });
        }
        sum += w;
    }
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidWeights { sum });
    }
    let live: Vec<(f64, &[Vec<f64>])> = terms
        .iter()
        .filter(|(w, _)| *w > 0.0)
        .map(|(w, q)| q.vertices().map(|v| (*w, v)))
        .collect::<Result<_>>()?;
    let mut combos: usize = 1;
    for (_, vs) in &live {
        combos = combos.saturating_mul(vs.len());
    }
    if combos > MAX_MINKOWSKI_COMBINATIONS {
        return Err(Error::ScaleBound {
            what: "Minkowski vertex selections",
            value: combos,
            limit: MAX_MINKOWSKI_COMBINATIONS,
        });
    }
    let mut points: Vec<Vec<f64>> = vec![vec![0.0; dim]];
    for (w, vs) in &live {
        let mut next = Vec::with_capacity(points.len() * vs.len());
        for p in &points {
            for v in vs.iter() {
                let mut q = p.clone();
                axpy(&mut q, *w, v);
                next.push(q);
            }
        }
        points = super::enumerate::dedup_points(&next);
    }
    Polytope::from_vertices(&points)
}
