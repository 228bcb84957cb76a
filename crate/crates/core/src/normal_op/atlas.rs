use serde::{Deserialize, Serialize};

use super::chart::{build_chart, check_in_unit_ball, LocalChart};
use super::cones::adjusted_normal_cone;
use crate::error::{Error, Result};
use crate::geometry::{weighted_minkowski, GeneratedCone, Polytope};
use crate::linalg::box_grid;
use crate::quasiconvex::StepLevelFunction;

/// Upper bound on the number of charts densification may add.
pub const MAX_CHARTS: usize = 10_000;

/// Finite family of charts over a compact region, glued by hat bumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atlas {
    charts: Vec<LocalChart>,
    region: Polytope,
    cover_step: f64,
    /// Points closer than `cover_step` to this polytope are outside the atlas.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    excluded: Option<Polytope>,
}

/// A compact base of the adjusted normal cone assembled from the charts
/// active at a point.
#[derive(Debug, Clone, Serialize)]
pub struct BaseResult {
    pub base: Polytope,
    pub active_charts: Vec<(usize, f64)>,
    pub cone: GeneratedCone,
}

impl Atlas {
    pub fn from_parts(charts: Vec<LocalChart>, region: Polytope, cover_step: f64) -> Result<Self> {
        if !(cover_step > 0.0) {
            return Err(Error::InvalidArgument(format!("cover step {cover_step} must be positive")));
        }
        for ch in &charts {
            crate::error::check_dim(region.dim(), ch.z.len())?;
        }
        Ok(Self {
            charts,
            region,
            cover_step,
            excluded: None,
        })
    }

    pub fn charts(&self) -> &[LocalChart] {
        &self.charts
    }

    pub fn region(&self) -> &Polytope {
        &self.region
    }

    pub fn cover_step(&self) -> f64 {
        self.cover_step
    }

    pub fn excluded(&self) -> Option<&Polytope> {
        self.excluded.as_ref()
    }

    /// Inside the region and at least `cover_step` away from the excluded set.
    pub fn in_domain(&self, x: &[f64]) -> Result<bool> {
        if !self.region.contains(x, 1e-12)? {
            return Ok(false);
        }
        match &self.excluded {
            Some(p) => Ok(p.distance(x)? >= self.cover_step),
            None => Ok(true),
        }
    }

    /// Nonzero partition weights `(chart index, weight)`; empty on a hole.
    pub fn weights(&self, x: &[f64]) -> Vec<(usize, f64)> {
        let bumps: Vec<(usize, f64)> = self
            .charts
            .iter()
            .enumerate()
            .map(|(i, ch)| (i, ch.bump(x)))
            .filter(|(_, d)| *d > 0.0)
            .collect();
        let total: f64 = bumps.iter().map(|b| b.1).sum();
        bumps.into_iter().map(|(i, d)| (i, d / total)).collect()
    }

    /// Region points on a lattice of spacing `cover_step / 4`.
    pub fn verification_grid(&self) -> Result<Vec<Vec<f64>>> {
        let (lo, hi) = self.region.bounding_box()?;
        let mut out = Vec::new();
        for p in box_grid(&lo, &hi, self.cover_step / 4.0) {
            if self.in_domain(&p)? {
                out.push(p);
            }
        }
        Ok(out)
    }
}

/// Charts at the midpoints of a `cover_step` lattice over the region, then
/// greedily one more chart at each uncovered point of the verification grid.
/// The region must keep a distance of at least `cover_step` from the argmin.
pub fn build_atlas(f: &StepLevelFunction, region: &Polytope, cover_step: f64) -> Result<Atlas> {
    let atlas = Atlas::from_parts(Vec::new(), region.clone(), cover_step)?;
    let argmin = &f.polytopes()[0];
    for p in atlas.verification_grid()? {
        let d = argmin.distance(&p)?;
        if d < cover_step - f.tolerances().feas {
            return Err(Error::Precondition(format!(
                "region point {p:?} is {d} from the argmin, below the margin {cover_step}"
            )));
        }
    }
    populate(atlas, f)
}

/// Like [`build_atlas`], but the region may meet the argmin: points within
/// `cover_step` of it are cut out of the atlas domain.
pub fn build_atlas_excluding_argmin(f: &StepLevelFunction, region: &Polytope, cover_step: f64) -> Result<Atlas> {
    let mut atlas = Atlas::from_parts(Vec::new(), region.clone(), cover_step)?;
    atlas.excluded = Some(f.polytopes()[0].clone());
    populate(atlas, f)
}

fn populate(mut atlas: Atlas, f: &StepLevelFunction) -> Result<Atlas> {
    let grid = atlas.verification_grid()?;
    let region = atlas.region.clone();
    let cover_step = atlas.cover_step;
    let (lo, hi) = region.bounding_box()?;
    let counts: Vec<usize> = lo
        .iter()
        .zip(&hi)
        .map(|(l, h)| (((h - l) / cover_step) - 1e-9).ceil().max(1.0) as usize)
        .collect();
    let cell: Vec<f64> = (0..lo.len()).map(|i| (hi[i] - lo[i]) / counts[i] as f64).collect();
    let first: Vec<f64> = (0..lo.len()).map(|i| lo[i] + 0.5 * cell[i]).collect();
    let last: Vec<f64> = (0..lo.len()).map(|i| hi[i] - 0.5 * cell[i]).collect();
    let step = cell.iter().copied().fold(0.0, f64::max).max(1e-300);
    for z in box_grid(&first, &last, step + 1e-12) {
        if atlas.in_domain(&z)? {
            atlas.charts.push(build_chart(f, &z)?);
        }
    }
    let mut covered: Vec<bool> = grid.iter().map(|p| atlas.charts.iter().any(|c| c.bump(p) > 0.0)).collect();
    while let Some(k) = covered.iter().position(|c| !c) {
        if atlas.charts.len() >= MAX_CHARTS {
            return Err(Error::CoverageHole { point: grid[k].clone() });
        }
        let chart = build_chart(f, &grid[k])?;
        for (p, c) in grid.iter().zip(covered.iter_mut()) {
            if !*c && chart.bump(p) > 0.0 {
                *c = true;
            }
        }
        atlas.charts.push(chart);
    }
    Ok(atlas)
}

/// `A(x) = sum_i w_i(x) A_i(x)` over the active charts, checked against the
/// base invariants: inside the dual unit ball, away from the origin by
/// `tol.zero`, and generating the adjusted normal cone.
pub fn global_base(atlas: &Atlas, f: &StepLevelFunction, x: &[f64]) -> Result<BaseResult> {
    let tol = f.tolerances();
    let active = atlas.weights(x);
    if active.is_empty() {
        return Err(Error::CoverageHole { point: x.to_vec() });
    }
    if f.in_argmin(x)? {
        return Err(Error::Precondition(format!("{x:?} is a minimizer")));
    }
    let cone = adjusted_normal_cone(f, x)?;
    let sections: Vec<Polytope> = active
        .iter()
        .map(|(i, _)| atlas.charts[*i].section(&cone))
        .collect::<Result<_>>()?;
    let terms: Vec<(f64, &Polytope)> = active.iter().map(|(_, w)| *w).zip(sections.iter()).collect();
    let base = weighted_minkowski(&terms)?;
    check_in_unit_ball(&base, tol.feas)?;
    let min_norm = base.distance(&vec![0.0; f.dim()])?;
    if min_norm < tol.zero {
        return Err(Error::Verification(format!(
            "base at {x:?} comes within {min_norm} of the origin"
        )));
    }
    if !GeneratedCone::from_base(&base)?.equals(&cone, tol.cone)? {
        return Err(Error::Verification(format!(
            "base at {x:?} does not generate the adjusted normal cone"
        )));
    }
    Ok(BaseResult {
        base,
        active_charts: active,
        cone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;

    #[test]
    fn step1d_atlas_partitions_unity() {
        let f = instances::step1d();
        let region = Polytope::from_box(&[0.25], &[1.75]).unwrap();
        let atlas = build_atlas(&f, &region, 0.25).unwrap();
        for p in atlas.verification_grid().unwrap() {
            let w = atlas.weights(&p);
            assert!(!w.is_empty());
            let s: f64 = w.iter().map(|w| w.1).sum();
            assert!((s - 1.0).abs() <= 1e-12);
            for (i, wi) in &w {
                assert!(*wi > 0.0);
                assert!(atlas.charts()[*i].in_ball(&p, 0.0));
            }
        }
    }

    #[test]
    fn margin_is_enforced() {
        let f = instances::step1d();
        let region = Polytope::from_box(&[0.1], &[1.0]).unwrap();
        assert!(build_atlas(&f, &region, 0.25).is_err());
    }

    #[test]
    fn single_chart_weights_are_one() {
        let f = instances::step1d();
        let region = Polytope::from_box(&[0.4], &[0.6]).unwrap();
        let atlas = build_atlas(&f, &region, 0.25).unwrap();
        assert_eq!(atlas.charts().len(), 1);
        for p in atlas.verification_grid().unwrap() {
            assert_eq!(atlas.weights(&p), vec![(0, 1.0)]);
            let b = global_base(&atlas, &f, &p).unwrap();
            let v = b.base.vertices().unwrap();
            assert!((v[0][0] - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn two_singleton_charts_mix() {
        let ch_a = LocalChart::new(vec![0.5], 0.5, vec![-0.5], 0.25).unwrap();
        let ch_b = LocalChart::new(vec![1.0], 0.5, vec![-0.2], 0.36).unwrap();
        let atlas = Atlas::from_parts(vec![ch_a, ch_b], Polytope::from_box(&[0.5], &[1.0]).unwrap(), 0.25).unwrap();
        let x = [0.7];
        let w = atlas.weights(&x);
        assert_eq!(w.len(), 2);
        let f = instances::step1d();
        let b = global_base(&atlas, &f, &x).unwrap();
        let expect = w[0].1 * 0.25 + w[1].1 * 0.3;
        assert!((b.base.vertices().unwrap()[0][0] - expect).abs() < 1e-12);
    }

    #[test]
    fn sq2d_base_generates_cone() {
        let f = instances::sq2d();
        let region = Polytope::from_box(&[1.25, -2.0], &[2.0, 2.0]).unwrap();
        let atlas = build_atlas(&f, &region, 0.25).unwrap();
        let mut multi = 0;
        for p in atlas.verification_grid().unwrap().iter().step_by(7) {
            let b = global_base(&atlas, &f, p).unwrap();
            if b.active_charts.len() > 1 {
                multi += 1;
            }
        }
        assert!(multi > 0);
    }

    #[test]
    fn json_round_trip() {
        let f = instances::step1d();
        let region = Polytope::from_box(&[0.25], &[1.75]).unwrap();
        let atlas = build_atlas(&f, &region, 0.25).unwrap();
        let text = serde_json::to_string(&atlas).unwrap();
        assert!(text.contains("\"lambda\"") && text.contains("\"cover_step\""));
        let back: Atlas = serde_json::from_str(&text).unwrap();
        assert_eq!(back, atlas);
    }

    #[test]
    fn excluded_argmin_band() {
        let f = instances::sq2d();
        let region = Polytope::cube(2, 2.0).unwrap();
        let atlas = build_atlas_excluding_argmin(&f, &region, 0.25).unwrap();
        let grid = atlas.verification_grid().unwrap();
        assert!(grid.len() >= 100);
        for p in &grid {
            assert!(f.polytopes()[0].distance(p).unwrap() >= 0.25);
            assert!(!atlas.weights(p).is_empty());
        }
        assert!(!atlas.in_domain(&[1.1, 0.0]).unwrap());
        let text = serde_json::to_string(&atlas).unwrap();
        let back: Atlas = serde_json::from_str(&text).unwrap();
        assert_eq!(back, atlas);
    }
}
