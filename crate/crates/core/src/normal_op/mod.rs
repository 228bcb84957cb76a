//! Normal cones to strict and adjusted sublevel sets, local charts, atlases
//! and the sampling probes used to test the resulting set-valued maps.
mod atlas;
mod chart;
mod cones;
mod probes;

pub use atlas::{build_atlas, build_atlas_excluding_argmin, global_base, Atlas, BaseResult, MAX_CHARTS};
pub use chart::{build_chart, chart_base, LocalChart};
pub use cones::{adjusted_normal_cone, adjusted_normal_cone_with, normalized_base, strict_normal_cone, VERIFY_SAMPLES};
pub use probes::{
    closedness_probe, quasimonotonicity_probe, usc_probe, ClosednessReport, ClosednessWitness, ProbeConfig,
    ProbeReport, QuasimonotoneReport, QuasimonotoneWitness, DEFAULT_PROBE_TOL, DEFAULT_RADII,
};
