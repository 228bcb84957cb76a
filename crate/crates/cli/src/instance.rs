//! Instance documents. Every subcommand reads the same versioned schema and
//! picks the sections it needs.

use std::path::Path;

use adjcone_core::geometry::Polytope;
use adjcone_core::gqvi::{GqviInstance, MovingPolytope, PolytopeOperator, SolverConfig};
use adjcone_core::normal_op::{build_atlas, build_atlas_excluding_argmin, Atlas};
use adjcone_core::quasiconvex::{Function, FunctionJson, StepLevelFunction};
use adjcone_core::quasiopt::{QuasioptInstance, VERIFY_MESH};
use adjcone_core::{Error, ToleranceConfig};
use anyhow::{Context, Result};
use serde::Deserialize;
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub schema_version: u32,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub function: Option<FunctionJson>,
    #[serde(default)]
    pub tol: Option<ToleranceConfig>,
    #[serde(default)]
    pub atlas: Option<AtlasSpec>,
    #[serde(rename = "K", default)]
    pub k: Option<MovingPolytope>,
    #[serde(rename = "T", default)]
    pub t: Option<PolytopeOperator>,
    #[serde(default)]
    pub solver: Option<SolverConfig>,
    #[serde(default)]
    pub verify_mesh: Option<f64>,
}

/// A prebuilt atlas, or the parameters to build one.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum AtlasSpec {
    Built(Atlas),
    Params(AtlasParams),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtlasParams {
    #[serde(default)]
    pub region: Option<Polytope>,
    pub cover_step: f64,
    #[serde(default)]
    pub exclude_argmin: bool,
}

pub fn schema_error(field: &str, message: impl Into<String>) -> anyhow::Error {
    Error::Schema {
        field: field.into(),
        message: message.into(),
    }
    .into()
}

/// A parsed instance file together with the digest of its raw bytes.
#[derive(Debug)]
pub struct Loaded {
    pub doc: InstanceDoc,
    pub sha256: String,
}

pub fn parse(bytes: &[u8]) -> Result<Loaded> {
    let sha256 = hex::encode(Sha256::digest(bytes));
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let doc: InstanceDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema_error(if path == "." { "<root>" } else { &path }, e.into_inner().to_string())
    })?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(schema_error(
            "schema_version",
            format!("unsupported version {}, expected {SCHEMA_VERSION}", doc.schema_version),
        ));
    }
    Ok(Loaded { doc, sha256 })
}

pub fn load(path: &Path) -> Result<Loaded> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&bytes).with_context(|| format!("loading {}", path.display()))
}

fn required<'a, T>(section: &'a Option<T>, field: &str, command: &str) -> Result<&'a T> {
    section
        .as_ref()
        .ok_or_else(|| schema_error(field, format!("missing section, required by {command}")))
}

impl Loaded {
    /// Tolerances from the file, before command-line overrides.
    pub fn tolerances(&self) -> ToleranceConfig {
        self.doc.tol.unwrap_or_default()
    }

    pub fn function(&self, tol: ToleranceConfig, command: &str) -> Result<Function> {
        let spec = required(&self.doc.function, "function", command)?;
        Function::from_json(spec.clone(), tol).map_err(|e| schema_error("function", e.to_string()))
    }

    pub fn step(&self, tol: ToleranceConfig, command: &str) -> Result<StepLevelFunction> {
        match self.function(tol, command)? {
            Function::Step(f) => Ok(f),
            Function::Analytic(_) => Err(schema_error(
                "function.type",
                format!("{command} needs a step function"),
            )),
        }
    }

    /// The atlas, built from parameters when needed. `cover_step` overrides
    /// the step in the file.
    pub fn atlas(&self, f: &StepLevelFunction, cover_step: Option<f64>, command: &str) -> Result<Atlas> {
        match required(&self.doc.atlas, "atlas", command)? {
            AtlasSpec::Built(a) => {
                if cover_step.is_some() {
                    anyhow::bail!("--mesh cannot rebuild a prebuilt atlas");
                }
                if a.region().dim() != f.dim() {
                    return Err(schema_error("atlas.region", "dimension differs from the function"));
                }
                Ok(a.clone())
            }
            AtlasSpec::Params(p) => {
                let region = p
                    .region
                    .as_ref()
                    .ok_or_else(|| schema_error("atlas.region", "missing field, required to build an atlas"))?;
                let step = cover_step.unwrap_or(p.cover_step);
                let atlas = if p.exclude_argmin {
                    build_atlas_excluding_argmin(f, region, step)
                } else {
                    build_atlas(f, region, step)
                };
                atlas.context("building the atlas")
            }
        }
    }

    pub fn gqvi(&self, tol: ToleranceConfig, command: &str) -> Result<GqviInstance> {
        let k = required(&self.doc.k, "K", command)?;
        let t = required(&self.doc.t, "T", command)?;
        let inst = GqviInstance {
            k: k.clone(),
            t: t.clone(),
            solver: self.doc.solver.clone().unwrap_or_default(),
            tol,
        };
        inst.validate().context("validating the GQVI instance")?;
        Ok(inst)
    }

    /// The atlas always cuts out a band around the argmin, where the operator
    /// is the dual unit box instead.
    pub fn quasiopt(&self, tol: ToleranceConfig, command: &str) -> Result<QuasioptInstance> {
        let f = self.step(tol, command)?;
        let k = required(&self.doc.k, "K", command)?.clone();
        let atlas = match required(&self.doc.atlas, "atlas", command)? {
            AtlasSpec::Built(a) => a.clone(),
            AtlasSpec::Params(p) => {
                let region = p.region.as_ref().unwrap_or(k.bounds());
                build_atlas_excluding_argmin(&f, region, p.cover_step).context("building the atlas")?
            }
        };
        let inst = QuasioptInstance {
            f,
            k,
            atlas,
            solver: self.doc.solver.clone().unwrap_or_default(),
            verify_mesh: self.doc.verify_mesh.unwrap_or(VERIFY_MESH),
        };
        inst.validate().context("validating the quasioptimization instance")?;
        Ok(inst)
    }

    /// Quasioptimization documents carry a function and `K` but no `T`.
    pub fn is_quasiopt(&self) -> bool {
        self.doc.function.is_some() && self.doc.k.is_some() && self.doc.t.is_none()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn message(text: &str) -> String {
        format!("{:#}", parse(text.as_bytes()).unwrap_err())
    }

    #[test]
    fn names_the_offending_field() {
        let m = message(r#"{"schema_version":1,"K":{"A":"x","box":{"A":[[1],[-1]],"b":[1,1]}}}"#);
        assert!(m.contains("`K"), "{m}");
        let m = message(r#"{"schema_version":1,"solver":{"gamma":"fast"}}"#);
        assert!(m.contains("`solver.gamma`"), "{m}");
        let m = message(r#"{"schema_version":1,"bogus":1}"#);
        assert!(m.contains("bogus"), "{m}");
        let m = message(r#"{"function":{"type":"step","levels":[0],"polytopes":[]}}"#);
        assert!(m.contains("schema_version"), "{m}");
        let m = message(r#"{"schema_version":2}"#);
        assert!(m.contains("`schema_version`"), "{m}");
    }

    #[test]
    fn missing_section_is_a_schema_error() {
        let l = parse(br#"{"schema_version":1}"#).unwrap();
        let e = l.gqvi(ToleranceConfig::default(), "solve-gqvi").unwrap_err();
        assert!(e.to_string().contains("`K`"), "{e}");
    }

    #[test]
    fn hash_is_of_raw_bytes() {
        let a = parse(br#"{"schema_version":1}"#).unwrap();
        let b = parse(br#"{ "schema_version": 1 }"#).unwrap();
        assert_eq!(a.sha256.len(), 64);
        assert_ne!(a.sha256, b.sha256);
    }
}
