use adjcone_core::ToleranceConfig;
use anyhow::{bail, Context, Result};
use serde::Serialize;

/// Everything that determines a run, echoed into the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub instance_path: String,
    pub out_dir: String,
    pub seed: u64,
    /// Effective tolerances after `--tol` overrides.
    pub tol: ToleranceConfig,
    pub tol_overrides: Vec<String>,
    pub mesh: Option<f64>,
    pub radii: Option<Vec<f64>>,
    pub at: Option<Vec<f64>>,
    pub trace: bool,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(m) = self.mesh {
            if !(m.is_finite() && m > 0.0) {
                bail!("--mesh must be positive, got {m}");
            }
        }
        if let Some(r) = &self.radii {
            if r.is_empty() || r.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
                bail!("--radii must be a nonempty list of positive numbers");
            }
        }
        if let Some(x) = &self.at {
            if x.is_empty() || x.iter().any(|v| !v.is_finite()) {
                bail!("--at must be a nonempty list of finite coordinates");
            }
        }
        Ok(())
    }

    pub fn at(&self, command: &str, dim: usize) -> Result<&[f64]> {
        let x = self.at.as_deref().with_context(|| format!("{command} needs --at"))?;
        if x.len() != dim {
            bail!("--at has {} coordinates, the instance has dimension {dim}", x.len());
        }
        Ok(x)
    }
}

/// Applies `key=value` overrides; a bare number sets `feas`.
pub fn apply_tol_overrides(base: ToleranceConfig, overrides: &[String]) -> Result<ToleranceConfig> {
    let mut value = serde_json::to_value(base)?;
    let map = value.as_object_mut().expect("struct serializes to an object");
    for o in overrides {
        let (key, raw) = o.split_once('=').unwrap_or(("feas", o.as_str()));
        let v: f64 = raw.trim().parse().with_context(|| format!("--tol {o}: not a number"))?;
        match map.get_mut(key.trim()) {
            Some(slot) => *slot = serde_json::json!(v),
            None => bail!("--tol {o}: unknown tolerance `{key}` (expected one of feas, gen, cone, zero)"),
        }
    }
    let tol: ToleranceConfig = serde_json::from_value(value)?;
    tol.validate()?;
    Ok(tol)
}

/// `ADJCONE_THREADS`, if set, caps the global worker pool.
pub fn configure_threads() -> Result<Option<usize>> {
    let Ok(raw) = std::env::var("ADJCONE_THREADS") else {
        return Ok(None);
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .with_context(|| format!("ADJCONE_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring the thread pool")?;
    Ok(Some(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides() {
        let t = apply_tol_overrides(ToleranceConfig::default(), &["cone=1e-5".into(), "1e-8".into()]).unwrap();
        assert_eq!(t.cone, 1e-5);
        assert_eq!(t.feas, 1e-8);
        assert!(apply_tol_overrides(ToleranceConfig::default(), &["slop=1".into()]).is_err());
        assert!(apply_tol_overrides(ToleranceConfig::default(), &["zero=1e-9".into()]).is_err());
    }
}
