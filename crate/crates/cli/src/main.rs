//! `adjcone`: batch front-end for the adjusted normal cone toolkit.
//!
//! Each run loads one instance file, executes one command and writes
//! `report.json`, any CSV series and `manifest.json` into `--out`. Exit code 0
//! means pass or solved, 2 means fail or residual floor (the report is still
//! written), 1 means the input was unusable.

mod commands;
mod config;
mod instance;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use config::{apply_tol_overrides, configure_threads, RunConfig};
use output::{to_json_bytes, write_atomic, Manifest, Report};

#[derive(Parser)]
#[command(name = "adjcone", version, about = "Adjusted normal cones, probes and quasivariational solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct RunArgs {
    /// Instance JSON file.
    #[arg(long, global = true)]
    instance: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Tolerance override `KEY=VALUE` (feas, gen, cone, zero); a bare number sets feas. Repeatable.
    #[arg(long, global = true, value_name = "KEY=VALUE")]
    tol: Vec<String>,
    /// Grid spacing: cover step for atlases, sample spacing for adjusted-set,
    /// fallback mesh fraction for solve-gqvi, verification mesh fraction for
    /// solve-quasiopt and verify.
    #[arg(long, global = true)]
    mesh: Option<f64>,
    /// Radius ladder for usc-probe, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    /// Probe point, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    at: Option<Vec<f64>>,
    /// Record solver iterates into trace.csv.
    #[arg(long, global = true)]
    trace: bool,
}

#[derive(Subcommand, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    /// Segment quasiconvexity, adjusted-set convexity and the sandwich inclusions.
    CheckQuasiconvex,
    /// Value, distance to the strict sublevel set and a sampled picture of S^a at --at.
    AdjustedSet,
    /// Strict and adjusted normal cones at --at.
    NormalCone,
    /// Build an atlas and check the partition of unity; writes atlas.json.
    BuildAtlas,
    /// Global base of the adjusted normal cone at --at or over the atlas grid.
    BaseMap,
    /// Upper Hausdorff deviation of the base map around --at.
    UscProbe,
    /// Limits of normal vectors along sequences converging to --at.
    ClosednessProbe,
    /// Quasimonotonicity of the adjusted normal operator on sampled pairs.
    QuasimonoProbe,
    /// Solve a generalized quasivariational inequality.
    SolveGqvi,
    /// Minimize a step function over a moving constraint set.
    SolveQuasiopt,
    /// Re-verify a candidate solution given by --at.
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CheckQuasiconvex => "check-quasiconvex",
            Command::AdjustedSet => "adjusted-set",
            Command::NormalCone => "normal-cone",
            Command::BuildAtlas => "build-atlas",
            Command::BaseMap => "base-map",
            Command::UscProbe => "usc-probe",
            Command::ClosednessProbe => "closedness-probe",
            Command::QuasimonoProbe => "quasimono-probe",
            Command::SolveGqvi => "solve-gqvi",
            Command::SolveQuasiopt => "solve-quasiopt",
            Command::Verify => "verify",
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let threads = configure_threads()?;
    let started_at = chrono::Utc::now();
    let clock = Instant::now();
    let command = cli.command;
    let args = cli.run;

    let path = args.instance.context("--instance is required")?;
    let loaded = instance::load(&path)?;
    let cfg = RunConfig {
        command: command.name(),
        instance_path: path.display().to_string(),
        out_dir: args.out.display().to_string(),
        seed: args.seed,
        tol: apply_tol_overrides(loaded.tolerances(), &args.tol)?,
        tol_overrides: args.tol,
        mesh: args.mesh,
        radii: args.radii,
        at: args.at,
        trace: args.trace,
        threads,
    };
    cfg.validate()?;
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;

    let outcome = commands::dispatch(command, &loaded, &cfg)?;
    let exit_code = outcome.verdict.exit_code();

    let mut files = Vec::new();
    for a in &outcome.artifacts {
        write_atomic(&args.out, a.name, &a.bytes)?;
        files.push(a.name);
    }
    let report = Report::new(cfg.command, &loaded.sha256, cfg.seed, &outcome);
    let report_path = write_atomic(&args.out, "report.json", &to_json_bytes(&report)?)?;
    files.push("report.json");

    let manifest = Manifest {
        schema_version: instance::SCHEMA_VERSION,
        command: cfg.command,
        instance_sha256: &loaded.sha256,
        instance_name: loaded.doc.name.as_deref(),
        instance_description: loaded.doc.description.as_deref(),
        config: &cfg,
        started_at: started_at.to_rfc3339(),
        finished_at: chrono::Utc::now().to_rfc3339(),
        wall_time_s: clock.elapsed().as_secs_f64(),
        exit_code,
        files,
    };
    write_atomic(&args.out, "manifest.json", &to_json_bytes(&manifest)?)?;
    eprintln!(
        "{}: {} (exit {exit_code}), report at {}",
        cfg.command,
        serde_json::to_value(outcome.verdict)?.as_str().unwrap_or("?"),
        report_path.display()
    );
    Ok(exit_code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
