//! Command-line front end: parameter files, named studies, CSV output.

pub mod grid;
pub mod selftest;
pub mod settings;
pub mod studies;
pub mod table;

use std::path::PathBuf;

use clap::Parser;
use rydpol::{Interaction, Regime, SystemParams};

use crate::grid::GridSpec;
use crate::selftest::{run_checks, Hooks};
use crate::settings::Settings;
use crate::studies::{describe, run_study, Study, StudyError, StudySpec};

#[derive(Debug, Parser)]
#[command(name = "rydpol", version, about = "Scattering studies for Rydberg slow-light polaritons")]
pub struct Cli {
    /// Parameter file with g, omega_rabi, delta, gamma, c, c6.
    #[arg(long, env = "RYDPOL_CONFIG")]
    pub config: Option<PathBuf>,

    /// coeffs, zeta-map, scan-a1d, spectrum, tmatrix-check or adiabatic-check.
    #[arg(long)]
    pub study: Option<Study>,

    /// Axis as min:max:count[:log]; repeat for further axes.
    #[arg(long = "grid", allow_hyphen_values = true)]
    pub grids: Vec<GridSpec>,

    /// Output CSV path; the manifest goes to <out>.manifest.json.
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long)]
    pub threads: Option<usize>,

    /// Override a tolerance, e.g. --tol step=5e-4.
    #[arg(long = "tol", value_name = "KEY=VALUE")]
    pub tols: Vec<String>,

    #[arg(long, default_value = "far-detuned")]
    pub regime: Regime,

    #[arg(long, default_value = "attractive")]
    pub branch: Interaction,

    /// Interaction strength ξ/λ̄; repeatable.
    #[arg(long = "strength")]
    pub strengths: Vec<f64>,

    /// Reduced far-detuned point as y,x.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub point: Option<(f64, f64)>,

    #[arg(long)]
    pub self_test: bool,

    #[arg(long, hide = true, default_value_t = 1.0)]
    pub perturb_mass: f64,
}

fn parse_point(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("point '{s}' must be y,x"))?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("bad number '{v}' in point"));
    Ok((parse(a)?, parse(b)?))
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            code
        }
    }
}

/// Runs the CLI and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match execute(cli) {
        Ok(code) => code,
        Err(StudyError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(cli: Cli) -> Result<i32, StudyError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| StudyError::Usage(format!("thread pool: {e}")))?;
    }
    let mut settings = Settings::default();
    for t in &cli.tols {
        settings.apply(t).map_err(StudyError::Usage)?;
    }
    if cli.self_test {
        let checks = run_checks(&Hooks { mass_scale: cli.perturb_mass });
        let mut failed = 0;
        for c in &checks {
            println!("{}: {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            failed += usize::from(!c.passed);
        }
        println!("{} of {} checks passed", checks.len() - failed, checks.len());
        return Ok(i32::from(failed > 0));
    }
    let study = cli.study.ok_or_else(|| StudyError::Usage("give --study or --self-test".into()))?;
    let params = match &cli.config {
        Some(path) => Some(
            SystemParams::from_config_file(path)
                .map_err(|e| StudyError::Usage(format!("config {}: {e}", path.display())))?,
        ),
        None => None,
    };
    let mut spec = StudySpec::new(study);
    spec.params = params;
    spec.config_path = cli.config.clone();
    spec.grids = cli.grids;
    spec.regime = cli.regime;
    spec.branch = cli.branch;
    spec.strengths = cli.strengths;
    if let Some(p) = cli.point {
        spec.point = p;
    }
    spec.settings = settings;
    let mut table = run_study(&spec)?;
    if let Some(p) = &params {
        for (k, v) in describe(p, spec.regime, &spec.settings) {
            table.meta(&k, v);
        }
    }
    let fraction = table.failure_fraction();
    match &cli.out {
        Some(path) => {
            let extra = serde_json::json!({
                "config": spec.config_path.as_ref().map(|p| p.display().to_string()),
                "tolerances": cli.tols,
            });
            table
                .write_files(path, extra)
                .map_err(|e| StudyError::Usage(format!("writing {}: {e}", path.display())))?;
        }
        None => print!("{}", table.to_csv_string()),
    }
    if fraction > spec.settings.fail_fraction {
        eprintln!("error: {} of {} points failed ({:.1}%)", table.failures(), table.rows.len(), 100.0 * fraction);
        return Ok(1);
    }
    Ok(0)
}
