use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use mpet::app::execute;
use mpet::config::{read_raw, resolve, RawConfig};

/// Multiple-network poroelasticity solver: convergence studies on the
/// manufactured solution and the four-network brain scenario.
///
/// Defaults for the manufactured cases: nu = 0.49999, storage = 1,
/// dt = 0.125, T = 0.5, 5 levels. Brain scenario: nu = 0.4999, dt = 0.0125,
/// T = 3, both formulations. Command-line flags override the config file.
#[derive(Debug, Parser)]
#[command(name = "mpet", version)]
struct Cli {
    /// Config file (`key = value` lines with optional `[section]` headers).
    #[arg(long)]
    config: Option<PathBuf>,
    /// table1, table2, table3-nu04, table4-c0, table5-superconv or brain.
    #[arg(long)]
    case: Option<String>,
    /// total-pressure, standard or both.
    #[arg(long)]
    formulation: Option<String>,
    /// Number of meshes H, H/2, ... (at least 2 for a convergence study).
    #[arg(long)]
    levels: Option<usize>,
    /// Poisson ratio.
    #[arg(long)]
    nu: Option<f64>,
    /// Storage coefficient c_j of every network.
    #[arg(long)]
    storage: Option<f64>,
    /// Output directory (default out/<case>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write energy.csv with the discrete energy at every step.
    #[arg(long)]
    emit_energy_trace: bool,
    /// Write the step matrices in Matrix Market format.
    #[arg(long)]
    emit_matrices: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let raw = match &cli.config {
        Some(path) => read_raw(path),
        None => Ok(RawConfig::default()),
    };
    let mut raw = match raw {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let mut set = |key: &str, value: Option<String>| {
        if let Some(v) = value {
            raw.set(key, v);
        }
    };
    set("case", cli.case);
    set("formulation", cli.formulation);
    set("levels", cli.levels.map(|v| v.to_string()));
    set("physics.nu", cli.nu.map(|v| v.to_string()));
    set("physics.storage", cli.storage.map(|v| v.to_string()));
    if let Some(out) = cli.out {
        raw.entries.retain(|(k, _)| k != "output.dir");
        raw.set("out", out.display().to_string());
    }
    if cli.emit_energy_trace {
        raw.set("output.emit_energy_trace", "true");
    }
    if cli.emit_matrices {
        raw.set("output.emit_matrices", "true");
    }
    let config = match resolve(&raw) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match execute(&config) {
        Ok(summary) => {
            print!("{}", summary.stdout);
            for f in &summary.files {
                eprintln!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
