//! Batch front-end: parse a JSON run configuration, dispatch a solve,
//! continuation run, verification suite, operator-norm estimation or
//! parameter sweep, and write the artifacts.
//!
//! Exit codes: 0 all solves converged and all requested checks passed;
//! 1 a check failed; 2 invalid configuration (a machine-readable validation
//! report goes to stderr); 3 solver divergence.

mod config;
mod report_io;
mod run;

use std::path::PathBuf;

use clap::Parser;

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "pstokes",
    version,
    about = "Pseudo-spectral laboratory for power-law Stokes-type systems on a periodic box",
    long_about = "Drives solves of the regularized systems, the parameter-continuation cascade, \
the verification suites, singular-operator-norm estimation and parameter sweeps from a JSON \
configuration. Artifacts (solution fields, diagnostics, reports, manifest) are written to the \
output directory."
)]
struct Cli {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,

    /// Override the command in the configuration
    /// (solve | cascade | verify | cz-estimate | sweep).
    #[arg(long)]
    command: Option<String>,

    /// Override the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,

    /// Output directory for artifacts.
    #[arg(long, default_value = "pstokes-out")]
    out: PathBuf,

    /// Worker threads for sweep members.
    #[arg(long, env = "PSTOKES_THREADS", default_value_t = 1)]
    threads: usize,
}

fn main() {
    let cli = Cli::parse();
    let mut cfg: RunConfig = match RunConfig::from_path(&cli.config) {
        Ok(cfg) => cfg,
        Err(report) => {
            eprintln!(
                "{}",
                serde_json::to_string_pretty(&report).unwrap_or_default()
            );
            std::process::exit(run::EXIT_INVALID_CONFIG);
        }
    };
    if let Some(cmd) = &cli.command {
        cfg.command = match serde_json::from_value(serde_json::Value::String(cmd.clone())) {
            Ok(c) => c,
            Err(_) => {
                eprintln!("{{\"valid\":false,\"errors\":[\"unknown command '{cmd}'\"]}}");
                std::process::exit(run::EXIT_INVALID_CONFIG);
            }
        };
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    std::process::exit(run::execute(&cfg, &cli.out, cli.threads));
}
