//! Thin command-line front end: parses one experiment request, runs it, and
//! prints the summary. All substance lives in the library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use riverweb::experiments::{self, Experiment, ExperimentConfig, OutputFormat};

/// Monte Carlo laboratory for a lattice drainage-network model and its
/// Brownian scaling limits.
#[derive(Parser)]
#[command(name = "riverweb", version, disable_help_subcommand = true)]
struct Cli {
    /// Experiment id: survival, width-law, coupling, gen-count-tail, hack,
    /// dmax, area-tail, dual-kernel, invariants, oracle-suite, or xi-count.
    experiment: String,

    /// Site openness probability, strictly inside (0, 1).
    #[arg(long)]
    p: f64,

    /// Principal scale: generation depth, dual path length, or window count,
    /// depending on the experiment.
    #[arg(long)]
    n: u64,

    /// Number of independent replicas.
    #[arg(long)]
    replicas: u64,

    /// Master seed; every replica derives its own stream from it.
    #[arg(long)]
    seed: u64,

    /// Right-censoring cap on stream length, where the experiment admits one.
    #[arg(long = "cap-l")]
    cap_l: Option<u64>,

    /// Directory to write row and summary artifacts into; stdout-only when
    /// omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Row-artifact format: csv or json. Summaries are always JSON.
    #[arg(long, default_value = "csv")]
    format: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(experiment) = Experiment::from_id(&cli.experiment) else {
        let known: Vec<&str> = Experiment::ALL.iter().map(|e| e.id()).collect();
        eprintln!(
            "error: unknown experiment {:?} (expected one of: {})",
            cli.experiment,
            known.join(", ")
        );
        return ExitCode::from(2);
    };
    let Some(format) = OutputFormat::from_id(&cli.format) else {
        eprintln!("error: unknown format {:?} (expected csv or json)", cli.format);
        return ExitCode::from(2);
    };
    let cfg = ExperimentConfig {
        experiment,
        p: cli.p,
        n: cli.n as usize,
        replicas: cli.replicas,
        seed: cli.seed,
        cap_l: cli.cap_l.map(|v| v as usize),
        out_dir: cli.out,
        format,
    };
    match experiments::run(&cfg) {
        Ok(report) => {
            print!("{}", report.stdout);
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
