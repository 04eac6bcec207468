//! The conditioned-random-walk oracle against closed-form constants.
//!
//! Every lattice scaling law in this crate is checked against reference
//! ensembles built from conditioned simple random walks: Brownian meanders,
//! excursions, and first-return times. This example runs the oracle's own
//! self-test — each functional against an independently known constant or
//! identity. The tolerance bands are budgeted for the default ensemble
//! scale of 100 000, so smaller runs may brush against them. Run with:
//!
//! ```bash
//! cargo run --release --example brownian_oracles
//! ```

use riverweb::experiments::{oracle_suite, Experiment, ExperimentConfig, OutputFormat};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig {
        experiment: Experiment::OracleSuite,
        p: 0.5,
        n: 256,
        replicas: 100_000,
        seed: 3,
        cap_l: None,
        out_dir: None,
        format: OutputFormat::Csv,
    };
    let out = oracle_suite(&cfg)?;
    println!("{:<32} {:>10}  {:>10}  {:>22}", "check", "statistic", "target", "band");
    for c in &out.checks {
        println!(
            "{:<32} {:>10.4}  {:>10.4}  [{:>8.4}, {:>8.4}]  {}",
            c.check,
            c.statistic,
            c.target,
            c.lo,
            c.hi,
            if c.pass { "pass" } else { "FAIL" }
        );
    }
    println!();
    println!("all pass = {}", out.all_pass);
    Ok(())
}
