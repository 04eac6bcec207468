//! Tail laws of cluster functionals: generation counts and total area.
//!
//! Two tails with closed-form (or quadrature) limits:
//!
//! * `√n · P(#C_n > √n·γ₀·u) → e^{−u²/4p²}/(γ₀√π)` — the unconditional
//!   generation-count tail, a Gaussian-kernel weighting of the survival
//!   constant.
//! * `√n · P(#C > (λn)^{3/2})` — the total-area tail, whose limit is an
//!   integral of the Brownian-excursion area law evaluated against a
//!   simulated reference table.
//!
//! ```bash
//! cargo run --release --example cluster_tails
//! ```

use riverweb::experiments::{
    build_area_table, generation_count_tail, total_area_tail, Experiment, ExperimentConfig,
    OutputFormat,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = ExperimentConfig {
        experiment: Experiment::GenCountTail,
        p: 0.5,
        n: 256,
        replicas: 100_000,
        seed: 3,
        cap_l: None,
        out_dir: None,
        format: OutputFormat::Csv,
    };

    println!("generation-count tail at p = {}, n = {}:", base.p, base.n);
    println!("{:>5}  {:>10}  {:>10}  {:>10}", "u", "exceed", "scaled", "limit");
    for &u in &[0.5, 1.0, 1.5] {
        let out = generation_count_tail(&base, u)?;
        println!(
            "{:>5}  {:>10}  {:>10.4}  {:>10.4}",
            u, out.estimate.n_exceed, out.sqrt_n_p_hat, out.target
        );
    }
    println!();

    println!("total-area tail (building the excursion-area reference table first)...");
    let table = build_area_table()?;
    let cfg = ExperimentConfig {
        experiment: Experiment::AreaTail,
        n: 64,
        replicas: 50_000,
        ..base
    };
    let lambda = 16.0;
    let out = total_area_tail(&cfg, lambda, Some(&table))?;
    let target = out.target.expect("table provided");
    println!(
        "lambda = {lambda}, n = {}: sqrt(n)*P(#C > (lambda*n)^1.5) = {:.4}, quadrature limit {:.4}",
        cfg.n, out.sqrt_n_p_hat, target
    );
    println!("({} of {} replicas exceeded the threshold)", out.estimate.n_exceed, cfg.replicas);
    Ok(())
}
