//! The counting identity `E[ξ_n] = (⌊γ₀√n⌋ + 1) · P(L > n)` and its limit.
//!
//! `ξ_n` counts the distinct row-`n` sites inside the window `[0, γ₀√n]`
//! whose backward cluster reaches row 0. Translation invariance makes the
//! identity exact at every `n`, which turns it into a sharp cross-check:
//! two unrelated estimators — direct survival counting and window counting —
//! must agree within sampling error, and both approach `1/√π`. Run with:
//!
//! ```bash
//! cargo run --release --example xi_identity
//! ```

use riverweb::experiments::{estimate_survival, xi_count, Experiment, ExperimentConfig, OutputFormat};
use riverweb::gamma0;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = 0.5;
    let g0 = gamma0(p)?;
    println!("counting identity at p = {p}: E[xi_n] = (floor(gamma0*sqrt(n)) + 1) * P(L > n)");
    println!();
    println!(
        "{:>5}  {:>7}  {:>12}  {:>12}  {:>6}  {:>8}",
        "n", "window", "xi/window", "P(L > n)", "z", "E[xi_n]"
    );
    for &n in &[64usize, 256] {
        let base = ExperimentConfig {
            experiment: Experiment::Survival,
            p,
            n,
            replicas: 100_000,
            seed: 3,
            cap_l: None,
            out_dir: None,
            format: OutputFormat::Csv,
        };
        let surv = estimate_survival(&base)?;
        let xi = xi_count(&ExperimentConfig {
            experiment: Experiment::XiCount,
            replicas: 20_000,
            ..base
        })?;
        let window = (g0 * (n as f64).sqrt()).floor() + 1.0;
        let per_site = xi.mean / window;
        let joint = surv.estimate.stderr.hypot(xi.stderr / window);
        let z = (surv.estimate.p_hat - per_site) / joint;
        println!(
            "{:>5}  {:>7}  {:>12.5}  {:>12.5}  {:>6.2}  {:>8.4}",
            n, window, per_site, surv.estimate.p_hat, z, xi.mean
        );
    }
    println!();
    println!("z is the identity gap in joint standard errors; E[xi_n] -> 1/sqrt(pi) = 0.5642.");
    Ok(())
}
