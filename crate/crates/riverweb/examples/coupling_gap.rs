//! Width–count coupling: `p·D_n(s)` and `K_n(s)` share one Brownian limit.
//!
//! The scaled width process `D_n(s) = (r_{⌊ns⌋} − l_{⌊ns⌋})/(γ₀√n)` and the
//! scaled generation-count process `K_n(s) = #C_{⌊ns⌋}/(γ₀√n)` converge to
//! the same limit up to the density factor `p`: each generation's count is
//! `p` times its spread plus fluctuations that vanish under the scaling.
//! The survivor median of `sup_s |p·D_n(s) − K_n(s)|` therefore shrinks as
//! `n` grows. Run with:
//!
//! ```bash
//! cargo run --release --example coupling_gap
//! ```

use riverweb::experiments::{width_cluster_coupling, Experiment, ExperimentConfig, OutputFormat};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = 0.5;
    println!("coupling gap at p = {p}: sup_s |p*D_n(s) - K_n(s)| among survivors");
    println!();
    println!("{:>5}  {:>9}  {:>9}  {:>8}  {:>8}", "n", "replicas", "survivors", "median", "mean");
    for &(n, replicas) in &[(64usize, 30_000u64), (256, 40_000), (1024, 60_000)] {
        let cfg = ExperimentConfig {
            experiment: Experiment::Coupling,
            p,
            n,
            replicas,
            seed: 3,
            cap_l: None,
            out_dir: None,
            format: OutputFormat::Csv,
        };
        let out = width_cluster_coupling(&cfg)?;
        println!(
            "{:>5}  {:>9}  {:>9}  {:>8.4}  {:>8.4}",
            n, replicas, out.survivors, out.median_sup_gap, out.mean_sup_gap
        );
    }
    println!();
    println!("a single Brownian excursion drives both processes: the gap is subdominant.");
    Ok(())
}
