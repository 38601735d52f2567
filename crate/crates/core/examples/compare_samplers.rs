//! Compares samplers on a preset and prints the aggregated table.
//!
//!     cargo run --release --example compare_samplers -- [preset] [scale] [out_dir]
//!
//! Defaults: `burgers-shock-compare` at scale 0.05 (a few minutes on one
//! core). Writes the full artifact tree, including `comparison.csv`.

use std::path::PathBuf;

use fboal::experiment::{compare_samplers, ExperimentConfig, RunOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::init();
    let mut args = std::env::args().skip(1);
    let preset = args.next().unwrap_or_else(|| "burgers-shock-compare".into());
    let scale: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.05);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "compare-out".into()));

    let cfg = ExperimentConfig::load(&preset)?;
    let opts = RunOptions { scale, jobs: rayon::current_num_threads(), ..RunOptions::new(out.clone()) };
    let rows = compare_samplers(&cfg, &opts)?;
    println!("{:<32} {:>12} {:>10} {:>10} {:>9}", "sampler/problem", "geo-mean", "std", "iters", "resamples");
    for r in &rows {
        println!(
            "{:<32} {:>12.4e} {:>10.2e} {:>10.0} {:>9.1}",
            r.label, r.geo_mean_error, r.std_error, r.mean_iterations, r.mean_resamples
        );
    }
    println!("artifacts under {}", out.display());
    Ok(())
}
