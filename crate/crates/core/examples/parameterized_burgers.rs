//! One network over a range of viscosities, with swap events that move
//! points between parameter slices.
//!
//!     cargo run --release --example parameterized_burgers -- [n_values] [iterations]
//!
//! Prints how many collocation points each ν holds after every event; with
//! adaptive sampling the sharper (small-ν) slices tend to collect more.

use fboal::pde::ProblemSpec;
use fboal::training::{train, LogEvent, LrStage, SamplerKind, TrainingConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::init();
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(6);
    let iterations: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(3000);

    let (lo, hi) = (0.0025, 0.0124);
    let nus: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1).max(1) as f64).collect();
    let spec = ProblemSpec::burgers(lo).parameterized(lo, hi);
    let cfg = TrainingConfig {
        sampler: SamplerKind::Fboal,
        budget: 256 * n,
        swap_count: (256 * n) / 200,
        resample_period: 500,
        lr_stages: vec![LrStage { lr: 1e-3, iterations }],
        max_iterations: iterations,
        threshold: 1e-9,
        ..TrainingConfig::default()
    };
    let outcome = train(&spec, &nus, &cfg)?;
    let header: Vec<String> = nus.iter().map(|v| format!("{v:>8.4}")).collect();
    println!("iteration  {}", header.join(""));
    for e in &outcome.log.events {
        if let LogEvent::Resample { iteration, counts, .. } = e {
            let row: Vec<String> = counts.iter().map(|c| format!("{c:>8}")).collect();
            println!("{iteration:>9}  {}", row.join(""));
        }
    }
    for (nu, err) in nus.iter().zip(&outcome.validation_errors) {
        println!("ν = {nu:.4}: validation rel. L² {err:.3e}");
    }
    Ok(())
}
