//! The 1D wave equation with adaptive collocation.
//!
//!     cargo run --release --example wave_fboal -- [c2] [scale] [seed]
//!
//! Uses the `wave-fixed` preset schedule scaled by `scale` (default 0.02,
//! about a minute). The density histogram along x shows where the swap
//! events concentrated points along the travelling pulses.

use fboal::experiment::ExperimentConfig;
use fboal::metrics::{point_density, Axis};
use fboal::pde::ProblemSpec;
use fboal::training::{train, LogEvent};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::init();
    let mut args = std::env::args().skip(1);
    let c2: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(3.0);
    let scale: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.02);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);

    let mut training = ExperimentConfig::load("wave-fixed")?.scaled(scale)?.training;
    training.seed = seed;
    let outcome = train(&ProblemSpec::wave(c2), &[], &training)?;

    for e in outcome.log.events.iter().filter(|e| matches!(e, LogEvent::TestCheck { .. })).step_by(5) {
        if let LogEvent::TestCheck { iteration, loss, test_error, .. } = e {
            println!("iter {iteration:>6}  loss {loss:.3e}  test error {test_error:.3e}");
        }
    }
    let l = ProblemSpec::wave(c2).half_length();
    let hist = point_density(&outcome.collocation.points, Axis::X, -l, l, 16, None)?;
    let bars: Vec<String> = hist.density.iter().map(|d| "#".repeat((d * 40.0).round() as usize)).collect();
    for (k, bar) in bars.iter().enumerate() {
        println!("x ∈ [{:+.2}, {:+.2})  {bar}", hist.edges[k], hist.edges[k + 1]);
    }
    println!(
        "c² = {c2}: validation rel. L² {:.4e} after {} iterations, {} swap events",
        outcome.validation_errors[0], outcome.log.iterations, outcome.log.resample_count
    );
    Ok(())
}
