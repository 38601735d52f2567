//! Train one PINN on Burgers' equation with a fixed viscosity.
//!
//! ```text
//! cargo run --release --example train_burgers -- [nu] [sampler] [scale] [seed] [threshold]
//! cargo run --release --example train_burgers -- 0.0025 fboal 0.1 0
//! ```
//!
//! `scale` shrinks the learning-rate schedule and the iteration cap; the
//! sampler is one of static, fboal, rad, rard, rar. A tiny threshold (say
//! 1e-9) disables early stopping so samplers can be compared at equal cost.

use fboal::metrics::{point_density, Axis};
use fboal::pde::ProblemSpec;
use fboal::training::{train, LrStage, SamplerKind, TrainingConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::init();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let nu: f64 = args.first().map_or(Ok(0.0116), |s| s.parse())?;
    let sampler: SamplerKind = args.get(1).map_or("fboal", String::as_str).parse()?;
    let scale: f64 = args.get(2).map_or(Ok(0.1), |s| s.parse())?;
    let seed: u64 = args.get(3).map_or(Ok(0), |s| s.parse())?;
    let threshold: f64 = args.get(4).map_or(Ok(0.02), |s| s.parse())?;

    let base = TrainingConfig::default();
    let cfg = TrainingConfig {
        sampler,
        seed,
        threshold,
        lr_stages: base
            .lr_stages
            .iter()
            .map(|s| LrStage { lr: s.lr, iterations: (s.iterations as f64 * scale).round() as usize })
            .collect(),
        max_iterations: (base.max_iterations as f64 * scale).round() as usize,
        ..base
    };

    let out = train(&ProblemSpec::burgers(nu), &[], &cfg)?;
    for (it, err) in out.log.test_checks().step_by(5) {
        println!("iter {it:>7}  test error {err:.4e}");
    }
    let density = point_density(&out.collocation.points, Axis::X, -1.0, 1.0, 20, None)?;
    println!(
        "nu={nu} sampler={} seed={seed}: {} iterations ({:?}), {} resamples, validation rel. L2 = {:.4e}, density peak x = {:.2}, {:.0} s",
        sampler.name(),
        out.log.iterations,
        out.log.stop_reason.unwrap(),
        out.log.resample_count,
        out.validation_errors[0],
        density.peak().unwrap_or(f64::NAN),
        out.log.wall_seconds
    );
    Ok(())
}
