//! Residual-based density sampling: weights and one redistribution.
//!
//! Shows how κ and c shape the sampling law p ∝ εᵏ/mean(εᵏ) + c on a small
//! field, then redistributes a full collocation set toward a synthetic
//! residual bump and grows another with the additive refinement rule.
//!
//!     cargo run --release --example rad_sampling

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fboal::pde::ProblemSpec;
use fboal::sampling::{init_collocation, rad_resample, rad_weights, rard_add, CollocationPoint, InitScheme, SamplingError};

fn bump(points: &[CollocationPoint]) -> Result<Vec<f64>, SamplingError> {
    Ok(points.iter().map(|p| (-(p.x * p.x) / 0.005).exp() * p.t + 0.01).collect())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let field = [0.05, 0.1, 0.5, 1.0, 3.0];
    for (kappa, c) in [(0.0, 1.0), (1.0, 1.0), (2.0, 0.0)] {
        let w = rad_weights(&field, kappa, c)?;
        let total: f64 = w.iter().sum();
        let p: Vec<String> = w.iter().map(|v| format!("{:.3}", v / total)).collect();
        println!("κ = {kappa}, c = {c}: probabilities [{}]", p.join(", "));
    }

    let spec = ProblemSpec::burgers(0.0025);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let c = init_collocation(&spec, 1024, &[], InitScheme::Equidistant, 0)?;
    let near = |pts: &[CollocationPoint]| pts.iter().filter(|p| p.x.abs() < 0.1).count();
    println!("\ninitial set: {} points, {} with |x| < 0.1", c.len(), near(&c.points));
    let redistributed = rad_resample(&c, &spec, &[], bump, 1.0, 1.0, 10, &mut rng)?;
    println!("after RAD (κ=1, c=1): {} points, {} with |x| < 0.1", redistributed.len(), near(&redistributed.points));

    let mut grown = c.clone();
    for _ in 0..10 {
        let pool = 10 * grown.len();
        rard_add(&mut grown, &spec, &[], bump, 2.0, 0.0, 5, pool, &mut rng)?;
    }
    println!("after 10 RAR-D events (κ=2, c=0, +5 each): {} points, {} with |x| < 0.1", grown.len(), near(&grown.points));
    Ok(())
}
