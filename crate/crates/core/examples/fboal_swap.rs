//! The fixed-budget swap step on a synthetic residual field.
//!
//! No network is trained: the "residual" is a narrow ridge at x = 0.4 and
//! the example repeats swap events to show the collocation points migrating
//! toward it while the set size never changes.
//!
//!     cargo run --release --example fboal_swap -- [events] [m] [d]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fboal::metrics::{point_density, Axis};
use fboal::pde::ProblemSpec;
use fboal::sampling::{apply_plan, build_grid, candidate_pool, fboal_step, init_collocation, CollocationPoint, GridSpec, InitScheme};

fn ridge(points: &[CollocationPoint]) -> Vec<f64> {
    points.iter().map(|p| (-(p.x - 0.4).powi(2) / 0.002).exp() * (0.2 + p.t) + 1e-3 * p.x.sin()).collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let events: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(30);
    let m: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(20);
    let d: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(200);

    let spec = ProblemSpec::burgers(0.01);
    let grid = build_grid(&spec.domain, GridSpec::Cells(d))?;
    println!("{} subdomains ({} in x × {} in t), m = {m}", grid.len(), grid.nx(), grid.nt());
    let mut c = init_collocation(&spec, 1024, &[], InitScheme::Equidistant, 0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);

    for event in 0..=events {
        if event % 5 == 0 {
            let near = c.points.iter().filter(|p| (p.x - 0.4).abs() < 0.05).count();
            let hist = point_density(&c.points, Axis::X, -1.0, 1.0, 20, None)?;
            println!(
                "event {event:>3}: |C| = {}, {near:>4} points within 0.05 of the ridge, density peak at x = {:+.2}",
                c.len(),
                hist.peak().unwrap_or(f64::NAN)
            );
        }
        let cand = candidate_pool(&spec, &c, &[], &mut rng);
        let plan = fboal_step(&c.points, &ridge(&c.points), &cand, &ridge(&cand), &grid, m)?;
        apply_plan(&mut c, &plan)?;
    }
    Ok(())
}
