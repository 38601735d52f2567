//! Writes reference fields for both benchmark problems to CSV.
//!
//!     cargo run --release --example reference_solutions -- [out_dir]
//!
//! Produces `burgers_nu<ν>.csv` (Cole–Hopf quadrature, 256×100) and
//! `wave_c2_<c²>.csv` (closed form, 256×100) with columns x, t, u.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;

use fboal::oracle::{make_grid, reference_field, write_field_csv, GridKind};
use fboal::pde::ProblemSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "reference-out".into()));
    fs::create_dir_all(&out)?;

    for nu in [0.0025, 0.0116] {
        let spec = ProblemSpec::burgers(nu);
        let grid = make_grid(&spec.domain, 256, 100, GridKind::Validation)?;
        let u = reference_field(&spec, &grid, nu)?;
        let path = out.join(format!("burgers_nu{nu}.csv"));
        write_field_csv(BufWriter::new(File::create(&path)?), &grid, &u)?;
        println!("{}  min {:+.4} max {:+.4}", path.display(), min(&u), max(&u));
    }
    for c2 in [1.0, 3.0] {
        let spec = ProblemSpec::wave(c2);
        let grid = make_grid(&spec.domain, 256, 100, GridKind::Validation)?;
        let u = reference_field(&spec, &grid, c2)?;
        let path = out.join(format!("wave_c2_{c2}.csv"));
        write_field_csv(BufWriter::new(File::create(&path)?), &grid, &u)?;
        println!("{}  min {:+.4} max {:+.4}", path.display(), min(&u), max(&u));
    }
    Ok(())
}

fn min(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn max(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}
