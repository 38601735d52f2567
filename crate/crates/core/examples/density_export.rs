//! Recomputes point-density histograms from an existing artifact tree.
//!
//!     cargo run --release --example density_export -- <out_dir> [bins] [t_lo t_hi]
//!
//! `out_dir` is a directory written by `fboal run`/`compare`/`sweep` (or the
//! `compare_samplers` example). An optional time strip restricts the x
//! histogram to points with t in [t_lo, t_hi].

use std::path::PathBuf;

use fboal::experiment::{export_density, ExperimentConfig};
use fboal::metrics::Axis;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(root) = args.first().map(PathBuf::from) else {
        eprintln!("usage: density_export <out_dir> [bins] [t_lo t_hi]");
        std::process::exit(2);
    };
    let bins: usize = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(40);
    let strip = match (args.get(2), args.get(3)) {
        (Some(a), Some(b)) => Some((a.parse()?, b.parse()?)),
        _ => None,
    };
    let cfg = ExperimentConfig::load(&root.join("config.toml").to_string_lossy())?;
    for path in export_density(&root, &cfg, Axis::X, bins, strip)? {
        println!("{}", path.display());
    }
    Ok(())
}
