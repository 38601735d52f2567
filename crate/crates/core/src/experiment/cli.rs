//! Argument parsing for the `fboal` binary.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::{compare_samplers, export_density, run_experiment, sweep, ExperimentConfig, ExperimentError, RunOptions};
use super::{SweepAxis, SweepValue, PRESETS};
use crate::metrics::Axis;

#[derive(Debug, Parser)]
#[command(name = "fboal", version, about = "PINN training with adaptive collocation sampling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train every sampler × parameter value × seed of a config.
    Run(Common),
    /// Like `run`, plus a comparison table across samplers.
    Compare(Common),
    /// Rerun a config for several values of m, k or d.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_axis)]
        axis: SweepAxis,
        /// Comma-separated values; m also accepts percentages of the budget
        /// (`0.5%`). An empty list is a no-op.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<String>,
    },
    /// Recompute density histograms from the collocation sets of a run tree.
    ExportDensity {
        /// Artifact directory written by `run`, `compare` or `sweep`.
        #[arg(long)]
        out: PathBuf,
        /// Config of the runs; defaults to `<out>/config.toml`.
        #[arg(long)]
        config: Option<String>,
        #[arg(long, default_value = "x", value_parser = parse_density_axis)]
        axis: Axis,
        #[arg(long, default_value_t = 40)]
        bins: usize,
        /// Keep only points whose other coordinate lies in `lo,hi`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        strip: Option<Vec<f64>>,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// Config file, or the name of a built-in preset.
    #[arg(long)]
    pub config: String,
    /// Multiply stage lengths and the iteration cap by this factor in (0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Number of runs trained in parallel.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Comma-separated seeds replacing the config's list.
    #[arg(long, value_delimiter = ',')]
    pub seed_list: Option<Vec<u64>>,
    /// Output directory.
    #[arg(long, default_value = "fboal-out")]
    pub out: PathBuf,
    /// Skip runs that already have a summary.
    #[arg(long)]
    pub resume: bool,
}

fn parse_axis(s: &str) -> Result<SweepAxis, String> {
    s.parse()
}

fn parse_density_axis(s: &str) -> Result<Axis, String> {
    match s {
        "x" => Ok(Axis::X),
        "t" => Ok(Axis::T),
        other => Err(format!("unknown axis '{other}' (expected x or t)")),
    }
}

impl Common {
    fn load(&self) -> Result<(ExperimentConfig, RunOptions), ExperimentError> {
        let cfg = ExperimentConfig::load(&self.config)?;
        let opts = RunOptions {
            scale: self.scale,
            jobs: self.jobs,
            seeds: self.seed_list.clone(),
            out: self.out.clone(),
            resume: self.resume,
        };
        Ok((cfg, opts))
    }
}

fn dispatch(cli: Cli) -> Result<(), ExperimentError> {
    match cli.command {
        Command::Run(common) => {
            let (cfg, opts) = common.load()?;
            let reports = run_experiment(&cfg, &opts)?;
            for r in &reports {
                println!(
                    "{:<8} {:<16} seed {:<4} error {:.4e}  iterations {:>7}  resamples {:>4}{}",
                    r.sampler.name(),
                    r.label,
                    r.seed,
                    r.summary.headline_error(),
                    r.summary.iterations,
                    r.summary.resample_count,
                    if r.resumed { "  (resumed)" } else { "" }
                );
            }
        }
        Command::Compare(common) => {
            let (cfg, opts) = common.load()?;
            for row in compare_samplers(&cfg, &opts)? {
                println!(
                    "{:<28} geo-mean error {:.4e} ± {:.2e}  iterations {:>9.0}  resamples {:>6.1}",
                    row.label, row.geo_mean_error, row.std_error, row.mean_iterations, row.mean_resamples
                );
            }
        }
        Command::Sweep { common, axis, values } => {
            let (cfg, opts) = common.load()?;
            let values = values
                .iter()
                .map(|v| v.trim())
                .filter(|v| !v.is_empty())
                .map(|v| v.parse::<SweepValue>().map_err(ExperimentError::InvalidConfig))
                .collect::<Result<Vec<_>, _>>()?;
            if values.is_empty() {
                println!("no sweep values given; nothing to do");
            }
            for row in sweep(&cfg, axis, &values, &opts)? {
                println!("{:<28} geo-mean error {:.4e}", row.label, row.geo_mean_error);
            }
        }
        Command::ExportDensity { out, config, axis, bins, strip } => {
            let source = config.unwrap_or_else(|| out.join("config.toml").to_string_lossy().into_owned());
            let cfg = ExperimentConfig::load(&source)?;
            if bins == 0 {
                return Err(ExperimentError::InvalidConfig("--bins must be positive".into()));
            }
            let strip = match strip.as_deref() {
                None => None,
                Some(&[lo, hi]) if lo < hi => Some((lo, hi)),
                Some(_) => return Err(ExperimentError::InvalidConfig("--strip takes two increasing values lo,hi".into())),
            };
            for path in export_density(&out, &cfg, axis, bins, strip)? {
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

/// Parse arguments, run, and return the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, ExperimentError::InvalidConfig(_)) {
                let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
                eprintln!("presets: {}", names.join(", "));
            }
            e.exit_code()
        }
    }
}
