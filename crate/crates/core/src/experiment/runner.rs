use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, ExperimentError};
use crate::metrics::{
    aggregate_runs, point_density, write_comparison_csv, write_summaries_csv, Axis, ComparisonRow, RunSummary,
};
use crate::pde::{ProblemKind, ProblemSpec};
use crate::sampling::{read_snapshot_csv, write_snapshot_csv, CollocationPoint};
use crate::training::{train, SamplerKind, TrainingConfig, TrainingError, TrainingLog, TrainingOutcome};

/// Command-line level knobs shared by every verb.
#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Iteration scale in (0, 1].
    pub scale: f64,
    /// Parallel training jobs.
    pub jobs: usize,
    /// Replaces the config's seed list when given.
    pub seeds: Option<Vec<u64>>,
    pub out: PathBuf,
    /// Skip runs whose `summary.json` already exists.
    pub resume: bool,
}

impl RunOptions {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        Self { scale: 1.0, jobs: 1, seeds: None, out: out.into(), resume: false }
    }
}

/// One finished (or resumed) training run.
#[derive(Debug, Clone)]
pub struct JobReport {
    pub sampler: SamplerKind,
    pub label: String,
    pub seed: u64,
    pub dir: PathBuf,
    pub summary: RunSummary,
    pub wall_seconds: f64,
    pub resumed: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct Timing {
    wall_seconds: f64,
}

#[derive(Debug, Serialize)]
struct DivergenceRecord {
    format: &'static str,
    iteration: usize,
    loss: f64,
}

struct Job {
    sampler: SamplerKind,
    label: String,
    spec: ProblemSpec,
    values: Vec<f64>,
    cfg: TrainingConfig,
    dir: PathBuf,
}

fn label_for(kind: ProblemKind, spec: &ProblemSpec) -> String {
    if spec.is_parameterized() {
        return "parameterized".into();
    }
    match kind {
        ProblemKind::Burgers => format!("nu-{}", spec.param),
        ProblemKind::Wave => format!("c2-{}", spec.param),
    }
}

fn plan(cfg: &ExperimentConfig, out: &Path) -> Vec<Job> {
    let mut jobs = Vec::new();
    for &sampler in &cfg.experiment.samplers {
        for (spec, values) in cfg.problems() {
            let label = label_for(cfg.experiment.problem, &spec);
            for &seed in &cfg.experiment.seeds {
                let dir = out.join("runs").join(sampler.name()).join(&label).join(format!("seed-{seed}"));
                let cfg = TrainingConfig { sampler, seed, ..cfg.training.clone() };
                jobs.push(Job { sampler, label: label.clone(), spec: spec.clone(), values: values.clone(), cfg, dir });
            }
        }
    }
    jobs
}

/// Apply `--scale` and `--seed-list`, then validate.
fn effective(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentConfig, ExperimentError> {
    let mut cfg = cfg.scaled(opts.scale)?;
    if let Some(seeds) = &opts.seeds {
        cfg.experiment.seeds = seeds.clone();
    }
    if opts.jobs == 0 {
        return Err(ExperimentError::InvalidConfig("--jobs must be at least 1".into()));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn create(path: &Path) -> Result<BufWriter<File>, ExperimentError> {
    Ok(BufWriter::new(File::create(path)?))
}

fn artifact<E: std::fmt::Display>(e: E) -> ExperimentError {
    ExperimentError::Artifact(e.to_string())
}

fn summary_of(job: &Job, out: &TrainingOutcome) -> RunSummary {
    RunSummary {
        seed: job.cfg.seed,
        sampler: job.sampler.name().into(),
        validation_errors: out.validation_errors.clone(),
        param_values: out.param_values.clone(),
        test_error: out.log.last_test_error().unwrap_or(f64::NAN),
        iterations: out.log.iterations,
        resample_count: out.log.resample_count,
        final_loss: out.log.losses.last().copied().unwrap_or(f64::NAN),
        stop_reason: out.log.stop_reason.map_or("none", |r| r.name()).into(),
        collocation_size: out.collocation.len(),
    }
}

fn write_log(dir: &Path, log: &TrainingLog) -> Result<(), ExperimentError> {
    log.write_jsonl(create(&dir.join("log.jsonl"))?)?;
    log.write_losses_csv(create(&dir.join("loss.csv"))?)?;
    fs::write(
        dir.join("timing.json"),
        serde_json::to_string_pretty(&Timing { wall_seconds: log.wall_seconds }).map_err(artifact)? + "\n",
    )?;
    Ok(())
}

fn write_points(path: &Path, points: &[CollocationPoint], iteration: usize) -> Result<(), ExperimentError> {
    write_snapshot_csv(create(path)?, points, iteration).map_err(artifact)
}

fn write_densities(dir: &Path, spec: &ProblemSpec, points: &[CollocationPoint], bins: usize) -> Result<(), ExperimentError> {
    let d = &spec.domain;
    for (axis, lo, hi, name) in [(Axis::X, d.x_min, d.x_max, "density_x.csv"), (Axis::T, d.t_min, d.t_max, "density_t.csv")] {
        let h = point_density(points, axis, lo, hi, bins, None).map_err(artifact)?;
        h.write_csv(create(&dir.join(name))?).map_err(artifact)?;
    }
    Ok(())
}

fn write_outcome(job: &Job, out: &TrainingOutcome, bins: usize) -> Result<RunSummary, ExperimentError> {
    let dir = &job.dir;
    write_log(dir, &out.log)?;
    write_points(&dir.join("collocation_initial.csv"), &out.initial_collocation.points, 0)?;
    write_points(&dir.join("collocation_final.csv"), &out.collocation.points, out.log.iterations)?;
    if !out.log.snapshots.is_empty() {
        let snaps = dir.join("snapshots");
        fs::create_dir_all(&snaps)?;
        for s in &out.log.snapshots {
            write_points(&snaps.join(format!("iter-{:08}.csv", s.iteration)), &s.points, s.iteration)?;
        }
    }
    write_densities(dir, &job.spec, &out.collocation.points, bins)?;
    out.params.write_snapshot(create(&dir.join("network.txt"))?)?;
    let summary = summary_of(job, out);
    // no wall-clock data here, so reruns are byte-identical
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary).map_err(artifact)? + "\n")?;
    Ok(summary)
}

enum JobResult {
    Done(Box<JobReport>),
    Diverged,
}

fn run_job(job: &Job, resume: bool, bins: usize) -> Result<JobResult, ExperimentError> {
    let summary_path = job.dir.join("summary.json");
    let report = |summary: RunSummary, wall_seconds: f64, resumed: bool| JobReport {
        sampler: job.sampler,
        label: job.label.clone(),
        seed: job.cfg.seed,
        dir: job.dir.clone(),
        summary,
        wall_seconds,
        resumed,
    };
    if resume && summary_path.exists() {
        let summary: RunSummary =
            serde_json::from_reader(BufReader::new(File::open(&summary_path)?)).map_err(artifact)?;
        let wall = File::open(job.dir.join("timing.json"))
            .ok()
            .and_then(|f| serde_json::from_reader::<_, Timing>(BufReader::new(f)).ok())
            .map_or(f64::NAN, |t| t.wall_seconds);
        log::info!("{}: resumed", job.dir.display());
        return Ok(JobResult::Done(Box::new(report(summary, wall, true))));
    }
    fs::create_dir_all(&job.dir)?;
    log::info!("{}: training", job.dir.display());
    match train(&job.spec, &job.values, &job.cfg) {
        Ok(out) => {
            let summary = write_outcome(job, &out, bins)?;
            log::info!("{}: validation error {:.4e}", job.dir.display(), summary.headline_error());
            Ok(JobResult::Done(Box::new(report(summary, out.log.wall_seconds, false))))
        }
        Err(TrainingError::Diverged { iteration, loss, last_good, log }) => {
            log::error!("{}: diverged at iteration {iteration} (loss {loss})", job.dir.display());
            write_log(&job.dir, &log)?;
            last_good.write_snapshot(create(&job.dir.join("network_last_good.txt"))?)?;
            let record = DivergenceRecord { format: "fboal-divergence v1", iteration, loss };
            fs::write(job.dir.join("diverged.json"), serde_json::to_string_pretty(&record).map_err(artifact)? + "\n")?;
            Ok(JobResult::Diverged)
        }
        Err(e) => Err(e.into()),
    }
}

/// Run every job, returning the finished reports and the number of
/// diverged runs. Reports come back in plan order regardless of `--jobs`.
fn execute(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<(Vec<JobReport>, usize), ExperimentError> {
    fs::create_dir_all(&opts.out)?;
    fs::write(opts.out.join("config.toml"), cfg.to_toml())?;
    let jobs = plan(cfg, &opts.out);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(opts.jobs).build().map_err(artifact)?;
    let bins = cfg.experiment.density_bins;
    let results: Vec<Result<JobResult, ExperimentError>> =
        pool.install(|| jobs.par_iter().map(|j| run_job(j, opts.resume, bins)).collect());
    let mut reports = Vec::new();
    let mut diverged = 0;
    for r in results {
        match r? {
            JobResult::Done(rep) => reports.push(*rep),
            JobResult::Diverged => diverged += 1,
        }
    }
    let summaries: Vec<RunSummary> = reports.iter().map(|r| r.summary.clone()).collect();
    write_summaries_csv(create(&opts.out.join("summary.csv"))?, &summaries).map_err(artifact)?;
    Ok((reports, diverged))
}

fn check_diverged(reports: Vec<JobReport>, diverged: usize) -> Result<Vec<JobReport>, ExperimentError> {
    if diverged > 0 {
        return Err(ExperimentError::Diverged { failed: diverged, total: diverged + reports.len() });
    }
    Ok(reports)
}

/// Train every (sampler, parameter value, seed) combination of `cfg` and
/// write the artifact tree under `opts.out`.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<JobReport>, ExperimentError> {
    let cfg = effective(cfg, opts)?;
    let (reports, diverged) = execute(&cfg, opts)?;
    check_diverged(reports, diverged)
}

fn comparison_rows(reports: &[JobReport]) -> Vec<ComparisonRow> {
    let mut keys: Vec<(SamplerKind, String)> = Vec::new();
    for r in reports {
        if !keys.iter().any(|(s, l)| *s == r.sampler && *l == r.label) {
            keys.push((r.sampler, r.label.clone()));
        }
    }
    keys.into_iter()
        .map(|(sampler, label)| {
            let group: Vec<&JobReport> = reports.iter().filter(|r| r.sampler == sampler && r.label == label).collect();
            let n = group.len() as f64;
            let errors: Vec<f64> = group.iter().map(|r| r.summary.headline_error()).collect();
            let agg = aggregate_runs(&errors).ok();
            ComparisonRow {
                label: format!("{}/{}", sampler.name(), label),
                geo_mean_error: agg.map_or(f64::NAN, |a| a.geo_mean),
                std_error: agg.map_or(f64::NAN, |a| a.std),
                mean_iterations: group.iter().map(|r| r.summary.iterations as f64).sum::<f64>() / n,
                mean_resamples: group.iter().map(|r| r.summary.resample_count as f64).sum::<f64>() / n,
                mean_wall_seconds: group.iter().map(|r| r.wall_seconds).sum::<f64>() / n,
                runs: group.len(),
            }
        })
        .collect()
}

/// Run all samplers of `cfg` on the same seeds and write
/// `comparison.csv` (one row per sampler and parameter value).
pub fn compare_samplers(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<ComparisonRow>, ExperimentError> {
    if cfg.experiment.samplers.len() < 2 {
        return Err(ExperimentError::InvalidConfig("a comparison needs at least two samplers".into()));
    }
    let cfg = effective(cfg, opts)?;
    let (reports, diverged) = execute(&cfg, opts)?;
    let rows = comparison_rows(&reports);
    write_comparison_csv(create(&opts.out.join("comparison.csv"))?, &rows).map_err(artifact)?;
    check_diverged(reports, diverged)?;
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Swap count.
    M,
    /// Resampling period.
    K,
    /// Number of sub-domains.
    D,
}

impl std::str::FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "m" => Ok(SweepAxis::M),
            "k" => Ok(SweepAxis::K),
            "d" => Ok(SweepAxis::D),
            other => Err(format!("unknown sweep axis '{other}' (expected m, k or d)")),
        }
    }
}

/// A sweep point: an absolute count, or (for `m`) a percentage of the budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepValue {
    Count(usize),
    Percent(f64),
}

impl std::str::FromStr for SweepValue {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if let Some(p) = s.strip_suffix('%') {
            let v: f64 = p.trim().parse().map_err(|_| format!("bad percentage '{s}'"))?;
            if !(v > 0.0) {
                return Err(format!("percentage must be positive: '{s}'"));
            }
            Ok(SweepValue::Percent(v))
        } else {
            s.parse().map(SweepValue::Count).map_err(|_| format!("bad sweep value '{s}'"))
        }
    }
}

impl std::fmt::Display for SweepValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SweepValue::Count(n) => write!(f, "{n}"),
            SweepValue::Percent(p) => write!(f, "{p}%"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    axis: SweepAxis,
    value: String,
    resolved: usize,
    label: String,
    geo_mean_error: f64,
    std_error: f64,
    mean_iterations: f64,
    mean_resamples: f64,
    runs: usize,
}

/// Rerun the experiment once per value of `axis`, each under
/// `<out>/<axis>-<value>/`, and consolidate into `<out>/sweep.csv`.
/// An empty value list does nothing.
pub fn sweep(
    cfg: &ExperimentConfig,
    axis: SweepAxis,
    values: &[SweepValue],
    opts: &RunOptions,
) -> Result<Vec<ComparisonRow>, ExperimentError> {
    if values.is_empty() {
        return Ok(Vec::new());
    }
    let mut variants = Vec::with_capacity(values.len());
    for &v in values {
        let resolved = match (axis, v) {
            (_, SweepValue::Count(n)) => n,
            (SweepAxis::M, SweepValue::Percent(p)) => (p / 100.0 * cfg.training.budget as f64).round() as usize,
            (_, SweepValue::Percent(_)) => {
                return Err(ExperimentError::InvalidConfig("percentages only apply to the m axis".into()));
            }
        };
        let mut c = cfg.clone();
        match axis {
            SweepAxis::M => c.training.swap_count = resolved,
            SweepAxis::K => c.training.resample_period = resolved,
            SweepAxis::D => c.training.subdomain_count = resolved,
        }
        let axis_name = format!("{axis:?}").to_lowercase();
        c.experiment.name = format!("{}-{axis_name}-{v}", cfg.experiment.name);
        let sub = RunOptions { out: opts.out.join(format!("{axis_name}-{}", v.to_string().replace('%', "pct"))), ..opts.clone() };
        // validate every point before training anything
        let c = effective(&c, &sub)?;
        variants.push((v, resolved, c, sub));
    }
    let mut rows = Vec::new();
    let mut sweep_rows = Vec::new();
    let mut diverged = 0;
    for (v, resolved, c, sub) in variants {
        let (reports, failed) = execute(&c, &sub)?;
        diverged += failed;
        for row in comparison_rows(&reports) {
            sweep_rows.push(SweepRow {
                axis,
                value: v.to_string(),
                resolved,
                label: row.label.clone(),
                geo_mean_error: row.geo_mean_error,
                std_error: row.std_error,
                mean_iterations: row.mean_iterations,
                mean_resamples: row.mean_resamples,
                runs: row.runs,
            });
            rows.push(row);
        }
    }
    fs::create_dir_all(&opts.out)?;
    let mut w = create(&opts.out.join("sweep.csv"))?;
    writeln!(w, "# fboal-sweep v1")?;
    let mut csv = csv::Writer::from_writer(w);
    for r in &sweep_rows {
        csv.serialize(r).map_err(artifact)?;
    }
    csv.flush()?;
    if diverged > 0 {
        return Err(ExperimentError::Diverged { failed: diverged, total: rows.iter().map(|r| r.runs).sum::<usize>() + diverged });
    }
    Ok(rows)
}

/// Recompute density histograms from every `collocation_final.csv` under
/// `root`, writing `density_<axis>_<bins>.csv` next to each. `strip`
/// restricts to points whose other coordinate lies in the interval.
/// Returns the files written.
pub fn export_density(
    root: &Path,
    cfg: &ExperimentConfig,
    axis: Axis,
    bins: usize,
    strip: Option<(f64, f64)>,
) -> Result<Vec<PathBuf>, ExperimentError> {
    let (spec, _) = cfg
        .problems()
        .into_iter()
        .next()
        .ok_or_else(|| ExperimentError::InvalidConfig("config defines no problem".into()))?;
    let d = spec.domain;
    let (lo, hi) = match axis {
        Axis::X => (d.x_min, d.x_max),
        Axis::T => (d.t_min, d.t_max),
    };
    let mut files = Vec::new();
    find_files(root, "collocation_final.csv", &mut files)?;
    files.sort();
    let mut written = Vec::new();
    for f in files {
        let rows = read_snapshot_csv(BufReader::new(File::open(&f)?)).map_err(artifact)?;
        let points: Vec<CollocationPoint> =
            rows.iter().map(|r| CollocationPoint { x: r.x, t: r.t, param: r.param, equation: r.equation_index }).collect();
        let h = point_density(&points, axis, lo, hi, bins, strip).map_err(artifact)?;
        let name = format!("density_{}_{bins}.csv", if axis == Axis::X { "x" } else { "t" });
        let path = f.with_file_name(name);
        h.write_csv(create(&path)?).map_err(artifact)?;
        written.push(path);
    }
    Ok(written)
}

fn find_files(dir: &Path, name: &str, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            find_files(&path, name, out)?;
        } else if path.file_name().is_some_and(|n| n == name) {
            out.push(path);
        }
    }
    Ok(())
}
