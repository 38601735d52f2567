use std::io::Write;

use serde::{Deserialize, Serialize};

use super::SamplerKind;
use crate::sampling::CollocationPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    CapReached,
    ThresholdMet,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::CapReached => "cap_reached",
            StopReason::ThresholdMet => "threshold_met",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum LogEvent {
    TestCheck {
        iteration: usize,
        lr: f64,
        loss: f64,
        /// Error compared against the threshold (summed over parameters).
        test_error: f64,
        per_param: Vec<f64>,
    },
    Resample {
        iteration: usize,
        sampler: SamplerKind,
        added: usize,
        removed: usize,
        size: usize,
        /// Points per training parameter value (empty in fixed mode).
        counts: Vec<usize>,
    },
    Stop {
        iteration: usize,
        reason: StopReason,
    },
}

impl LogEvent {
    pub fn iteration(&self) -> usize {
        match self {
            LogEvent::TestCheck { iteration, .. }
            | LogEvent::Resample { iteration, .. }
            | LogEvent::Stop { iteration, .. } => *iteration,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub iteration: usize,
    pub points: Vec<CollocationPoint>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingLog {
    /// Total loss at every iteration, before that iteration's update.
    pub losses: Vec<f64>,
    pub events: Vec<LogEvent>,
    pub snapshots: Vec<Snapshot>,
    pub iterations: usize,
    pub resample_count: usize,
    pub stop_reason: Option<StopReason>,
    pub wall_seconds: f64,
}

impl TrainingLog {
    /// `(iteration, test error)` at every check.
    pub fn test_checks(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.events.iter().filter_map(|e| match e {
            LogEvent::TestCheck { iteration, test_error, .. } => Some((*iteration, *test_error)),
            _ => None,
        })
    }

    pub fn last_test_error(&self) -> Option<f64> {
        self.test_checks().last().map(|(_, e)| e)
    }

    /// One JSON object per event, after a version header record.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", serde_json::json!({ "format": "fboal-log", "version": 1 }))?;
        for e in &self.events {
            serde_json::to_writer(&mut w, e)?;
            writeln!(w)?;
        }
        Ok(())
    }

    /// Per-iteration loss trace as CSV.
    pub fn write_losses_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# fboal-loss v1")?;
        writeln!(w, "iteration,loss")?;
        for (i, l) in self.losses.iter().enumerate() {
            writeln!(w, "{},{l:e}", i + 1)?;
        }
        Ok(())
    }
}
