//! Per-run records: objective history, final beamformers and rates.

use std::io::Write;

use serde::Serialize;

use crate::beamformer::BeamformerSet;
use crate::clustering::Clustering;
use crate::error::Result;
use crate::rates::RateReport;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterRecord {
    pub iteration: usize,
    /// Objective the run reports (true rate, or the sample-mean rate under partial CSI).
    pub objective: f64,
    /// Value of the maximized bound at the new iterate.
    pub surrogate: f64,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone)]
pub struct RunTrace {
    pub algorithm: String,
    /// Record 0 is the starting point.
    pub records: Vec<IterRecord>,
    pub x: BeamformerSet,
    pub clustering: Clustering,
    pub report: RateReport,
    /// True when the run stopped on the relative-improvement test.
    pub stopped_by_tolerance: bool,
    pub inner_iterations: usize,
}

impl RunTrace {
    /// Outer iterations performed (the starting record excluded).
    /// Outer iterations run, whatever the recording cadence.
    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.iteration)
    }

    pub fn objectives(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.objective).collect()
    }

    pub fn final_objective(&self) -> f64 {
        self.report.weighted_sum
    }

    pub fn elapsed_ms(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.elapsed_ms)
    }

    /// `iteration,objective,surrogate,elapsed_ms`
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iteration", "objective", "surrogate", "elapsed_ms"])?;
        for r in &self.records {
            w.write_record([
                r.iteration.to_string(),
                format!("{:.12e}", r.objective),
                format!("{:.12e}", r.surrogate),
                format!("{:.3}", r.elapsed_ms),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// JSON summary: final rates, clustering bitmap, iteration counts and the
    /// caller's configuration echo and seed.
    pub fn summary(&self, config: serde_json::Value, seed: u64) -> serde_json::Value {
        serde_json::json!({
            "algorithm": self.algorithm,
            "seed": seed,
            "config": config,
            "clustering": self.clustering.bitmap(),
            "iterations": self.iterations(),
            "inner_iterations": self.inner_iterations,
            "stopped_by_tolerance": self.stopped_by_tolerance,
            "weighted_sum": self.report.weighted_sum,
            "rates": self.report,
            "elapsed_ms": self.elapsed_ms(),
        })
    }
}
