//! Outer loops: successive lower-bound maximization, SBS clustering, and the
//! partial-CSI variants.

mod clustering;
mod partial;
mod slbm;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::surrogates::Family;

pub use clustering::{heuristic_clustering, static_clustering, Candidate, HeuristicOutcome};
pub use partial::{dlb_slbm, saa_slbm, stochastic_slbm, PartialSetup};
pub use slbm::{initial_point, slbm};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SlbmConfig {
    pub max_outer_iters: usize,
    pub rel_tol: f64,
    pub family: Family,
}

impl Default for SlbmConfig {
    fn default() -> Self {
        Self { max_outer_iters: 30, rel_tol: 1e-3, family: Family::Sinrc }
    }
}

impl SlbmConfig {
    pub fn with_family(family: Family) -> Self {
        Self { family, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_outer_iters == 0 {
            return Err(Error::Config("max_outer_iters must be at least 1".into()));
        }
        if !(self.rel_tol >= 0.0) {
            return Err(Error::Config("rel_tol must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusteringConfig {
    /// Links removed per round.
    pub j_delta: usize,
    /// Also solve each round from a fresh random start and keep the better
    /// of that and the warm-started solve. A warm start inherits near-zero
    /// beamformers for users whose strong links were removed, and zero is
    /// stationary for a user's rate, so such users can stay starved.
    pub fresh_start: bool,
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        Self { j_delta: 1, fresh_start: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StochConfig {
    pub max_iters: usize,
    /// Proximal weight; `None` means `1e-3 / P^S` of the weakest SBS budget.
    pub gamma: Option<f64>,
    pub family: Family,
    /// Fresh access draws used to report the mean rate.
    pub eval_sample_count: usize,
    /// Evaluate the reported rate every this many iterations (the last
    /// iteration is always evaluated).
    pub eval_every: usize,
    /// Inner stopping tolerance used in place of the subsolver's.
    pub tol_inner: f64,
    /// Inner iteration cap used in place of the subsolver's. The running
    /// surrogate moves by O(1/t) per iteration and costs O(t) to evaluate,
    /// so a few warm-started steps per draw go further than exact solves.
    pub max_inner_iters: usize,
}

impl Default for StochConfig {
    fn default() -> Self {
        Self { max_iters: 300, gamma: None, family: Family::Sinrc, eval_sample_count: 200, eval_every: 10, tol_inner: 1e-7, max_inner_iters: 30 }
    }
}

impl StochConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || self.eval_sample_count == 0 || self.eval_every == 0 || self.max_inner_iters == 0 {
            return Err(Error::Config("stochastic iteration and sample counts must be at least 1".into()));
        }
        if !(self.tol_inner > 0.0) {
            return Err(Error::Config("tol_inner must be positive".into()));
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0) {
                return Err(Error::Config("gamma must be positive".into()));
            }
        }
        Ok(())
    }
}
