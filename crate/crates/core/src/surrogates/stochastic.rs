//! Strongly concave access bounds for the partial-CSI problem.
//!
//! Every iteration draws the unknown access links once and stores a bound
//! that is tight at the current iterate under that draw, minus a proximal
//! term `(gamma/2) sum_n ||w_{k,n} - w~_{k,n}||^2`. The access piece of the
//! running surrogate is the average of all stored bounds; backhaul pieces are
//! the plain bounds at the latest iterate since the backhaul CSI is complete.

use super::{backhaul_bounds, CompositeValue, Family, Prox, Surrogate};
use crate::beamformer::BeamformerSet;
use crate::error::{Error, Result};
use crate::rates::{LinkBound, Problem, Products};
use crate::topology::AccessChannels;

/// One stored access bound.
#[derive(Debug, Clone)]
pub struct StochEntry {
    /// The access draw the bound was built under.
    pub sample: AccessChannels,
    /// Per user; None for users without a cluster.
    pub access: Vec<Option<LinkBound>>,
    /// Proximal center `w~` (the expansion point).
    pub center: BeamformerSet,
}

/// History of stored bounds with the proximal weight.
#[derive(Debug, Clone)]
pub struct StochAux {
    pub gamma: f64,
    pub family: Family,
    pub history: Vec<StochEntry>,
}

impl StochAux {
    pub fn new(gamma: f64, family: Family) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Config(format!("proximal weight must be positive, got {gamma}")));
        }
        Ok(Self { gamma, family, history: Vec::new() })
    }

    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }

    pub fn push(&mut self, entry: StochEntry) {
        self.history.push(entry);
    }

    /// The running surrogate. `problem` carries the known channels; backhaul
    /// bounds are expanded at the latest center.
    pub fn surrogate<'a>(&'a self, problem: &'a Problem) -> Result<Surrogate<'a>> {
        let last = self.history.last().ok_or_else(|| Error::Config("empty stochastic history".into()))?;
        let prod = Products::compute(&last.center, &problem.channels, &problem.clustering, &[]);
        let backhaul = backhaul_bounds(problem, self.family, &prod);
        let scenarios = self.history.iter().map(|e| &e.sample).collect();
        let access = (0..problem.dims().users)
            .map(|k| match self.history[0].access[k] {
                Some(_) => self.history.iter().map(|e| e.access[k].expect("cluster fixed")).collect(),
                None => Vec::new(),
            })
            .collect();
        let prox = Prox { gamma: self.gamma, centers: self.history.iter().map(|e| &e.center).collect() };
        Ok(Surrogate::from_parts(problem, scenarios, access, backhaul, Some(prox)))
    }
}

/// Bound pair tight at `x_prev` under the access draw `omega`.
pub fn stoch_aux_update(problem: &Problem, x_prev: &BeamformerSet, omega: AccessChannels, family: Family) -> StochEntry {
    let prod = Products::compute(x_prev, &problem.channels, &problem.clustering, &[&omega]);
    let access = (0..problem.dims().users)
        .map(|k| {
            if problem.clustering.cluster_of(k).is_empty() {
                return None;
            }
            let phi = problem.access_interference(k, 0, &prod);
            Some(family.tight_bound(prod.access[0][k][k], phi, problem.channels.noise_user[k]))
        })
        .collect();
    StochEntry { sample: omega, access, center: x_prev.clone() }
}

/// Running-average access bound composed with the backhaul bounds.
pub fn stoch_composite_bound(problem: &Problem, x: &BeamformerSet, aux: &StochAux) -> Result<CompositeValue> {
    Ok(aux.surrogate(problem)?.evaluate(x))
}
