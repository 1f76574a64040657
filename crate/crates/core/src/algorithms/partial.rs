use std::time::Instant;

use rand::Rng;

use super::slbm::{aborted, resolve_start};
use super::{slbm, SlbmConfig, StochConfig};
use crate::beamformer::{BeamformerSet, PowerBudget};
use crate::clustering::Clustering;
use crate::error::Result;
use crate::rates::{AccessModel, Problem};
use crate::subsolver::{solve_subproblem, SubsolverConfig};
use crate::surrogates::jensen::jensen_problem;
use crate::surrogates::{stoch_aux_update, StochAux};
use crate::topology::{AccessChannels, ChannelSet, PartialCsi};
use crate::trace::{IterRecord, RunTrace};

/// A partial-CSI instance: instantaneous CSI on the serving links of a fixed
/// clustering, large-scale gains elsewhere.
#[derive(Debug, Clone)]
pub struct PartialSetup {
    pub csi: PartialCsi,
    /// Problem over the known channels (unknown links zero).
    pub known: Problem,
}

impl PartialSetup {
    /// Hides the non-serving access links of `full`; the SIC order comes from
    /// expected aggregate gains.
    pub fn new(full: &ChannelSet, clustering: Clustering, weights: Vec<f64>, budget: PowerBudget) -> Result<Self> {
        let csi = PartialCsi::from_clustering(full, &clustering);
        let order = csi.decoding_order();
        let known = Problem::new(csi.channels.clone(), clustering, order, weights, budget, AccessModel::Exact)?;
        Ok(Self { csi, known })
    }

    pub fn draws<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<AccessChannels> {
        (0..n).map(|_| self.csi.sample_access(rng)).collect()
    }

    /// Problem whose objective is the sample-mean rate over `draws`:
    /// `sum_k w_k min(mean access rate, backhaul rate)`.
    pub fn sampled(&self, draws: Vec<AccessChannels>) -> Result<Problem> {
        self.known.with_access(AccessModel::Sampled(draws))
    }

    pub fn default_gamma(&self) -> f64 {
        let ps = self.known.budget.sbs.iter().copied().fold(f64::INFINITY, f64::min);
        1e-3 / ps
    }
}

/// Stochastic successive lower-bound maximization. Each iteration draws the
/// unknown links once from `rng`, stores a proximal access bound tight at the
/// current iterate, and maximizes the running average. The reported
/// objective is measured on `eval`.
pub fn stochastic_slbm<R: Rng + ?Sized>(
    setup: &PartialSetup,
    eval: &Problem,
    cfg: &StochConfig,
    sub: &SubsolverConfig,
    x0: Option<&BeamformerSet>,
    rng: &mut R,
) -> Result<RunTrace> {
    cfg.validate()?;
    let start = Instant::now();
    let known = &setup.known;
    let sub = &SubsolverConfig { tol_inner: cfg.tol_inner, max_inner_iters: cfg.max_inner_iters, ..*sub };
    let mut aux = StochAux::new(cfg.gamma.unwrap_or_else(|| setup.default_gamma()), cfg.family)?;
    let mut x = resolve_start(known, x0, rng);
    let f0 = eval.objective(&x);
    let mut records = vec![IterRecord { iteration: 0, objective: f0, surrogate: f64::NAN, elapsed_ms: 0.0 }];
    let mut inner = 0;
    for t in 1..=cfg.max_iters {
        let omega = setup.csi.sample_access(rng);
        aux.push(stoch_aux_update(known, &x, omega, cfg.family));
        let surrogate = aux.surrogate(known)?;
        let res = solve_subproblem(&surrogate, &x, &known.clustering, &known.budget, sub)
            .map_err(|e| aborted(&records, e))?;
        inner += res.iterations;
        x = res.x;
        if t % cfg.eval_every == 0 || t == cfg.max_iters {
            records.push(IterRecord {
                iteration: t,
                objective: eval.objective(&x),
                surrogate: res.value,
                elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
            });
        }
    }
    Ok(RunTrace {
        algorithm: format!("stochastic-{:?}", cfg.family).to_lowercase(),
        records,
        report: eval.rate_report(&x),
        x,
        clustering: known.clustering.clone(),
        stopped_by_tolerance: false,
        inner_iterations: inner,
    })
}

/// SLBM on the deterministic Jensen bound of the mean access rate.
pub fn dlb_slbm<R: Rng + ?Sized>(
    setup: &PartialSetup,
    eval: &Problem,
    cfg: &SlbmConfig,
    sub: &SubsolverConfig,
    x0: Option<&BeamformerSet>,
    rng: &mut R,
) -> Result<RunTrace> {
    let p = jensen_problem(&setup.known, &setup.csi)?;
    let mut tr = slbm(&p, cfg, sub, x0, rng)?;
    tr.algorithm = "dlb".into();
    tr.report = eval.rate_report(&tr.x);
    Ok(tr)
}

/// SLBM on the sample average over `n_samples` fixed draws from `rng`;
/// backhaul terms are shared by all draws.
pub fn saa_slbm<R: Rng + ?Sized>(
    setup: &PartialSetup,
    eval: &Problem,
    n_samples: usize,
    cfg: &SlbmConfig,
    sub: &SubsolverConfig,
    x0: Option<&BeamformerSet>,
    rng: &mut R,
) -> Result<RunTrace> {
    if n_samples == 0 {
        return Err(crate::error::Error::Config("SAA needs at least one sample".into()));
    }
    let draws = setup.draws(n_samples, rng);
    let p = setup.sampled(draws)?;
    let mut tr = slbm(&p, cfg, sub, x0, rng)?;
    tr.algorithm = "saa".into();
    tr.report = eval.rate_report(&tr.x);
    Ok(tr)
}
