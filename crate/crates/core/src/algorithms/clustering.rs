use rand::Rng;
use serde::Serialize;

use super::{slbm, ClusteringConfig, SlbmConfig};
use crate::clustering::Clustering;
use crate::error::{Error, Result};
use crate::rates::Problem;
use crate::subsolver::SubsolverConfig;
use crate::topology::LargeScale;
use crate::trace::RunTrace;

/// One clustering visited by the link-removal heuristic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub round: usize,
    pub clustering: String,
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct HeuristicOutcome {
    pub clustering: Clustering,
    /// Solve of the selected clustering; None only if the empty clustering won.
    pub trace: Option<RunTrace>,
    pub candidates: Vec<Candidate>,
}

impl HeuristicOutcome {
    pub fn objective(&self) -> f64 {
        self.trace.as_ref().map_or(0.0, |t| t.final_objective())
    }
}

/// Iterative link removal: start from full cooperation, solve, drop the
/// `j_delta` active links with the least access power, repeat until no link
/// is left, and keep the clustering with the best true objective. The first
/// clustering in visiting order wins ties. Rounds after the first start from
/// the previous solution and, with `fresh_start`, also from a random point.
pub fn heuristic_clustering<R: Rng + ?Sized>(
    problem: &Problem,
    ccfg: &ClusteringConfig,
    slbm_cfg: &SlbmConfig,
    sub: &SubsolverConfig,
    rng: &mut R,
) -> Result<HeuristicOutcome> {
    let d = problem.dims();
    if ccfg.j_delta == 0 || ccfg.j_delta > d.users * d.sbs {
        return Err(Error::Config(format!("j_delta must lie in 1..={}", d.users * d.sbs)));
    }
    let mut cl = Clustering::full(d.users, d.sbs);
    let mut warm = None;
    let mut candidates = Vec::new();
    let mut best: Option<RunTrace> = None;
    let mut best_value = f64::NEG_INFINITY;
    let mut best_cl = cl.clone();
    let mut round = 0;
    while cl.any_active() {
        let p = problem.with_clustering(cl.clone())?;
        let mut tr = slbm(&p, slbm_cfg, sub, warm.as_ref(), rng)?;
        if ccfg.fresh_start && warm.is_some() {
            let fresh = slbm(&p, slbm_cfg, sub, None, rng)?;
            if fresh.final_objective() > tr.final_objective() {
                tr = fresh;
            }
        }
        let value = tr.final_objective();
        candidates.push(Candidate { round, clustering: cl.bitmap(), objective: value });
        let mut links: Vec<(f64, usize, usize)> = (0..d.users)
            .flat_map(|k| cl.cluster_of(k).iter().map(move |&n| (k, n)))
            .map(|(k, n)| (crate::linalg::norm_sqr(tr.x.w(k, n)), k, n))
            .collect();
        links.sort_by(|a, b| a.0.total_cmp(&b.0));
        let drop: Vec<(usize, usize)> = links.iter().take(ccfg.j_delta).map(|&(_, k, n)| (k, n)).collect();
        let next = cl.without_links(&drop);
        warm = Some(tr.x.clone());
        if value > best_value {
            best_value = value;
            best_cl = cl.clone();
            best = Some(tr);
        }
        cl = next;
        round += 1;
    }
    candidates.push(Candidate { round, clustering: cl.bitmap(), objective: 0.0 });
    if best_value < 0.0 || best.is_none() {
        return Ok(HeuristicOutcome { clustering: cl, trace: None, candidates });
    }
    Ok(HeuristicOutcome { clustering: best_cl, trace: best, candidates })
}

/// Each user served by the `c` SBSs with the largest large-scale gains; ties
/// go to the lower SBS index.
pub fn static_clustering(ls: &LargeScale, c: usize) -> Result<Clustering> {
    let n_sbs = ls.beta_sbs_mbs.len();
    if c == 0 || c > n_sbs {
        return Err(Error::Config(format!("cluster size must lie in 1..={n_sbs}, got {c}")));
    }
    let m = ls
        .beta_user_sbs
        .iter()
        .map(|row| {
            let mut idx: Vec<usize> = (0..row.len()).collect();
            idx.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
            let mut sel = vec![false; row.len()];
            for &n in idx.iter().take(c) {
                sel[n] = true;
            }
            sel
        })
        .collect();
    Ok(Clustering::from_matrix(m))
}
