//! Rate-MSE bounds.
//!
//! `log2(1 + |z|^2 / d) >= (ln rho - rho e(alpha) + 1) / ln 2` where
//! `e(alpha) = |alpha|^2 (|z|^2 + d) - 2 Re{conj(alpha) z} + 1`, with equality at
//! the MMSE receiver `alpha = z / (|z|^2 + d)` and `rho = 1 / e(alpha)`.

use serde::Serialize;

use super::{CompositeValue, Family, Surrogate};
use crate::beamformer::BeamformerSet;
use crate::linalg::C64;
use crate::rates::{LinkBound, Problem};

/// MMSE receivers and MSE weights of one expansion point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WmmseAux {
    /// `(alpha_k, rho_k)` of the access hop.
    pub access: Vec<Option<(C64, f64)>>,
    /// `(n, alpha_{k,n}, rho_{k,n})` for n in N_k.
    pub backhaul: Vec<Vec<(usize, C64, f64)>>,
}

fn parts(b: &LinkBound) -> (C64, f64) {
    match *b {
        LinkBound::Wmmse { alpha, rho } => (alpha, rho),
        _ => unreachable!("built with the WMMSE family"),
    }
}

/// Optimal receivers and weights at `x`; on a sampled problem the access
/// pair refers to the first draw.
pub fn wmmse_aux(problem: &Problem, x: &BeamformerSet) -> WmmseAux {
    let s = Surrogate::expand(problem, Family::Wmmse, x);
    let cl = &problem.clustering;
    WmmseAux {
        access: s.access.iter().map(|a| a.first().map(parts)).collect(),
        backhaul: s
            .backhaul
            .iter()
            .enumerate()
            .map(|(k, b)| {
                cl.cluster_of(k)
                    .iter()
                    .zip(b)
                    .map(|(&n, b)| {
                        let (a, r) = parts(b);
                        (n, a, r)
                    })
                    .collect()
            })
            .collect(),
    }
}

impl WmmseAux {
    pub fn surrogate<'a>(&self, problem: &'a Problem) -> Surrogate<'a> {
        let scenarios = problem.scenarios();
        let access = self
            .access
            .iter()
            .map(|a| match a {
                Some((alpha, rho)) => vec![LinkBound::Wmmse { alpha: *alpha, rho: *rho }; scenarios.len()],
                None => Vec::new(),
            })
            .collect();
        let backhaul = self
            .backhaul
            .iter()
            .map(|b| b.iter().map(|&(_, alpha, rho)| LinkBound::Wmmse { alpha, rho }).collect())
            .collect();
        Surrogate::from_parts(problem, scenarios, access, backhaul, None)
    }
}

/// Per-user minimum of the WMMSE pieces, weighted sum and a subgradient.
pub fn wmmse_bound(problem: &Problem, x: &BeamformerSet, aux: &WmmseAux) -> CompositeValue {
    aux.surrogate(problem).evaluate(x)
}
