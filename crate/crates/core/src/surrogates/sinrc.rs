//! SINR-convexification bounds.
//!
//! `log2(1 + |z|^2 / d) >= log2(1 + 2 Re{conj(u) z} - |u|^2 d)` for every
//! complex u, with equality at `u = z / d`.

use serde::Serialize;

use super::{CompositeValue, Family, Surrogate};
use crate::beamformer::BeamformerSet;
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::rates::{LinkBound, Problem, Products};

/// Receive scalars of the SINRC bound, built at an expansion point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SinrcAux {
    /// `u^A_k`; None for users without a cluster.
    pub u_access: Vec<Option<C64>>,
    /// `(n, u^B_{k,n})` for n in N_k.
    pub u_backhaul: Vec<Vec<(usize, C64)>>,
}

/// MMSE-optimal receive scalars at `x`. On a sampled problem the access
/// scalar refers to the first draw.
pub fn mmse_aux_sinrc(problem: &Problem, x: &BeamformerSet) -> SinrcAux {
    let s = Surrogate::expand(problem, Family::Sinrc, x);
    SinrcAux::from_surrogate(&s)
}

impl SinrcAux {
    fn from_surrogate(s: &Surrogate<'_>) -> Self {
        let u = |b: &LinkBound| match *b {
            LinkBound::Sinrc { u } => u,
            _ => unreachable!("built with the SINRC family"),
        };
        let cl = &s.problem.clustering;
        Self {
            u_access: s.access.iter().map(|a| a.first().map(u)).collect(),
            u_backhaul: s
                .backhaul
                .iter()
                .enumerate()
                .map(|(k, b)| cl.cluster_of(k).iter().zip(b).map(|(&n, b)| (n, u(b))).collect())
                .collect(),
        }
    }

    /// The composite bound defined by these scalars.
    pub fn surrogate<'a>(&self, problem: &'a Problem) -> Surrogate<'a> {
        let scenarios = problem.scenarios();
        let access = self
            .u_access
            .iter()
            .map(|u| match u {
                Some(u) => vec![LinkBound::Sinrc { u: *u }; scenarios.len()],
                None => Vec::new(),
            })
            .collect();
        let backhaul = self
            .u_backhaul
            .iter()
            .map(|b| b.iter().map(|&(_, u)| LinkBound::Sinrc { u }).collect())
            .collect();
        Surrogate::from_parts(problem, scenarios, access, backhaul, None)
    }
}

/// Access bound of user k.
pub fn sinrc_bound_access(problem: &Problem, x: &BeamformerSet, aux: &SinrcAux, k: usize) -> Result<f64> {
    let u = aux.u_access[k].ok_or(Error::EmptyCluster(k))?;
    let prod = problem.products(x);
    let phi = problem.access_interference(k, 0, &prod);
    Ok(LinkBound::Sinrc { u }.value(prod.access[0][k][k], phi, problem.channels.noise_user[k]))
}

/// Backhaul bound of user k at SBS n.
pub fn sinrc_bound_backhaul(
    problem: &Problem,
    x: &BeamformerSet,
    aux: &SinrcAux,
    k: usize,
    n: usize,
) -> Result<f64> {
    let &(_, u) = aux.u_backhaul[k]
        .iter()
        .find(|(m, _)| *m == n)
        .ok_or(Error::NotServed { user: k, sbs: n })?;
    let prod = Products::compute(x, &problem.channels, &problem.clustering, &[]);
    let delta = problem.backhaul_interference(k, n, &prod);
    Ok(LinkBound::Sinrc { u }.value(prod.mbs_at_sbs[n][k], delta, problem.channels.noise_sbs[n]))
}

/// Per-user minimum of the SINRC pieces, weighted sum and a subgradient.
pub fn composite_bound(problem: &Problem, x: &BeamformerSet, aux: &SinrcAux) -> CompositeValue {
    aux.surrogate(problem).evaluate(x)
}
