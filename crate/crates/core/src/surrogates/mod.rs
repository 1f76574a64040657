//! Concave lower bounds of the end-to-end objective.
//!
//! A [`Surrogate`] is a per-user minimum of concave pieces: one access piece
//! (optionally averaged over several access-channel scenarios, with optional
//! proximal terms) and one backhaul piece per serving SBS. The exact objective
//! is the same structure with [`LinkBound::Exact`] everywhere.

pub mod jensen;
pub mod sinrc;
pub mod stochastic;
pub mod wmmse;

use serde::{Deserialize, Serialize};

use crate::beamformer::{BeamformerSet, Dims};
use crate::linalg::C64;
use crate::rates::{Adjoint, LinkBound, Problem, Products};
use crate::topology::AccessChannels;

pub use jensen::{jensen_matrix, jensen_rate, JensenMatrix};
pub use sinrc::{composite_bound, mmse_aux_sinrc, sinrc_bound_access, sinrc_bound_backhaul, SinrcAux};
pub use stochastic::{stoch_aux_update, stoch_composite_bound, StochAux, StochEntry};
pub use wmmse::{wmmse_aux, wmmse_bound, WmmseAux};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Sinrc,
    Wmmse,
}

impl Family {
    /// Bound on `log2(1 + |z|^2 / (I + noise))` that is tight at the given point.
    pub fn tight_bound(self, z: C64, interference: f64, noise: f64) -> LinkBound {
        let d = interference + noise;
        match self {
            Family::Sinrc => LinkBound::Sinrc { u: z / d },
            Family::Wmmse => {
                let t = z.norm_sqr() + d;
                LinkBound::Wmmse { alpha: z / t, rho: t / d }
            }
        }
    }
}

/// Value of a composite bound and its per-user terms.
#[derive(Debug, Clone)]
pub struct CompositeValue {
    /// R-hat_k per user; 0 for users without a cluster.
    pub per_user: Vec<f64>,
    pub weighted_sum: f64,
    pub subgradient: BeamformerSet,
}

/// Proximal terms `-(gamma/2) sum_n ||w_{k,n} - center_s w_{k,n}||^2`, one
/// center per access scenario.
#[derive(Debug, Clone)]
pub struct Prox<'a> {
    pub gamma: f64,
    pub centers: Vec<&'a BeamformerSet>,
}

/// Per-user minimum of concave access and backhaul pieces.
#[derive(Debug, Clone)]
pub struct Surrogate<'a> {
    problem: &'a Problem,
    scenarios: Vec<&'a AccessChannels>,
    /// `[k][s]`, empty for users without a cluster.
    access: Vec<Vec<LinkBound>>,
    /// `[k][position in N_k]`
    backhaul: Vec<Vec<LinkBound>>,
    prox: Option<Prox<'a>>,
}

/// Piece values per user: access first, then backhaul in ascending SBS order.
pub type Pieces = Vec<Vec<f64>>;

impl<'a> Surrogate<'a> {
    /// The exact objective of `problem` in piecewise form.
    pub fn exact(problem: &'a Problem) -> Self {
        let scenarios = problem.scenarios();
        let (access, backhaul) = Self::uniform(problem, scenarios.len(), LinkBound::Exact);
        Self { problem, scenarios, access, backhaul, prox: None }
    }

    /// Bound of the given family that is tight at `x0`.
    pub fn expand(problem: &'a Problem, family: Family, x0: &BeamformerSet) -> Self {
        let scenarios = problem.scenarios();
        let prod = Products::compute(x0, &problem.channels, &problem.clustering, &scenarios);
        let access = (0..problem.dims().users)
            .map(|k| {
                if problem.clustering.cluster_of(k).is_empty() {
                    return Vec::new();
                }
                (0..scenarios.len())
                    .map(|s| {
                        let phi = problem.access_interference(k, s, &prod);
                        family.tight_bound(prod.access[s][k][k], phi, problem.channels.noise_user[k])
                    })
                    .collect()
            })
            .collect();
        let backhaul = backhaul_bounds(problem, family, &prod);
        Self { problem, scenarios, access, backhaul, prox: None }
    }

    /// Assembles a surrogate from explicit parts (used by the stochastic scheme).
    pub fn from_parts(
        problem: &'a Problem,
        scenarios: Vec<&'a AccessChannels>,
        access: Vec<Vec<LinkBound>>,
        backhaul: Vec<Vec<LinkBound>>,
        prox: Option<Prox<'a>>,
    ) -> Self {
        debug_assert!(access.iter().all(|a| a.is_empty() || a.len() == scenarios.len()));
        if let Some(p) = &prox {
            debug_assert_eq!(p.centers.len(), scenarios.len());
        }
        Self { problem, scenarios, access, backhaul, prox }
    }

    fn uniform(problem: &Problem, scen: usize, b: LinkBound) -> (Vec<Vec<LinkBound>>, Vec<Vec<LinkBound>>) {
        let cl = &problem.clustering;
        let users = problem.dims().users;
        let access = (0..users)
            .map(|k| if cl.cluster_of(k).is_empty() { Vec::new() } else { vec![b; scen] })
            .collect();
        let backhaul = (0..users).map(|k| vec![b; cl.cluster_of(k).len()]).collect();
        (access, backhaul)
    }

    pub fn problem(&self) -> &'a Problem {
        self.problem
    }

    pub fn dims(&self) -> Dims {
        self.problem.dims()
    }

    pub fn products(&self, x: &BeamformerSet) -> Products {
        Products::compute(x, &self.problem.channels, &self.problem.clustering, &self.scenarios)
    }

    fn prox_penalty(&self, k: usize, s: usize, x: &BeamformerSet) -> f64 {
        match &self.prox {
            None => 0.0,
            Some(p) => {
                let c = p.centers[s];
                let d: f64 = self
                    .problem
                    .clustering
                    .cluster_of(k)
                    .iter()
                    .map(|&n| x.w(k, n).iter().zip(c.w(k, n)).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>())
                    .sum();
                0.5 * p.gamma * d
            }
        }
    }

    pub fn pieces_with(&self, x: &BeamformerSet, prod: &Products) -> Pieces {
        let pb = self.problem;
        let scen = self.scenarios.len() as f64;
        (0..self.dims().users)
            .map(|k| {
                let cluster = pb.clustering.cluster_of(k);
                if cluster.is_empty() {
                    return Vec::new();
                }
                let mut out = Vec::with_capacity(1 + cluster.len());
                let access: f64 = self.access[k]
                    .iter()
                    .enumerate()
                    .map(|(s, b)| {
                        let phi = pb.access_interference(k, s, prod);
                        b.value(prod.access[s][k][k], phi, pb.channels.noise_user[k]) - self.prox_penalty(k, s, x)
                    })
                    .sum::<f64>()
                    / scen;
                out.push(access);
                for (b, &n) in self.backhaul[k].iter().zip(cluster) {
                    let delta = pb.backhaul_interference(k, n, prod);
                    out.push(b.value(prod.mbs_at_sbs[n][k], delta, pb.channels.noise_sbs[n]));
                }
                out
            })
            .collect()
    }

    pub fn pieces(&self, x: &BeamformerSet) -> Pieces {
        self.pieces_with(x, &self.products(x))
    }

    /// Gradient of `sum_k sum_j mult[k][j] * piece_{k,j}` at x.
    pub fn gradient_with(&self, x: &BeamformerSet, prod: &Products, mult: &[Vec<f64>]) -> BeamformerSet {
        let pb = self.problem;
        let d = self.dims();
        let scen = self.scenarios.len();
        let mut adj = Adjoint::zeros(d, scen);
        let mut prox_grad: Option<BeamformerSet> = None;
        for k in 0..d.users {
            let cluster = pb.clustering.cluster_of(k);
            if cluster.is_empty() {
                continue;
            }
            let ma = mult[k][0] / scen as f64;
            if ma != 0.0 {
                for (s, b) in self.access[k].iter().enumerate() {
                    let phi = pb.access_interference(k, s, prod);
                    let ev = b.eval(prod.access[s][k][k], phi, pb.channels.noise_user[k]);
                    adj.access[s][k][k] += ev.dz * ma;
                    pb.add_access_interference_adjoint(k, s, ma * ev.di, prod, &mut adj);
                }
                if let Some(p) = &self.prox {
                    let g = prox_grad.get_or_insert_with(|| BeamformerSet::zeros(d));
                    for c in &p.centers {
                        for &n in cluster {
                            let f = -p.gamma * ma;
                            for ((gi, a), b) in g.w_mut(k, n).iter_mut().zip(x.w(k, n)).zip(c.w(k, n)) {
                                *gi += (a - b) * f;
                            }
                        }
                    }
                }
            }
            for (pos, (b, &n)) in self.backhaul[k].iter().zip(cluster).enumerate() {
                let m = mult[k][1 + pos];
                if m == 0.0 {
                    continue;
                }
                let delta = pb.backhaul_interference(k, n, prod);
                let ev = b.eval(prod.mbs_at_sbs[n][k], delta, pb.channels.noise_sbs[n]);
                adj.mbs_at_sbs[n][k] += ev.dz * m;
                pb.add_backhaul_interference_adjoint(k, n, m * ev.di, prod, &mut adj);
            }
        }
        let mut g = Products::backprop(&adj, x, &pb.channels, &pb.clustering, &self.scenarios);
        if let Some(p) = prox_grad {
            g.add_scaled(1.0, &p);
        }
        g
    }

    /// Per-user minima and weighted sum. Zero-weight users are left out of the
    /// sum so that an infeasible piece of theirs cannot poison it.
    pub fn composite_with(&self, pieces: &Pieces) -> (Vec<f64>, f64) {
        let per_user: Vec<f64> = pieces
            .iter()
            .map(|p| if p.is_empty() { 0.0 } else { p.iter().copied().fold(f64::INFINITY, f64::min) })
            .collect();
        let sum = per_user
            .iter()
            .zip(&self.problem.weights)
            .filter(|(_, w)| **w != 0.0)
            .map(|(r, w)| w * r)
            .sum();
        (per_user, sum)
    }

    pub fn value(&self, x: &BeamformerSet) -> f64 {
        self.composite_with(&self.pieces(x)).1
    }

    /// Composite value with a subgradient. The active piece of each user is
    /// the first minimizer in piece order (access, then ascending SBS).
    pub fn evaluate(&self, x: &BeamformerSet) -> CompositeValue {
        let prod = self.products(x);
        let pieces = self.pieces_with(x, &prod);
        let (per_user, weighted_sum) = self.composite_with(&pieces);
        let mult = self.active_multipliers(&pieces);
        let subgradient = if weighted_sum.is_finite() {
            self.gradient_with(x, &prod, &mult)
        } else {
            BeamformerSet::zeros(self.dims())
        };
        CompositeValue { per_user, weighted_sum, subgradient }
    }

    pub fn active_multipliers(&self, pieces: &Pieces) -> Vec<Vec<f64>> {
        pieces
            .iter()
            .zip(&self.problem.weights)
            .map(|(p, &w)| {
                let mut m = vec![0.0; p.len()];
                if w != 0.0 && !p.is_empty() {
                    let mut best = 0;
                    for j in 1..p.len() {
                        if p[j] < p[best] {
                            best = j;
                        }
                    }
                    m[best] = w;
                }
                m
            })
            .collect()
    }

    /// Soft-min smoothing `-mu ln sum_j exp(-p_j / mu)` of every user's
    /// minimum; a lower bound of the composite within `mu ln(#pieces)` per
    /// user. Returns value, gradient and the exact composite at x.
    pub fn smoothed(&self, x: &BeamformerSet, mu: f64) -> Smoothed {
        let prod = self.products(x);
        let pieces = self.pieces_with(x, &prod);
        let (_, exact) = self.composite_with(&pieces);
        if !exact.is_finite() {
            return Smoothed { value: f64::NEG_INFINITY, exact, gradient: None };
        }
        let mut value = 0.0;
        let mult: Vec<Vec<f64>> = pieces
            .iter()
            .zip(&self.problem.weights)
            .map(|(p, &w)| {
                if w == 0.0 || p.is_empty() {
                    return vec![0.0; p.len()];
                }
                let m = p.iter().copied().fold(f64::INFINITY, f64::min);
                let e: Vec<f64> = p.iter().map(|v| (-(v - m) / mu).exp()).collect();
                let s: f64 = e.iter().sum();
                value += w * (m - mu * s.ln());
                e.iter().map(|v| w * v / s).collect()
            })
            .collect();
        let gradient = Some(self.gradient_with(x, &prod, &mult));
        Smoothed { value, exact, gradient }
    }
}

/// Output of [`Surrogate::smoothed`].
#[derive(Debug, Clone)]
pub struct Smoothed {
    pub value: f64,
    pub exact: f64,
    /// None when the point is outside the surrogate's domain.
    pub gradient: Option<BeamformerSet>,
}

pub(crate) fn backhaul_bounds(problem: &Problem, family: Family, prod: &Products) -> Vec<Vec<LinkBound>> {
    (0..problem.dims().users)
        .map(|k| {
            problem
                .clustering
                .cluster_of(k)
                .iter()
                .map(|&n| {
                    let delta = problem.backhaul_interference(k, n, prod);
                    family.tight_bound(prod.mbs_at_sbs[n][k], delta, problem.channels.noise_sbs[n])
                })
                .collect()
        })
        .collect()
}
