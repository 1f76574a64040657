//! Exact rate evaluation for the two-hop downlink.
//!
//! Every rate and bound used by the solvers depends on the beamformers only
//! through a handful of inner products (see [`Products`]). Scalar functions of
//! a (signal, interference) pair are differentiated with Wirtinger calculus and
//! pulled back to the beamformers by [`Products::backprop`], so exact rates and
//! all surrogate families share one gradient path.
//!
//! Gradients follow the convention `grad = 2 dF/d(conj z)`, i.e. the real
//! gradient of F with respect to `(Re z, Im z)` packed back into a complex
//! number.

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::beamformer::{BeamformerSet, Dims, PowerBudget};
use crate::clustering::{Clustering, DecodingOrder};
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot_h, norm_sqr, C64};
use crate::topology::{AccessChannels, ChannelSet, PartialCsi};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Inner products shared by all rate expressions.
#[derive(Debug, Clone)]
pub struct Products {
    /// Per access scenario: `s[k][i] = sum_{j in N_i} h_{k,j}^H w_{i,j}`.
    pub access: Vec<Vec<Vec<C64>>>,
    /// `a[k][i] = h_{k,mbs}^H v_i`
    pub mbs_at_user: Vec<Vec<C64>>,
    /// `b[n][i] = g_n^H v_i`
    pub mbs_at_sbs: Vec<Vec<C64>>,
    /// `c[n][i] = sum_{j in N_i} q_{n,j}^H w_{i,j}`
    pub sbs_at_sbs: Vec<Vec<C64>>,
    /// `p[n][i] = ||w_{i,n}||^2`
    pub power: Vec<Vec<f64>>,
}

/// Adjoint of a scalar function with respect to [`Products`]; complex entries
/// hold `2 dF/d(conj z)`, `power` holds `dF/dp`.
#[derive(Debug, Clone)]
pub struct Adjoint {
    pub access: Vec<Vec<Vec<C64>>>,
    pub mbs_at_user: Vec<Vec<C64>>,
    pub mbs_at_sbs: Vec<Vec<C64>>,
    pub sbs_at_sbs: Vec<Vec<C64>>,
    pub power: Vec<Vec<f64>>,
}

impl Adjoint {
    pub fn zeros(dims: Dims, scenarios: usize) -> Self {
        let (k, n) = (dims.users, dims.sbs);
        Self {
            access: vec![vec![vec![ZERO; k]; k]; scenarios],
            mbs_at_user: vec![vec![ZERO; k]; k],
            mbs_at_sbs: vec![vec![ZERO; k]; n],
            sbs_at_sbs: vec![vec![ZERO; k]; n],
            power: vec![vec![0.0; k]; n],
        }
    }
}

impl Products {
    pub fn compute(
        x: &BeamformerSet,
        ch: &ChannelSet,
        cl: &Clustering,
        scenarios: &[&AccessChannels],
    ) -> Self {
        let d = x.dims();
        let (kk, nn) = (d.users, d.sbs);
        let access = scenarios
            .iter()
            .map(|h| {
                (0..kk)
                    .map(|k| {
                        (0..kk)
                            .map(|i| {
                                cl.cluster_of(i)
                                    .iter()
                                    .map(|&j| dot_h(&h[k][j], x.w(i, j)))
                                    .sum()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let mbs_at_user = (0..kk)
            .map(|k| (0..kk).map(|i| dot_h(&ch.h_user_mbs[k], x.v(i))).collect())
            .collect();
        let mbs_at_sbs = (0..nn)
            .map(|n| (0..kk).map(|i| dot_h(&ch.h_sbs_mbs[n], x.v(i))).collect())
            .collect();
        let sbs_at_sbs = (0..nn)
            .map(|n| {
                (0..kk)
                    .map(|i| {
                        cl.cluster_of(i)
                            .iter()
                            .map(|&j| dot_h(&ch.h_sbs_sbs[n][j], x.w(i, j)))
                            .sum()
                    })
                    .collect()
            })
            .collect();
        let power = (0..nn).map(|n| (0..kk).map(|i| norm_sqr(x.w(i, n))).collect()).collect();
        Self { access, mbs_at_user, mbs_at_sbs, sbs_at_sbs, power }
    }

    /// Pulls an adjoint back to a gradient over the beamformers.
    pub fn backprop(
        adj: &Adjoint,
        x: &BeamformerSet,
        ch: &ChannelSet,
        cl: &Clustering,
        scenarios: &[&AccessChannels],
    ) -> BeamformerSet {
        let d = x.dims();
        let mut g = BeamformerSet::zeros(d);
        for i in 0..d.users {
            for &j in cl.cluster_of(i) {
                let gw = g.w_mut(i, j);
                for (h, a) in scenarios.iter().zip(&adj.access) {
                    for k in 0..d.users {
                        let z = a[k][i];
                        if z != ZERO {
                            axpy(z, &h[k][j], gw);
                        }
                    }
                }
                for n in 0..d.sbs {
                    let z = adj.sbs_at_sbs[n][i];
                    if z != ZERO {
                        axpy(z, &ch.h_sbs_sbs[n][j], gw);
                    }
                }
            }
            for n in 0..d.sbs {
                let dp = adj.power[n][i];
                if dp != 0.0 {
                    let w: Vec<C64> = x.w(i, n).to_vec();
                    axpy(C64::new(2.0 * dp, 0.0), &w, g.w_mut(i, n));
                }
            }
            if cl.cluster_of(i).is_empty() {
                continue;
            }
            let gv = g.v_mut(i);
            for k in 0..d.users {
                let z = adj.mbs_at_user[k][i];
                if z != ZERO {
                    axpy(z, &ch.h_user_mbs[k], gv);
                }
            }
            for n in 0..d.sbs {
                let z = adj.mbs_at_sbs[n][i];
                if z != ZERO {
                    axpy(z, &ch.h_sbs_mbs[n], gv);
                }
            }
        }
        g
    }
}

/// Statistical part of the access interference when the non-serving links
/// are known only through their large-scale gains:
/// `sum_{i != k} sum_{j unknown for k} beta_{k,j} ||w_{i,j}||^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct JensenCorrection {
    /// `beta[k][j]` for links unknown to user k, zero otherwise.
    pub unknown_beta: Vec<Vec<f64>>,
}

impl JensenCorrection {
    pub fn from_partial(csi: &PartialCsi) -> Self {
        let beta = &csi.channels.large_scale.beta_user_sbs;
        let unknown_beta = csi
            .known
            .iter()
            .enumerate()
            .map(|(k, row)| {
                row.iter().enumerate().map(|(j, &kn)| if kn { 0.0 } else { beta[k][j] }).collect()
            })
            .collect();
        Self { unknown_beta }
    }

    pub fn extra(&self, k: usize, prod: &Products) -> f64 {
        let users = prod.mbs_at_user.len();
        (0..users)
            .filter(|&i| i != k)
            .map(|i| {
                self.unknown_beta[k]
                    .iter()
                    .enumerate()
                    .map(|(j, &b)| b * prod.power[j][i])
                    .sum::<f64>()
            })
            .sum()
    }

    fn add_adjoint(&self, k: usize, weight: f64, adj: &mut Adjoint) {
        let users = adj.mbs_at_user.len();
        for i in (0..users).filter(|&i| i != k) {
            for (j, &b) in self.unknown_beta[k].iter().enumerate() {
                adj.power[j][i] += weight * b;
            }
        }
    }
}

/// How the access rate is formed from the channel knowledge.
#[derive(Debug, Clone, PartialEq)]
pub enum AccessModel {
    /// Instantaneous access channels of the problem.
    Exact,
    /// Known links instantaneous, unknown links replaced by their average
    /// interference power (deterministic lower bound on the mean rate).
    Jensen(JensenCorrection),
    /// Access rate averaged over fixed draws of the access channels.
    Sampled(Vec<AccessChannels>),
}

/// A beamforming instance: channels, clustering, SIC order, weights, budgets.
#[derive(Debug, Clone)]
pub struct Problem {
    pub channels: ChannelSet,
    pub clustering: Clustering,
    pub order: DecodingOrder,
    pub weights: Vec<f64>,
    pub budget: PowerBudget,
    pub access: AccessModel,
    sic: Vec<Vec<Option<Vec<usize>>>>,
}

impl Problem {
    pub fn new(
        channels: ChannelSet,
        clustering: Clustering,
        order: DecodingOrder,
        weights: Vec<f64>,
        budget: PowerBudget,
        access: AccessModel,
    ) -> Result<Self> {
        channels.check_dims()?;
        let d = channels.dims;
        if clustering.users() != d.users || clustering.sbs() != d.sbs {
            return Err(Error::Config("clustering does not match channel dimensions".into()));
        }
        if weights.len() != d.users || order.h_aggregate.len() != d.users {
            return Err(Error::Config("weights/order length must equal the user count".into()));
        }
        if budget.sbs.len() != d.sbs {
            return Err(Error::Config("one SBS budget per SBS is required".into()));
        }
        if let AccessModel::Sampled(s) = &access {
            if s.is_empty() {
                return Err(Error::Config("sampled access model needs at least one draw".into()));
            }
        }
        let sic = (0..d.users)
            .map(|k| (0..d.sbs).map(|n| order.sic_set(k, n, &clustering).ok()).collect())
            .collect();
        Ok(Self { channels, clustering, order, weights, budget, access, sic })
    }

    /// Full-CSI instance with the order derived from the channels.
    pub fn full_csi(
        channels: ChannelSet,
        clustering: Clustering,
        weights: Vec<f64>,
        budget: PowerBudget,
    ) -> Result<Self> {
        let order = DecodingOrder::from_channels(&channels);
        Self::new(channels, clustering, order, weights, budget, AccessModel::Exact)
    }

    pub fn dims(&self) -> Dims {
        self.channels.dims
    }

    /// Same instance under a different clustering (SIC order kept).
    pub fn with_clustering(&self, clustering: Clustering) -> Result<Self> {
        Self::new(
            self.channels.clone(),
            clustering,
            self.order.clone(),
            self.weights.clone(),
            self.budget.clone(),
            self.access.clone(),
        )
    }

    pub fn with_access(&self, access: AccessModel) -> Result<Self> {
        Self::new(
            self.channels.clone(),
            self.clustering.clone(),
            self.order.clone(),
            self.weights.clone(),
            self.budget.clone(),
            access,
        )
    }

    pub fn sic_set(&self, k: usize, n: usize) -> &[usize] {
        self.sic[k][n].as_deref().unwrap_or(&[])
    }

    pub fn scenarios(&self) -> Vec<&AccessChannels> {
        match &self.access {
            AccessModel::Sampled(s) => s.iter().collect(),
            _ => vec![&self.channels.h_user_sbs],
        }
    }

    pub fn products(&self, x: &BeamformerSet) -> Products {
        Products::compute(x, &self.channels, &self.clustering, &self.scenarios())
    }

    /// Access interference of user k in scenario `s`, including the
    /// statistical term under the Jensen model.
    pub fn access_interference(&self, k: usize, s: usize, prod: &Products) -> f64 {
        let users = self.dims().users;
        let mut phi: f64 = (0..users).map(|i| prod.mbs_at_user[k][i].norm_sqr()).sum();
        phi += (0..users).filter(|&i| i != k).map(|i| prod.access[s][k][i].norm_sqr()).sum::<f64>();
        if let AccessModel::Jensen(j) = &self.access {
            phi += j.extra(k, prod);
        }
        phi
    }

    pub fn add_access_interference_adjoint(
        &self,
        k: usize,
        s: usize,
        weight: f64,
        prod: &Products,
        adj: &mut Adjoint,
    ) {
        let users = self.dims().users;
        for i in 0..users {
            adj.mbs_at_user[k][i] += prod.mbs_at_user[k][i] * (2.0 * weight);
            if i != k {
                adj.access[s][k][i] += prod.access[s][k][i] * (2.0 * weight);
            }
        }
        if let AccessModel::Jensen(j) = &self.access {
            j.add_adjoint(k, weight, adj);
        }
    }

    /// Backhaul interference Delta_{k,n}: undecoded MBS streams, cross-link
    /// interference from SBSs carrying messages SBS n does not know, and
    /// residual self-interference.
    pub fn backhaul_interference(&self, k: usize, n: usize, prod: &Products) -> f64 {
        let mut delta: f64 = self.sic_set(k, n).iter().map(|&i| prod.mbs_at_sbs[n][i].norm_sqr()).sum();
        for i in 0..self.dims().users {
            if self.clustering.serves(i, n) {
                delta += self.channels.si_gain * prod.power[n][i];
            } else {
                delta += prod.sbs_at_sbs[n][i].norm_sqr();
            }
        }
        delta
    }

    pub fn add_backhaul_interference_adjoint(
        &self,
        k: usize,
        n: usize,
        weight: f64,
        prod: &Products,
        adj: &mut Adjoint,
    ) {
        for &i in self.sic_set(k, n) {
            adj.mbs_at_sbs[n][i] += prod.mbs_at_sbs[n][i] * (2.0 * weight);
        }
        for i in 0..self.dims().users {
            if self.clustering.serves(i, n) {
                adj.power[n][i] += weight * self.channels.si_gain;
            } else {
                adj.sbs_at_sbs[n][i] += prod.sbs_at_sbs[n][i] * (2.0 * weight);
            }
        }
    }

    /// Rates of the model: the access rate is exact, Jensen-bounded or
    /// sample-averaged according to [`AccessModel`].
    pub fn rate_report(&self, x: &BeamformerSet) -> RateReport {
        let prod = self.products(x);
        let d = self.dims();
        let scen = prod.access.len();
        let mut access = vec![0.0; d.users];
        let mut backhaul_per_sbs = vec![Vec::new(); d.users];
        for k in 0..d.users {
            let cluster = self.clustering.cluster_of(k);
            if cluster.is_empty() {
                continue;
            }
            access[k] = (0..scen)
                .map(|s| {
                    let phi = self.access_interference(k, s, &prod);
                    exact_rate(prod.access[s][k][k], phi, self.channels.noise_user[k])
                })
                .sum::<f64>()
                / scen as f64;
            backhaul_per_sbs[k] = cluster
                .iter()
                .map(|&n| {
                    let delta = self.backhaul_interference(k, n, &prod);
                    (n, exact_rate(prod.mbs_at_sbs[n][k], delta, self.channels.noise_sbs[n]))
                })
                .collect();
        }
        RateReport::assemble(access, backhaul_per_sbs, &self.weights)
    }

    /// Weighted end-to-end sum rate of the model.
    pub fn objective(&self, x: &BeamformerSet) -> f64 {
        self.rate_report(x).weighted_sum
    }
}

/// `log2(1 + |z|^2 / (I + noise))`
#[inline]
pub fn exact_rate(signal: C64, interference: f64, noise: f64) -> f64 {
    (signal.norm_sqr() / (interference + noise)).ln_1p() / LN_2
}

/// A concave function of one (signal, interference) pair: the exact rate or
/// one of its lower bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkBound {
    Exact,
    /// `log2(psi)` with `psi = 1 + 2 Re{conj(u) z} - |u|^2 (I + noise)`,
    /// continued along its tangent below `psi = 1/2`. The continuation is
    /// negative there, so it still lies below the rate, and it keeps the
    /// bound finite and concave everywhere.
    Sinrc { u: C64 },
    /// `(ln rho - rho e + 1) / ln 2` with MSE
    /// `e = |alpha|^2 (|z|^2 + I + noise) - 2 Re{conj(alpha) z} + 1`.
    Wmmse { alpha: C64, rho: f64 },
}

/// Value and partials of a [`LinkBound`]: `dz = 2 dG/d(conj z)`, `di = dG/dI`.
#[derive(Debug, Clone, Copy)]
pub struct LinkEval {
    pub value: f64,
    pub dz: C64,
    pub di: f64,
}

impl LinkBound {
    pub fn value(&self, z: C64, interference: f64, noise: f64) -> f64 {
        match *self {
            LinkBound::Exact => exact_rate(z, interference, noise),
            LinkBound::Sinrc { u } => {
                log2_continued(sinrc_argument(u, z, interference, noise)).0
            }
            LinkBound::Wmmse { alpha, rho } => {
                let e = mse(alpha, z, interference, noise);
                (rho.ln() - rho * e + 1.0) / LN_2
            }
        }
    }

    pub fn eval(&self, z: C64, interference: f64, noise: f64) -> LinkEval {
        match *self {
            LinkBound::Exact => {
                let d = interference + noise;
                let t = d + z.norm_sqr();
                LinkEval {
                    value: exact_rate(z, interference, noise),
                    dz: z * (2.0 / (t * LN_2)),
                    di: -z.norm_sqr() / (d * t * LN_2),
                }
            }
            LinkBound::Sinrc { u } => {
                let (value, slope) = log2_continued(sinrc_argument(u, z, interference, noise));
                LinkEval { value, dz: u * (2.0 * slope), di: -u.norm_sqr() * slope }
            }
            LinkBound::Wmmse { alpha, rho } => {
                let e = mse(alpha, z, interference, noise);
                let de_dzc = z * alpha.norm_sqr() - alpha;
                LinkEval {
                    value: (rho.ln() - rho * e + 1.0) / LN_2,
                    dz: de_dzc * (-2.0 * rho / LN_2),
                    di: -rho * alpha.norm_sqr() / LN_2,
                }
            }
        }
    }
}

const PSI_KNEE: f64 = 0.5;

/// `log2(psi)` and its derivative, linear below [`PSI_KNEE`].
#[inline]
fn log2_continued(psi: f64) -> (f64, f64) {
    if psi >= PSI_KNEE {
        (psi.ln() / LN_2, 1.0 / (psi * LN_2))
    } else {
        ((PSI_KNEE.ln() + (psi - PSI_KNEE) / PSI_KNEE) / LN_2, 1.0 / (PSI_KNEE * LN_2))
    }
}

#[inline]
fn sinrc_argument(u: C64, z: C64, interference: f64, noise: f64) -> f64 {
    1.0 + 2.0 * (u.conj() * z).re - u.norm_sqr() * (interference + noise)
}

#[inline]
fn mse(alpha: C64, z: C64, interference: f64, noise: f64) -> f64 {
    alpha.norm_sqr() * (z.norm_sqr() + interference + noise) - 2.0 * (alpha.conj() * z).re + 1.0
}

/// Rates in bits/s/Hz.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub access: Vec<f64>,
    /// `(n, R^B_{k,n})` for every n in N_k.
    pub backhaul_per_sbs: Vec<Vec<(usize, f64)>>,
    /// Worst serving SBS; 0 for users with an empty cluster.
    pub backhaul: Vec<f64>,
    pub end_to_end: Vec<f64>,
    pub weights: Vec<f64>,
    pub weighted_sum: f64,
}

impl RateReport {
    fn assemble(access: Vec<f64>, backhaul_per_sbs: Vec<Vec<(usize, f64)>>, weights: &[f64]) -> Self {
        let backhaul: Vec<f64> = backhaul_per_sbs
            .iter()
            .map(|r| {
                if r.is_empty() {
                    0.0
                } else {
                    r.iter().map(|&(_, v)| v).fold(f64::INFINITY, f64::min)
                }
            })
            .collect();
        let end_to_end: Vec<f64> = access.iter().zip(&backhaul).map(|(a, b)| a.min(*b)).collect();
        let weighted_sum = weights
            .iter()
            .zip(&end_to_end)
            .filter(|(w, _)| **w != 0.0)
            .map(|(w, r)| w * r)
            .sum();
        Self { access, backhaul_per_sbs, backhaul, end_to_end, weights: weights.to_vec(), weighted_sum }
    }

    /// Sum rate in Mbit/s over the given bandwidth.
    pub fn weighted_sum_mbps(&self, bandwidth_hz: f64) -> f64 {
        self.weighted_sum * bandwidth_hz / 1e6
    }

    /// One CSV row per user: `trial,user,access,backhaul,end_to_end,weight`.
    pub fn write_csv<W: std::io::Write>(&self, trial: usize, out: &mut csv::Writer<W>) -> Result<()> {
        for k in 0..self.access.len() {
            out.write_record([
                trial.to_string(),
                k.to_string(),
                format!("{:.12e}", self.access[k]),
                format!("{:.12e}", self.backhaul[k]),
                format!("{:.12e}", self.end_to_end[k]),
                format!("{}", self.weights[k]),
            ])?;
        }
        Ok(())
    }

    pub const CSV_HEADER: [&'static str; 6] = ["trial", "user", "access", "backhaul", "end_to_end", "weight"];
}

// Single-quantity entry points. These re-derive the products on every call
// and are meant for inspection and tests; the solvers go through `Problem`.

/// Phi_k: cross-link power from the MBS plus co-link power from other users' SBS signals.
pub fn interference_access(k: usize, x: &BeamformerSet, ch: &ChannelSet, cl: &Clustering) -> f64 {
    let prod = Products::compute(x, ch, cl, &[&ch.h_user_sbs]);
    let users = ch.dims.users;
    (0..users).map(|i| prod.mbs_at_user[k][i].norm_sqr()).sum::<f64>()
        + (0..users).filter(|&i| i != k).map(|i| prod.access[0][k][i].norm_sqr()).sum::<f64>()
}

/// R^A_k; zero for a user without serving SBSs.
pub fn access_rate(k: usize, x: &BeamformerSet, ch: &ChannelSet, cl: &Clustering) -> f64 {
    if cl.cluster_of(k).is_empty() {
        return 0.0;
    }
    let signal: C64 = cl.cluster_of(k).iter().map(|&j| dot_h(&ch.h_user_sbs[k][j], x.w(k, j))).sum();
    exact_rate(signal, interference_access(k, x, ch, cl), ch.noise_user[k])
}

/// Delta_{k,n}; errors when SBS n does not serve user k.
pub fn interference_backhaul(
    k: usize,
    n: usize,
    x: &BeamformerSet,
    ch: &ChannelSet,
    cl: &Clustering,
    ord: &DecodingOrder,
) -> Result<f64> {
    let sic = ord.sic_set(k, n, cl)?;
    let prod = Products::compute(x, ch, cl, &[]);
    let mut delta: f64 = sic.iter().map(|&i| prod.mbs_at_sbs[n][i].norm_sqr()).sum();
    for i in 0..ch.dims.users {
        if cl.serves(i, n) {
            delta += ch.si_gain * prod.power[n][i];
        } else {
            delta += prod.sbs_at_sbs[n][i].norm_sqr();
        }
    }
    Ok(delta)
}

/// R^B_{k,n}
pub fn backhaul_rate_per_sbs(
    k: usize,
    n: usize,
    x: &BeamformerSet,
    ch: &ChannelSet,
    cl: &Clustering,
    ord: &DecodingOrder,
) -> Result<f64> {
    let delta = interference_backhaul(k, n, x, ch, cl, ord)?;
    Ok(exact_rate(dot_h(&ch.h_sbs_mbs[n], x.v(k)), delta, ch.noise_sbs[n]))
}

/// Access, backhaul and end-to-end rates of every user with the weighted sum.
pub fn end_to_end_rates(
    x: &BeamformerSet,
    ch: &ChannelSet,
    cl: &Clustering,
    ord: &DecodingOrder,
    weights: &[f64],
) -> Result<RateReport> {
    let users = ch.dims.users;
    let mut access = vec![0.0; users];
    let mut backhaul_per_sbs = vec![Vec::new(); users];
    for k in 0..users {
        access[k] = access_rate(k, x, ch, cl);
        backhaul_per_sbs[k] = cl
            .cluster_of(k)
            .iter()
            .map(|&n| backhaul_rate_per_sbs(k, n, x, ch, cl, ord).map(|r| (n, r)))
            .collect::<Result<Vec<_>>>()?;
    }
    Ok(RateReport::assemble(access, backhaul_per_sbs, weights))
}
