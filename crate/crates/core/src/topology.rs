//! Network geometry, large-scale fading and small-scale channel draws.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::beamformer::Dims;
use crate::clustering::{Clustering, DecodingOrder};
use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::linalg::{cn_vec, norm_sqr, C64};

/// Rejection-sampling cap per user.
pub const MAX_PLACEMENT_DRAWS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Positions in meters with the MBS at the origin, the region being
/// `[-side/2, side/2]^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub mbs_pos: Point,
    pub sbs_pos: Vec<Point>,
    pub user_pos: Vec<Point>,
}

/// SBS sites: centers of a g x g grid over the region, center cell skipped,
/// filled in row-major order. With 8 SBSs this is the outer ring of a 3x3 grid.
pub fn sbs_sites(region_side_m: f64, n_sbs: usize) -> Vec<Point> {
    let capacity = |g: usize| if g % 2 == 1 { g * g - 1 } else { g * g };
    let mut g = 1;
    while capacity(g) < n_sbs {
        g += 1;
    }
    let cell = region_side_m / g as f64;
    let half = region_side_m / 2.0;
    let mut sites = Vec::with_capacity(n_sbs);
    for row in 0..g {
        for col in 0..g {
            if g % 2 == 1 && row == g / 2 && col == g / 2 {
                continue;
            }
            if sites.len() == n_sbs {
                return sites;
            }
            sites.push(Point {
                x: -half + (col as f64 + 0.5) * cell,
                y: half - (row as f64 + 0.5) * cell,
            });
        }
    }
    sites
}

pub fn generate_topology<R: Rng + ?Sized>(cfg: &NetworkConfig, rng: &mut R) -> Result<Topology> {
    cfg.validate()?;
    let mbs_pos = Point { x: 0.0, y: 0.0 };
    let sbs_pos = sbs_sites(cfg.region_side_m, cfg.n_sbs);
    let half = cfg.region_side_m / 2.0;
    let mut user_pos = Vec::with_capacity(cfg.n_users_scheduled);
    for user in 0..cfg.n_users_scheduled {
        let mut placed = None;
        for _ in 0..MAX_PLACEMENT_DRAWS {
            let p = Point { x: rng.random_range(-half..half), y: rng.random_range(-half..half) };
            if admissible(p, mbs_pos, &sbs_pos, cfg) {
                placed = Some(p);
                break;
            }
        }
        user_pos.push(placed.ok_or(Error::Placement { user, attempts: MAX_PLACEMENT_DRAWS })?);
    }
    Ok(Topology { mbs_pos, sbs_pos, user_pos })
}

/// Both exclusion circles are respected.
pub fn admissible(p: Point, mbs: Point, sbs: &[Point], cfg: &NetworkConfig) -> bool {
    p.dist(mbs) >= cfg.mbs_exclusion_m && sbs.iter().all(|s| p.dist(*s) >= cfg.sbs_exclusion_m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkKind {
    MbsToUser,
    SbsToUser,
    MbsToSbs,
    SbsToSbs,
}

impl LinkKind {
    /// Path loss in dB with the distance in kilometers.
    pub fn path_loss_db(self, dist_m: f64) -> f64 {
        let d_km = dist_m / 1000.0;
        let (a, b) = match self {
            LinkKind::MbsToUser => (128.1, 37.6),
            LinkKind::SbsToUser => (140.7, 36.7),
            LinkKind::MbsToSbs => (103.4, 24.2),
            LinkKind::SbsToSbs => (103.8, 20.9),
        };
        a + b * d_km.log10()
    }

    fn from_mbs(self) -> bool {
        matches!(self, LinkKind::MbsToUser | LinkKind::MbsToSbs)
    }
}

/// Linear power gain `10^(-(PL + shadow - G_tx)/10)`.
pub fn large_scale_gain(kind: LinkKind, dist_m: f64, shadow_db: f64, tx_gain_dbi: f64) -> f64 {
    10f64.powf(-(kind.path_loss_db(dist_m) + shadow_db - tx_gain_dbi) / 10.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LargeScale {
    pub beta_user_mbs: Vec<f64>,
    /// `[k][n]`
    pub beta_user_sbs: Vec<Vec<f64>>,
    pub beta_sbs_mbs: Vec<f64>,
    /// `[n][j]`, receiver n, transmitter j; the diagonal is unused and set to 0.
    pub beta_sbs_sbs: Vec<Vec<f64>>,
}

impl LargeScale {
    pub fn validate(&self) -> Result<()> {
        let ok = |b: f64| b.is_finite() && b > 0.0;
        let all = self.beta_user_mbs.iter().all(|&b| ok(b))
            && self.beta_user_sbs.iter().flatten().all(|&b| ok(b))
            && self.beta_sbs_mbs.iter().all(|&b| ok(b))
            && self
                .beta_sbs_sbs
                .iter()
                .enumerate()
                .all(|(n, row)| row.iter().enumerate().all(|(j, &b)| j == n || ok(b)));
        if all {
            Ok(())
        } else {
            Err(Error::Config("large-scale gains must be positive and finite".into()))
        }
    }
}

pub fn compute_large_scale<R: Rng + ?Sized>(
    topo: &Topology,
    cfg: &NetworkConfig,
    rng: &mut R,
) -> Result<LargeScale> {
    let macro_shadow = Normal::new(0.0, cfg.shadow_std_macro_db)
        .map_err(|e| Error::Config(format!("macro shadowing: {e}")))?;
    let small_shadow = Normal::new(0.0, cfg.shadow_std_small_db)
        .map_err(|e| Error::Config(format!("small-cell shadowing: {e}")))?;
    let mut gain = |kind: LinkKind, d: f64| -> Result<f64> {
        if !(d > 0.0) {
            return Err(Error::Config(format!("non-positive link distance {d}")));
        }
        let (shadow, g_tx) = if kind.from_mbs() {
            (macro_shadow.sample(rng), cfg.antenna_gain_mbs_dbi)
        } else {
            (small_shadow.sample(rng), cfg.antenna_gain_sbs_dbi)
        };
        Ok(large_scale_gain(kind, d, shadow, g_tx))
    };

    let mut beta_user_mbs = Vec::with_capacity(topo.user_pos.len());
    let mut beta_user_sbs = Vec::with_capacity(topo.user_pos.len());
    for u in &topo.user_pos {
        beta_user_mbs.push(gain(LinkKind::MbsToUser, u.dist(topo.mbs_pos))?);
        let row = topo
            .sbs_pos
            .iter()
            .map(|s| gain(LinkKind::SbsToUser, u.dist(*s)))
            .collect::<Result<Vec<_>>>()?;
        beta_user_sbs.push(row);
    }
    let beta_sbs_mbs = topo
        .sbs_pos
        .iter()
        .map(|s| gain(LinkKind::MbsToSbs, s.dist(topo.mbs_pos)))
        .collect::<Result<Vec<_>>>()?;
    let mut beta_sbs_sbs = vec![vec![0.0; topo.sbs_pos.len()]; topo.sbs_pos.len()];
    for (n, rx) in topo.sbs_pos.iter().enumerate() {
        for (j, tx) in topo.sbs_pos.iter().enumerate() {
            if j != n {
                beta_sbs_sbs[n][j] = gain(LinkKind::SbsToSbs, rx.dist(*tx))?;
            }
        }
    }
    let ls = LargeScale { beta_user_mbs, beta_user_sbs, beta_sbs_mbs, beta_sbs_sbs };
    ls.validate()?;
    Ok(ls)
}

/// One realization of every channel in the network.
///
/// `h_sbs_sbs[n][n]` is kept as a zero vector so cross-SBS sums can run over
/// all transmitters; the self-interference path is the scalar `si_gain`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub dims: Dims,
    pub h_user_mbs: Vec<Vec<C64>>,
    pub h_user_sbs: AccessChannels,
    pub h_sbs_mbs: Vec<Vec<C64>>,
    pub h_sbs_sbs: Vec<Vec<Vec<C64>>>,
    pub large_scale: LargeScale,
    pub noise_user: Vec<f64>,
    pub noise_sbs: Vec<f64>,
    pub si_gain: f64,
}

impl ChannelSet {
    pub fn check_dims(&self) -> Result<()> {
        let d = self.dims;
        let vecs_ok = |rows: &Vec<Vec<Vec<C64>>>, outer: usize, inner: usize, len: usize| {
            rows.len() == outer && rows.iter().all(|r| r.len() == inner && r.iter().all(|h| h.len() == len))
        };
        let ok = self.h_user_mbs.len() == d.users
            && self.h_user_mbs.iter().all(|h| h.len() == d.mbs_antennas)
            && vecs_ok(&self.h_user_sbs, d.users, d.sbs, d.sbs_antennas)
            && self.h_sbs_mbs.len() == d.sbs
            && self.h_sbs_mbs.iter().all(|h| h.len() == d.mbs_antennas)
            && vecs_ok(&self.h_sbs_sbs, d.sbs, d.sbs, d.sbs_antennas)
            && self.noise_user.len() == d.users
            && self.noise_sbs.len() == d.sbs;
        if ok {
            Ok(())
        } else {
            Err(Error::Config("channel set dimensions do not match".into()))
        }
    }
}

/// Draws `h = sqrt(beta) g` with `g ~ CN(0, I)` for every link.
pub fn sample_channels<R: Rng + ?Sized>(
    ls: &LargeScale,
    cfg: &NetworkConfig,
    rng: &mut R,
) -> Result<ChannelSet> {
    ls.validate()?;
    let dims = cfg.dims();
    let (m, l) = (dims.mbs_antennas, dims.sbs_antennas);
    let mut h_user_mbs = Vec::with_capacity(dims.users);
    let mut h_user_sbs = Vec::with_capacity(dims.users);
    for k in 0..dims.users {
        h_user_mbs.push(cn_vec(rng, m, ls.beta_user_mbs[k].sqrt()));
        h_user_sbs.push(
            (0..dims.sbs).map(|n| cn_vec(rng, l, ls.beta_user_sbs[k][n].sqrt())).collect(),
        );
    }
    let h_sbs_mbs = (0..dims.sbs).map(|n| cn_vec(rng, m, ls.beta_sbs_mbs[n].sqrt())).collect();
    let h_sbs_sbs = (0..dims.sbs)
        .map(|n| {
            (0..dims.sbs)
                .map(|j| {
                    if j == n {
                        vec![C64::new(0.0, 0.0); l]
                    } else {
                        cn_vec(rng, l, ls.beta_sbs_sbs[n][j].sqrt())
                    }
                })
                .collect()
        })
        .collect();
    let noise = cfg.noise_watts();
    Ok(ChannelSet {
        dims,
        h_user_mbs,
        h_user_sbs,
        h_sbs_mbs,
        h_sbs_sbs,
        large_scale: ls.clone(),
        noise_user: vec![noise; dims.users],
        noise_sbs: vec![noise; dims.sbs],
        si_gain: cfg.si_residual_gain(),
    })
}

/// Topology, large-scale fading and one channel draw from a single RNG stream.
pub fn realize<R: Rng + ?Sized>(cfg: &NetworkConfig, rng: &mut R) -> Result<(Topology, ChannelSet)> {
    let topo = generate_topology(cfg, rng)?;
    let ls = compute_large_scale(&topo, cfg, rng)?;
    let ch = sample_channels(&ls, cfg, rng)?;
    Ok((topo, ch))
}

/// Access channels `[k][n]` of every user to every SBS.
pub type AccessChannels = Vec<Vec<Vec<C64>>>;

/// Channel knowledge with instantaneous CSI only on the links flagged in
/// `known`; the remaining SBS-user links are known through their large-scale
/// gains alone and stored as zeros in `channels`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialCsi {
    pub channels: ChannelSet,
    /// `known[k][n]`
    pub known: Vec<Vec<bool>>,
}

impl PartialCsi {
    /// Keeps instantaneous CSI on the serving links of `cl`.
    pub fn from_clustering(full: &ChannelSet, cl: &Clustering) -> Self {
        Self::with_mask(full, cl.matrix().to_vec())
    }

    pub fn with_mask(full: &ChannelSet, known: Vec<Vec<bool>>) -> Self {
        let mut channels = full.clone();
        for (k, row) in known.iter().enumerate() {
            for (n, &kn) in row.iter().enumerate() {
                if !kn {
                    channels.h_user_sbs[k][n].fill(C64::new(0.0, 0.0));
                }
            }
        }
        Self { channels, known }
    }

    pub fn unknown_links(&self) -> usize {
        self.known.iter().flatten().filter(|&&b| !b).count()
    }

    /// One draw of the unknown links; known links are copied through.
    pub fn sample_access<R: Rng + ?Sized>(&self, rng: &mut R) -> AccessChannels {
        let l = self.channels.dims.sbs_antennas;
        let beta = &self.channels.large_scale.beta_user_sbs;
        self.channels
            .h_user_sbs
            .iter()
            .enumerate()
            .map(|(k, row)| {
                row.iter()
                    .enumerate()
                    .map(|(n, h)| {
                        if self.known[k][n] {
                            h.clone()
                        } else {
                            cn_vec(rng, l, beta[k][n].sqrt())
                        }
                    })
                    .collect()
            })
            .collect()
    }

    pub fn complete<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelSet {
        let mut ch = self.channels.clone();
        ch.h_user_sbs = self.sample_access(rng);
        ch
    }

    /// Decoding order from expected aggregate gains: instantaneous on known
    /// links, `L * beta` on the others.
    pub fn decoding_order(&self) -> DecodingOrder {
        let l = self.channels.dims.sbs_antennas as f64;
        let beta = &self.channels.large_scale.beta_user_sbs;
        let gains = (0..self.channels.dims.users)
            .map(|k| {
                (0..self.channels.dims.sbs)
                    .map(|n| {
                        if self.known[k][n] {
                            norm_sqr(&self.channels.h_user_sbs[k][n])
                        } else {
                            l * beta[k][n]
                        }
                    })
                    .sum()
            })
            .collect();
        DecodingOrder::from_gains(gains)
    }
}
