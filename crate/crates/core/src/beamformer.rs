//! Beamformer storage, power budgets and the projection onto the feasible set.

use rand::Rng;

use crate::clustering::Clustering;
use crate::linalg::{cn_unit, norm_sqr, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Dims {
    /// K
    pub users: usize,
    /// N
    pub sbs: usize,
    /// L
    pub sbs_antennas: usize,
    /// M
    pub mbs_antennas: usize,
}

impl Dims {
    pub fn access_len(&self) -> usize {
        self.users * self.sbs * self.sbs_antennas
    }

    pub fn total_len(&self) -> usize {
        self.access_len() + self.users * self.mbs_antennas
    }
}

/// Per-BS peak powers in watts.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerBudget {
    pub mbs: f64,
    pub sbs: Vec<f64>,
}

/// Access beamformers `w[k][n]` (length L) followed by backhaul multicast
/// beamformers `v[k]` (length M), stored contiguously so the solver can treat
/// the whole set as one real vector.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerSet {
    dims: Dims,
    data: Vec<C64>,
}

impl BeamformerSet {
    pub fn zeros(dims: Dims) -> Self {
        Self { dims, data: vec![C64::new(0.0, 0.0); dims.total_len()] }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    #[inline]
    fn w_range(&self, k: usize, n: usize) -> std::ops::Range<usize> {
        let l = self.dims.sbs_antennas;
        let start = (k * self.dims.sbs + n) * l;
        start..start + l
    }

    #[inline]
    fn v_range(&self, k: usize) -> std::ops::Range<usize> {
        let m = self.dims.mbs_antennas;
        let start = self.dims.access_len() + k * m;
        start..start + m
    }

    #[inline]
    pub fn w(&self, k: usize, n: usize) -> &[C64] {
        &self.data[self.w_range(k, n)]
    }

    #[inline]
    pub fn w_mut(&mut self, k: usize, n: usize) -> &mut [C64] {
        let r = self.w_range(k, n);
        &mut self.data[r]
    }

    #[inline]
    pub fn v(&self, k: usize) -> &[C64] {
        &self.data[self.v_range(k)]
    }

    #[inline]
    pub fn v_mut(&mut self, k: usize) -> &mut [C64] {
        let r = self.v_range(k);
        &mut self.data[r]
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.data)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `self += alpha * other`
    pub fn add_scaled(&mut self, alpha: f64, other: &Self) {
        debug_assert_eq!(self.dims, other.dims);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * alpha;
        }
    }

    pub fn dist_sqr(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm_sqr()).sum()
    }

    /// Real inner product `Re<self, other>` treating the set as a vector in R^{2D}.
    pub fn real_dot(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a.re * b.re + a.im * b.im).sum()
    }

    pub fn sbs_power(&self, n: usize) -> f64 {
        (0..self.dims.users).map(|k| norm_sqr(self.w(k, n))).sum()
    }

    pub fn mbs_power(&self) -> f64 {
        (0..self.dims.users).map(|k| norm_sqr(self.v(k))).sum()
    }

    /// Zeroes every block that the clustering forbids.
    pub fn apply_zero_pattern(&mut self, cl: &Clustering) {
        for k in 0..self.dims.users {
            for n in 0..self.dims.sbs {
                if !cl.serves(k, n) {
                    self.w_mut(k, n).fill(C64::new(0.0, 0.0));
                }
            }
            if cl.cluster_of(k).is_empty() {
                self.v_mut(k).fill(C64::new(0.0, 0.0));
            }
        }
    }

    /// Checks the zero pattern exactly and the power budgets with a relative slack.
    pub fn is_feasible(&self, cl: &Clustering, budget: &PowerBudget, rel_slack: f64) -> bool {
        for k in 0..self.dims.users {
            for n in 0..self.dims.sbs {
                if !cl.serves(k, n) && self.w(k, n).iter().any(|z| *z != C64::new(0.0, 0.0)) {
                    return false;
                }
            }
            if cl.cluster_of(k).is_empty() && self.v(k).iter().any(|z| *z != C64::new(0.0, 0.0)) {
                return false;
            }
        }
        if self.mbs_power() > budget.mbs * (1.0 + rel_slack) {
            return false;
        }
        (0..self.dims.sbs).all(|n| self.sbs_power(n) <= budget.sbs[n] * (1.0 + rel_slack))
    }

    /// Random start: complex Gaussian entries on the allowed blocks, each BS then
    /// rescaled to `fraction` of its budget.
    pub fn random_interior<R: Rng + ?Sized>(
        dims: Dims,
        cl: &Clustering,
        budget: &PowerBudget,
        fraction: f64,
        rng: &mut R,
    ) -> Self {
        let mut x = Self::zeros(dims);
        for z in x.data.iter_mut() {
            *z = cn_unit(rng);
        }
        x.apply_zero_pattern(cl);
        for n in 0..dims.sbs {
            let p = x.sbs_power(n);
            if p > 0.0 {
                let s = (fraction * budget.sbs[n] / p).sqrt();
                for k in 0..dims.users {
                    x.w_mut(k, n).iter_mut().for_each(|z| *z *= s);
                }
            }
        }
        let p = x.mbs_power();
        if p > 0.0 {
            let s = (fraction * budget.mbs / p).sqrt();
            for k in 0..dims.users {
                x.v_mut(k).iter_mut().for_each(|z| *z *= s);
            }
        }
        x
    }
}

/// Euclidean projection onto the feasible set: the zero pattern is imposed
/// first, then each BS's beamformers are radially scaled into its power ball.
pub fn project_feasible(x: &BeamformerSet, cl: &Clustering, budget: &PowerBudget) -> BeamformerSet {
    let mut out = x.clone();
    project_in_place(&mut out, cl, budget);
    out
}

/// Budget test with a few ulps of slack: a block rescaled onto its sphere can
/// land a rounding error above it, and must not be rescaled again.
fn exceeds(power: f64, budget: f64) -> bool {
    power > budget * (1.0 + 4.0 * f64::EPSILON)
}

pub fn project_in_place(x: &mut BeamformerSet, cl: &Clustering, budget: &PowerBudget) {
    let dims = x.dims;
    x.apply_zero_pattern(cl);
    for n in 0..dims.sbs {
        let p = x.sbs_power(n);
        if exceeds(p, budget.sbs[n]) {
            let s = (budget.sbs[n] / p).sqrt();
            for k in 0..dims.users {
                x.w_mut(k, n).iter_mut().for_each(|z| *z *= s);
            }
        }
    }
    let p = x.mbs_power();
    if exceeds(p, budget.mbs) {
        let s = (budget.mbs / p).sqrt();
        for k in 0..dims.users {
            x.v_mut(k).iter_mut().for_each(|z| *z *= s);
        }
    }
}
