//! Deterministic lower bound of the mean access rate under partial CSI.
//!
//! With the non-serving access links of user k known only through their
//! large-scale gains, `E|h_k^H w_i|^2 = w_i^H A_k w_i` where the NL x NL
//! matrix `A_k` has blocks
//!
//! * `h_{k,i} h_{k,j}^H` when both SBS i and SBS j serve user k,
//! * `beta_{k,i} I` on the diagonal when SBS i does not serve user k,
//! * zero otherwise.
//!
//! Replacing the random interference by its mean inside the (convex in the
//! interference) rate gives a lower bound on the mean rate.

use nalgebra::{DMatrix, DVector};

use crate::beamformer::BeamformerSet;
use crate::clustering::Clustering;
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::rates::{exact_rate, AccessModel, JensenCorrection, Problem};
use crate::topology::PartialCsi;

/// The matrices `A_k` of every user.
#[derive(Debug, Clone)]
pub struct JensenMatrix {
    pub a: Vec<DMatrix<C64>>,
    pub sbs_antennas: usize,
}

impl JensenMatrix {
    /// Stacked access beamformer `[w_{i,1}; ...; w_{i,N}]`.
    pub fn stack(x: &BeamformerSet, i: usize) -> DVector<C64> {
        let d = x.dims();
        DVector::from_iterator(d.sbs * d.sbs_antennas, (0..d.sbs).flat_map(|n| x.w(i, n).iter().copied()))
    }

    /// `w_i^H A_k w_i`
    pub fn quad_form(&self, k: usize, w: &DVector<C64>) -> f64 {
        (w.adjoint() * &self.a[k] * w)[(0, 0)].re
    }

    /// Smallest eigenvalue of `A_k`.
    pub fn min_eigenvalue(&self, k: usize) -> f64 {
        // Embed the Hermitian matrix as a real symmetric one of twice the size.
        let a = &self.a[k];
        let m = a.nrows();
        let real = DMatrix::from_fn(2 * m, 2 * m, |r, c| {
            let z = a[(r % m, c % m)];
            match (r < m, c < m) {
                (true, true) | (false, false) => z.re,
                (true, false) => -z.im,
                (false, true) => z.im,
            }
        });
        real.symmetric_eigenvalues().min()
    }
}

/// Assembles `A_k` for every user. Errors when a serving link has no
/// instantaneous CSI or a matrix is not positive semidefinite.
pub fn jensen_matrix(csi: &PartialCsi, cl: &Clustering) -> Result<JensenMatrix> {
    let ch = &csi.channels;
    let d = ch.dims;
    let l = d.sbs_antennas;
    let mut a = Vec::with_capacity(d.users);
    for k in 0..d.users {
        for &n in cl.cluster_of(k) {
            if !csi.known[k][n] {
                return Err(Error::MissingCsi { user: k, sbs: n });
            }
        }
        let mut m = DMatrix::from_element(d.sbs * l, d.sbs * l, C64::new(0.0, 0.0));
        for i in 0..d.sbs {
            for j in 0..d.sbs {
                if cl.serves(k, i) && cl.serves(k, j) {
                    let (hi, hj) = (&ch.h_user_sbs[k][i], &ch.h_user_sbs[k][j]);
                    for r in 0..l {
                        for c in 0..l {
                            m[(i * l + r, j * l + c)] = hi[r] * hj[c].conj();
                        }
                    }
                } else if i == j && !cl.serves(k, i) {
                    let b = ch.large_scale.beta_user_sbs[k][i];
                    for r in 0..l {
                        m[(i * l + r, i * l + r)] = C64::new(b, 0.0);
                    }
                }
            }
        }
        a.push(m);
    }
    let jm = JensenMatrix { a, sbs_antennas: l };
    for k in 0..d.users {
        let scale = jm.a[k].iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let ev = jm.min_eigenvalue(k);
        if ev < -1e-10 * scale {
            return Err(Error::Numerical(format!("A_{k} is not positive semidefinite (eigenvalue {ev:e})")));
        }
    }
    Ok(jm)
}

/// Deterministic access-rate bound of user k:
/// `log2(1 + |s_k|^2 / (sum_i |h_{k,mbs}^H v_i|^2 + sum_{i != k} w_i^H A_k w_i + noise))`.
pub fn jensen_rate(k: usize, x: &BeamformerSet, jm: &JensenMatrix, problem: &Problem) -> f64 {
    let cl = &problem.clustering;
    if cl.cluster_of(k).is_empty() {
        return 0.0;
    }
    let ch = &problem.channels;
    let users = problem.dims().users;
    let signal: C64 = cl.cluster_of(k).iter().map(|&j| crate::linalg::dot_h(&ch.h_user_sbs[k][j], x.w(k, j))).sum();
    let mut phi: f64 = (0..users).map(|i| crate::linalg::dot_h(&ch.h_user_mbs[k], x.v(i)).norm_sqr()).sum();
    phi += (0..users).filter(|&i| i != k).map(|i| jm.quad_form(k, &JensenMatrix::stack(x, i))).sum::<f64>();
    exact_rate(signal, phi, ch.noise_user[k])
}

/// Problem whose access rate is the Jensen bound.
pub fn jensen_problem(base: &Problem, csi: &PartialCsi) -> Result<Problem> {
    Problem::new(
        csi.channels.clone(),
        base.clustering.clone(),
        base.order.clone(),
        base.weights.clone(),
        base.budget.clone(),
        AccessModel::Jensen(JensenCorrection::from_partial(csi)),
    )
}
