//! SBS-user association and the SIC decoding order derived from it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary association `c[k][n]` with the derived sets N_k (SBSs serving
/// user k) and K_n (users served by SBS n), both kept in ascending order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<Vec<bool>>", into = "Vec<Vec<bool>>")]
pub struct Clustering {
    c: Vec<Vec<bool>>,
    sbs_of_user: Vec<Vec<usize>>,
    users_of_sbs: Vec<Vec<usize>>,
}

impl From<Vec<Vec<bool>>> for Clustering {
    fn from(c: Vec<Vec<bool>>) -> Self {
        Self::from_matrix(c)
    }
}

impl From<Clustering> for Vec<Vec<bool>> {
    fn from(cl: Clustering) -> Self {
        cl.c
    }
}

impl Clustering {
    pub fn from_matrix(c: Vec<Vec<bool>>) -> Self {
        let n_sbs = c.first().map_or(0, Vec::len);
        assert!(c.iter().all(|row| row.len() == n_sbs), "ragged clustering matrix");
        let sbs_of_user = c
            .iter()
            .map(|row| (0..n_sbs).filter(|&n| row[n]).collect())
            .collect();
        let users_of_sbs = (0..n_sbs)
            .map(|n| (0..c.len()).filter(|&k| c[k][n]).collect())
            .collect();
        Self { c, sbs_of_user, users_of_sbs }
    }

    /// Every SBS serves every user.
    pub fn full(users: usize, sbs: usize) -> Self {
        Self::from_matrix(vec![vec![true; sbs]; users])
    }

    pub fn users(&self) -> usize {
        self.c.len()
    }

    pub fn sbs(&self) -> usize {
        self.users_of_sbs.len()
    }

    #[inline]
    pub fn serves(&self, k: usize, n: usize) -> bool {
        self.c[k][n]
    }

    /// N_k
    #[inline]
    pub fn cluster_of(&self, k: usize) -> &[usize] {
        &self.sbs_of_user[k]
    }

    /// K_n
    #[inline]
    pub fn users_of(&self, n: usize) -> &[usize] {
        &self.users_of_sbs[n]
    }

    pub fn active_links(&self) -> usize {
        self.sbs_of_user.iter().map(Vec::len).sum()
    }

    pub fn any_active(&self) -> bool {
        self.active_links() > 0
    }

    pub fn matrix(&self) -> &[Vec<bool>] {
        &self.c
    }

    pub fn without_links(&self, links: &[(usize, usize)]) -> Self {
        let mut c = self.c.clone();
        for &(k, n) in links {
            c[k][n] = false;
        }
        Self::from_matrix(c)
    }

    /// Row-major `0`/`1` string, one row per user separated by `;`.
    pub fn bitmap(&self) -> String {
        self.c
            .iter()
            .map(|row| row.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>())
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Common SIC order at every SBS: users with larger aggregate access gain
/// `H_k = sum_n ||h_{k,n}||^2` are decoded first. On ties the lower user index
/// is treated as the weaker user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodingOrder {
    pub h_aggregate: Vec<f64>,
    /// Users sorted from first decoded to last decoded.
    pub order: Vec<usize>,
}

impl DecodingOrder {
    pub fn from_gains(h_aggregate: Vec<f64>) -> Self {
        let mut order: Vec<usize> = (0..h_aggregate.len()).collect();
        // descending H, ties: higher index first (lower index decodes later)
        order.sort_by(|&a, &b| {
            h_aggregate[b].total_cmp(&h_aggregate[a]).then(b.cmp(&a))
        });
        Self { h_aggregate, order }
    }

    pub fn from_channels(ch: &crate::topology::ChannelSet) -> Self {
        let gains = ch
            .h_user_sbs
            .iter()
            .map(|row| row.iter().map(|h| crate::linalg::norm_sqr(h)).sum())
            .collect();
        Self::from_gains(gains)
    }

    /// `true` when user `i` is decoded after user `k`.
    #[inline]
    pub fn is_weaker(&self, i: usize, k: usize) -> bool {
        let (hi, hk) = (self.h_aggregate[i], self.h_aggregate[k]);
        hi < hk || (hi == hk && i < k)
    }

    /// `I_{k,n} = { i : H_i < H_k or i not in K_n }`, with the tie rule above.
    pub fn sic_set(&self, k: usize, n: usize, cl: &Clustering) -> Result<Vec<usize>> {
        if !cl.serves(k, n) {
            return Err(Error::NotServed { user: k, sbs: n });
        }
        Ok((0..cl.users())
            .filter(|&i| i != k && (self.is_weaker(i, k) || !cl.serves(i, n)))
            .collect())
    }
}
