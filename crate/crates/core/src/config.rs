//! Network configuration and its derived linear-scale quantities.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{db_to_linear, dbm_to_watts};

/// Scenario parameters for one network layout.
///
/// Field names are the on-disk JSON keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub region_side_m: f64,
    pub n_sbs: usize,
    pub n_users_scheduled: usize,
    pub mbs_antennas: usize,
    pub sbs_tx_antennas: usize,
    pub mbs_exclusion_m: f64,
    pub sbs_exclusion_m: f64,
    pub bandwidth_hz: f64,
    pub noise_psd_dbm_hz: f64,
    /// Self-interference suppression in dB; the residual gain is `10^(-x/10)`.
    pub si_cancellation_db: f64,
    pub mbs_power_dbm: f64,
    /// Peak power shared by every SBS.
    pub sbs_power_dbm: f64,
    pub antenna_gain_mbs_dbi: f64,
    pub antenna_gain_sbs_dbi: f64,
    pub shadow_std_macro_db: f64,
    pub shadow_std_small_db: f64,
    pub weights: Vec<f64>,
    pub seed: u64,
}

impl NetworkConfig {
    /// 1 km x 1 km, 8 SBSs on the outer cells of a 3x3 grid, 3 users.
    pub fn reference_scale() -> Self {
        Self {
            region_side_m: 1000.0,
            n_sbs: 8,
            n_users_scheduled: 3,
            mbs_antennas: 32,
            sbs_tx_antennas: 2,
            mbs_exclusion_m: 250.0,
            sbs_exclusion_m: 50.0,
            bandwidth_hz: 10e6,
            noise_psd_dbm_hz: -174.0,
            si_cancellation_db: 100.0,
            mbs_power_dbm: 40.0,
            sbs_power_dbm: 30.0,
            antenna_gain_mbs_dbi: 15.0,
            antenna_gain_sbs_dbi: 5.0,
            shadow_std_macro_db: 8.0,
            shadow_std_small_db: 10.0,
            weights: vec![1.0; 3],
            seed: 1,
        }
    }

    /// Reduced layout used for fast experiments: 4 SBSs, 2 users, 8 MBS antennas.
    pub fn desk_scale() -> Self {
        Self {
            region_side_m: 600.0,
            n_sbs: 4,
            n_users_scheduled: 2,
            mbs_antennas: 8,
            sbs_tx_antennas: 2,
            mbs_exclusion_m: 150.0,
            sbs_exclusion_m: 50.0,
            weights: vec![1.0; 2],
            ..Self::reference_scale()
        }
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_sbs", self.n_sbs),
            ("n_users_scheduled", self.n_users_scheduled),
            ("mbs_antennas", self.mbs_antennas),
            ("sbs_tx_antennas", self.sbs_tx_antennas),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if !(self.region_side_m > 0.0) {
            return Err(Error::Config("region_side_m must be positive".into()));
        }
        let half = self.region_side_m / 2.0;
        for (name, r) in [
            ("mbs_exclusion_m", self.mbs_exclusion_m),
            ("sbs_exclusion_m", self.sbs_exclusion_m),
        ] {
            if !(r >= 0.0 && r < half) {
                return Err(Error::Config(format!(
                    "{name} = {r} must lie in [0, region_side_m / 2)"
                )));
            }
        }
        if self.weights.len() != self.n_users_scheduled {
            return Err(Error::Config(format!(
                "weights has {} entries for {} users",
                self.weights.len(),
                self.n_users_scheduled
            )));
        }
        if self.weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Config("weights must be finite and nonnegative".into()));
        }
        if self.weights.iter().all(|w| *w == 0.0) {
            return Err(Error::Config("at least one weight must be positive".into()));
        }
        if !(self.bandwidth_hz > 0.0) {
            return Err(Error::Config("bandwidth_hz must be positive".into()));
        }
        Ok(())
    }

    /// Thermal noise power over the band, in watts.
    pub fn noise_watts(&self) -> f64 {
        dbm_to_watts(self.noise_psd_dbm_hz + 10.0 * self.bandwidth_hz.log10())
    }

    pub fn si_residual_gain(&self) -> f64 {
        db_to_linear(-self.si_cancellation_db)
    }

    pub fn mbs_power_watts(&self) -> f64 {
        dbm_to_watts(self.mbs_power_dbm)
    }

    pub fn sbs_power_watts(&self) -> f64 {
        dbm_to_watts(self.sbs_power_dbm)
    }

    pub fn dims(&self) -> crate::beamformer::Dims {
        crate::beamformer::Dims {
            users: self.n_users_scheduled,
            sbs: self.n_sbs,
            sbs_antennas: self.sbs_tx_antennas,
            mbs_antennas: self.mbs_antennas,
        }
    }

    pub fn power_budget(&self) -> crate::beamformer::PowerBudget {
        crate::beamformer::PowerBudget {
            mbs: self.mbs_power_watts(),
            sbs: vec![self.sbs_power_watts(); self.n_sbs],
        }
    }
}
