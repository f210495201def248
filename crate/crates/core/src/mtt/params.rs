use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the track-score recursion and the confirmation test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoringParams {
    /// Detection probability P_D.
    pub p_d: f64,
    /// False-positive density per unit measurement volume.
    pub beta_fp: f64,
    /// New-target density per unit measurement volume.
    pub beta_nt: f64,
    /// Measurement dimension.
    pub eta: u32,
    /// Type-I error rate of the sequential test.
    pub alpha_err: f64,
    /// Type-II error rate of the sequential test.
    pub beta_err: f64,
    /// Gate on the squared Mahalanobis distance.
    pub gate_chi2: f64,
}

impl Default for ScoringParams {
    fn default() -> Self {
        Self {
            p_d: 0.9,
            beta_fp: 1e-6,
            beta_nt: 1e-9,
            eta: 2,
            alpha_err: 1e-6,
            beta_err: 1e-2,
            // χ²₂ at 99%
            gate_chi2: 9.21,
        }
    }
}

impl ScoringParams {
    /// T₂ = log[(1 − β) / α].
    pub fn confirm_threshold(&self) -> f64 {
        ((1.0 - self.beta_err) / self.alpha_err).ln()
    }

    /// T₁ = log[β / (1 − α)].
    pub fn delete_threshold(&self) -> f64 {
        (self.beta_err / (1.0 - self.alpha_err)).ln()
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| x > 0.0 && x < 1.0;
        if !unit(self.p_d) {
            return Err(Error::InvalidParameter(format!("p_d must lie in (0, 1), got {}", self.p_d)));
        }
        if !(self.beta_fp > 0.0 && self.beta_nt > 0.0) {
            return Err(Error::InvalidParameter("beta_fp and beta_nt must be positive".into()));
        }
        if self.eta == 0 {
            return Err(Error::InvalidParameter("eta must be at least 1".into()));
        }
        if !unit(self.alpha_err) || !unit(self.beta_err) {
            return Err(Error::InvalidParameter("alpha_err and beta_err must lie in (0, 1)".into()));
        }
        if !(self.gate_chi2 > 0.0) {
            return Err(Error::InvalidParameter("gate_chi2 must be positive".into()));
        }
        Ok(())
    }
}
