//! Track-score recursion: initialization, hit and miss increments, the
//! score/probability transform and the sequential-test status.

use nalgebra::Matrix2;

use super::params::ScoringParams;
use super::tracker::TrackStatus;
use crate::error::{Error, Result};

/// L₀ = log[P_D · β_NT / β_FP].
pub fn init_score(params: &ScoringParams) -> f64 {
    (params.p_d * params.beta_nt / params.beta_fp).ln()
}

/// Adds the miss increment log(1 − P_D).
pub fn score_update_miss(score: f64, params: &ScoringParams) -> Result<f64> {
    if params.p_d >= 1.0 {
        return Err(Error::DegenerateDetectionProbability(params.p_d));
    }
    Ok(score + (-params.p_d).ln_1p())
}

/// Adds the hit increment log[P_D / ((2π)^{η/2} β_FP √|S|)] − d²/2.
pub fn score_update_hit(score: f64, d2: f64, innov_cov: &Matrix2<f64>, params: &ScoringParams) -> Result<f64> {
    if innov_cov.cholesky().is_none() {
        return Err(Error::SingularCovariance);
    }
    let det = innov_cov.determinant();
    let eta = f64::from(params.eta);
    let gain = params.p_d.ln()
        - 0.5 * eta * std::f64::consts::TAU.ln()
        - params.beta_fp.ln()
        - 0.5 * det.ln();
    Ok(score + gain - 0.5 * d2)
}

/// P_T = e^L / (1 + e^L), evaluated without overflow.
pub fn score_to_prob(score: f64) -> f64 {
    if score >= 0.0 {
        1.0 / (1.0 + (-score).exp())
    } else {
        let e = score.exp();
        e / (1.0 + e)
    }
}

/// Inverse of [`score_to_prob`].
pub fn prob_to_score(prob: f64) -> f64 {
    prob.ln() - (-prob).ln_1p()
}

/// Confirmed at or above T₂, Deleted at or below T₁, Tentative between.
pub fn track_status(score: f64, params: &ScoringParams) -> TrackStatus {
    if score >= params.confirm_threshold() {
        TrackStatus::Confirmed
    } else if score <= params.delete_threshold() {
        TrackStatus::Deleted
    } else {
        TrackStatus::Tentative
    }
}
