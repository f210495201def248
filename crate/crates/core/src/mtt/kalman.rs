//! Constant-velocity Kalman filter over `[x, y, vx, vy]` with position-only
//! measurements.

use nalgebra::{Matrix2x4, Matrix4, Matrix4x2, Vector4};
use serde::{Deserialize, Serialize};

use super::params::ScoringParams;
use super::tracker::TrackState;
use crate::error::{Error, Result};
use crate::scene::{Detection, Mat2, Vec2};

pub type Vec4 = Vector4<f64>;
pub type Mat4 = Matrix4<f64>;

fn observation() -> Matrix2x4<f64> {
    Matrix2x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0)
}

fn transition(dt: f64) -> Mat4 {
    let mut f = Mat4::identity();
    f[(0, 2)] = dt;
    f[(1, 3)] = dt;
    f
}

/// White-acceleration process noise with spectral density `q`.
fn process_noise(dt: f64, q: f64) -> Mat4 {
    let (a, b, c) = (dt.powi(3) / 3.0, dt.powi(2) / 2.0, dt);
    let mut m = Mat4::zeros();
    for axis in 0..2 {
        m[(axis, axis)] = a;
        m[(axis, axis + 2)] = b;
        m[(axis + 2, axis)] = b;
        m[(axis + 2, axis + 2)] = c;
    }
    m * q
}

fn symmetrize(m: &Mat4) -> Mat4 {
    (m + m.transpose()) * 0.5
}

/// Residual, innovation covariance and squared Mahalanobis distance of one
/// detection against one track.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Innovation {
    pub residual: Vec2,
    pub innov_cov: Mat2,
    pub mahalanobis_sq: f64,
    pub passes: bool,
}

pub(crate) fn predict_moments(mean: &Vec4, cov: &Mat4, dt: f64, q: f64) -> (Vec4, Mat4) {
    let f = transition(dt);
    let cov = symmetrize(&(f * cov * f.transpose() + process_noise(dt, q)));
    (f * mean, cov)
}

pub(crate) fn innovation(mean: &Vec4, cov: &Mat4, value: &Vec2, r: &Mat2, gate_chi2: f64) -> Result<Innovation> {
    let h = observation();
    let residual = value - h * mean;
    let s = h * cov * h.transpose() + r;
    let s = (s + s.transpose()) * 0.5;
    let chol = s.cholesky().ok_or(Error::SingularCovariance)?;
    let d2 = residual.dot(&chol.solve(&residual)).max(0.0);
    Ok(Innovation { residual, innov_cov: s, mahalanobis_sq: d2, passes: d2 <= gate_chi2 })
}

pub(crate) fn update_moments(mean: &Vec4, cov: &Mat4, innov: &Innovation, r: &Mat2) -> Result<(Vec4, Mat4)> {
    let h = observation();
    let chol = innov.innov_cov.cholesky().ok_or(Error::SingularCovariance)?;
    // K = P Hᵀ S⁻¹, computed as (S⁻¹ H P)ᵀ since S and P are symmetric.
    let gain: Matrix4x2<f64> = chol.solve(&(h * cov)).transpose();
    let mean = mean + gain * innov.residual;
    // Joseph form of (I − KH)P; equal in exact arithmetic, keeps P SPD.
    let i_kh = Mat4::identity() - gain * h;
    let cov = i_kh * cov * i_kh.transpose() + gain * r * gain.transpose();
    Ok((mean, symmetrize(&cov)))
}

/// Propagates a track through `dt` seconds of constant-velocity motion.
pub fn kf_predict(track: &TrackState, dt: f64, process_noise_intensity: f64) -> TrackState {
    let mut out = track.clone();
    out.predict(dt, process_noise_intensity);
    out
}

/// Gates `det` against `track`: d² = ỹᵀS⁻¹ỹ, passing when d² ≤ gate_chi2.
pub fn gate(track: &TrackState, det: &Detection, params: &ScoringParams) -> Result<Innovation> {
    innovation(&track.mean, &track.cov, &det.value, &det.noise_cov, params.gate_chi2)
}

/// Standard Kalman measurement update; records the innovation on the track.
pub fn kf_update(track: &TrackState, det: &Detection) -> Result<TrackState> {
    let innov = innovation(&track.mean, &track.cov, &det.value, &det.noise_cov, f64::INFINITY)?;
    let mut out = track.clone();
    out.apply_update(det, &innov)?;
    Ok(out)
}

/// Smallest eigenvalue of a symmetric matrix.
#[cfg(test)]
pub(crate) fn min_eigenvalue(m: &Mat4) -> f64 {
    m.symmetric_eigenvalues().min()
}
