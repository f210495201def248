//! How fast can compromised agents force a false track to confirmation?
//!
//! Closed-form bounds on the per-detection and per-frame score change, the
//! chance that natural clutter lands in a gate, the minimum number of frames
//! to confirm a fabricated track against benign observers, and a seeded
//! Monte-Carlo run of the real tracker to check that minimum.

use std::ops::RangeInclusive;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mtt::{init_score, ScoringParams, Tracker, TrackerConfig};
use crate::scene::{generate_detections, AdversaryProfile, AgentCharacteristics, FalseTrack, Mat2, Scenario, Vec2};

/// K_a compromised and K_b benign agents all observing one volume element.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThreatConfig {
    pub k_a: u32,
    pub k_b: u32,
    /// |R|, determinant of the measurement covariance.
    pub det_r: f64,
    pub params: ScoringParams,
}

impl ThreatConfig {
    pub fn new(k_a: u32, k_b: u32) -> Self {
        Self { k_a, k_b, det_r: 5.0, params: ScoringParams::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_a + self.k_b == 0 {
            return Err(Error::InvalidParameter("k_a + k_b must be at least 1".into()));
        }
        if !(self.det_r > 0.0) {
            return Err(Error::InvalidParameter(format!("det_r must be positive, got {}", self.det_r)));
        }
        self.params.validate()
    }

    /// Best-case per-frame score change: K_a·ΔL_h^max + K_b·log(1 − P_D).
    pub fn denominator(&self) -> f64 {
        f64::from(self.k_a) * max_hit_gain(&self.params, self.det_r) + f64::from(self.k_b) * (-self.params.p_d).ln_1p()
    }
}

/// Gate volume, clutter-region volume and the Poisson mean Λ = V·β_FP.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateVolume {
    pub v_g: f64,
    pub v_c: f64,
    pub lambda_poisson: f64,
}

impl GateVolume {
    /// `lambda_poisson` is the expected clutter count in the gate.
    pub fn new(v_g: f64, v_c: f64, beta_fp: f64) -> Self {
        Self { v_g, v_c, lambda_poisson: v_g * beta_fp }
    }

    /// Volume of the ellipsoid {y : yᵀS⁻¹y ≤ γ} in η dimensions:
    /// c_η · γ^{η/2} · √|S|.
    pub fn ellipsoid_volume(det_s: f64, gate_chi2: f64, eta: u32) -> f64 {
        unit_ball_volume(eta) * gate_chi2.powf(f64::from(eta) / 2.0) * det_s.sqrt()
    }
}

/// Volume of the unit ball in `n` dimensions, via V_n = 2π/n · V_{n−2}.
pub fn unit_ball_volume(n: u32) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => std::f64::consts::TAU / f64::from(n) * unit_ball_volume(n - 2),
    }
}

/// Largest score increment any single detection can produce:
/// log[P_D / ((2π)^{η/2} β_FP √|R|)], reached at d² = 0 with S = R.
pub fn max_hit_gain(params: &ScoringParams, det_r: f64) -> f64 {
    let eta = f64::from(params.eta);
    params.p_d.ln() - 0.5 * eta * std::f64::consts::TAU.ln() - params.beta_fp.ln() - 0.5 * det_r.ln()
}

/// Upper bound on one frame's score change with `d_t` hits and `m_t` misses.
pub fn frame_delta_bound(d_t: u32, m_t: u32, params: &ScoringParams, det_r: f64) -> f64 {
    f64::from(d_t) * max_hit_gain(params, det_r) + f64::from(m_t) * (-params.p_d).ln_1p()
}

/// Probability that at least one natural false positive falls in a gate of
/// volume `v_g`.
pub fn fp_gate_probability(v_g: f64, beta_fp: f64) -> f64 {
    -(-v_g * beta_fp).exp_m1()
}

/// Continuous minimum frame count for K_a adversaries to confirm a false
/// track observed by K_b benign agents:
/// 1 + (T₂ − L₀) / (K_a·ΔL_h^max + K_b·log(1 − P_D)).
pub fn t_min(config: &ThreatConfig) -> Result<f64> {
    config.validate()?;
    let denominator = config.denominator();
    if denominator <= 0.0 {
        return Err(Error::AttackInfeasible { denominator });
    }
    Ok(1.0 + (config.params.confirm_threshold() - init_score(&config.params)) / denominator)
}

pub fn t_min_ceil(config: &ThreatConfig) -> Result<u64> {
    t_min(config).map(|t| t.ceil() as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceCell {
    pub k_a: u32,
    pub k_b: u32,
    /// `f64::INFINITY` where the attack is infeasible.
    pub t_min: f64,
}

impl SurfaceCell {
    pub fn t_min_ceil(&self) -> Option<u64> {
        self.t_min.is_finite().then(|| self.t_min.ceil() as u64)
    }
}

/// t_min over a (K_a, K_b) grid, row-major in K_a.
pub fn t_min_surface(k_a: RangeInclusive<u32>, k_b: RangeInclusive<u32>, base: &ThreatConfig) -> Result<Vec<SurfaceCell>> {
    let mut out = Vec::new();
    for a in k_a {
        for b in k_b.clone() {
            let cfg = ThreatConfig { k_a: a, k_b: b, ..*base };
            let t = match t_min(&cfg) {
                Ok(t) => t,
                Err(Error::AttackInfeasible { .. }) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            out.push(SurfaceCell { k_a: a, k_b: b, t_min: t });
        }
    }
    Ok(out)
}

/// Simulator settings for [`monte_carlo_confirm_time`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloOptions {
    /// Trials that have not confirmed by this frame count as unconfirmed.
    pub max_frames: u64,
    pub frame_rate: f64,
    /// Jitter fabricated detections with the measurement noise instead of
    /// placing them exactly on the false track.
    pub noisy_placement: bool,
    pub process_noise: f64,
    pub init_velocity_var: f64,
}

impl Default for MonteCarloOptions {
    fn default() -> Self {
        let t = TrackerConfig::default();
        Self {
            max_frames: 500,
            frame_rate: 10.0,
            noisy_placement: false,
            process_noise: t.process_noise,
            init_velocity_var: t.init_velocity_var,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloResult {
    /// First frame (1-based) at which a false track was confirmed, per trial.
    pub per_trial: Vec<Option<u64>>,
    /// Mean over confirmed trials.
    pub mean_frames: Option<f64>,
    pub min_frames: Option<u64>,
}

impl MonteCarloResult {
    pub fn unconfirmed(&self) -> usize {
        self.per_trial.iter().filter(|t| t.is_none()).count()
    }
}

/// World for one trial: a static false track at the origin reported by K_a
/// compromised agents and watched by K_b benign ones, all with R = √|R|·I.
/// Compromised agents take the lower ids.
pub fn threat_scenario(config: &ThreatConfig, options: &MonteCarloOptions) -> Scenario {
    let r = Mat2::identity() * config.det_r.sqrt();
    let center = Vec2::zeros();
    let agents = (0..config.k_a + config.k_b)
        .map(|i| {
            let agent = AgentCharacteristics::benign(i, center, 50.0, config.params.p_d, r);
            if i < config.k_a {
                agent.with_adversary(AdversaryProfile {
                    false_tracks: vec![FalseTrack { label: 0, spawn_position: center, velocity: Vec2::zeros() }],
                    noisy_placement: options.noisy_placement,
                    ..Default::default()
                })
            } else {
                agent
            }
        })
        .collect();
    Scenario {
        agents,
        objects: Vec::new(),
        frame_rate: options.frame_rate,
        n_frames: options.max_frames,
        rng_seed: 0,
        clutter: None,
    }
}

fn confirm_frame(config: &ThreatConfig, options: &MonteCarloOptions, seed: u64, trial: u64) -> Result<Option<u64>> {
    let scenario = threat_scenario(config, options);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    // The bound ignores deletion, and L₀ already sits below T₁.
    let mut tracker = Tracker::new(TrackerConfig {
        scoring: config.params,
        process_noise: options.process_noise,
        init_velocity_var: options.init_velocity_var,
        delete_tracks: false,
        ..TrackerConfig::default()
    })?;
    for frame in 0..options.max_frames {
        let dets = generate_detections(&scenario, frame, &mut rng);
        let report = tracker.step(&scenario.agents, &dets, scenario.dt())?;
        if !report.confirmed.is_empty() {
            return Ok(Some(report.frame));
        }
    }
    Ok(None)
}

/// Runs the tracker against an optimally placed false track and records when
/// it first confirms. Trials run in parallel, each on its own ChaCha stream
/// of `seed`, so results do not depend on thread scheduling.
pub fn monte_carlo_confirm_time(
    config: &ThreatConfig,
    n_trials: u64,
    seed: u64,
    options: &MonteCarloOptions,
) -> Result<MonteCarloResult> {
    t_min(config)?;
    let per_trial = (0..n_trials)
        .into_par_iter()
        .map(|trial| confirm_frame(config, options, seed, trial))
        .collect::<Result<Vec<_>>>()?;
    let confirmed: Vec<u64> = per_trial.iter().flatten().copied().collect();
    let mean_frames = (!confirmed.is_empty()).then(|| confirmed.iter().sum::<u64>() as f64 / confirmed.len() as f64);
    let min_frames = confirmed.iter().min().copied();
    Ok(MonteCarloResult { per_trial, mean_frames, min_frames })
}
