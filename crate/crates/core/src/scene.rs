//! Synthetic world: true objects, agents with circular fields of view, and
//! detection generation for benign and compromised agents.

use std::collections::{BTreeSet, HashSet};

use nalgebra::{Matrix2, Vector2};
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::AgentId;

pub type Vec2 = Vector2<f64>;
pub type Mat2 = Matrix2<f64>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectState {
    pub id: u32,
    pub position: Vec2,
    #[serde(default = "Vec2::zeros")]
    pub velocity: Vec2,
}

/// Circular field of view. Membership is closed: a point exactly on the
/// boundary is visible.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fov {
    pub center: Vec2,
    pub radius: f64,
}

impl Fov {
    pub fn contains(&self, point: &Vec2) -> bool {
        (point - self.center).norm() <= self.radius
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.radius
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec2,
    #[serde(default)]
    pub heading: f64,
}

/// A persistent fabricated trajectory reported by a compromised agent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FalseTrack {
    /// Ground-truth label used only for scoring the simulation.
    pub label: u32,
    pub spawn_position: Vec2,
    #[serde(default = "Vec2::zeros")]
    pub velocity: Vec2,
}

impl FalseTrack {
    pub fn position_at(&self, t: f64) -> Vec2 {
        self.spawn_position + self.velocity * t
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AdversaryProfile {
    #[serde(default)]
    pub false_tracks: Vec<FalseTrack>,
    /// Object ids this agent never reports.
    #[serde(default)]
    pub suppress_ids: BTreeSet<u32>,
    /// Add measurement noise to fabricated detections. Off by default, which
    /// places each fabricated detection exactly on its false trajectory.
    #[serde(default)]
    pub noisy_placement: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentCharacteristics {
    pub id: AgentId,
    pub pose: Pose,
    pub fov: Fov,
    pub detection_prob: f64,
    /// Measurement noise covariance R (m²).
    pub meas_noise_cov: Mat2,
    #[serde(default)]
    pub adversary: Option<AdversaryProfile>,
}

impl AgentCharacteristics {
    /// A benign agent whose pose sits at the FOV center.
    pub fn benign(id: u32, center: Vec2, radius: f64, detection_prob: f64, meas_noise_cov: Mat2) -> Self {
        Self {
            id: AgentId(id),
            pose: Pose { position: center, heading: 0.0 },
            fov: Fov { center, radius },
            detection_prob,
            meas_noise_cov,
            adversary: None,
        }
    }

    pub fn with_adversary(mut self, profile: AdversaryProfile) -> Self {
        self.adversary = Some(profile);
        self
    }

    pub fn is_compromised(&self) -> bool {
        self.adversary.is_some()
    }
}

/// Φ_k: whether the agent could observe an object at `point`.
pub fn fov_contains(agent: &AgentCharacteristics, point: &Vec2) -> bool {
    agent.fov.contains(point)
}

/// Simulation-only ground truth attached to each detection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TruthTag {
    TrueObject { id: u32 },
    AdversarialFp { label: u32 },
    NaturalFp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub agent_id: AgentId,
    pub value: Vec2,
    pub noise_cov: Mat2,
    pub frame: u64,
    pub truth: TruthTag,
}

/// Homogeneous Poisson clutter: each agent reports Poisson(β_FP · area)
/// false positives uniformly inside its FOV every frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClutterModel {
    pub beta_fp: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub agents: Vec<AgentCharacteristics>,
    #[serde(default)]
    pub objects: Vec<ObjectState>,
    pub frame_rate: f64,
    pub n_frames: u64,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default)]
    pub clutter: Option<ClutterModel>,
}

/// Constant-velocity propagation of every object by `dt` seconds.
pub fn step_objects(objects: &[ObjectState], dt: f64) -> Vec<ObjectState> {
    objects
        .iter()
        .map(|o| ObjectState {
            id: o.id,
            position: o.position + o.velocity * dt,
            velocity: o.velocity,
        })
        .collect()
}

impl Scenario {
    pub fn dt(&self) -> f64 {
        1.0 / self.frame_rate
    }

    pub fn objects_at(&self, frame: u64) -> Vec<ObjectState> {
        step_objects(&self.objects, frame as f64 * self.dt())
    }

    pub fn agent(&self, id: AgentId) -> Option<&AgentCharacteristics> {
        self.agents.iter().find(|a| a.id == id)
    }

    /// Agents in ascending id order.
    pub fn agents_sorted(&self) -> Vec<&AgentCharacteristics> {
        let mut agents: Vec<_> = self.agents.iter().collect();
        agents.sort_by_key(|a| a.id);
        agents
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if self.agents.is_empty() {
            return bad("at least one agent is required".into());
        }
        if self.n_frames == 0 {
            return bad("n_frames must be at least 1".into());
        }
        if !(self.frame_rate > 0.0 && self.frame_rate.is_finite()) {
            return bad(format!("frame_rate must be positive, got {}", self.frame_rate));
        }
        let mut agent_ids = HashSet::new();
        for agent in &self.agents {
            if !agent_ids.insert(agent.id) {
                return bad(format!("duplicate agent id {}", agent.id.0));
            }
            if !(agent.fov.radius > 0.0) {
                return bad(format!("agent {} has non-positive FOV radius", agent.id.0));
            }
            if !(agent.detection_prob > 0.0 && agent.detection_prob <= 1.0) {
                return bad(format!("agent {} detection_prob outside (0, 1]", agent.id.0));
            }
            if !is_spd(&agent.meas_noise_cov) {
                return bad(format!("agent {} measurement covariance is not SPD", agent.id.0));
            }
            if let Some(adv) = &agent.adversary {
                for ft in &adv.false_tracks {
                    if !agent.fov.contains(&ft.spawn_position) {
                        return bad(format!(
                            "false track {} spawns outside agent {}'s FOV",
                            ft.label, agent.id.0
                        ));
                    }
                }
            }
        }
        let mut object_ids = HashSet::new();
        for o in &self.objects {
            if !object_ids.insert(o.id) {
                return bad(format!("duplicate object id {}", o.id));
            }
        }
        if let Some(c) = &self.clutter {
            if !(c.beta_fp >= 0.0) {
                return bad("clutter beta_fp must be non-negative".into());
            }
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let scenario: Scenario = serde_json::from_str(s)?;
        scenario.validate()?;
        Ok(scenario)
    }
}

pub(crate) fn is_spd(m: &Mat2) -> bool {
    (m - m.transpose()).abs().max() <= 1e-12 * m.abs().max().max(1.0) && m.cholesky().is_some()
}

fn sample_gaussian<R: Rng + ?Sized>(cov: &Mat2, rng: &mut R) -> Vec2 {
    let l = cov.cholesky().map(|c| c.l()).unwrap_or_else(Mat2::zeros);
    let n = Vec2::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    l * n
}

fn sample_in_disk<R: Rng + ?Sized>(fov: &Fov, rng: &mut R) -> Vec2 {
    let r = fov.radius * rng.random::<f64>().sqrt();
    let theta = std::f64::consts::TAU * rng.random::<f64>();
    fov.center + Vec2::new(r * theta.cos(), r * theta.sin())
}

/// One frame of detections from every agent, grouped in ascending agent id.
///
/// Benign behavior: each in-FOV object is reported with probability P_D plus
/// Gaussian noise of covariance R. Compromised agents behave the same except
/// that suppressed ids are never reported, and every false track yields one
/// detection per frame at its current position.
pub fn generate_detections<R: Rng + ?Sized>(scenario: &Scenario, frame: u64, rng: &mut R) -> Vec<Detection> {
    let t = frame as f64 * scenario.dt();
    let mut objects = scenario.objects_at(frame);
    objects.sort_by_key(|o| o.id);

    let mut out = Vec::new();
    for agent in scenario.agents_sorted() {
        let suppressed = agent.adversary.as_ref().map(|a| &a.suppress_ids);
        for obj in &objects {
            if !agent.fov.contains(&obj.position) {
                continue;
            }
            // Always draw so suppression does not shift the RNG stream.
            let detected = rng.random::<f64>() < agent.detection_prob;
            let noise = sample_gaussian(&agent.meas_noise_cov, rng);
            if !detected || suppressed.is_some_and(|s| s.contains(&obj.id)) {
                continue;
            }
            out.push(Detection {
                agent_id: agent.id,
                value: obj.position + noise,
                noise_cov: agent.meas_noise_cov,
                frame,
                truth: TruthTag::TrueObject { id: obj.id },
            });
        }
        if let Some(adv) = &agent.adversary {
            for ft in &adv.false_tracks {
                let mut value = ft.position_at(t);
                if adv.noisy_placement {
                    value += sample_gaussian(&agent.meas_noise_cov, rng);
                }
                out.push(Detection {
                    agent_id: agent.id,
                    value,
                    noise_cov: agent.meas_noise_cov,
                    frame,
                    truth: TruthTag::AdversarialFp { label: ft.label },
                });
            }
        }
        if let Some(clutter) = &scenario.clutter {
            let rate = clutter.beta_fp * agent.fov.area();
            let count = if rate > 0.0 {
                Poisson::new(rate).map(|p| p.sample(rng) as u64).unwrap_or(0)
            } else {
                0
            };
            for _ in 0..count {
                out.push(Detection {
                    agent_id: agent.id,
                    value: sample_in_disk(&agent.fov, rng),
                    noise_cov: agent.meas_noise_cov,
                    frame,
                    truth: TruthTag::NaturalFp,
                });
            }
        }
    }
    out
}
