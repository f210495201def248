//! The two reference worlds: three static agents with overlapping circular
//! FOVs, a handful of true objects and persistent false tracks injected by
//! compromised agents.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::AgentId;
use crate::scene::{fov_contains, AdversaryProfile, AgentCharacteristics, FalseTrack, Mat2, ObjectState, Scenario, Vec2};
use crate::trust::{TrustConfig, TrustDistribution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseId {
    Case1,
    Case2,
    Custom,
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseId::Case1 => "case1",
            CaseId::Case2 => "case2",
            CaseId::Custom => "custom",
        })
    }
}

impl FromStr for CaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "1" | "case1" => Ok(CaseId::Case1),
            "2" | "case2" => Ok(CaseId::Case2),
            "custom" => Ok(CaseId::Custom),
            other => Err(Error::InvalidParameter(format!("unknown case {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorRegime {
    /// Every trust starts at Beta(φ = 0.5, λ = 1).
    #[default]
    Uninformative,
    /// Agent 1 starts at Beta(φ = 0.8, λ = 10); everything else uninformative.
    StrongAgent1,
}

impl fmt::Display for PriorRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PriorRegime::Uninformative => "none",
            PriorRegime::StrongAgent1 => "agent1",
        })
    }
}

impl FromStr for PriorRegime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "uninformative" => Ok(PriorRegime::Uninformative),
            "agent1" | "strong_agent1" | "strong-agent1" => Ok(PriorRegime::StrongAgent1),
            other => Err(Error::InvalidParameter(format!("unknown prior regime {other:?}"))),
        }
    }
}

impl PriorRegime {
    pub fn trust_config(self) -> TrustConfig {
        let mut cfg = TrustConfig::default();
        if self == PriorRegime::StrongAgent1 {
            let strong = TrustDistribution::new(0.8, 10.0).expect("valid constant prior");
            cfg.agent_prior_overrides.insert(AgentId(1), strong);
        }
        cfg
    }
}

/// Which agents must see each labeled entity and which agent fabricates
/// which false labels. Object ids and false-track labels share one label
/// space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseSpec {
    pub case_id: CaseId,
    pub prior_regime: PriorRegime,
    pub visibility: BTreeMap<u32, BTreeSet<AgentId>>,
    pub adversary_assignment: BTreeMap<AgentId, Vec<u32>>,
}

impl CaseSpec {
    pub fn false_labels(&self) -> BTreeSet<u32> {
        self.adversary_assignment.values().flatten().copied().collect()
    }

    /// Checks every labeled entity against the agents' FOVs at the first
    /// and last frame.
    pub fn check(&self, scenario: &Scenario) -> Result<()> {
        let last = scenario.n_frames.saturating_sub(1);
        for frame in [0, last] {
            for (label, position) in labeled_positions(scenario, frame) {
                let expected = self
                    .visibility
                    .get(&label)
                    .ok_or_else(|| Error::Geometry(format!("label {label} missing from the visibility matrix")))?;
                let seen: BTreeSet<AgentId> =
                    scenario.agents.iter().filter(|a| fov_contains(a, &position)).map(|a| a.id).collect();
                if &seen != expected {
                    return Err(Error::Geometry(format!(
                        "label {label} at frame {frame} is visible to {seen:?}, expected {expected:?}"
                    )));
                }
            }
        }
        for (agent, labels) in &self.adversary_assignment {
            let profile = scenario
                .agent(*agent)
                .and_then(|a| a.adversary.as_ref())
                .ok_or(Error::UnknownAgent(*agent))?;
            let actual: BTreeSet<u32> = profile.false_tracks.iter().map(|f| f.label).collect();
            if actual != labels.iter().copied().collect() {
                return Err(Error::Geometry(format!("agent {agent} fabricates {actual:?}, expected {labels:?}")));
            }
        }
        Ok(())
    }
}

/// Ground-truth positions of every labeled entity at `frame`: true objects
/// by id and fabricated tracks by label.
pub fn labeled_positions(scenario: &Scenario, frame: u64) -> Vec<(u32, Vec2)> {
    let t = frame as f64 * scenario.dt();
    let mut out: Vec<(u32, Vec2)> = scenario.objects_at(frame).into_iter().map(|o| (o.id, o.position)).collect();
    for agent in &scenario.agents {
        if let Some(adv) = &agent.adversary {
            out.extend(adv.false_tracks.iter().map(|f| (f.label, f.position_at(t))));
        }
    }
    out.sort_by_key(|&(l, _)| l);
    out.dedup_by_key(|&mut (l, _)| l);
    out
}

/// A built case: world, trust priors and the spec it was checked against.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseBuild {
    pub scenario: Scenario,
    pub trust: TrustConfig,
    pub spec: CaseSpec,
}

pub const DEFAULT_FRAMES: u64 = 50;
pub const DEFAULT_FRAME_RATE: f64 = 10.0;

/// Measurement covariance shared by every agent: √5·I, so |R| = 5.
pub fn default_meas_cov() -> Mat2 {
    Mat2::identity() * 5f64.sqrt()
}

fn agents() -> Vec<AgentCharacteristics> {
    let r = default_meas_cov();
    vec![
        AgentCharacteristics::benign(0, Vec2::new(-5.0, 0.0), 32.0, 0.9, r),
        AgentCharacteristics::benign(1, Vec2::new(5.0, 0.0), 32.0, 0.9, r),
        AgentCharacteristics::benign(2, Vec2::new(35.0, 0.0), 22.0, 0.9, r),
    ]
}

fn object(id: u32, x: f64, y: f64) -> ObjectState {
    ObjectState { id, position: Vec2::new(x, y), velocity: Vec2::zeros() }
}

fn fabricate(labels: &[(u32, f64, f64)]) -> AdversaryProfile {
    AdversaryProfile {
        false_tracks: labels
            .iter()
            .map(|&(label, x, y)| FalseTrack { label, spawn_position: Vec2::new(x, y), velocity: Vec2::zeros() })
            .collect(),
        ..Default::default()
    }
}

fn set(ids: &[u32]) -> BTreeSet<AgentId> {
    ids.iter().map(|&i| AgentId(i)).collect()
}

/// Builds a reference case and verifies its geometry.
///
/// Case 1: Agent 0 fabricates label 2 (seen by Agents 0 and 1 only), Agent 2
/// fabricates label 5 (seen by all); label 1 is a true object seen only by
/// Agent 2; labels 0, 3, 4 are true objects seen by Agents 0 and 1.
///
/// Case 2: Agent 2 fabricates labels 4 and 5 (seen by all); labels 0, 1, 2
/// are true objects seen by Agents 0 and 1; label 3 is a true object seen
/// only by Agent 0.
pub fn build_case(case_id: CaseId, prior_regime: PriorRegime, seed: u64) -> Result<CaseBuild> {
    let mut agents = agents();
    let (objects, visibility, adversary_assignment) = match case_id {
        CaseId::Case1 => {
            agents[0] = agents[0].clone().with_adversary(fabricate(&[(2, 0.0, -12.0)]));
            agents[2] = agents[2].clone().with_adversary(fabricate(&[(5, 20.0, 0.0)]));
            let objects = vec![object(0, -5.0, 10.0), object(1, 50.0, 0.0), object(3, -12.0, -2.0), object(4, 6.0, 3.0)];
            let visibility = BTreeMap::from([
                (0, set(&[0, 1])),
                (1, set(&[2])),
                (2, set(&[0, 1])),
                (3, set(&[0, 1])),
                (4, set(&[0, 1])),
                (5, set(&[0, 1, 2])),
            ]);
            (objects, visibility, BTreeMap::from([(AgentId(0), vec![2]), (AgentId(2), vec![5])]))
        }
        CaseId::Case2 => {
            agents[2] = agents[2].clone().with_adversary(fabricate(&[(4, 20.0, 5.0), (5, 20.0, -5.0)]));
            let objects = vec![object(0, -5.0, 10.0), object(1, 0.0, -12.0), object(2, 6.0, 3.0), object(3, -32.0, 0.0)];
            let visibility = BTreeMap::from([
                (0, set(&[0, 1])),
                (1, set(&[0, 1])),
                (2, set(&[0, 1])),
                (3, set(&[0])),
                (4, set(&[0, 1, 2])),
                (5, set(&[0, 1, 2])),
            ]);
            (objects, visibility, BTreeMap::from([(AgentId(2), vec![4, 5])]))
        }
        CaseId::Custom => {
            return Err(Error::InvalidScenario("custom cases are loaded from a scenario file".into()));
        }
    };
    let scenario = Scenario {
        agents,
        objects,
        frame_rate: DEFAULT_FRAME_RATE,
        n_frames: DEFAULT_FRAMES,
        rng_seed: seed,
        clutter: None,
    };
    scenario.validate()?;
    let spec = CaseSpec { case_id, prior_regime, visibility, adversary_assignment };
    spec.check(&scenario)?;
    Ok(CaseBuild { scenario, trust: prior_regime.trust_config(), spec })
}
