//! End-to-end runner: detections → per-agent local tracking → central
//! tracking → trust, one frame at a time.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cases::{build_case, labeled_positions, CaseId, PriorRegime};
use crate::error::Result;
use crate::ids::{AgentId, TrackId};
use crate::mtt::{TrackState, TrackStatus, Tracker, TrackerConfig};
use crate::scene::{generate_detections, Scenario, Vec2};
use crate::trust::{prune_by_trust, trust_step, TrustConfig, TrustDistribution, TrustState};

pub const SCHEMA_VERSION: u32 = 1;

/// Tracks farther than this from every labeled entity are unmatched (m).
pub const LABEL_RADIUS: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PruneConfig {
    pub trust_threshold: f64,
    pub confidence_min: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub tracker: TrackerConfig,
    #[serde(default)]
    pub trust: TrustConfig,
    /// Drop central tracks once they are confidently untrusted.
    #[serde(default)]
    pub prune: Option<PruneConfig>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruthKind {
    Object,
    FalsePositive,
    Unmatched,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub schema_version: u32,
    pub case: Option<CaseId>,
    pub prior_regime: Option<PriorRegime>,
    pub seed: u64,
    pub n_frames: u64,
    pub frame_rate: f64,
    pub config: RunConfig,
    /// Initial agent trusts, so a trace with no frames still records them.
    pub agent_priors: BTreeMap<AgentId, TrustDistribution>,
}

/// One central track at the end of one frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackRecord {
    pub frame: u64,
    pub track_id: TrackId,
    pub label: Option<u32>,
    pub truth: TruthKind,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub score: f64,
    pub status: TrackStatus,
    pub trust_mean: f64,
    pub trust_precision: f64,
    pub n_psm: usize,
}

/// One agent's trust at the end of one frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentRecord {
    pub frame: u64,
    pub agent_id: AgentId,
    pub compromised: bool,
    pub n_detections: usize,
    pub local_tracks: usize,
    pub trust_mean: f64,
    pub trust_precision: f64,
    pub n_psm: usize,
}

/// Everything a run produced. Frames are numbered from 0 and every frame has
/// one [`AgentRecord`] per agent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub meta: RunMeta,
    pub tracks: Vec<TrackRecord>,
    pub agents: Vec<AgentRecord>,
}

impl RunTrace {
    pub fn frames(&self) -> u64 {
        self.meta.n_frames
    }

    pub fn tracks_at(&self, frame: u64) -> impl Iterator<Item = &TrackRecord> {
        self.tracks.iter().filter(move |r| r.frame == frame)
    }

    pub fn agents_at(&self, frame: u64) -> impl Iterator<Item = &AgentRecord> {
        self.agents.iter().filter(move |r| r.frame == frame)
    }

    /// Agent trust after the last frame, or the prior if nothing ran.
    pub fn final_agent_trust(&self, agent: AgentId) -> Option<TrustDistribution> {
        match self.meta.n_frames.checked_sub(1) {
            Some(last) => self
                .agents_at(last)
                .find(|r| r.agent_id == agent)
                .and_then(|r| TrustDistribution::new(r.trust_mean, r.trust_precision).ok()),
            None => self.meta.agent_priors.get(&agent).copied(),
        }
    }

    /// Final-frame records of every track carrying `label`.
    pub fn final_tracks_with_label(&self, label: u32) -> Vec<&TrackRecord> {
        match self.meta.n_frames.checked_sub(1) {
            Some(last) => self.tracks_at(last).filter(|r| r.label == Some(label)).collect(),
            None => Vec::new(),
        }
    }
}

fn label_track(track: &TrackState, truth: &[(u32, Vec2, bool)]) -> (Option<u32>, TruthKind) {
    let pos = track.position();
    truth
        .iter()
        .map(|&(label, p, fp)| ((p - pos).norm(), label, fp))
        .filter(|&(d, _, _)| d <= LABEL_RADIUS)
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map_or((None, TruthKind::Unmatched), |(_, label, fp)| {
            (Some(label), if fp { TruthKind::FalsePositive } else { TruthKind::Object })
        })
}

/// Runs `n_frames` frames of `scenario` from its seed.
pub fn run(scenario: &Scenario, config: &RunConfig, n_frames: u64) -> Result<RunTrace> {
    scenario.validate()?;
    config.trust.validate()?;
    let dt = scenario.dt();
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.rng_seed);
    let mut central = Tracker::new(config.tracker)?;
    let mut local: BTreeMap<AgentId, Tracker> =
        scenario.agents.iter().map(|a| Ok((a.id, Tracker::new(config.tracker)?))).collect::<Result<_>>()?;
    let mut trust = TrustState::new(&config.trust, &scenario.agents);
    let fp_labels: std::collections::BTreeSet<u32> = scenario
        .agents
        .iter()
        .filter_map(|a| a.adversary.as_ref())
        .flat_map(|adv| adv.false_tracks.iter().map(|f| f.label))
        .collect();

    let meta = RunMeta {
        schema_version: SCHEMA_VERSION,
        case: None,
        prior_regime: None,
        seed: scenario.rng_seed,
        n_frames,
        frame_rate: scenario.frame_rate,
        config: config.clone(),
        agent_priors: trust.agent_trusts.clone(),
    };
    let mut trace = RunTrace { meta, tracks: Vec::new(), agents: Vec::new() };

    for frame in 0..n_frames {
        let detections = generate_detections(scenario, frame, &mut rng);
        let mut local_tracks = BTreeMap::new();
        for agent in &scenario.agents {
            let own: Vec<_> = detections.iter().filter(|d| d.agent_id == agent.id).cloned().collect();
            let tracker = local.get_mut(&agent.id).expect("one local tracker per agent");
            tracker.step(std::slice::from_ref(agent), &own, dt)?;
            local_tracks.insert(agent.id, tracker.tracks().to_vec());
        }
        central.step(&scenario.agents, &detections, dt)?;
        let (next, counts) = trust_step(
            &trust,
            &config.trust,
            central.tracks(),
            &scenario.agents,
            &detections,
            &local_tracks,
            central.params(),
        )?;
        trust = next;
        if let Some(p) = config.prune {
            prune_by_trust(&mut central, &trust, p.trust_threshold, p.confidence_min);
        }

        let truth: Vec<(u32, Vec2, bool)> = labeled_positions(scenario, frame)
            .into_iter()
            .map(|(l, p)| (l, p, fp_labels.contains(&l)))
            .collect();
        for t in central.tracks() {
            let (label, kind) = label_track(t, &truth);
            let tt = trust.track(t.id).copied().unwrap_or(config.trust.track_prior);
            trace.tracks.push(TrackRecord {
                frame,
                track_id: t.id,
                label,
                truth: kind,
                x: t.mean[0],
                y: t.mean[1],
                vx: t.mean[2],
                vy: t.mean[3],
                score: t.score,
                status: t.status,
                trust_mean: tt.mean(),
                trust_precision: tt.precision(),
                n_psm: counts.tracks.get(&t.id).copied().unwrap_or(0),
            });
        }
        for agent in &scenario.agents {
            let at = trust.agent(agent.id).copied().unwrap_or_else(|| config.trust.agent_prior_for(agent.id));
            trace.agents.push(AgentRecord {
                frame,
                agent_id: agent.id,
                compromised: agent.is_compromised(),
                n_detections: detections.iter().filter(|d| d.agent_id == agent.id).count(),
                local_tracks: local_tracks.get(&agent.id).map_or(0, Vec::len),
                trust_mean: at.mean(),
                trust_precision: at.precision(),
                n_psm: counts.agents.get(&agent.id).copied().unwrap_or(0),
            });
        }
    }
    Ok(trace)
}

/// Builds and runs a reference case with default tracker settings.
pub fn run_case(case: CaseId, prior: PriorRegime, seed: u64, n_frames: u64) -> Result<RunTrace> {
    let built = build_case(case, prior, seed)?;
    let config = RunConfig { trust: built.trust, ..Default::default() };
    let mut trace = run(&built.scenario, &config, n_frames)?;
    trace.meta.case = Some(case);
    trace.meta.prior_regime = Some(prior);
    Ok(trace)
}
