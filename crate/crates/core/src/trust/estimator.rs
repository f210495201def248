//! The alternating trust step: track trusts are updated conditioned on the
//! previous frame's agent trusts, then agent trusts conditioned on the fresh
//! track trusts.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::beta::{beta_update, TrustDistribution};
use super::psm::{agent_psm, gate_radius, track_psm};
use crate::error::{Error, Result};
use crate::ids::{AgentId, TrackId};
use crate::mtt::{ScoringParams, TrackState, Tracker};
use crate::scene::{AgentCharacteristics, Detection};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrustConfig {
    pub track_prior: TrustDistribution,
    pub agent_prior: TrustDistribution,
    #[serde(default)]
    pub agent_prior_overrides: BTreeMap<AgentId, TrustDistribution>,
    /// Per-frame multiplicative precision decay.
    pub decay: f64,
    pub precision_floor: f64,
    /// Local/central track match distance in meters. `None` uses each agent's
    /// gate-equivalent radius.
    #[serde(default)]
    pub match_threshold: Option<f64>,
}

impl Default for TrustConfig {
    fn default() -> Self {
        Self {
            track_prior: TrustDistribution::uninformative(),
            agent_prior: TrustDistribution::uninformative(),
            agent_prior_overrides: BTreeMap::new(),
            decay: 0.98,
            precision_floor: 0.1,
            match_threshold: None,
        }
    }
}

impl TrustConfig {
    pub fn agent_prior_for(&self, id: AgentId) -> TrustDistribution {
        self.agent_prior_overrides.get(&id).copied().unwrap_or(self.agent_prior)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(Error::InvalidParameter(format!("decay must lie in (0, 1], got {}", self.decay)));
        }
        if !(self.precision_floor > 0.0) {
            return Err(Error::InvalidParameter("precision_floor must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrustState {
    pub track_trusts: BTreeMap<TrackId, TrustDistribution>,
    pub agent_trusts: BTreeMap<AgentId, TrustDistribution>,
}

/// Number of PSM datapoints each entity received in one step.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PsmCounts {
    pub tracks: BTreeMap<TrackId, usize>,
    pub agents: BTreeMap<AgentId, usize>,
}

impl TrustState {
    pub fn new(config: &TrustConfig, agents: &[AgentCharacteristics]) -> Self {
        Self {
            track_trusts: BTreeMap::new(),
            agent_trusts: agents.iter().map(|a| (a.id, config.agent_prior_for(a.id))).collect(),
        }
    }

    pub fn track(&self, id: TrackId) -> Option<&TrustDistribution> {
        self.track_trusts.get(&id)
    }

    pub fn agent(&self, id: AgentId) -> Option<&TrustDistribution> {
        self.agent_trusts.get(&id)
    }
}

/// One frame of trust estimation after the tracker has stepped.
///
/// Order: process noise on every existing belief, priors for newly seen
/// tracks (dropped tracks are forgotten), track PSMs against the previous
/// agent trusts, track updates, agent PSMs against the updated track trusts,
/// agent updates.
pub fn trust_step(
    state: &TrustState,
    config: &TrustConfig,
    central_tracks: &[TrackState],
    agents: &[AgentCharacteristics],
    detections: &[Detection],
    local_tracks: &BTreeMap<AgentId, Vec<TrackState>>,
    params: &ScoringParams,
) -> Result<(TrustState, PsmCounts)> {
    let known: BTreeSet<AgentId> = state.agent_trusts.keys().copied().collect();
    for id in agents.iter().map(|a| a.id).chain(detections.iter().map(|d| d.agent_id)).chain(local_tracks.keys().copied()) {
        if !known.contains(&id) {
            return Err(Error::UnknownAgent(id));
        }
    }

    let prior_agents: BTreeMap<AgentId, TrustDistribution> = state
        .agent_trusts
        .iter()
        .map(|(&k, d)| (k, d.apply_process_noise(config.decay, config.precision_floor)))
        .collect();
    let mut track_trusts: BTreeMap<TrackId, TrustDistribution> = central_tracks
        .iter()
        .map(|t| {
            let d = match state.track_trusts.get(&t.id) {
                Some(d) => d.apply_process_noise(config.decay, config.precision_floor),
                None => config.track_prior,
            };
            (t.id, d)
        })
        .collect();

    let mut counts = PsmCounts::default();
    for track in central_tracks {
        let psm = track_psm(track, agents, detections, &prior_agents, params)?;
        counts.tracks.insert(track.id, psm.len());
        if let Some(d) = track_trusts.get_mut(&track.id) {
            *d = beta_update(d, &psm);
        }
    }

    let mut agent_trusts = prior_agents;
    for agent in agents {
        let local = local_tracks.get(&agent.id).map(Vec::as_slice).unwrap_or(&[]);
        let threshold = config.match_threshold.unwrap_or_else(|| gate_radius(params, &agent.meas_noise_cov));
        let psm = agent_psm(agent, central_tracks, &track_trusts, local, threshold)?;
        counts.agents.insert(agent.id, psm.len());
        if let Some(d) = agent_trusts.get_mut(&agent.id) {
            *d = beta_update(d, &psm);
        }
    }

    Ok((TrustState { track_trusts, agent_trusts }, counts))
}

/// Deletes tracks whose trust mean is below `trust_threshold` once their
/// precision has reached `confidence_min`. Returns the removed ids.
pub fn prune_by_trust(tracker: &mut Tracker, trust: &TrustState, trust_threshold: f64, confidence_min: f64) -> Vec<TrackId> {
    let doomed: Vec<TrackId> = tracker
        .tracks()
        .iter()
        .filter(|t| {
            trust
                .track(t.id)
                .is_some_and(|d| d.mean() < trust_threshold && d.precision() >= confidence_min)
        })
        .map(|t| t.id)
        .collect();
    tracker.remove_tracks(&doomed);
    doomed
}
