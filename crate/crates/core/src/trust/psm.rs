//! Trust pseudomeasurements (PSMs): per (track, agent) evidence in [0, 1]².

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::beta::TrustDistribution;
use crate::error::{Error, Result};
use crate::ids::{AgentId, TrackId};
use crate::mtt::{gate, ScoringParams, TrackState};
use crate::scene::{AgentCharacteristics, Detection, Mat2};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsmDatapoint {
    pub value: f64,
    pub confidence: f64,
    pub track_id: TrackId,
    pub agent_id: AgentId,
}

/// Euclidean radius equivalent to the χ² gate under the worst axis of `r`.
pub fn gate_radius(params: &ScoringParams, r: &Mat2) -> f64 {
    (params.gate_chi2 * r.symmetric_eigenvalues().max()).sqrt()
}

/// Evidence about one central track from every agent expected to see it.
///
/// Each agent whose FOV contains the track contributes value 1 if one of its
/// detections passes the track's gate and 0 otherwise, weighted by that
/// agent's mean trust. With fewer than two expected observers there is
/// nothing to compare and the result is empty.
pub fn track_psm(
    track: &TrackState,
    agents: &[AgentCharacteristics],
    detections: &[Detection],
    agent_trusts: &BTreeMap<AgentId, TrustDistribution>,
    params: &ScoringParams,
) -> Result<Vec<PsmDatapoint>> {
    let position = track.position();
    let mut out = Vec::new();
    for agent in agents.iter().filter(|a| a.fov.contains(&position)) {
        let trust = agent_trusts.get(&agent.id).ok_or(Error::UnknownAgent(agent.id))?;
        let mut seen = false;
        for det in detections.iter().filter(|d| d.agent_id == agent.id) {
            if gate(track, det, params)?.passes {
                seen = true;
                break;
            }
        }
        out.push(PsmDatapoint {
            value: if seen { 1.0 } else { 0.0 },
            confidence: trust.mean(),
            track_id: track.id,
            agent_id: agent.id,
        });
    }
    if out.len() <= 1 {
        out.clear();
    }
    Ok(out)
}

/// Evidence about one agent from every central track it is expected to see.
///
/// A matched track contributes its trust mean, an unmatched one the
/// complement; both are weighted by 1 − Var of the track trust. A central
/// track matches when one of the agent's local tracks lies within
/// `match_threshold` meters.
pub fn agent_psm(
    agent: &AgentCharacteristics,
    central_tracks: &[TrackState],
    track_trusts: &BTreeMap<TrackId, TrustDistribution>,
    local_tracks: &[TrackState],
    match_threshold: f64,
) -> Result<Vec<PsmDatapoint>> {
    let mut out = Vec::new();
    for track in central_tracks {
        let position = track.position();
        if !agent.fov.contains(&position) {
            continue;
        }
        let trust = track_trusts.get(&track.id).ok_or(Error::UnknownTrack(track.id))?;
        let matched = local_tracks.iter().any(|l| (l.position() - position).norm() <= match_threshold);
        out.push(PsmDatapoint {
            value: if matched { trust.mean() } else { 1.0 - trust.mean() },
            confidence: 1.0 - trust.variance(),
            track_id: track.id,
            agent_id: agent.id,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mtt::{Mat4, Vec4};
    use crate::scene::{TruthTag, Vec2};

    fn r() -> Mat2 {
        Mat2::identity() * 5f64.sqrt()
    }

    fn agent(id: u32, center: (f64, f64)) -> AgentCharacteristics {
        AgentCharacteristics::benign(id, Vec2::new(center.0, center.1), 20.0, 0.9, r())
    }

    fn track_at(id: u64, x: f64, y: f64) -> TrackState {
        TrackState::new(TrackId(id), Vec4::new(x, y, 0.0, 0.0), Mat4::identity(), 0.0, 0)
    }

    fn det(agent: u32, x: f64, y: f64) -> Detection {
        Detection { agent_id: AgentId(agent), value: Vec2::new(x, y), noise_cov: r(), frame: 1, truth: TruthTag::NaturalFp }
    }

    fn trusts(pairs: &[(u32, f64)]) -> BTreeMap<AgentId, TrustDistribution> {
        pairs.iter().map(|&(k, m)| (AgentId(k), TrustDistribution::new(m, 5.0).unwrap())).collect()
    }

    #[test]
    fn track_psm_hit_and_miss() {
        let agents = vec![agent(0, (0.0, 0.0)), agent(1, (5.0, 0.0)), agent(2, (200.0, 0.0))];
        let t = track_at(3, 1.0, 1.0);
        let psm = track_psm(&t, &agents, &[det(0, 1.2, 0.8)], &trusts(&[(0, 0.8), (1, 0.6), (2, 0.5)]), &ScoringParams::default()).unwrap();
        let pairs: Vec<_> = psm.iter().map(|p| (p.value, p.confidence)).collect();
        assert_eq!(pairs, vec![(1.0, 0.8), (0.0, 0.6)]);
        assert!(psm.iter().all(|p| p.track_id == TrackId(3)));
    }

    #[test]
    fn track_psm_needs_two_observers() {
        let agents = vec![agent(0, (0.0, 0.0)), agent(1, (100.0, 0.0))];
        let tr = trusts(&[(0, 0.8), (1, 0.6)]);
        let p = ScoringParams::default();
        assert!(track_psm(&track_at(0, 1.0, 1.0), &agents, &[det(0, 1.0, 1.0)], &tr, &p).unwrap().is_empty());
        assert!(track_psm(&track_at(0, 50.0, 50.0), &agents, &[], &tr, &p).unwrap().is_empty());
    }

    #[test]
    fn track_psm_far_detection_is_a_miss() {
        let agents = vec![agent(0, (0.0, 0.0)), agent(1, (0.0, 0.0))];
        let tr = trusts(&[(0, 0.8), (1, 0.6)]);
        let psm = track_psm(&track_at(0, 0.0, 0.0), &agents, &[det(0, 10.0, 0.0)], &tr, &ScoringParams::default()).unwrap();
        assert_eq!(psm[0].value, 0.0);
    }

    #[test]
    fn track_psm_unknown_agent() {
        let agents = vec![agent(0, (0.0, 0.0)), agent(1, (0.0, 0.0))];
        let err = track_psm(&track_at(0, 0.0, 0.0), &agents, &[], &trusts(&[(0, 0.8)]), &ScoringParams::default());
        assert!(matches!(err, Err(Error::UnknownAgent(AgentId(1)))));
    }

    #[test]
    fn agent_psm_match_and_negation() {
        let a = agent(0, (0.0, 0.0));
        let central = vec![track_at(7, 1.0, 1.0), track_at(8, 500.0, 0.0)];
        let tt: BTreeMap<_, _> = [
            (TrackId(7), TrustDistribution::new(0.9, 10.0).unwrap()),
            (TrackId(8), TrustDistribution::new(0.9, 10.0).unwrap()),
        ]
        .into_iter()
        .collect();
        let hit = agent_psm(&a, &central, &tt, &[track_at(0, 1.5, 1.0)], 4.0).unwrap();
        assert_eq!(hit.len(), 1);
        assert!((hit[0].value - 0.9).abs() < 1e-12);
        assert!((hit[0].confidence - 0.991_818_18).abs() < 1e-8);

        let miss = agent_psm(&a, &central, &tt, &[], 4.0).unwrap();
        assert!((miss[0].value - 0.1).abs() < 1e-12);
        assert!((miss[0].confidence - 0.991_818_18).abs() < 1e-8);
    }

    #[test]
    fn agent_psm_unknown_track() {
        let a = agent(0, (0.0, 0.0));
        let err = agent_psm(&a, &[track_at(1, 0.0, 0.0)], &BTreeMap::new(), &[], 4.0);
        assert!(matches!(err, Err(Error::UnknownTrack(TrackId(1)))));
    }

    #[test]
    fn confidence_tracks_agent_trust_monotonically() {
        let agents = vec![agent(0, (0.0, 0.0)), agent(1, (0.0, 0.0))];
        let p = ScoringParams::default();
        let t = track_at(0, 0.0, 0.0);
        let mut last = 0.0;
        for m in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let psm = track_psm(&t, &agents, &[det(0, 0.0, 0.0)], &trusts(&[(0, m), (1, 0.5)]), &p).unwrap();
            assert!(psm[0].confidence > last);
            last = psm[0].confidence;
        }
    }

    #[test]
    fn gate_radius_reference() {
        let rad = gate_radius(&ScoringParams::default(), &r());
        assert!((rad - (9.21 * 5f64.sqrt()).sqrt()).abs() < 1e-12);
    }
}
