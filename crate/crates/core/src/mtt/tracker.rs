use serde::{Deserialize, Serialize};

use super::assign::associate;
use super::kalman::{innovation, predict_moments, update_moments, Innovation, Mat4, Vec4};
use super::params::ScoringParams;
use super::score::{init_score, score_update_hit, score_update_miss, track_status};
use crate::error::{Error, Result};
use crate::ids::{AgentId, TrackId};
use crate::scene::{AgentCharacteristics, Detection, Vec2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackStatus {
    Tentative,
    Confirmed,
    Deleted,
}

impl TrackStatus {
    /// Lifecycle transition: Tentative → {Confirmed, Deleted}, Confirmed →
    /// Deleted. A confirmed track never falls back to tentative and a
    /// deleted track stays deleted.
    pub fn advance(self, proposed: TrackStatus) -> TrackStatus {
        match (self, proposed) {
            (TrackStatus::Deleted, _) => TrackStatus::Deleted,
            (_, TrackStatus::Deleted) => TrackStatus::Deleted,
            (TrackStatus::Confirmed, _) => TrackStatus::Confirmed,
            (TrackStatus::Tentative, s) => s,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TrackStatus::Tentative => "tentative",
            TrackStatus::Confirmed => "confirmed",
            TrackStatus::Deleted => "deleted",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScoreEventKind {
    Hit { d2: f64, det_s: f64 },
    Miss,
}

/// One score increment applied to a track.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreEvent {
    pub frame: u64,
    pub agent_id: AgentId,
    pub kind: ScoreEventKind,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackState {
    pub id: TrackId,
    /// `[x, y, vx, vy]`
    pub mean: Vec4,
    pub cov: Mat4,
    /// Natural-log likelihood ratio L.
    pub score: f64,
    pub status: TrackStatus,
    pub last_innovation: Option<Innovation>,
    pub history: Vec<ScoreEvent>,
    pub born_frame: u64,
    pub confirmed_frame: Option<u64>,
    initial_score: f64,
}

impl TrackState {
    pub fn new(id: TrackId, mean: Vec4, cov: Mat4, score: f64, born_frame: u64) -> Self {
        Self {
            id,
            mean,
            cov,
            score,
            status: TrackStatus::Tentative,
            last_innovation: None,
            history: Vec::new(),
            born_frame,
            confirmed_frame: None,
            initial_score: score,
        }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.mean[0], self.mean[1])
    }

    pub fn velocity(&self) -> Vec2 {
        Vec2::new(self.mean[2], self.mean[3])
    }

    pub fn initial_score(&self) -> f64 {
        self.initial_score
    }

    pub fn is_confirmed(&self) -> bool {
        self.status == TrackStatus::Confirmed
    }

    pub fn predict(&mut self, dt: f64, process_noise_intensity: f64) {
        let (mean, cov) = predict_moments(&self.mean, &self.cov, dt, process_noise_intensity);
        self.mean = mean;
        self.cov = cov;
    }

    pub(crate) fn apply_update(&mut self, det: &Detection, innov: &Innovation) -> Result<()> {
        let (mean, cov) = update_moments(&self.mean, &self.cov, innov, &det.noise_cov)?;
        self.mean = mean;
        self.cov = cov;
        self.last_innovation = Some(*innov);
        Ok(())
    }

    /// Recomputes L from the initial score and the recorded hit/miss events,
    /// independently of the running sum.
    pub fn reconstructed_score(&self, params: &ScoringParams) -> Result<f64> {
        self.history.iter().try_fold(self.initial_score, |l, ev| match ev.kind {
            ScoreEventKind::Miss => score_update_miss(l, params),
            ScoreEventKind::Hit { d2, det_s } => {
                let s = nalgebra::Matrix2::new(det_s.sqrt(), 0.0, 0.0, det_s.sqrt());
                score_update_hit(l, d2, &s, params)
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackerConfig {
    pub scoring: ScoringParams,
    /// Spectral density of the white-acceleration process noise (m²/s³).
    pub process_noise: f64,
    /// Velocity variance given to new tracks (m²/s²).
    pub init_velocity_var: f64,
    /// Remove tracks whose score falls to T₁. Disabling keeps every track
    /// alive and tentative until it confirms.
    pub delete_tracks: bool,
    /// Unassigned detections within this d² of any track do not start a new
    /// track. Should exceed the association gate.
    #[serde(default = "default_birth_exclusion")]
    pub birth_exclusion_chi2: Option<f64>,
    /// Of two tracks closer than this (m), only the higher-scoring survives.
    #[serde(default = "default_merge_distance")]
    pub merge_distance: Option<f64>,
}

/// 99.99% quantile of χ² with two degrees of freedom: −2 ln 1e−4.
fn default_birth_exclusion() -> Option<f64> {
    Some(-2.0 * 1e-4f64.ln())
}

fn default_merge_distance() -> Option<f64> {
    Some(3.0)
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            scoring: ScoringParams::default(),
            process_noise: 0.05,
            init_velocity_var: 10.0,
            delete_tracks: true,
            birth_exclusion_chi2: default_birth_exclusion(),
            merge_distance: default_merge_distance(),
        }
    }
}

/// What changed during one [`Tracker::step`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    pub frame: u64,
    pub born: Vec<TrackId>,
    pub confirmed: Vec<TrackId>,
    pub deleted: Vec<TrackId>,
}

/// Multi-sensor tracker with sequential per-agent updates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Tracker {
    config: TrackerConfig,
    tracks: Vec<TrackState>,
    next_id: u64,
    frame: u64,
}

impl Tracker {
    pub fn new(config: TrackerConfig) -> Result<Self> {
        config.scoring.validate()?;
        Ok(Self { config, tracks: Vec::new(), next_id: 0, frame: 0 })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    pub fn params(&self) -> &ScoringParams {
        &self.config.scoring
    }

    /// Live tracks in creation order.
    pub fn tracks(&self) -> &[TrackState] {
        &self.tracks
    }

    pub fn track(&self, id: TrackId) -> Option<&TrackState> {
        self.tracks.iter().find(|t| t.id == id)
    }

    /// Index of the last completed frame; the first call to `step` produces
    /// frame 1.
    pub fn frame(&self) -> u64 {
        self.frame
    }

    /// Marks the given tracks deleted and drops them.
    pub fn remove_tracks(&mut self, ids: &[TrackId]) {
        self.tracks.retain(|t| !ids.contains(&t.id));
    }

    fn spawn(&mut self, det: &Detection, score: f64) -> TrackId {
        let id = TrackId(self.next_id);
        self.next_id += 1;
        let mean = Vec4::new(det.value.x, det.value.y, 0.0, 0.0);
        let mut cov = Mat4::zeros();
        cov.fixed_view_mut::<2, 2>(0, 0).copy_from(&det.noise_cov);
        cov[(2, 2)] = self.config.init_velocity_var;
        cov[(3, 3)] = self.config.init_velocity_var;
        self.tracks.push(TrackState::new(id, mean, cov, score, self.frame));
        id
    }

    /// Advances one frame: predict, then per agent in ascending id gate,
    /// associate, apply hits and FOV-guarded misses, and spawn tentative
    /// tracks from unassigned detections. Status is evaluated once at the
    /// end of the frame.
    ///
    /// A track's score recursion starts the frame after it is born: in its
    /// birth frame it holds L₀, and detections from later agents refine its
    /// state without scoring.
    pub fn step(&mut self, agents: &[AgentCharacteristics], detections: &[Detection], dt: f64) -> Result<FrameReport> {
        for det in detections {
            if !agents.iter().any(|a| a.id == det.agent_id) {
                return Err(Error::UnknownAgent(det.agent_id));
            }
        }
        self.frame += 1;
        let frame = self.frame;
        let params = self.config.scoring;
        let q = self.config.process_noise;
        for t in &mut self.tracks {
            t.predict(dt, q);
        }

        let mut report = FrameReport { frame, ..Default::default() };
        let mut order: Vec<&AgentCharacteristics> = agents.iter().collect();
        order.sort_by_key(|a| a.id);
        let l0 = init_score(&params);

        for agent in order {
            let dets: Vec<&Detection> = detections.iter().filter(|d| d.agent_id == agent.id).collect();
            let mut innovations = Vec::with_capacity(self.tracks.len());
            for t in &self.tracks {
                let row = dets
                    .iter()
                    .map(|d| innovation(&t.mean, &t.cov, &d.value, &d.noise_cov, params.gate_chi2))
                    .collect::<Result<Vec<_>>>()?;
                innovations.push(row);
            }
            let gated: Vec<Vec<Option<f64>>> = innovations
                .iter()
                .map(|row| row.iter().map(|g| g.passes.then_some(g.mahalanobis_sq)).collect())
                .collect();
            let assignment = associate(&gated, dets.len());

            for &(ti, dj) in &assignment.pairs {
                let innov = innovations[ti][dj];
                let track = &mut self.tracks[ti];
                if track.born_frame != frame {
                    let updated = score_update_hit(track.score, innov.mahalanobis_sq, &innov.innov_cov, &params)?;
                    track.history.push(ScoreEvent {
                        frame,
                        agent_id: agent.id,
                        kind: ScoreEventKind::Hit { d2: innov.mahalanobis_sq, det_s: innov.innov_cov.determinant() },
                        delta: updated - track.score,
                    });
                    track.score = updated;
                }
                track.apply_update(dets[dj], &innov)?;
            }
            for &ti in &assignment.unassigned_tracks {
                let track = &mut self.tracks[ti];
                if track.born_frame == frame || !agent.fov.contains(&track.position()) {
                    continue;
                }
                let updated = score_update_miss(track.score, &params)?;
                track.history.push(ScoreEvent {
                    frame,
                    agent_id: agent.id,
                    kind: ScoreEventKind::Miss,
                    delta: updated - track.score,
                });
                track.score = updated;
            }
            let exclusion = self.config.birth_exclusion_chi2;
            for &dj in &assignment.unassigned_detections {
                if let Some(chi2) = exclusion {
                    if innovations.iter().any(|row| row[dj].mahalanobis_sq <= chi2) {
                        continue;
                    }
                }
                let id = self.spawn(dets[dj], l0);
                report.born.push(id);
            }
        }

        for t in &mut self.tracks {
            let mut proposed = track_status(t.score, &params);
            if proposed == TrackStatus::Deleted && (t.born_frame == frame || !self.config.delete_tracks) {
                proposed = TrackStatus::Tentative;
            }
            let next = t.status.advance(proposed);
            if next == TrackStatus::Confirmed && t.status != TrackStatus::Confirmed {
                t.confirmed_frame = Some(frame);
                report.confirmed.push(t.id);
            }
            if next == TrackStatus::Deleted {
                report.deleted.push(t.id);
            }
            t.status = next;
        }
        self.tracks.retain(|t| t.status != TrackStatus::Deleted);
        if let Some(radius) = self.config.merge_distance {
            report.deleted.extend(self.merge_duplicates(radius));
        }
        Ok(report)
    }

    /// Greedily keeps tracks in descending score (older first on ties) and
    /// drops any within `radius` of one already kept.
    fn merge_duplicates(&mut self, radius: f64) -> Vec<TrackId> {
        let mut order: Vec<usize> = (0..self.tracks.len()).collect();
        order.sort_by(|&a, &b| self.tracks[b].score.total_cmp(&self.tracks[a].score).then(a.cmp(&b)));
        let mut kept: Vec<usize> = Vec::new();
        let mut dropped = Vec::new();
        for i in order {
            let p = self.tracks[i].position();
            if kept.iter().any(|&k| (self.tracks[k].position() - p).norm() < radius) {
                dropped.push(self.tracks[i].id);
            } else {
                kept.push(i);
            }
        }
        self.remove_tracks(&dropped);
        dropped
    }
}
