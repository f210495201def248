//! Centralized multi-sensor tracker with likelihood-ratio track scoring.

mod assign;
mod kalman;
mod params;
mod score;
mod tracker;

pub use assign::{associate, min_cost_assignment, Assignment};
pub use kalman::{gate, kf_predict, kf_update, Innovation, Mat4, Vec4};
pub use params::ScoringParams;
pub use score::{
    init_score, prob_to_score, score_to_prob, score_update_hit, score_update_miss, track_status,
};
pub use tracker::{
    FrameReport, ScoreEvent, ScoreEventKind, TrackState, TrackStatus, Tracker, TrackerConfig,
};
