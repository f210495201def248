//! Multi-sensor multi-target tracking with likelihood-ratio track scoring,
//! closed-form analysis of how compromised agents can game that scoring, and
//! a Beta-Bernoulli trust estimator over tracks and agents.
//!
//! The crate is organized bottom-up:
//!
//! - [`scene`]: synthetic world, agents with circular fields of view, benign
//!   and adversarial detection generation.
//! - [`mtt`]: Kalman filtering, gating, global-nearest-neighbor association
//!   and the track-score lifecycle.
//! - [`trust`]: trust pseudomeasurements, conjugate updates and the
//!   alternating track/agent trust step.
//! - [`attack`]: score-gain bounds, minimum frames-to-confirm and Monte-Carlo
//!   cross-checks against the simulator.
//! - [`harness`]: the two reference cases, the end-to-end runner and trace
//!   export.

// Parameter checks are written `!(x > 0.0)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod attack;
pub mod error;
pub mod harness;
pub mod ids;
pub mod mtt;
pub mod scene;
pub mod trust;
pub mod validate;

pub use error::{Error, Result};
pub use ids::{AgentId, TrackId};
pub use mtt::{ScoringParams, TrackState, TrackStatus, Tracker, TrackerConfig};
pub use scene::{AgentCharacteristics, Detection, Scenario};
pub use trust::{PsmDatapoint, TrustConfig, TrustDistribution, TrustState};
