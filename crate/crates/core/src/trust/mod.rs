//! Beta-Bernoulli trust estimation over tracks and agents.

mod beta;
mod estimator;
mod psm;

pub use beta::{beta_update, TrustDistribution};
pub use estimator::{prune_by_trust, trust_step, PsmCounts, TrustConfig, TrustState};
pub use psm::{agent_psm, gate_radius, track_psm, PsmDatapoint};
