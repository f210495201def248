//! Reference cases, the end-to-end runner and trace files.

mod cases;
mod run;
mod trace;

use serde::{Deserialize, Serialize};

pub use cases::{
    build_case, default_meas_cov, labeled_positions, CaseBuild, CaseId, CaseSpec, PriorRegime, DEFAULT_FRAMES,
    DEFAULT_FRAME_RATE,
};
pub use run::{
    run, run_case, AgentRecord, PruneConfig, RunConfig, RunMeta, RunTrace, TrackRecord, TruthKind, LABEL_RADIUS,
    SCHEMA_VERSION,
};
pub use trace::{emit_trace, load_trace, TraceFormat, AGENT_COLUMNS, TRACK_COLUMNS};

use crate::error::Result;
use crate::scene::Scenario;

/// Environment variable naming the default output directory for traces.
pub const OUT_DIR_ENV: &str = "TRACKTRUST_OUT_DIR";

/// A custom world on disk: the scenario plus tracker/trust settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub scenario: Scenario,
    #[serde(default)]
    pub config: RunConfig,
}

impl ScenarioFile {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(s)?;
        file.scenario.validate()?;
        file.config.trust.validate()?;
        file.config.tracker.scoring.validate()?;
        Ok(file)
    }
}
