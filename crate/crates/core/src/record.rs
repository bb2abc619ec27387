//! Per-run result records, serialized one JSON object per line.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub solver: String,
    pub instance_id: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweeps: Option<u64>,
    pub restarts: u64,
    /// In the instance's integer units.
    pub best_energy: i64,
    pub success: bool,
    pub work: f64,
    pub model_time_us: f64,
    /// Anneals or searches that reached the target, out of `restarts`.
    pub successes: u64,
    /// Canonical parameter string, e.g. `sweeps=1024` or `beta_final=5,sweeps=100000`.
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub params: String,
    /// Run index within its (instance, solver, params) group.
    #[serde(default)]
    pub run: u64,
}

impl RunRecord {
    /// Identity of the task that produced this record.
    pub fn key(&self) -> (String, String, String, u64) {
        (self.instance_id.clone(), self.solver.clone(), self.params.clone(), self.run)
    }

    /// Model time of one restart.
    pub fn time_per_restart_us(&self) -> f64 {
        if self.restarts == 0 {
            0.0
        } else {
            self.model_time_us / self.restarts as f64
        }
    }
}
