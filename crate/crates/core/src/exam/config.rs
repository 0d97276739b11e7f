use serde::{Deserialize, Serialize};

use crate::question::ExamMode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConvergenceConfig {
    pub window: usize,
    pub epsilon: f64,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            window: 5,
            epsilon: 0.005,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Upper bound on the number of batches; the run may stop earlier on
    /// convergence.
    pub iterations: u64,
    pub batch_size: usize,
    pub mode: ExamMode,
    pub seed: u64,
    pub convergence: ConvergenceConfig,
    pub propagation_enabled: bool,
    /// Concurrent items per batch.
    pub max_in_flight: usize,
    /// Stamp log records with wall-clock time. Off by default so simulated
    /// runs produce byte-identical logs.
    pub wall_clock: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            iterations: 60,
            batch_size: 64,
            mode: ExamMode::Easy,
            seed: 0,
            convergence: ConvergenceConfig::default(),
            propagation_enabled: true,
            max_in_flight: 8,
            wall_clock: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.iterations == 0 {
            return Err("iterations must be a positive integer".into());
        }
        if self.batch_size == 0 {
            return Err("batch_size must be a positive integer".into());
        }
        if self.convergence.window < 2 {
            return Err("convergence window must be at least 2".into());
        }
        if !(self.convergence.epsilon > 0.0 && self.convergence.epsilon.is_finite()) {
            return Err("convergence epsilon must be positive".into());
        }
        if self.max_in_flight == 0 {
            return Err("max_in_flight must be at least 1".into());
        }
        Ok(())
    }
}
