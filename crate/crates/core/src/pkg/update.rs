use std::collections::HashSet;

use super::{ParameterizedKG, PkgError, Signal};

/// Totals added by one batch update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct UpdateSummary {
    pub signals: usize,
    /// Sum of own-signal increments (always equals `signals`).
    pub direct: u64,
    /// Sum of increments received through neighbors.
    pub propagated: u64,
}

impl ParameterizedKG {
    /// Applies one batch of signals.
    ///
    /// Each signaled edge gets +1 on alpha (incorrect) or beta (correct); then
    /// every edge adds the number of incorrect signals among its signaled
    /// neighbors to alpha and the number of correct ones to beta. Neighbor
    /// counts come from this batch only. Tallies move only with the edge's own
    /// signal.
    ///
    /// All signals are validated before anything is written, so a rejected
    /// batch leaves the graph untouched.
    pub fn apply_batch_update(&mut self, signals: &[Signal]) -> Result<UpdateSummary, PkgError> {
        self.apply_signals(signals, true)
    }

    /// Like [`apply_batch_update`](Self::apply_batch_update), optionally
    /// without neighbor propagation.
    pub fn apply_signals(&mut self, signals: &[Signal], propagate: bool) -> Result<UpdateSummary, PkgError> {
        let mut seen = HashSet::with_capacity(signals.len());
        let mut positions = Vec::with_capacity(signals.len());
        for signal in signals {
            let pos = self.position(&signal.edge_id)?;
            if !self.edges[pos].active {
                return Err(PkgError::DeadEdge(signal.edge_id.clone()));
            }
            if !seen.insert(pos) {
                return Err(PkgError::DuplicateSignal(signal.edge_id.clone()));
            }
            positions.push((pos, signal.correct));
        }

        // integer deltas keep the update independent of signal order
        let mut d_alpha = vec![0u64; self.edges.len()];
        let mut d_beta = vec![0u64; self.edges.len()];
        let mut summary = UpdateSummary {
            signals: signals.len(),
            ..UpdateSummary::default()
        };
        for &(pos, correct) in &positions {
            let slot = if correct { &mut d_beta } else { &mut d_alpha };
            slot[pos] += 1;
            summary.direct += 1;
            if propagate {
                for neighbor in self.neighbor_positions(pos) {
                    let slot = if correct { &mut d_beta } else { &mut d_alpha };
                    slot[neighbor] += 1;
                    summary.propagated += 1;
                }
            }
        }

        for (pos, edge) in self.edges.iter_mut().enumerate() {
            edge.params.alpha += d_alpha[pos] as f64;
            edge.params.beta += d_beta[pos] as f64;
        }
        for &(pos, correct) in &positions {
            let edge = &mut self.edges[pos];
            if correct {
                edge.n_correct += 1;
            } else {
                edge.n_incorrect += 1;
            }
        }
        Ok(summary)
    }
}
