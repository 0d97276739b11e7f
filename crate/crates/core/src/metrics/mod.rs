//! Win rate, zero-sense rate and their grouped breakdowns.
//!
//! Both rates are taken over examined edges only. An edge wins when its
//! correct answers strictly outnumber its incorrect ones, and is zero-sense
//! when it was never answered correctly; a tie is neither.

mod dot;
mod grouped;
mod heatmap;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exam::ExamRecord;
use crate::pkg::{EdgeId, ParameterizedKG};

pub use dot::{export_pkg_dot, posterior_bucket, BUCKET_COLORS, DEAD_EDGE_COLOR};
pub use grouped::{group_metrics, Dimension, GroupRow, GroupedReport, Side, UNGROUPED};
pub use heatmap::{heatmap, Heatmap, HeatmapCell, Statistic};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricError {
    #[error("metric undefined: no examined edges")]
    NoExaminedEdges,
    #[error("unknown dimension `{0}`")]
    UnknownDimension(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub n_correct: u64,
    pub n_incorrect: u64,
}

impl Tally {
    pub fn examined(&self) -> bool {
        self.n_correct + self.n_incorrect >= 1
    }

    pub fn wins(&self) -> bool {
        self.n_correct > self.n_incorrect
    }

    pub fn zero_sense(&self) -> bool {
        self.examined() && self.n_correct == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeOutcome {
    pub edge_id: EdgeId,
    #[serde(flatten)]
    pub tally: Tally,
}

impl EdgeOutcome {
    pub fn new(edge_id: impl Into<EdgeId>, n_correct: u64, n_incorrect: u64) -> Self {
        Self {
            edge_id: edge_id.into(),
            tally: Tally { n_correct, n_incorrect },
        }
    }
}

/// Tallies copied from every edge of the graph.
pub fn outcomes_from_pkg(pkg: &ParameterizedKG) -> Vec<EdgeOutcome> {
    pkg.edges()
        .map(|e| EdgeOutcome::new(e.id.clone(), e.n_correct, e.n_incorrect))
        .collect()
}

/// Tallies rebuilt from the verdicts of an interaction log, in edge id order.
pub fn outcomes_from_log<'a, I>(records: I) -> Vec<EdgeOutcome>
where
    I: IntoIterator<Item = &'a ExamRecord>,
{
    let mut tallies: BTreeMap<EdgeId, Tally> = BTreeMap::new();
    for r in records {
        let t = tallies.entry(r.edge_id.clone()).or_insert(Tally {
            n_correct: 0,
            n_incorrect: 0,
        });
        if r.verdict.correct {
            t.n_correct += 1;
        } else {
            t.n_incorrect += 1;
        }
    }
    tallies
        .into_iter()
        .map(|(edge_id, tally)| EdgeOutcome { edge_id, tally })
        .collect()
}

/// Summary of one set of outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub examined: usize,
    pub wins: usize,
    pub zero_sense: usize,
}

impl Rates {
    pub fn from_tallies<'a, I: IntoIterator<Item = &'a Tally>>(tallies: I) -> Self {
        let mut rates = Rates {
            examined: 0,
            wins: 0,
            zero_sense: 0,
        };
        for t in tallies.into_iter().filter(|t| t.examined()) {
            rates.examined += 1;
            rates.wins += t.wins() as usize;
            rates.zero_sense += t.zero_sense() as usize;
        }
        rates
    }

    pub fn win_rate(&self) -> Result<f64, MetricError> {
        self.ratio(self.wins)
    }

    pub fn zero_sense_rate(&self) -> Result<f64, MetricError> {
        self.ratio(self.zero_sense)
    }

    fn ratio(&self, count: usize) -> Result<f64, MetricError> {
        if self.examined == 0 {
            return Err(MetricError::NoExaminedEdges);
        }
        Ok(count as f64 / self.examined as f64)
    }
}

pub fn win_rate(outcomes: &[EdgeOutcome]) -> Result<f64, MetricError> {
    Rates::from_tallies(outcomes.iter().map(|o| &o.tally)).win_rate()
}

pub fn zero_sense_rate(outcomes: &[EdgeOutcome]) -> Result<f64, MetricError> {
    Rates::from_tallies(outcomes.iter().map(|o| &o.tally)).zero_sense_rate()
}

/// Global rates over the graph's tallies.
pub fn pkg_rates(pkg: &ParameterizedKG) -> Rates {
    let tallies: Vec<Tally> = pkg
        .edges()
        .map(|e| Tally {
            n_correct: e.n_correct,
            n_incorrect: e.n_incorrect,
        })
        .collect();
    Rates::from_tallies(&tallies)
}
