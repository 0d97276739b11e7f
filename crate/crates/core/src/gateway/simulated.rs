use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{AnswerHint, Examinee, GatewayError};
use crate::pkg::EdgeId;
use crate::question::{Question, QuestionKind};
use crate::rng::derive_rng;

/// Refusals modelled on what chat assistants say when they decline.
pub const REFUSAL_PHRASES: &[&str] = &[
    "I am sorry, but I couldn't find any information on that.",
    "I'm sorry, but as an AI assistant, I do not have the capability to provide real-time information.",
];

const FALLBACK_DISTRACTOR: &str = "I believe it is someone else entirely.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulatorConfig {
    pub seed: u64,
    /// Error probability for edges missing from `error_prob`.
    pub default_error_prob: f64,
    pub refusal_prob: f64,
    pub error_prob: BTreeMap<EdgeId, f64>,
}

impl Default for SimulatorConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            default_error_prob: 0.5,
            refusal_prob: 0.0,
            error_prob: BTreeMap::new(),
        }
    }
}

impl SimulatorConfig {
    pub fn validate(&self) -> Result<(), GatewayError> {
        let in_range = |p: f64| (0.0..=1.0).contains(&p);
        if !in_range(self.default_error_prob) || !in_range(self.refusal_prob) {
            return Err(GatewayError::InvalidRequest("probabilities must lie in [0, 1]".into()));
        }
        if let Some((id, p)) = self.error_prob.iter().find(|(_, p)| !in_range(**p)) {
            return Err(GatewayError::InvalidRequest(format!("error probability {p} for edge {id} outside [0, 1]")));
        }
        Ok(())
    }
}

/// Examinee with a known per-edge error rate.
///
/// Each answer draws from a stream keyed by (seed, edge, n-th call for that
/// edge), so output depends only on how often each edge has been asked, not
/// on the interleaving of calls across threads.
#[derive(Debug)]
pub struct SimulatedExaminee {
    config: SimulatorConfig,
    calls: Mutex<HashMap<EdgeId, u64>>,
}

impl SimulatedExaminee {
    pub fn new(config: SimulatorConfig) -> Result<Self, GatewayError> {
        config.validate()?;
        Ok(Self {
            config,
            calls: Mutex::new(HashMap::new()),
        })
    }

    pub fn config(&self) -> &SimulatorConfig {
        &self.config
    }

    pub fn error_prob(&self, edge: &EdgeId) -> f64 {
        self.config
            .error_prob
            .get(edge)
            .copied()
            .unwrap_or(self.config.default_error_prob)
    }
}

impl Examinee for SimulatedExaminee {
    fn answer(&self, question: &Question, hint: &AnswerHint) -> Result<String, GatewayError> {
        let call = {
            let mut calls = self.calls.lock().unwrap();
            let n = calls.entry(question.edge_id.clone()).or_insert(0);
            *n += 1;
            *n
        };
        let mut rng = derive_rng(
            self.config.seed,
            &[b"examinee", question.edge_id.as_str().as_bytes(), &call.to_le_bytes()],
        );
        let refuses = rng.random::<f64>() < self.config.refusal_prob;
        if refuses {
            return Ok(REFUSAL_PHRASES[rng.random_range(0..REFUSAL_PHRASES.len())].to_string());
        }
        let correct = rng.random::<f64>() >= self.error_prob(&question.edge_id);
        Ok(match &question.kind {
            QuestionKind::YesNo { expected_answer, .. } => {
                if *expected_answer == correct { "Yes." } else { "No." }.to_string()
            }
            QuestionKind::Wh {
                gold_labels_and_aliases,
                ..
            } => {
                if correct && !gold_labels_and_aliases.is_empty() {
                    gold_labels_and_aliases[rng.random_range(0..gold_labels_and_aliases.len())].clone()
                } else {
                    let names_gold = |d: &str| {
                        let d = d.to_lowercase();
                        gold_labels_and_aliases
                            .iter()
                            .any(|g| !g.is_empty() && d.contains(&g.to_lowercase()))
                    };
                    match &hint.distractor {
                        Some(d) if !d.trim().is_empty() && !names_gold(d) => d.clone(),
                        _ => FALLBACK_DISTRACTOR.to_string(),
                    }
                }
            }
        })
    }
}
