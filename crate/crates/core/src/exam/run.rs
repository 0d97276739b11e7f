use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::log::{AbortRecord, ExamRecord, LogHeader, LogRecord, LogSink, SkipRecord, SkipStage, LOG_FORMAT};
use super::{check_convergence, verify_wh, verify_yes_no, RunConfig, VerificationMode};
use crate::gateway::{AnswerHint, Examinee, GatewayError, Judge};
use crate::metrics::pkg_rates;
use crate::pkg::{Edge, EdgeId, ParameterizedKG, PkgError, Signal, UpdateSummary};
use crate::question::{
    choose_question_kind, render_question, sample_negative, KindChoice, Question, QuestionError, QuestionKind,
    QuestionWriter, Reference,
};
use crate::rng::{derive_rng, short_digest, StreamRng};

/// The three model roles of a run.
#[derive(Clone, Copy)]
pub struct Roles<'a> {
    pub examinee: &'a dyn Examinee,
    pub writer: &'a dyn QuestionWriter,
    pub judge: &'a dyn Judge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricPoint {
    pub iteration: u64,
    pub signals: usize,
    pub skipped: usize,
    /// Distinct edges examined so far.
    pub examined_edges: usize,
    pub win_rate: Option<f64>,
    pub zero_sense_rate: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    IterationCap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub run_id: String,
    pub iterations_run: u64,
    pub stop: Option<StopReason>,
    pub history: Vec<MetricPoint>,
}

#[derive(Debug, Clone)]
pub struct IterationReport {
    pub point: MetricPoint,
    pub selected: Vec<EdgeId>,
    pub update: UpdateSummary,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid run configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Pkg(#[from] PkgError),
    #[error("examinee unavailable at iteration {iteration} (edge {edge}): {source}")]
    ExamineeUnavailable {
        iteration: u64,
        edge: EdgeId,
        #[source]
        source: GatewayError,
    },
    #[error("writing interaction log: {0}")]
    Log(#[from] std::io::Error),
}

/// A run that stopped on an error, with everything completed before it.
#[derive(Debug, Error)]
#[error("{error}")]
pub struct RunAbort {
    #[source]
    pub error: RunError,
    pub outcome: RunOutcome,
}

enum ItemResult {
    Examined(Box<ExamRecord>),
    Skipped(SkipRecord),
    Abort(GatewayError),
}

/// Stepwise driver for one evaluation run.
pub struct Evaluation<'a> {
    pkg: &'a mut ParameterizedKG,
    reference: &'a Reference,
    config: RunConfig,
    roles: Roles<'a>,
    sink: &'a mut dyn LogSink,
    run_id: String,
    iteration: u64,
    seq: u64,
    history: Vec<MetricPoint>,
}

impl<'a> Evaluation<'a> {
    /// Validates the inputs and writes the log header.
    pub fn new(
        pkg: &'a mut ParameterizedKG,
        reference: &'a Reference,
        config: RunConfig,
        roles: Roles<'a>,
        sink: &'a mut dyn LogSink,
    ) -> Result<Self, RunError> {
        config.validate().map_err(RunError::Config)?;
        if pkg.active_edge_count() == 0 {
            return Err(PkgError::NoActiveEdges.into());
        }
        let run_id = short_digest(&serde_json::to_vec(&config).expect("config serializes"));
        sink.write(&LogRecord::Header(LogHeader {
            format: LOG_FORMAT.into(),
            run_id: run_id.clone(),
            config: config.clone(),
        }))?;
        sink.flush()?;
        Ok(Self {
            pkg,
            reference,
            config,
            roles,
            sink,
            run_id,
            iteration: 0,
            seq: 0,
            history: Vec::new(),
        })
    }

    pub fn pkg(&self) -> &ParameterizedKG {
        self.pkg
    }

    pub fn history(&self) -> &[MetricPoint] {
        &self.history
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn converged(&self) -> bool {
        let window = self.config.convergence.window;
        let tail = &self.history[self.history.len().saturating_sub(window)..];
        let points: Option<Vec<(f64, f64)>> = tail.iter().map(|p| Some((p.win_rate?, p.zero_sense_rate?))).collect();
        points.is_some_and(|p| check_convergence(&p, window, self.config.convergence.epsilon))
    }

    /// Runs one batch: select, ask, verify, update, log.
    pub fn step(&mut self) -> Result<IterationReport, RunError> {
        let iteration = self.iteration;
        let mut select_rng = derive_rng(self.config.seed, &[b"select", &iteration.to_le_bytes()]);
        let selected = self.pkg.select_batch(self.config.batch_size, &mut select_rng)?;

        let results = self.examine_batch(iteration, &selected);
        let mut signals = Vec::with_capacity(results.len());
        let mut records = Vec::with_capacity(results.len());
        for (edge_id, result) in selected.iter().zip(results) {
            match result {
                ItemResult::Examined(mut record) => {
                    record.seq = self.seq;
                    self.seq += 1;
                    signals.push(Signal {
                        edge_id: edge_id.clone(),
                        correct: record.verdict.correct,
                    });
                    records.push(LogRecord::Exam(*record));
                }
                ItemResult::Skipped(skip) => {
                    log::warn!("iteration {iteration}: skipped edge {edge_id}: {}", skip.error);
                    records.push(LogRecord::Skip(skip));
                }
                ItemResult::Abort(source) => {
                    return Err(RunError::ExamineeUnavailable {
                        iteration,
                        edge: edge_id.clone(),
                        source,
                    });
                }
            }
        }

        let update = if signals.is_empty() {
            UpdateSummary::default()
        } else {
            self.pkg.apply_signals(&signals, self.config.propagation_enabled)?
        };
        for record in &records {
            self.sink.write(record)?;
        }
        self.sink.flush()?;

        let rates = pkg_rates(self.pkg);
        let point = MetricPoint {
            iteration,
            signals: signals.len(),
            skipped: records.len() - signals.len(),
            examined_edges: rates.examined,
            win_rate: rates.win_rate().ok(),
            zero_sense_rate: rates.zero_sense_rate().ok(),
        };
        log::debug!(
            "iteration {iteration}: {} signals, win rate {:?}, zero-sense rate {:?}",
            point.signals,
            point.win_rate,
            point.zero_sense_rate
        );
        self.history.push(point.clone());
        self.iteration += 1;
        Ok(IterationReport {
            point,
            selected,
            update,
        })
    }

    pub fn outcome(&self, stop: Option<StopReason>) -> RunOutcome {
        RunOutcome {
            run_id: self.run_id.clone(),
            iterations_run: self.iteration,
            stop,
            history: self.history.clone(),
        }
    }

    fn examine_batch(&self, iteration: u64, selected: &[EdgeId]) -> Vec<ItemResult> {
        let ctx = ItemContext {
            pkg: self.pkg,
            reference: self.reference,
            config: &self.config,
            roles: self.roles,
        };
        let workers = self.config.max_in_flight.min(selected.len());
        if workers <= 1 {
            return selected.iter().map(|id| ctx.examine(iteration, id)).collect();
        }
        let next = AtomicUsize::new(0);
        let slots: Mutex<Vec<Option<ItemResult>>> = Mutex::new((0..selected.len()).map(|_| None).collect());
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let idx = next.fetch_add(1, Ordering::Relaxed);
                    if idx >= selected.len() {
                        break;
                    }
                    let result = ctx.examine(iteration, &selected[idx]);
                    slots.lock().unwrap()[idx] = Some(result);
                });
            }
        });
        slots
            .into_inner()
            .unwrap()
            .into_iter()
            .map(|r| r.expect("every item is processed"))
            .collect()
    }
}

struct ItemContext<'b> {
    pkg: &'b ParameterizedKG,
    reference: &'b Reference,
    config: &'b RunConfig,
    roles: Roles<'b>,
}

impl ItemContext<'_> {
    fn examine(&self, iteration: u64, edge_id: &EdgeId) -> ItemResult {
        let edge = self.pkg.edge(edge_id).expect("selected edge exists");
        let mut rng = derive_rng(
            self.config.seed,
            &[b"item", &iteration.to_le_bytes(), edge_id.as_str().as_bytes()],
        );
        let timestamp = || self.config.wall_clock.then(unix_now);
        let skip = |stage, error: String| {
            ItemResult::Skipped(SkipRecord {
                iteration,
                edge_id: edge_id.clone(),
                stage,
                error,
                timestamp: timestamp(),
            })
        };

        let (question, note) = match self.build_question(edge, &mut rng) {
            Ok(found) => found,
            Err(e) => return skip(SkipStage::Generation, e.to_string()),
        };
        let hint = match &question.kind {
            QuestionKind::Wh { .. } => AnswerHint {
                distractor: sample_negative(edge, &self.reference.sets, &mut rng)
                    .ok()
                    .and_then(|id| self.reference.entity(self.pkg, &id).map(|e| e.label.clone())),
            },
            QuestionKind::YesNo { .. } => AnswerHint::default(),
        };
        let raw_response = match self.roles.examinee.answer(&question, &hint) {
            Ok(text) => text,
            Err(e) => return ItemResult::Abort(e),
        };
        let (verdict, verification_mode) = match &question.kind {
            QuestionKind::YesNo { expected_answer, .. } => {
                (verify_yes_no(&raw_response, *expected_answer), VerificationMode::FirstToken)
            }
            QuestionKind::Wh { .. } => match verify_wh(&question, &raw_response, self.roles.judge) {
                Ok(v) => (v, VerificationMode::Judge),
                Err(e) => return skip(SkipStage::Judge, e.to_string()),
            },
        };
        ItemResult::Examined(Box::new(ExamRecord {
            seq: 0,
            iteration,
            edge_id: edge_id.clone(),
            question,
            raw_response,
            verdict,
            verification_mode,
            note,
            timestamp: timestamp(),
        }))
    }

    /// Draws the question kind and renders it. A No question without any
    /// negative becomes a Yes question; a Wh question whose every form names
    /// the answer becomes a Yes/No question.
    fn build_question(&self, edge: &Edge, rng: &mut StreamRng) -> Result<(Question, Option<String>), QuestionError> {
        let out_degree = self.pkg.out_degree(&edge.subject);
        let choice = choose_question_kind(self.config.mode, out_degree, rng);
        let render = |choice, rng: &mut StreamRng| {
            render_question(self.pkg, self.reference, edge, choice, self.roles.writer, rng)
        };
        let mut note = None;
        let first = match render(choice, rng) {
            Err(QuestionError::GoldLeak(_)) => {
                note = Some("wh-gold-leak".to_string());
                let polarity = rng.random_bool(0.5);
                render(KindChoice::YesNo { expected_answer: polarity }, rng)
            }
            other => other,
        };
        match first {
            Err(QuestionError::NegativePoolExhausted { .. }) => {
                let prefix = note.map(|n| format!("{n},")).unwrap_or_default();
                let q = render(KindChoice::YesNo { expected_answer: true }, rng)?;
                Ok((q, Some(format!("{prefix}negative-pool-exhausted"))))
            }
            other => other.map(|q| (q, note)),
        }
    }
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// Runs batches until the running metrics converge or the iteration cap is
/// reached. On failure the log gets an abort record and the partial outcome
/// is returned with the error.
pub fn run_evaluation(
    pkg: &mut ParameterizedKG,
    reference: &Reference,
    config: RunConfig,
    roles: Roles<'_>,
    sink: &mut dyn LogSink,
) -> Result<RunOutcome, RunAbort> {
    let cap = config.iterations;
    let mut eval = Evaluation::new(pkg, reference, config, roles, sink).map_err(|error| RunAbort {
        error,
        outcome: RunOutcome {
            run_id: String::new(),
            iterations_run: 0,
            stop: None,
            history: Vec::new(),
        },
    })?;
    while eval.iteration() < cap {
        if let Err(error) = eval.step() {
            let abort = LogRecord::Abort(AbortRecord {
                iteration: eval.iteration(),
                error: error.to_string(),
            });
            // best effort: the original error matters more than a failed abort line
            let _ = eval.sink.write(&abort).and_then(|_| eval.sink.flush());
            return Err(RunAbort {
                error,
                outcome: eval.outcome(None),
            });
        }
        if eval.converged() {
            return Ok(eval.outcome(Some(StopReason::Converged)));
        }
    }
    Ok(eval.outcome(Some(StopReason::IterationCap)))
}
