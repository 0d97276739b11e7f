//! Exam items built from sampled edges.
//!
//! A Yes/No question presents either the edge's own object (expected "yes")
//! or a hard negative: an object seen with the same predicate elsewhere but
//! not true for this subject (expected "no"). A Wh question asks for the
//! object and is only used when the subject has fewer than ten outgoing
//! edges, so the full answer set stays small.

mod answer_sets;
mod kind;
mod render;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gateway::GatewayError;
use crate::pkg::{EdgeId, EntityId};

pub use answer_sets::{sample_negative, AnswerSets, Reference};
pub use kind::{choose_question_kind, ExamMode, KindChoice, WH_OUT_DEGREE_LIMIT};
pub use render::{
    render_question, template_text, ChatQuestionWriter, QuestionSlots, QuestionWriter, TemplateWriter, WriterKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenerationMode {
    Llm,
    Template,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum QuestionKind {
    YesNo {
        expected_answer: bool,
        presented_object: EntityId,
    },
    Wh {
        gold_objects: BTreeSet<EntityId>,
        gold_labels_and_aliases: Vec<String>,
    },
}

impl QuestionKind {
    pub fn is_wh(&self) -> bool {
        matches!(self, QuestionKind::Wh { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub edge_id: EdgeId,
    pub kind: QuestionKind,
    pub text: String,
    pub generation_mode: GenerationMode,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuestionError {
    #[error("no negative object available for ({subject}, {predicate})")]
    NegativePoolExhausted { subject: EntityId, predicate: String },
    #[error("question generation unavailable: {0}")]
    GenerationUnavailable(#[from] GatewayError),
    #[error("every surface form of the Wh question for edge {0} reveals a gold answer")]
    GoldLeak(EdgeId),
    #[error("unknown entity `{0}`")]
    UnknownEntity(EntityId),
    #[error("unknown edge `{0}`")]
    UnknownEdge(EdgeId),
}
