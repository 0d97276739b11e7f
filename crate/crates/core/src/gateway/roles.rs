use super::{ChatClient, GatewayError};
use crate::prompts::{PromptTemplate, JUDGE_SIGNAL, WH_ANSWER, YES_NO_ANSWER};
use crate::question::{Question, QuestionKind};

/// Extra material an offline examinee may use to produce a wrong answer.
/// Live examinees ignore it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnswerHint {
    pub distractor: Option<String>,
}

pub trait Examinee: Send + Sync {
    fn answer(&self, question: &Question, hint: &AnswerHint) -> Result<String, GatewayError>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JudgeRequest {
    pub question: String,
    pub answers: Vec<String>,
    pub response: String,
}

/// Returns the judge's raw reply; parsing is left to the verifier.
pub trait Judge: Send + Sync {
    fn judge(&self, request: &JudgeRequest) -> Result<String, GatewayError>;
}

/// Examinee backed by a chat model, prompted with the few-shot answer turns.
pub struct ChatExaminee<C> {
    client: C,
    yes_no: PromptTemplate,
    wh: PromptTemplate,
}

impl<C: ChatClient> ChatExaminee<C> {
    pub fn new(client: C) -> Self {
        Self {
            client,
            yes_no: PromptTemplate::parse(YES_NO_ANSWER),
            wh: PromptTemplate::parse(WH_ANSWER),
        }
    }
}

impl<C: ChatClient> Examinee for ChatExaminee<C> {
    fn answer(&self, question: &Question, _hint: &AnswerHint) -> Result<String, GatewayError> {
        let template = match question.kind {
            QuestionKind::YesNo { .. } => &self.yes_no,
            QuestionKind::Wh { .. } => &self.wh,
        };
        self.client.complete(&template.render(&[("question", &question.text)]))
    }
}

pub struct ChatJudge<C> {
    client: C,
    template: PromptTemplate,
}

impl<C: ChatClient> ChatJudge<C> {
    pub fn new(client: C) -> Self {
        Self {
            client,
            template: PromptTemplate::parse(JUDGE_SIGNAL),
        }
    }
}

impl<C: ChatClient> Judge for ChatJudge<C> {
    fn judge(&self, request: &JudgeRequest) -> Result<String, GatewayError> {
        let answers = request.answers.join(", ");
        self.client.complete(&self.template.render(&[
            ("question", &request.question),
            ("answers", &answers),
            ("response", &request.response),
        ]))
    }
}

/// Offline judge: "yes" when the response mentions any gold label or alias,
/// case-insensitively.
#[derive(Debug, Clone, Copy, Default)]
pub struct GoldMatchJudge;

impl Judge for GoldMatchJudge {
    fn judge(&self, request: &JudgeRequest) -> Result<String, GatewayError> {
        let response = request.response.to_lowercase();
        let hit = request
            .answers
            .iter()
            .filter(|a| !a.trim().is_empty())
            .any(|a| response.contains(&a.to_lowercase()));
        Ok(if hit { "yes" } else { "no" }.to_string())
    }
}
