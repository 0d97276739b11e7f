use serde::{Deserialize, Serialize};

use crate::gateway::{GatewayError, Judge, JudgeRequest};
use crate::question::{Question, QuestionKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictReason {
    Matched,
    Mismatched,
    Refusal,
    JudgeYes,
    JudgeNo,
    JudgeUnparseable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub correct: bool,
    pub reason: VerdictReason,
}

impl Verdict {
    fn new(correct: bool, reason: VerdictReason) -> Self {
        Self { correct, reason }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerificationMode {
    FirstToken,
    Judge,
}

/// First alphanumeric run after leading whitespace, quotes, asterisks and
/// punctuation, lowercased.
pub fn first_word(text: &str) -> String {
    text.trim_start_matches(|c: char| !c.is_alphanumeric())
        .chars()
        .take_while(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

pub fn parse_yes_no(text: &str) -> Option<bool> {
    match first_word(text).as_str() {
        "yes" => Some(true),
        "no" => Some(false),
        _ => None,
    }
}

/// Yes/No answers are graded on their first word alone. Anything other than
/// yes or no, refusals included, is incorrect.
pub fn verify_yes_no(raw_response: &str, expected: bool) -> Verdict {
    match parse_yes_no(raw_response) {
        Some(said) if said == expected => Verdict::new(true, VerdictReason::Matched),
        Some(_) => Verdict::new(false, VerdictReason::Mismatched),
        None => Verdict::new(false, VerdictReason::Refusal),
    }
}

/// Wh answers are graded by the judge against every gold label and alias.
/// An unreadable judge reply is asked once more, then counted as incorrect.
pub fn verify_wh(question: &Question, raw_response: &str, judge: &dyn Judge) -> Result<Verdict, GatewayError> {
    let QuestionKind::Wh {
        gold_labels_and_aliases,
        ..
    } = &question.kind
    else {
        return Err(GatewayError::InvalidRequest("verify_wh needs a Wh question".into()));
    };
    if raw_response.trim().is_empty() {
        return Ok(Verdict::new(false, VerdictReason::Mismatched));
    }
    let request = JudgeRequest {
        question: question.text.clone(),
        answers: gold_labels_and_aliases.clone(),
        response: raw_response.to_string(),
    };
    for _ in 0..2 {
        match parse_yes_no(&judge.judge(&request)?) {
            Some(true) => return Ok(Verdict::new(true, VerdictReason::JudgeYes)),
            Some(false) => return Ok(Verdict::new(false, VerdictReason::JudgeNo)),
            None => continue,
        }
    }
    Ok(Verdict::new(false, VerdictReason::JudgeUnparseable))
}
