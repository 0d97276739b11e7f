use rand::Rng;
use serde::{Deserialize, Serialize};

/// Subjects with this many outgoing edges or more only get Yes/No questions.
pub const WH_OUT_DEGREE_LIMIT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ExamMode {
    /// Yes/No questions only.
    Easy,
    /// Fair coin between Yes/No and Wh.
    Hard,
}

impl std::str::FromStr for ExamMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "EASY" => Ok(ExamMode::Easy),
            "HARD" => Ok(ExamMode::Hard),
            other => Err(format!("unknown mode `{other}` (expected EASY or HARD)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KindChoice {
    YesNo { expected_answer: bool },
    Wh,
}

/// Picks the question type for one edge.
///
/// HARD mode flips a fair coin for the type; subjects at or above the
/// out-degree limit are forced to Yes/No without re-weighting. Yes/No
/// questions get a second fair coin for the expected polarity.
pub fn choose_question_kind<R: Rng + ?Sized>(mode: ExamMode, out_degree: usize, rng: &mut R) -> KindChoice {
    if mode == ExamMode::Hard {
        let wants_wh = rng.random_bool(0.5);
        if wants_wh && out_degree < WH_OUT_DEGREE_LIMIT {
            return KindChoice::Wh;
        }
    }
    KindChoice::YesNo {
        expected_answer: rng.random_bool(0.5),
    }
}
