//! Few-shot prompt templates.
//!
//! Each template is a text asset made of turns introduced by `[system]`,
//! `[user]` or `[assistant]` lines. Slot markers such as `<question>` are
//! substituted when the template is rendered.

use crate::gateway::{ChatMessage, ChatRole};

pub const JUDGE_SIGNAL: &str = include_str!("../assets/prompts/judge_signal.txt");
pub const YES_NO_GENERATION: &str = include_str!("../assets/prompts/yes_no_question_generation.txt");
pub const WH_GENERATION: &str = include_str!("../assets/prompts/generative_question_generation.txt");
pub const YES_NO_ANSWER: &str = include_str!("../assets/prompts/yes_no_question_answer.txt");
pub const WH_ANSWER: &str = include_str!("../assets/prompts/generative_question_answer.txt");

#[derive(Debug, Clone, PartialEq)]
pub struct PromptTemplate {
    turns: Vec<ChatMessage>,
}

impl PromptTemplate {
    /// Parses the turn-tagged asset format. Panics on a malformed asset, which
    /// can only happen if a bundled file is edited incorrectly.
    pub fn parse(text: &str) -> Self {
        let mut turns: Vec<ChatMessage> = Vec::new();
        let mut current: Option<(ChatRole, Vec<&str>)> = None;
        for line in text.lines() {
            let role = match line.trim_end() {
                "[system]" => Some(ChatRole::System),
                "[user]" => Some(ChatRole::User),
                "[assistant]" => Some(ChatRole::Assistant),
                _ => None,
            };
            match (role, current.as_mut()) {
                (Some(role), _) => {
                    if let Some((r, lines)) = current.take() {
                        turns.push(ChatMessage {
                            role: r,
                            content: lines.join("\n"),
                        });
                    }
                    current = Some((role, Vec::new()));
                }
                (None, Some((_, lines))) => lines.push(line),
                (None, None) => assert!(line.trim().is_empty(), "prompt text before first turn tag"),
            }
        }
        if let Some((r, lines)) = current {
            turns.push(ChatMessage {
                role: r,
                content: lines.join("\n"),
            });
        }
        assert!(!turns.is_empty(), "prompt asset has no turns");
        Self { turns }
    }

    pub fn turns(&self) -> &[ChatMessage] {
        &self.turns
    }

    /// Substitutes `<name>` markers with the given values.
    pub fn render(&self, slots: &[(&str, &str)]) -> Vec<ChatMessage> {
        self.turns
            .iter()
            .map(|turn| {
                let mut content = turn.content.clone();
                for (name, value) in slots {
                    content = content.replace(&format!("<{name}>"), value);
                }
                ChatMessage {
                    role: turn.role,
                    content,
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_assets_parse() {
        for (asset, turns) in [
            (JUDGE_SIGNAL, 6),
            (YES_NO_GENERATION, 6),
            (WH_GENERATION, 6),
            (YES_NO_ANSWER, 6),
            (WH_ANSWER, 6),
        ] {
            let t = PromptTemplate::parse(asset);
            assert_eq!(t.turns().len(), turns);
            assert_eq!(t.turns()[0].role, ChatRole::System);
            assert_eq!(t.turns().last().unwrap().role, ChatRole::User);
        }
    }

    #[test]
    fn slots_fill_the_final_turn() {
        let t = PromptTemplate::parse(JUDGE_SIGNAL);
        let msgs = t.render(&[("question", "Q?"), ("answers", "a, b"), ("response", "r")]);
        assert_eq!(msgs.last().unwrap().content, "QUESTION: Q?\nANSWERS: a, b\nRESPONSE: r");
        assert_eq!(
            msgs[0].content,
            "Given a question and its correct answers, please judge whether a response is correct or not, only reply with yes or no."
        );
    }

    #[test]
    fn demonstrations_are_kept_verbatim() {
        let t = PromptTemplate::parse(YES_NO_GENERATION);
        assert_eq!(
            t.turns()[1].content,
            "SUBJECT is Joroud, PREDICT is place of birth, OBJECT is Gamla Uppsala, SUBJECT_ALIAS is Jörundr"
        );
        assert_eq!(t.turns()[2].content, "Is Gamla Uppsala the birth place of Jorund (also known as Jörundr)?");
    }
}
