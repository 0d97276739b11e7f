//! Chat-style text generation for the three roles of an evaluation run:
//! the examinee under test, the question writer and the Wh-answer judge.
//!
//! Everything speaks the same [`ChatClient`] interface. The role traits
//! ([`Examinee`], [`Judge`]) adapt a chat client to its role, and offline
//! implementations ([`SimulatedExaminee`], [`GoldMatchJudge`]) stand in for
//! live models in tests and convergence studies.

mod http;
mod limiter;
mod retry;
mod roles;
mod scripted;
mod simulated;

use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use http::HttpChatClient;
pub use retry::{is_retryable_status, BackoffPolicy};
pub use roles::{AnswerHint, ChatExaminee, ChatJudge, Examinee, GoldMatchJudge, Judge, JudgeRequest};
pub use scripted::ScriptedChatClient;
pub use simulated::{SimulatedExaminee, SimulatorConfig, REFUSAL_PHRASES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChatRole {
    System,
    User,
    Assistant,
}

impl fmt::Display for ChatRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChatRole::System => "system",
            ChatRole::User => "user",
            ChatRole::Assistant => "assistant",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: ChatRole,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self {
            role: ChatRole::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: ChatRole::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self {
            role: ChatRole::Assistant,
            content: content.into(),
        }
    }
}

/// Checks the request-level invariants shared by every client.
pub fn validate_messages(messages: &[ChatMessage]) -> Result<(), GatewayError> {
    if messages.is_empty() {
        return Err(GatewayError::InvalidRequest("no messages".into()));
    }
    for (idx, m) in messages.iter().enumerate() {
        if m.role != ChatRole::System && m.content.trim().is_empty() {
            return Err(GatewayError::InvalidRequest(format!("message {idx} ({}) is empty", m.role)));
        }
    }
    Ok(())
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GatewayError {
    #[error("endpoint unavailable after {attempts} attempts: {last_error}")]
    Unavailable {
        attempts: u32,
        last_error: String,
        /// Server-provided hint from the last rate-limited response.
        retry_after: Option<Duration>,
    },
    #[error("protocol error: HTTP {status}: {body}")]
    Protocol { status: u16, body: String },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("credential error: {0}")]
    Credential(String),
    #[error("malformed response: {0}")]
    MalformedResponse(String),
}

/// Anything that turns a chat transcript into one reply.
pub trait ChatClient: Send + Sync {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String, GatewayError>;
}

impl<T: ChatClient + ?Sized> ChatClient for std::sync::Arc<T> {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String, GatewayError> {
        (**self).complete(messages)
    }
}

impl<T: ChatClient + ?Sized> ChatClient for Box<T> {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String, GatewayError> {
        (**self).complete(messages)
    }
}

/// Connection settings for an HTTP chat-completion endpoint.
///
/// The credential is referenced by environment-variable name and read at
/// request time; the secret itself is never stored or serialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClientConfig {
    pub endpoint: String,
    pub path: String,
    pub model: String,
    pub api_key_env: Option<String>,
    pub auth_header: String,
    pub auth_scheme: String,
    pub timeout_secs: f64,
    pub max_retries: u32,
    pub max_in_flight: usize,
    pub temperature: Option<f64>,
    pub backoff: BackoffPolicy,
}

impl Default for ClientConfig {
    fn default() -> Self {
        Self {
            endpoint: "https://api.openai.com".into(),
            path: "/v1/chat/completions".into(),
            model: "gpt-4".into(),
            api_key_env: Some("OPENAI_API_KEY".into()),
            auth_header: "Authorization".into(),
            auth_scheme: "Bearer".into(),
            timeout_secs: 60.0,
            max_retries: 5,
            max_in_flight: 8,
            temperature: None,
            backoff: BackoffPolicy::default(),
        }
    }
}

impl ClientConfig {
    pub fn validate(&self) -> Result<(), GatewayError> {
        if !(self.timeout_secs > 0.0 && self.timeout_secs.is_finite()) {
            return Err(GatewayError::InvalidRequest("timeout must be > 0".into()));
        }
        if self.max_in_flight == 0 {
            return Err(GatewayError::InvalidRequest("max_in_flight must be >= 1".into()));
        }
        Ok(())
    }

    pub fn url(&self) -> String {
        format!("{}{}", self.endpoint.trim_end_matches('/'), self.path)
    }

    /// Judge default: deterministic decoding.
    pub fn for_judge(mut self) -> Self {
        self.temperature.get_or_insert(0.0);
        self
    }

    /// Question-writer default: mildly sampled so repeated questions vary.
    pub fn for_generator(mut self) -> Self {
        self.temperature.get_or_insert(0.7);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_transcripts_are_rejected() {
        assert!(validate_messages(&[]).is_err());
        assert!(validate_messages(&[ChatMessage::user("  ")]).is_err());
        assert!(validate_messages(&[ChatMessage::system(""), ChatMessage::user("hi")]).is_ok());
    }

    #[test]
    fn config_rejects_nonpositive_timeout() {
        let cfg = ClientConfig {
            timeout_secs: 0.0,
            ..ClientConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn serialized_config_names_the_variable_only() {
        let cfg = ClientConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        assert!(text.contains("OPENAI_API_KEY"));
        assert_eq!(cfg.clone().for_judge().temperature, Some(0.0));
        assert_eq!(cfg.for_generator().temperature, Some(0.7));
    }
}
