use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use log::{debug, warn};
use serde::Deserialize;
use serde_json::json;

use super::limiter::InFlightLimiter;
use super::retry::is_retryable_status;
use super::{validate_messages, ChatClient, ChatMessage, ClientConfig, GatewayError};

const BODY_EXCERPT: usize = 300;

/// Client for chat-completion endpoints: a role-tagged message array in,
/// a `choices` array out.
pub struct HttpChatClient {
    config: ClientConfig,
    http: reqwest::blocking::Client,
    limiter: InFlightLimiter,
    attempts: AtomicU64,
    last_retry_after: Mutex<Option<Duration>>,
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    #[serde(default)]
    content: Option<String>,
}

enum Attempt {
    Done(String),
    Retry { reason: String, retry_after: Option<Duration> },
    Fail(GatewayError),
}

impl HttpChatClient {
    pub fn new(config: ClientConfig) -> Result<Self, GatewayError> {
        config.validate()?;
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(config.timeout_secs))
            .build()
            .map_err(|e| GatewayError::InvalidRequest(format!("cannot build HTTP client: {e}")))?;
        Ok(Self {
            limiter: InFlightLimiter::new(config.max_in_flight),
            config,
            http,
            attempts: AtomicU64::new(0),
            last_retry_after: Mutex::new(None),
        })
    }

    pub fn config(&self) -> &ClientConfig {
        &self.config
    }

    /// Total HTTP attempts made by this client, retries included.
    pub fn attempts(&self) -> u64 {
        self.attempts.load(Ordering::Relaxed)
    }

    /// Most recent `Retry-After` hint seen from the endpoint.
    pub fn last_retry_after(&self) -> Option<Duration> {
        *self.last_retry_after.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn credential(&self) -> Result<Option<String>, GatewayError> {
        match &self.config.api_key_env {
            None => Ok(None),
            Some(var) => match std::env::var(var) {
                Ok(v) if !v.is_empty() => Ok(Some(v)),
                _ => Err(GatewayError::Credential(format!("environment variable {var} is not set"))),
            },
        }
    }

    fn attempt(&self, body: &serde_json::Value, key: Option<&str>) -> Attempt {
        self.attempts.fetch_add(1, Ordering::Relaxed);
        let mut request = self.http.post(self.config.url()).json(body);
        if let Some(key) = key {
            let value = if self.config.auth_scheme.is_empty() {
                key.to_owned()
            } else {
                format!("{} {key}", self.config.auth_scheme)
            };
            request = request.header(self.config.auth_header.as_str(), value);
        }
        let response = match request.send() {
            Ok(r) => r,
            Err(e) => {
                // transport errors (connect, timeout, reset) are transient
                return Attempt::Retry {
                    reason: format!("transport: {}", without_url(&e)),
                    retry_after: None,
                };
            }
        };
        let status = response.status().as_u16();
        let retry_after = response
            .headers()
            .get(reqwest::header::RETRY_AFTER)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().parse::<f64>().ok())
            .filter(|s| s.is_finite() && *s >= 0.0)
            .map(Duration::from_secs_f64);
        let text = response.text().unwrap_or_default();
        if (200..300).contains(&status) {
            return match parse_completion(&text) {
                Ok(content) => Attempt::Done(content),
                Err(e) => Attempt::Fail(e),
            };
        }
        if is_retryable_status(status) {
            Attempt::Retry {
                reason: format!("HTTP {status}"),
                retry_after,
            }
        } else {
            Attempt::Fail(GatewayError::Protocol {
                status,
                body: excerpt(&text),
            })
        }
    }
}

impl ChatClient for HttpChatClient {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String, GatewayError> {
        validate_messages(messages)?;
        let key = self.credential()?;
        let mut body = json!({
            "model": self.config.model,
            "messages": messages,
        });
        if let Some(t) = self.config.temperature {
            body["temperature"] = json!(t);
        }

        let _permit = self.limiter.acquire();
        let mut retry = 0u32;
        loop {
            match self.attempt(&body, key.as_deref()) {
                Attempt::Done(text) => return Ok(text),
                Attempt::Fail(e) => return Err(e),
                Attempt::Retry { reason, retry_after } => {
                    if retry_after.is_some() {
                        *self.last_retry_after.lock().unwrap_or_else(|e| e.into_inner()) = retry_after;
                    }
                    if retry >= self.config.max_retries {
                        warn!("{}: giving up after {} attempts ({reason})", self.config.model, retry + 1);
                        return Err(GatewayError::Unavailable {
                            attempts: retry + 1,
                            last_error: reason,
                            retry_after,
                        });
                    }
                    let backoff = self.config.backoff.delay(retry, &mut rand::rng());
                    let wait = retry_after.map_or(backoff, |hint| hint.max(backoff));
                    debug!(
                        "{}: attempt {} failed ({reason}); retrying in {:?}",
                        self.config.model,
                        retry + 1,
                        wait
                    );
                    std::thread::sleep(wait);
                    retry += 1;
                }
            }
        }
    }
}

fn parse_completion(text: &str) -> Result<String, GatewayError> {
    let parsed: CompletionResponse =
        serde_json::from_str(text).map_err(|e| GatewayError::MalformedResponse(format!("{e}: {}", excerpt(text))))?;
    parsed
        .choices
        .into_iter()
        .next()
        .and_then(|c| c.message.content)
        .ok_or_else(|| GatewayError::MalformedResponse(format!("no message content: {}", excerpt(text))))
}

fn excerpt(text: &str) -> String {
    match text.char_indices().nth(BODY_EXCERPT) {
        Some((idx, _)) => format!("{}...", &text[..idx]),
        None => text.to_owned(),
    }
}

fn without_url(e: &reqwest::Error) -> String {
    // the URL never carries the credential, but keep messages short
    let mut msg = e.to_string();
    if let Some(url) = e.url() {
        msg = msg.replace(url.as_str(), "<endpoint>");
    }
    msg
}
