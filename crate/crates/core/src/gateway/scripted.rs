use std::collections::VecDeque;
use std::sync::{Arc, Mutex};

use super::{validate_messages, ChatClient, ChatMessage, GatewayError};

#[derive(Debug, Default)]
struct State {
    replies: VecDeque<Result<String, GatewayError>>,
    last: Option<Result<String, GatewayError>>,
    requests: Vec<Vec<ChatMessage>>,
}

/// Offline chat client replaying a fixed script. Once the script runs out the
/// final reply is repeated. Clones share the script and the request record.
#[derive(Debug, Clone, Default)]
pub struct ScriptedChatClient {
    state: Arc<Mutex<State>>,
}

impl ScriptedChatClient {
    pub fn new<I, S>(replies: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::from_results(replies.into_iter().map(|s| Ok(s.into())))
    }

    pub fn failing(error: GatewayError) -> Self {
        Self::from_results([Err(error)])
    }

    pub fn from_results<I>(replies: I) -> Self
    where
        I: IntoIterator<Item = Result<String, GatewayError>>,
    {
        Self {
            state: Arc::new(Mutex::new(State {
                replies: replies.into_iter().collect(),
                ..State::default()
            })),
        }
    }

    /// Every transcript sent so far, in call order.
    pub fn requests(&self) -> Vec<Vec<ChatMessage>> {
        self.state.lock().unwrap().requests.clone()
    }
}

impl ChatClient for ScriptedChatClient {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String, GatewayError> {
        validate_messages(messages)?;
        let mut state = self.state.lock().unwrap();
        state.requests.push(messages.to_vec());
        let reply = match state.replies.pop_front() {
            Some(r) => {
                state.last = Some(r.clone());
                r
            }
            None => state
                .last
                .clone()
                .unwrap_or_else(|| Err(GatewayError::MalformedResponse("empty script".into()))),
        };
        reply
    }
}
