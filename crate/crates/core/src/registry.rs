//! Named backends for the three model roles, selected at run time.
//!
//! Each role has a registry mapping a backend name to a factory. The
//! built-in names are `simulated` and `http` for the examinee, `template`
//! and `http` for the question writer, and `gold-match` and `http` for the
//! judge. Callers may register more, e.g. scripted clients in tests.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::gateway::{
    ChatExaminee, ChatJudge, ClientConfig, Examinee, GatewayError, GoldMatchJudge, HttpChatClient, Judge,
    SimulatedExaminee, SimulatorConfig,
};
use crate::question::{ChatQuestionWriter, QuestionWriter, TemplateWriter};

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("unknown {role} backend `{name}` (available: {available})")]
    Unknown {
        role: &'static str,
        name: String,
        available: String,
    },
    #[error(transparent)]
    Backend(#[from] GatewayError),
}

/// Settings every factory may draw on.
#[derive(Debug, Clone, Default)]
pub struct BackendContext {
    pub examinee: ClientConfig,
    pub generator: ClientConfig,
    pub judge: ClientConfig,
    pub simulator: SimulatorConfig,
}

type Factory<T> = Box<dyn Fn(&BackendContext) -> Result<Arc<T>, RegistryError> + Send + Sync>;

pub struct Registry<T: ?Sized> {
    role: &'static str,
    factories: BTreeMap<String, Factory<T>>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(role: &'static str) -> Self {
        Self {
            role,
            factories: BTreeMap::new(),
        }
    }

    /// Adds or replaces a backend.
    pub fn register<F>(&mut self, name: &str, factory: F)
    where
        F: Fn(&BackendContext) -> Result<Arc<T>, RegistryError> + Send + Sync + 'static,
    {
        self.factories.insert(name.to_string(), Box::new(factory));
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(String::as_str).collect()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(name)
    }

    pub fn create(&self, name: &str, ctx: &BackendContext) -> Result<Arc<T>, RegistryError> {
        let factory = self.factories.get(name).ok_or_else(|| RegistryError::Unknown {
            role: self.role,
            name: name.to_string(),
            available: self.names().join(", "),
        })?;
        factory(ctx)
    }
}

pub struct Backends {
    pub examinees: Registry<dyn Examinee>,
    pub writers: Registry<dyn QuestionWriter>,
    pub judges: Registry<dyn Judge>,
}

impl Default for Backends {
    fn default() -> Self {
        let mut examinees: Registry<dyn Examinee> = Registry::new("examinee");
        examinees.register("simulated", |ctx| Ok(Arc::new(SimulatedExaminee::new(ctx.simulator.clone())?)));
        examinees.register("http", |ctx| {
            Ok(Arc::new(ChatExaminee::new(HttpChatClient::new(ctx.examinee.clone())?)))
        });

        let mut writers: Registry<dyn QuestionWriter> = Registry::new("question writer");
        writers.register("template", |_| Ok(Arc::new(TemplateWriter)));
        writers.register("http", |ctx| {
            Ok(Arc::new(ChatQuestionWriter::new(HttpChatClient::new(ctx.generator.clone().for_generator())?)))
        });

        let mut judges: Registry<dyn Judge> = Registry::new("judge");
        judges.register("gold-match", |_| Ok(Arc::new(GoldMatchJudge)));
        judges.register("http", |ctx| Ok(Arc::new(ChatJudge::new(HttpChatClient::new(ctx.judge.clone().for_judge())?))));

        Self {
            examinees,
            writers,
            judges,
        }
    }
}
