//! Layered configuration: TOML file, then `KGPROBE_*` environment variables,
//! then command-line flags.
//!
//! Environment variables address keys by path: `KGPROBE_RUN__SEED=7` sets
//! `run.seed`, `KGPROBE_EXAMINEE__MODEL=gpt-4` sets `examinee.model`. Values
//! are read as TOML literals when they parse as one, else as strings.

use std::path::Path;

use anyhow::{Context, Result};
use kgprobe_core::exam::RunConfig;
use kgprobe_core::gateway::{ClientConfig, SimulatorConfig};
use kgprobe_core::ingest::{SparqlConfig, WalkConfig};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

pub const ENV_PREFIX: &str = "KGPROBE_";

/// Backend name per model role.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RoleNames {
    pub examinee: String,
    pub writer: String,
    pub judge: String,
}

impl Default for RoleNames {
    fn default() -> Self {
        Self {
            examinee: "simulated".into(),
            writer: "template".into(),
            judge: "gold-match".into(),
        }
    }
}

/// Entity filters as configured; the blocklist is a file path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterSettings {
    pub min_language_count: u64,
    pub require_alias: bool,
    pub min_mention_frequency: u64,
    pub blocklist: Option<String>,
}

impl Default for FilterSettings {
    fn default() -> Self {
        let d = kgprobe_core::ingest::FilterConfig::default();
        Self {
            min_language_count: d.min_language_count,
            require_alias: d.require_alias,
            min_mention_frequency: d.min_mention_frequency,
            blocklist: None,
        }
    }
}

/// Synthetic graph used by `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSettings {
    pub edges: usize,
    pub entities: Option<usize>,
    pub predicates: usize,
    pub years: usize,
    /// Draw every edge's error probability uniformly from [0, 1] instead of
    /// using `simulator.default_error_prob`.
    pub uniform_errors: bool,
}

impl Default for SynthSettings {
    fn default() -> Self {
        Self {
            edges: 1000,
            entities: None,
            predicates: 8,
            years: 5,
            uniform_errors: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AppConfig {
    pub run: RunConfig,
    pub roles: RoleNames,
    pub examinee: ClientConfig,
    pub generator: ClientConfig,
    pub judge: ClientConfig,
    pub simulator: SimulatorConfig,
    pub walk: WalkConfig,
    pub filters: FilterSettings,
    pub sparql: SparqlConfig,
    pub synth: SynthSettings,
}

fn merge(base: &mut Table, over: Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn literal(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Table built from `KGPROBE_SECTION__KEY` variables.
pub fn env_table<I>(vars: I) -> Table
where
    I: IntoIterator<Item = (String, String)>,
{
    let mut root = Table::new();
    for (name, raw) in vars {
        let Some(path) = name.strip_prefix(ENV_PREFIX) else {
            continue;
        };
        let keys: Vec<String> = path.split("__").map(|k| k.to_ascii_lowercase()).collect();
        if keys.iter().any(String::is_empty) {
            continue;
        }
        let mut nested = Table::new();
        let (last, parents) = keys.split_last().expect("non-empty");
        nested.insert(last.clone(), literal(&raw));
        for key in parents.iter().rev() {
            let mut outer = Table::new();
            outer.insert(key.clone(), Value::Table(nested));
            nested = outer;
        }
        merge(&mut root, nested);
    }
    root
}

impl AppConfig {
    /// File and environment layers; flags are applied by the caller.
    pub fn load<I>(file: Option<&Path>, env: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut table = match file {
            Some(path) => std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?
                .parse::<Table>()
                .with_context(|| format!("parsing config {}", path.display()))?,
            None => Table::new(),
        };
        merge(&mut table, env_table(env));
        Table::try_into(table).context("invalid configuration")
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).context("serializing configuration")
    }
}
