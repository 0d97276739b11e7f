use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{Direction, IngestError, RawBinding};
use crate::gateway::{is_retryable_status, BackoffPolicy};
use crate::pkg::EntityId;

pub const FORWARD_WALK_QUERY: &str = include_str!("../../assets/queries/forward_walk.rq");
pub const BACKWARD_WALK_QUERY: &str = include_str!("../../assets/queries/backward_walk.rq");
pub const ALIASES_QUERY: &str = include_str!("../../assets/queries/aliases.rq");
pub const LANGUAGE_COUNTS_QUERY: &str = include_str!("../../assets/queries/language_counts.rq");

const EXCERPT: usize = 300;

/// Variable name to bound value (URI or literal lexical form).
pub type SparqlBinding = BTreeMap<String, String>;

pub trait SparqlEndpoint: Send + Sync {
    fn select(&self, query: &str) -> Result<Vec<SparqlBinding>, IngestError>;
}

fn excerpt(text: &str) -> String {
    text.chars().take(EXCERPT).collect()
}

#[derive(Deserialize)]
struct ResultsDoc {
    results: ResultsBody,
}

#[derive(Deserialize)]
struct ResultsBody {
    bindings: Vec<BTreeMap<String, Term>>,
}

#[derive(Deserialize)]
struct Term {
    value: String,
}

/// Parses the SPARQL 1.1 JSON results format.
pub fn parse_results(text: &str) -> Result<Vec<SparqlBinding>, IngestError> {
    let doc: ResultsDoc = serde_json::from_str(text).map_err(|e| IngestError::Malformed {
        reason: e.to_string(),
        excerpt: excerpt(text),
    })?;
    Ok(doc
        .results
        .bindings
        .into_iter()
        .map(|row| row.into_iter().map(|(k, v)| (k, v.value)).collect())
        .collect())
}

/// Last path or fragment segment of a URI: `.../entity/Q30` -> `Q30`.
pub fn local_id(uri: &str) -> &str {
    uri.rsplit(['/', '#']).next().unwrap_or(uri)
}

fn entity_term(id: &EntityId) -> String {
    let id = id.as_str();
    if id.contains("://") {
        format!("<{id}>")
    } else if id.contains(':') {
        id.to_string()
    } else {
        format!("wd:{id}")
    }
}

fn values_block(ids: &[EntityId]) -> String {
    ids.iter().map(entity_term).collect::<Vec<_>>().join(" ")
}

pub fn render_walk_query(direction: Direction, frontier: &[EntityId], limit: usize) -> String {
    let template = match direction {
        Direction::Forward => FORWARD_WALK_QUERY,
        Direction::Backward => BACKWARD_WALK_QUERY,
    };
    template
        .replace("{values}", &values_block(frontier))
        .replace("{limit}", &limit.to_string())
}

fn to_raw(row: &SparqlBinding) -> Option<RawBinding> {
    let get = |k: &str| row.get(k).cloned();
    Some(RawBinding {
        subject: local_id(&get("subject")?).into(),
        subject_label: get("subjectLabel")?,
        subject_desc: get("subjectDesc")?,
        predicate: local_id(&get("predicate")?).into(),
        predicate_label: get("predicateLabel")?,
        predicate_desc: get("predicateDesc")?,
        object: local_id(&get("object")?).into(),
        object_label: get("objectLabel")?,
        object_desc: get("objectDesc")?,
    })
}

/// One walk query around `frontier`. Rows missing any projected field are
/// dropped and counted in the second return value.
pub fn execute_walk_step(
    endpoint: &dyn SparqlEndpoint,
    frontier: &[EntityId],
    direction: Direction,
    limit: usize,
) -> Result<(Vec<RawBinding>, usize), IngestError> {
    if frontier.is_empty() {
        return Err(IngestError::EmptyFrontier);
    }
    let rows = endpoint.select(&render_walk_query(direction, frontier, limit))?;
    let mut skipped = 0;
    let mut bindings = Vec::with_capacity(rows.len());
    for row in &rows {
        match to_raw(row) {
            Some(b) => bindings.push(b),
            None => skipped += 1,
        }
    }
    Ok((bindings, skipped))
}

/// English aliases per entity, in result order without duplicates.
pub fn fetch_aliases(
    endpoint: &dyn SparqlEndpoint,
    ids: &[EntityId],
    chunk_size: usize,
) -> Result<BTreeMap<EntityId, Vec<String>>, IngestError> {
    let mut out: BTreeMap<EntityId, Vec<String>> = BTreeMap::new();
    for chunk in ids.chunks(chunk_size.max(1)) {
        let query = ALIASES_QUERY.replace("{values}", &values_block(chunk));
        for row in endpoint.select(&query)? {
            if let (Some(entity), Some(alias)) = (row.get("entity"), row.get("alias")) {
                let list = out.entry(local_id(entity).into()).or_default();
                if !list.contains(alias) {
                    list.push(alias.clone());
                }
            }
        }
    }
    Ok(out)
}

pub fn fetch_language_counts(
    endpoint: &dyn SparqlEndpoint,
    ids: &[EntityId],
    chunk_size: usize,
) -> Result<BTreeMap<EntityId, u64>, IngestError> {
    let mut out = BTreeMap::new();
    for chunk in ids.chunks(chunk_size.max(1)) {
        let query = LANGUAGE_COUNTS_QUERY.replace("{values}", &values_block(chunk));
        for row in endpoint.select(&query)? {
            let (Some(entity), Some(count)) = (row.get("entity"), row.get("languages")) else {
                continue;
            };
            let count = count.parse::<u64>().map_err(|_| IngestError::Malformed {
                reason: "language count is not an integer".into(),
                excerpt: excerpt(count),
            })?;
            out.insert(local_id(entity).into(), count);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SparqlConfig {
    pub endpoint: String,
    pub timeout_secs: f64,
    pub max_retries: u32,
    pub user_agent: String,
    pub backoff: BackoffPolicy,
}

impl Default for SparqlConfig {
    fn default() -> Self {
        Self {
            endpoint: "https://query.wikidata.org/sparql".into(),
            timeout_secs: 60.0,
            max_retries: 5,
            user_agent: concat!("kgprobe/", env!("CARGO_PKG_VERSION")).into(),
            backoff: BackoffPolicy::default(),
        }
    }
}

/// SPARQL protocol over HTTP GET with JSON results.
pub struct HttpSparqlEndpoint {
    config: SparqlConfig,
    http: reqwest::blocking::Client,
}

impl HttpSparqlEndpoint {
    pub fn new(config: SparqlConfig) -> Result<Self, IngestError> {
        if !(config.timeout_secs > 0.0 && config.timeout_secs.is_finite()) {
            return Err(IngestError::Config("timeout must be > 0".into()));
        }
        reqwest::Url::parse(&config.endpoint)
            .map_err(|e| IngestError::Config(format!("bad endpoint URL: {e}")))?;
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(config.timeout_secs))
            .user_agent(config.user_agent.clone())
            .build()
            .map_err(|e| IngestError::Config(format!("cannot build HTTP client: {e}")))?;
        Ok(Self { config, http })
    }
}

impl SparqlEndpoint for HttpSparqlEndpoint {
    fn select(&self, query: &str) -> Result<Vec<SparqlBinding>, IngestError> {
        let mut url = reqwest::Url::parse(&self.config.endpoint).expect("validated in new");
        url.query_pairs_mut().append_pair("query", query);
        let mut rng = rand::rng();
        let mut retry = 0u32;
        loop {
            let last_error = match self
                .http
                .get(url.clone())
                .header(reqwest::header::ACCEPT, "application/sparql-results+json")
                .send()
            {
                Ok(response) => {
                    let status = response.status().as_u16();
                    let text = response.text().unwrap_or_default();
                    if (200..300).contains(&status) {
                        return parse_results(&text);
                    }
                    if !is_retryable_status(status) {
                        return Err(IngestError::Protocol {
                            status,
                            body: excerpt(&text),
                        });
                    }
                    format!("HTTP {status}")
                }
                Err(e) => format!("transport: {}", e.without_url()),
            };
            if retry >= self.config.max_retries {
                return Err(IngestError::Unavailable {
                    attempts: retry + 1,
                    last_error,
                });
            }
            let delay = self.config.backoff.delay(retry, &mut rng);
            log::warn!("SPARQL request failed ({last_error}); retrying in {delay:?}");
            std::thread::sleep(delay);
            retry += 1;
        }
    }
}
