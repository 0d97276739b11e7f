//! Topic-graph construction from a SPARQL endpoint.
//!
//! Starting from hand-picked seed entities, each walk step queries the
//! triplets around the current frontier (seeds as subjects for a forward
//! step, as objects for a backward step), and the newly reached entities
//! form the next frontier. The crawled store is then filtered by entity
//! popularity signals, and edges whose predicate is on the curation
//! blocklist are marked dead.

mod classify;
mod filters;
mod fixture;
mod sparql;
mod walk;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pkg::{Entity, EntityId, PredicateDef, PredicateId};

pub use classify::{classify_edges, parse_blocklist, BuildReport, Classified};
pub use filters::{apply_entity_filters, mention_frequency};
pub use fixture::{FixtureEndpoint, FixtureWorld, WorldEntity, WorldPredicate};
pub use sparql::{
    execute_walk_step, fetch_aliases, fetch_language_counts, local_id, render_walk_query, HttpSparqlEndpoint,
    SparqlBinding, SparqlConfig, SparqlEndpoint, ALIASES_QUERY, BACKWARD_WALK_QUERY, FORWARD_WALK_QUERY,
    LANGUAGE_COUNTS_QUERY,
};
pub use walk::{build_graph, parse_seeds, WalkOutput};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("SPARQL endpoint unavailable after {attempts} attempts: {last_error}")]
    Unavailable { attempts: u32, last_error: String },
    #[error("SPARQL endpoint returned HTTP {status}: {body}")]
    Protocol { status: u16, body: String },
    #[error("malformed SPARQL response ({reason}): {excerpt}")]
    Malformed { reason: String, excerpt: String },
    #[error("walk frontier is empty")]
    EmptyFrontier,
    #[error("the walk produced no triplets")]
    EmptyGraph,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("fixture: {0}")]
    Fixture(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WalkConfig {
    pub seeds: Vec<EntityId>,
    pub steps: usize,
    /// LIMIT of each walk query.
    pub limit: usize,
    pub directions: Vec<Direction>,
    /// Frontier entities per query.
    pub chunk_size: usize,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            seeds: Vec::new(),
            steps: 3,
            limit: 1000,
            directions: vec![Direction::Forward, Direction::Backward],
            chunk_size: 50,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<(), IngestError> {
        if self.seeds.is_empty() {
            return Err(IngestError::Config("no seed entities".into()));
        }
        if self.steps == 0 || self.limit == 0 || self.chunk_size == 0 {
            return Err(IngestError::Config("steps, limit and chunk_size must be at least 1".into()));
        }
        if self.directions.is_empty() {
            return Err(IngestError::Config("no walk direction".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    pub min_language_count: u64,
    pub require_alias: bool,
    pub min_mention_frequency: u64,
    pub predicate_blocklist: BTreeSet<PredicateId>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            min_language_count: 2,
            require_alias: true,
            min_mention_frequency: 1,
            predicate_blocklist: BTreeSet::new(),
        }
    }
}

/// One row of a walk query, all nine projected fields present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawBinding {
    pub subject: EntityId,
    pub subject_label: String,
    pub subject_desc: String,
    pub predicate: PredicateId,
    pub predicate_label: String,
    pub predicate_desc: String,
    pub object: EntityId,
    pub object_label: String,
    pub object_desc: String,
}

pub type Triplet = (EntityId, PredicateId, EntityId);

/// Crawled triplets with entity and predicate metadata.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawStore {
    pub entities: BTreeMap<EntityId, Entity>,
    pub predicates: BTreeMap<PredicateId, PredicateDef>,
    pub triplets: BTreeSet<Triplet>,
}

impl RawStore {
    pub fn insert(&mut self, b: &RawBinding) -> bool {
        for (id, label, desc) in [
            (&b.subject, &b.subject_label, &b.subject_desc),
            (&b.object, &b.object_label, &b.object_desc),
        ] {
            self.entities.entry(id.clone()).or_insert_with(|| Entity {
                description: desc.clone(),
                ..Entity::new(id.clone(), label.clone())
            });
        }
        self.predicates.entry(b.predicate.clone()).or_insert_with(|| PredicateDef {
            id: b.predicate.clone(),
            label: b.predicate_label.clone(),
            description: b.predicate_desc.clone(),
        });
        self.triplets
            .insert((b.subject.clone(), b.predicate.clone(), b.object.clone()))
    }

    /// Drops entities and predicates no longer referenced by a triplet.
    pub fn prune(&mut self) {
        let mut used_entities = BTreeSet::new();
        let mut used_predicates = BTreeSet::new();
        for (s, p, o) in &self.triplets {
            used_entities.insert(s.clone());
            used_entities.insert(o.clone());
            used_predicates.insert(p.clone());
        }
        self.entities.retain(|id, _| used_entities.contains(id));
        self.predicates.retain(|id, _| used_predicates.contains(id));
    }
}

/// Walks, annotates, filters and classifies in one go.
pub fn build_topic_graph(
    endpoint: &dyn SparqlEndpoint,
    walk: &WalkConfig,
    filters: &FilterConfig,
) -> Result<(crate::pkg::GraphSource, BuildReport), IngestError> {
    let mut out = build_graph(endpoint, walk)?;
    out.annotate_groups();
    let ids: Vec<EntityId> = out.store.entities.keys().cloned().collect();
    let aliases = fetch_aliases(endpoint, &ids, walk.chunk_size)?;
    for (id, list) in aliases {
        if let Some(e) = out.store.entities.get_mut(&id) {
            e.aliases = list;
        }
    }
    let languages = fetch_language_counts(endpoint, &ids, walk.chunk_size)?;
    let frequency = mention_frequency(&out.store);
    let filtered = apply_entity_filters(&out.store, filters, &languages, &frequency);
    if filtered.triplets.is_empty() {
        return Err(IngestError::EmptyGraph);
    }
    let classified = classify_edges(&filtered, &filters.predicate_blocklist);
    let report = BuildReport {
        seeds: walk.seeds.len(),
        queries: out.queries,
        bindings: out.bindings,
        skipped_rows: out.skipped_rows,
        crawled_entities: out.store.entities.len(),
        crawled_triplets: out.store.triplets.len(),
        entities: filtered.entities.len(),
        predicates: filtered.predicates.len(),
        edges: filtered.triplets.len(),
        active_edges: classified.active,
        dead_edges: classified.dead,
    };
    Ok((classified.source, report))
}
