use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::RawStore;
use crate::pkg::{EdgeSpec, GraphSource, PredicateId};

/// Blocklist file: one predicate id per line, optionally followed by a
/// label; `#` starts a comment.
pub fn parse_blocklist(text: &str) -> BTreeSet<PredicateId> {
    text.lines()
        .filter_map(|line| {
            let line = line.split('#').next().unwrap_or("").trim();
            line.split_whitespace().next().map(PredicateId::from)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct Classified {
    pub source: GraphSource,
    pub active: usize,
    pub dead: usize,
}

/// Turns the store into graph input; edges with a blocklisted predicate are
/// dead. Edge ids are `subject-predicate-object`.
pub fn classify_edges(store: &RawStore, blocklist: &BTreeSet<PredicateId>) -> Classified {
    let mut active = 0;
    let mut dead = 0;
    let edges = store
        .triplets
        .iter()
        .map(|(s, p, o)| {
            let spec = EdgeSpec::new(format!("{s}-{p}-{o}"), s.clone(), p.clone(), o.clone());
            if blocklist.contains(p) {
                dead += 1;
                spec.dead()
            } else {
                active += 1;
                spec
            }
        })
        .collect();
    Classified {
        source: GraphSource {
            entities: store.entities.values().cloned().collect(),
            predicates: store.predicates.values().cloned().collect(),
            edges,
        },
        active,
        dead,
    }
}

/// Counts describing one graph build; the fixture manifest is one of these.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildReport {
    pub seeds: usize,
    pub queries: usize,
    pub bindings: usize,
    pub skipped_rows: usize,
    pub crawled_entities: usize,
    pub crawled_triplets: usize,
    pub entities: usize,
    pub predicates: usize,
    pub edges: usize,
    pub active_edges: usize,
    pub dead_edges: usize,
}
