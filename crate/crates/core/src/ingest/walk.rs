use std::collections::{BTreeMap, BTreeSet};

use super::sparql::{execute_walk_step, SparqlEndpoint};
use super::{Direction, IngestError, RawStore, WalkConfig};
use crate::pkg::{EntityId, GroupValue};

#[derive(Debug, Clone, Default)]
pub struct WalkOutput {
    pub store: RawStore,
    /// Seed through which each entity was first reached.
    pub origin: BTreeMap<EntityId, EntityId>,
    /// Walk step at which each entity was first reached (seeds at 0).
    pub hops: BTreeMap<EntityId, usize>,
    pub queries: usize,
    pub bindings: usize,
    pub skipped_rows: usize,
}

impl WalkOutput {
    /// Records `seed` and `hops` as entity groups.
    pub fn annotate_groups(&mut self) {
        for (id, entity) in self.store.entities.iter_mut() {
            if let Some(seed) = self.origin.get(id) {
                entity.groups.insert("seed".into(), GroupValue::Text(seed.to_string()));
            }
            if let Some(h) = self.hops.get(id) {
                entity.groups.insert("hops".into(), GroupValue::Integer(*h as i64));
            }
        }
    }
}

/// Seeds file: one entity id per line, optionally followed by a label;
/// `#` starts a comment. Order is kept, duplicates dropped.
pub fn parse_seeds(text: &str) -> Vec<EntityId> {
    let mut seeds: Vec<EntityId> = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        if let Some(id) = line.split_whitespace().next() {
            let id = EntityId::from(id);
            if !seeds.contains(&id) {
                seeds.push(id);
            }
        }
    }
    seeds
}

/// Expands the seeds for `steps` rounds. Each round queries the current
/// frontier in every configured direction; entities seen for the first time
/// form the next frontier.
pub fn build_graph(endpoint: &dyn SparqlEndpoint, walk: &WalkConfig) -> Result<WalkOutput, IngestError> {
    walk.validate()?;
    let mut out = WalkOutput::default();
    let mut frontier: Vec<EntityId> = Vec::new();
    for seed in &walk.seeds {
        if out.origin.insert(seed.clone(), seed.clone()).is_none() {
            out.hops.insert(seed.clone(), 0);
            frontier.push(seed.clone());
        }
    }
    for step in 1..=walk.steps {
        let mut next = BTreeSet::new();
        for &direction in &walk.directions {
            for chunk in frontier.chunks(walk.chunk_size) {
                let (rows, skipped) = execute_walk_step(endpoint, chunk, direction, walk.limit)?;
                out.queries += 1;
                out.bindings += rows.len();
                out.skipped_rows += skipped;
                for row in rows {
                    let (anchor, reached) = match direction {
                        Direction::Forward => (&row.subject, &row.object),
                        Direction::Backward => (&row.object, &row.subject),
                    };
                    if !out.origin.contains_key(reached) {
                        let seed = out.origin[anchor].clone();
                        out.origin.insert(reached.clone(), seed);
                        out.hops.insert(reached.clone(), step);
                        next.insert(reached.clone());
                    }
                    out.store.insert(&row);
                }
            }
        }
        log::info!("walk step {step}: {} new entities, {} triplets so far", next.len(), out.store.triplets.len());
        if next.is_empty() {
            break;
        }
        frontier = next.into_iter().collect();
    }
    if out.store.triplets.is_empty() {
        return Err(IngestError::EmptyGraph);
    }
    Ok(out)
}
