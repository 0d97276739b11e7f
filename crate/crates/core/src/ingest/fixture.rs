use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::sparql::{local_id, SparqlBinding, SparqlEndpoint};
use super::IngestError;
use crate::pkg::{EntityId, PredicateId};
use crate::rng::derive_rng;

const ENTITY_NS: &str = "http://www.wikidata.org/entity/";
const PREDICATE_NS: &str = "http://www.wikidata.org/prop/direct/";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorldEntity {
    pub label: String,
    pub description: String,
    pub aliases: Vec<String>,
    /// Number of languages with a label.
    pub languages: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorldPredicate {
    pub label: String,
    pub description: String,
}

/// A frozen triple store answering the bundled walk, alias and language
/// count queries.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FixtureWorld {
    pub entities: BTreeMap<EntityId, WorldEntity>,
    pub predicates: BTreeMap<PredicateId, WorldPredicate>,
    pub triples: Vec<(EntityId, PredicateId, EntityId)>,
}

/// Offline endpoint over a [`FixtureWorld`].
///
/// Walk queries are answered like the live service would: rows whose
/// labels or descriptions are missing are filtered out, the result is
/// shuffled (with a generator keyed on the query text, standing in for the
/// randomized ordering) and cut at the LIMIT. An entity whose label is the
/// empty string yields rows without the label field, to exercise the
/// incomplete-row path.
#[derive(Debug, Clone)]
pub struct FixtureEndpoint {
    world: FixtureWorld,
    seed: u64,
}

fn values_of(query: &str) -> Result<Vec<EntityId>, IngestError> {
    let start = query
        .find("VALUES")
        .ok_or_else(|| IngestError::Fixture("query has no VALUES block".into()))?;
    let open = query[start..].find('{').map(|i| start + i + 1);
    let close = open.and_then(|o| query[o..].find('}').map(|i| o + i));
    let (Some(open), Some(close)) = (open, close) else {
        return Err(IngestError::Fixture("unterminated VALUES block".into()));
    };
    Ok(query[open..close]
        .split_whitespace()
        .map(|t| {
            let t = t.trim_start_matches('<').trim_end_matches('>');
            EntityId::from(local_id(t.trim_start_matches("wd:")))
        })
        .collect())
}

fn limit_of(query: &str) -> Option<usize> {
    let idx = query.rfind("LIMIT")?;
    query[idx + 5..].split_whitespace().next()?.parse().ok()
}

impl FixtureEndpoint {
    pub fn new(world: FixtureWorld, seed: u64) -> Self {
        Self { world, seed }
    }

    /// Reads `world.json` from a fixture directory.
    pub fn load(dir: &Path, seed: u64) -> Result<Self, IngestError> {
        let path = dir.join("world.json");
        let text = std::fs::read_to_string(&path)?;
        let world = serde_json::from_str(&text)
            .map_err(|e| IngestError::Fixture(format!("{}: {e}", path.display())))?;
        Ok(Self::new(world, seed))
    }

    pub fn world(&self) -> &FixtureWorld {
        &self.world
    }

    fn walk(&self, query: &str, forward: bool) -> Result<Vec<SparqlBinding>, IngestError> {
        let frontier: BTreeSet<EntityId> = values_of(query)?.into_iter().collect();
        let limit = limit_of(query).unwrap_or(usize::MAX);
        let mut seen = BTreeSet::new();
        let mut rows = Vec::new();
        for (s, p, o) in &self.world.triples {
            let anchor = if forward { s } else { o };
            if !frontier.contains(anchor) || !seen.insert((s, p, o)) {
                continue;
            }
            let (Some(se), Some(pe), Some(oe)) = (
                self.world.entities.get(s),
                self.world.predicates.get(p),
                self.world.entities.get(o),
            ) else {
                continue;
            };
            if se.description.is_empty() || oe.description.is_empty() || pe.label.is_empty() || pe.description.is_empty() {
                continue;
            }
            let mut row = SparqlBinding::new();
            row.insert("subject".into(), format!("{ENTITY_NS}{s}"));
            row.insert("subjectDesc".into(), se.description.clone());
            row.insert("predicate".into(), format!("{PREDICATE_NS}{p}"));
            row.insert("predicateLabel".into(), pe.label.clone());
            row.insert("predicateDesc".into(), pe.description.clone());
            row.insert("object".into(), format!("{ENTITY_NS}{o}"));
            row.insert("objectDesc".into(), oe.description.clone());
            if !se.label.is_empty() {
                row.insert("subjectLabel".into(), se.label.clone());
            }
            if !oe.label.is_empty() {
                row.insert("objectLabel".into(), oe.label.clone());
            }
            rows.push(row);
        }
        let mut rng = derive_rng(self.seed, &[b"fixture-order", query.as_bytes()]);
        rows.shuffle(&mut rng);
        rows.truncate(limit);
        Ok(rows)
    }
}

impl SparqlEndpoint for FixtureEndpoint {
    fn select(&self, query: &str) -> Result<Vec<SparqlBinding>, IngestError> {
        if query.contains("skos:altLabel") {
            let mut rows = Vec::new();
            for id in values_of(query)? {
                for alias in self.world.entities.get(&id).map(|e| e.aliases.as_slice()).unwrap_or(&[]) {
                    rows.push(SparqlBinding::from([
                        ("entity".to_string(), format!("{ENTITY_NS}{id}")),
                        ("alias".to_string(), alias.clone()),
                    ]));
                }
            }
            Ok(rows)
        } else if query.contains("COUNT(DISTINCT") {
            Ok(values_of(query)?
                .into_iter()
                .filter_map(|id| {
                    let e = self.world.entities.get(&id)?;
                    Some(SparqlBinding::from([
                        ("entity".to_string(), format!("{ENTITY_NS}{id}")),
                        ("languages".to_string(), e.languages.to_string()),
                    ]))
                })
                .collect())
        } else if query.contains("VALUES ?subject") {
            self.walk(query, true)
        } else if query.contains("VALUES ?object") {
            self.walk(query, false)
        } else {
            Err(IngestError::Fixture("unrecognised query shape".into()))
        }
    }
}
