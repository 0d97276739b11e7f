//! Deterministic synthetic graphs for simulations and fixtures.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::ingest::{RawStore, Triplet};
use crate::pkg::{EdgeId, EdgeSpec, Entity, EntityId, GraphSource, PredicateDef, PredicateId};
use crate::rng::derive_rng;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub edges: usize,
    pub entities: usize,
    pub predicates: usize,
    pub seed: u64,
    /// Number of distinct values of the `year` group spread over entities.
    pub years: usize,
}

impl SynthConfig {
    /// A graph with `edges` edges and a proportionate number of entities.
    pub fn with_edges(edges: usize, seed: u64) -> Self {
        Self {
            edges,
            entities: (edges / 2).max(2),
            predicates: 8,
            seed,
            years: 5,
        }
    }
}

fn entity_id(i: usize) -> EntityId {
    format!("N{i:06}").into()
}

fn predicate_id(i: usize) -> PredicateId {
    format!("R{i:03}").into()
}

/// Fixed-width labels, so that no label is a substring of another.
fn entity(i: usize) -> Entity {
    Entity::new(entity_id(i), format!("Entity {i:06}")).with_alias(format!("E-{i:06}"))
}

/// Random multigraph-free graph: distinct (subject, object) pairs, no
/// self-loops, every predicate used when there are enough edges.
pub fn synthetic_graph(config: &SynthConfig) -> GraphSource {
    assert!(config.entities >= 2, "need at least two entities");
    let max_pairs = config.entities * (config.entities - 1);
    assert!(config.edges <= max_pairs, "too many edges for the entity count");
    let mut rng = derive_rng(config.seed, &[b"synthetic-graph"]);
    let years = config.years.max(1);
    let entities: Vec<Entity> = (0..config.entities)
        .map(|i| entity(i).with_group("year", 2000 + (i % years) as i64))
        .collect();
    let predicates: Vec<PredicateDef> = (0..config.predicates.max(1))
        .map(|i| PredicateDef::new(predicate_id(i), format!("relation {i:03}")))
        .collect();
    let mut pairs = BTreeSet::new();
    let mut edges = Vec::with_capacity(config.edges);
    while edges.len() < config.edges {
        let s = rng.random_range(0..config.entities);
        let o = rng.random_range(0..config.entities);
        if s == o || !pairs.insert((s, o)) {
            continue;
        }
        let p = if edges.len() < predicates.len() {
            edges.len()
        } else {
            rng.random_range(0..predicates.len())
        };
        edges.push(EdgeSpec::new(
            format!("e{:06}", edges.len()),
            entity_id(s),
            predicate_id(p),
            entity_id(o),
        ));
    }
    GraphSource {
        entities,
        predicates,
        edges,
    }
}

/// Independent uniform [0, 1] failure probability per edge.
pub fn uniform_error_probs<'a, I>(edges: I, seed: u64) -> BTreeMap<EdgeId, f64>
where
    I: IntoIterator<Item = &'a EdgeId>,
{
    edges
        .into_iter()
        .map(|id| {
            let mut rng = derive_rng(seed, &[b"error-prob", id.as_str().as_bytes()]);
            (id.clone(), rng.random::<f64>())
        })
        .collect()
}

/// Two disjoint random clusters of `size` edges each over `size / 2 + 1`
/// entities. Returns the graph and the edge ids of each cluster.
pub fn two_clusters(size: usize, seed: u64) -> (GraphSource, Vec<EdgeId>, Vec<EdgeId>) {
    let nodes = size / 2 + 2;
    let mut rng = derive_rng(seed, &[b"two-clusters"]);
    let mut entities = Vec::new();
    let mut edges = Vec::new();
    let mut clusters = [Vec::new(), Vec::new()];
    for (c, ids) in clusters.iter_mut().enumerate() {
        let base = c * nodes;
        entities.extend((base..base + nodes).map(entity));
        let mut pairs = BTreeSet::new();
        while ids.len() < size {
            let s = base + rng.random_range(0..nodes);
            let o = base + rng.random_range(0..nodes);
            if s == o || !pairs.insert((s, o)) {
                continue;
            }
            let id: EdgeId = format!("c{c}e{:04}", ids.len()).into();
            edges.push(EdgeSpec::new(id.clone(), entity_id(s), predicate_id(0), entity_id(o)));
            ids.push(id);
        }
    }
    let [a, b] = clusters;
    (
        GraphSource {
            entities,
            predicates: vec![PredicateDef::new(predicate_id(0), "relation 000")],
            edges,
        },
        a,
        b,
    )
}

/// Predicates curated as dead in the country graph.
pub const COUNTRY_BLOCKLIST: &str = include_str!("../fixtures/country/blocklist.txt");

pub const COUNTRY_ACTIVE_EDGES: usize = 7844;
pub const COUNTRY_DEAD_EDGES: usize = 9441;
pub const COUNTRY_NODES: usize = 12760;
pub const COUNTRY_PREDICATES: usize = 338;
const COUNTRY_HUBS: usize = 16;

/// Crawled store with the size profile of the country topic graph: 16 hub
/// countries, every other node attached to a hub, plus random cross links.
/// Edges on blocklisted predicates make up the dead share.
pub fn country_store(seed: u64) -> RawStore {
    let blocked: Vec<PredicateId> = crate::ingest::parse_blocklist(COUNTRY_BLOCKLIST).into_iter().collect();
    let open: Vec<PredicateId> = (0..COUNTRY_PREDICATES - blocked.len())
        .map(|i| PredicateId::from(format!("P{}", 10_000 + i)))
        .collect();
    let total = COUNTRY_ACTIVE_EDGES + COUNTRY_DEAD_EDGES;
    let mut rng = derive_rng(seed, &[b"country-store"]);

    let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut ordered = Vec::with_capacity(total);
    for n in COUNTRY_HUBS..COUNTRY_NODES {
        let hub = rng.random_range(0..COUNTRY_HUBS);
        pairs.insert((n, hub));
        ordered.push((n, hub));
    }
    while ordered.len() < total {
        let s = rng.random_range(0..COUNTRY_NODES);
        let o = rng.random_range(0..COUNTRY_NODES);
        if s != o && pairs.insert((s, o)) {
            ordered.push((s, o));
        }
    }
    ordered.shuffle(&mut rng);

    let mut store = RawStore::default();
    for i in 0..COUNTRY_NODES {
        let id: EntityId = format!("Q{}", 100_000 + i).into();
        let label = if i < COUNTRY_HUBS {
            format!("Country {i:02}")
        } else {
            format!("Place {i:05}")
        };
        let mut e = Entity::new(id.clone(), label.clone()).with_alias(format!("{label} (alt)"));
        e.description = format!("synthetic entity {i}");
        store.entities.insert(id, e);
    }
    for p in blocked.iter().chain(&open) {
        store
            .predicates
            .insert(p.clone(), PredicateDef::new(p.clone(), format!("property {p}")));
    }
    for (k, (s, o)) in ordered.into_iter().enumerate() {
        let p = if k < COUNTRY_DEAD_EDGES {
            blocked[k % blocked.len()].clone()
        } else {
            let j = k - COUNTRY_DEAD_EDGES;
            if j < open.len() {
                open[j].clone()
            } else {
                open[rng.random_range(0..open.len())].clone()
            }
        };
        let triplet: Triplet = (
            format!("Q{}", 100_000 + s).into(),
            p,
            format!("Q{}", 100_000 + o).into(),
        );
        store.triplets.insert(triplet);
    }
    store
}
