//! Parameterized knowledge graph.
//!
//! Every edge carries a Beta posterior over the probability that the examinee
//! fails on the fact it encodes. The graph keeps an incidence index (entity to
//! incident edges) and an out-degree index so one-degree neighborhoods and the
//! Wh-question gate are cheap to answer.

mod io;
mod select;
mod update;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use io::{read_pkg, read_records, write_pkg, EdgeRecord, PkgRecord, PKG_FORMAT, PKG_FORMAT_VERSION};
pub use update::UpdateSummary;

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

string_id!(
    /// Entity identifier, e.g. a Wikidata `Q` id.
    EntityId
);
string_id!(
    /// Predicate identifier, e.g. a Wikidata `P` id.
    PredicateId
);
string_id!(EdgeId);

/// Value of one grouping dimension on an entity ("year" -> 2018).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupValue {
    Integer(i64),
    Text(String),
}

impl GroupValue {
    /// Ordering used for report rows: integers numerically, then text.
    pub fn natural_cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match (self, other) {
            (GroupValue::Integer(a), GroupValue::Integer(b)) => a.cmp(b),
            (GroupValue::Integer(_), GroupValue::Text(_)) => Ordering::Less,
            (GroupValue::Text(_), GroupValue::Integer(_)) => Ordering::Greater,
            (GroupValue::Text(a), GroupValue::Text(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for GroupValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupValue::Integer(v) => write!(f, "{v}"),
            GroupValue::Text(v) => f.write_str(v),
        }
    }
}

impl From<&str> for GroupValue {
    fn from(s: &str) -> Self {
        GroupValue::Text(s.to_owned())
    }
}

impl From<i64> for GroupValue {
    fn from(v: i64) -> Self {
        GroupValue::Integer(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entity {
    pub id: EntityId,
    pub label: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub groups: BTreeMap<String, GroupValue>,
}

impl Entity {
    pub fn new(id: impl Into<EntityId>, label: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            label: label.into(),
            aliases: Vec::new(),
            description: String::new(),
            groups: BTreeMap::new(),
        }
    }

    pub fn with_alias(mut self, alias: impl Into<String>) -> Self {
        self.aliases.push(alias.into());
        self
    }

    pub fn with_group(mut self, key: impl Into<String>, value: impl Into<GroupValue>) -> Self {
        self.groups.insert(key.into(), value.into());
        self
    }

    /// First alias in serialized order, used in "(also known as ...)".
    pub fn primary_alias(&self) -> Option<&str> {
        self.aliases.iter().map(String::as_str).find(|a| !a.trim().is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredicateDef {
    pub id: PredicateId,
    pub label: String,
    #[serde(default)]
    pub description: String,
}

impl PredicateDef {
    pub fn new(id: impl Into<PredicateId>, label: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            label: label.into(),
            description: String::new(),
        }
    }
}

/// Beta posterior over an edge's failure probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaParams {
    pub const PRIOR: BetaParams = BetaParams { alpha: 1.0, beta: 1.0 };

    pub fn new(alpha: f64, beta: f64) -> Result<Self, PkgError> {
        if !(alpha >= 1.0 && beta >= 1.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(PkgError::InvalidParams { alpha, beta });
        }
        Ok(Self { alpha, beta })
    }

    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }
}

impl Default for BetaParams {
    fn default() -> Self {
        Self::PRIOR
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: EdgeId,
    pub subject: EntityId,
    pub predicate: PredicateId,
    pub object: EntityId,
    pub active: bool,
    pub params: BetaParams,
    pub n_correct: u64,
    pub n_incorrect: u64,
}

impl Edge {
    pub fn posterior_mean(&self) -> f64 {
        self.params.mean()
    }

    pub fn examined(&self) -> bool {
        self.n_correct + self.n_incorrect > 0
    }
}

/// Triplet as supplied to [`init_pkg`]; parameters start at the prior.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSpec {
    pub id: EdgeId,
    pub subject: EntityId,
    pub predicate: PredicateId,
    pub object: EntityId,
    pub active: bool,
}

impl EdgeSpec {
    pub fn new(
        id: impl Into<EdgeId>,
        subject: impl Into<EntityId>,
        predicate: impl Into<PredicateId>,
        object: impl Into<EntityId>,
    ) -> Self {
        Self {
            id: id.into(),
            subject: subject.into(),
            predicate: predicate.into(),
            object: object.into(),
            active: true,
        }
    }

    pub fn dead(mut self) -> Self {
        self.active = false;
        self
    }
}

/// Entity and predicate metadata plus the triplets that reference them.
#[derive(Debug, Clone, Default)]
pub struct GraphSource {
    pub entities: Vec<Entity>,
    pub predicates: Vec<PredicateDef>,
    pub edges: Vec<EdgeSpec>,
}

/// Outcome of examining one edge once.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signal {
    pub edge_id: EdgeId,
    pub correct: bool,
}

impl Signal {
    pub fn correct(edge_id: impl Into<EdgeId>) -> Self {
        Self {
            edge_id: edge_id.into(),
            correct: true,
        }
    }

    pub fn incorrect(edge_id: impl Into<EdgeId>) -> Self {
        Self {
            edge_id: edge_id.into(),
            correct: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PkgOptions {
    /// Dead edges also receive propagated counts.
    pub propagate_to_dead: bool,
    /// Dead edges count toward an entity's out-degree.
    pub outdegree_counts_dead: bool,
}

#[derive(Debug, Error, PartialEq)]
pub enum PkgError {
    #[error("duplicate edge id `{0}`")]
    DuplicateEdge(EdgeId),
    #[error("duplicate entity id `{0}`")]
    DuplicateEntity(EntityId),
    #[error("duplicate predicate id `{0}`")]
    DuplicatePredicate(PredicateId),
    #[error("edge `{edge}` references unknown entity `{entity}`")]
    DanglingEntity { edge: EdgeId, entity: EntityId },
    #[error("edge `{edge}` references unknown predicate `{predicate}`")]
    DanglingPredicate { edge: EdgeId, predicate: PredicateId },
    #[error("entity `{0}` has an empty label")]
    EmptyEntityLabel(EntityId),
    #[error("predicate `{0}` has an empty label")]
    EmptyPredicateLabel(PredicateId),
    #[error("invalid Beta parameters alpha={alpha}, beta={beta}; both must be finite and >= 1")]
    InvalidParams { alpha: f64, beta: f64 },
    #[error("unknown edge `{0}`")]
    UnknownEdge(EdgeId),
    #[error("edge `{0}` is dead and cannot be examined")]
    DeadEdge(EdgeId),
    #[error("edge `{0}` received more than one signal in a batch")]
    DuplicateSignal(EdgeId),
    #[error("batch size must be at least 1")]
    EmptyBatch,
    #[error("graph has no examinable edges")]
    NoActiveEdges,
}

/// Knowledge graph with a Beta posterior per edge.
#[derive(Debug, Clone)]
pub struct ParameterizedKG {
    entities: BTreeMap<EntityId, Entity>,
    predicates: BTreeMap<PredicateId, PredicateDef>,
    // sorted by id; positions are stable for the lifetime of the graph
    edges: Vec<Edge>,
    edge_index: HashMap<EdgeId, usize>,
    incidence: BTreeMap<EntityId, BTreeSet<usize>>,
    out_degree: BTreeMap<EntityId, usize>,
    options: PkgOptions,
}

/// Builds a graph with every edge at the Beta(1,1) prior.
pub fn init_pkg(source: GraphSource) -> Result<ParameterizedKG, PkgError> {
    init_pkg_with(source, PkgOptions::default())
}

pub fn init_pkg_with(source: GraphSource, options: PkgOptions) -> Result<ParameterizedKG, PkgError> {
    let edges = source
        .edges
        .into_iter()
        .map(|spec| Edge {
            id: spec.id,
            subject: spec.subject,
            predicate: spec.predicate,
            object: spec.object,
            active: spec.active,
            params: BetaParams::PRIOR,
            n_correct: 0,
            n_incorrect: 0,
        })
        .collect();
    ParameterizedKG::from_parts(source.entities, source.predicates, edges, options)
}

impl ParameterizedKG {
    /// Assembles a graph from already-parameterized edges (e.g. a saved run).
    pub fn from_parts(
        entities: Vec<Entity>,
        predicates: Vec<PredicateDef>,
        mut edges: Vec<Edge>,
        options: PkgOptions,
    ) -> Result<Self, PkgError> {
        let mut entity_map = BTreeMap::new();
        for entity in entities {
            if entity.label.trim().is_empty() {
                return Err(PkgError::EmptyEntityLabel(entity.id));
            }
            if let Some(prev) = entity_map.insert(entity.id.clone(), entity) {
                return Err(PkgError::DuplicateEntity(prev.id));
            }
        }
        let mut predicate_map = BTreeMap::new();
        for predicate in predicates {
            if predicate.label.trim().is_empty() {
                return Err(PkgError::EmptyPredicateLabel(predicate.id));
            }
            if let Some(prev) = predicate_map.insert(predicate.id.clone(), predicate) {
                return Err(PkgError::DuplicatePredicate(prev.id));
            }
        }

        edges.sort_by(|a, b| a.id.cmp(&b.id));
        for pair in edges.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(PkgError::DuplicateEdge(pair[0].id.clone()));
            }
        }
        for edge in &edges {
            for endpoint in [&edge.subject, &edge.object] {
                if !entity_map.contains_key(endpoint) {
                    return Err(PkgError::DanglingEntity {
                        edge: edge.id.clone(),
                        entity: endpoint.clone(),
                    });
                }
            }
            if !predicate_map.contains_key(&edge.predicate) {
                return Err(PkgError::DanglingPredicate {
                    edge: edge.id.clone(),
                    predicate: edge.predicate.clone(),
                });
            }
            BetaParams::new(edge.params.alpha, edge.params.beta)?;
        }

        let edge_index = edges
            .iter()
            .enumerate()
            .map(|(pos, e)| (e.id.clone(), pos))
            .collect();
        let (incidence, out_degree) = build_indexes(&edges, options);
        Ok(Self {
            entities: entity_map,
            predicates: predicate_map,
            edges,
            edge_index,
            incidence,
            out_degree,
            options,
        })
    }

    pub fn options(&self) -> PkgOptions {
        self.options
    }

    /// Changes the propagation/out-degree flags and rebuilds the indexes.
    pub fn set_options(&mut self, options: PkgOptions) {
        self.options = options;
        let (incidence, out_degree) = build_indexes(&self.edges, options);
        self.incidence = incidence;
        self.out_degree = out_degree;
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn predicate_count(&self) -> usize {
        self.predicates.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn active_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| e.active).count()
    }

    pub fn dead_edge_count(&self) -> usize {
        self.edges.len() - self.active_edge_count()
    }

    pub fn entity(&self, id: &EntityId) -> Option<&Entity> {
        self.entities.get(id)
    }

    pub fn predicate(&self, id: &PredicateId) -> Option<&PredicateDef> {
        self.predicates.get(id)
    }

    pub fn edge(&self, id: &EdgeId) -> Option<&Edge> {
        self.edge_index.get(id).map(|&pos| &self.edges[pos])
    }

    /// Entities in id order.
    pub fn entities(&self) -> impl Iterator<Item = &Entity> {
        self.entities.values()
    }

    /// Predicates in id order.
    pub fn predicates(&self) -> impl Iterator<Item = &PredicateDef> {
        self.predicates.values()
    }

    /// Edges in id order.
    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter()
    }

    pub fn active_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.active)
    }

    /// Edges in id order, with their tallies and posteriors.
    pub fn edge_slice(&self) -> &[Edge] {
        &self.edges
    }

    /// Number of edges with `entity` as subject (active only unless
    /// `outdegree_counts_dead` is set).
    pub fn out_degree(&self, entity: &EntityId) -> usize {
        self.out_degree.get(entity).copied().unwrap_or(0)
    }

    /// Edges sharing an endpoint with `edge_id`, excluding the edge itself.
    /// Dead edges are omitted unless `propagate_to_dead` is set.
    pub fn one_degree_neighbors(&self, edge_id: &EdgeId) -> Result<BTreeSet<EdgeId>, PkgError> {
        let pos = self.position(edge_id)?;
        Ok(self
            .neighbor_positions(pos)
            .into_iter()
            .map(|p| self.edges[p].id.clone())
            .collect())
    }

    pub(crate) fn position(&self, edge_id: &EdgeId) -> Result<usize, PkgError> {
        self.edge_index
            .get(edge_id)
            .copied()
            .ok_or_else(|| PkgError::UnknownEdge(edge_id.clone()))
    }

    pub(crate) fn neighbor_positions(&self, pos: usize) -> BTreeSet<usize> {
        let edge = &self.edges[pos];
        let mut out = BTreeSet::new();
        for endpoint in [&edge.subject, &edge.object] {
            if let Some(incident) = self.incidence.get(endpoint) {
                out.extend(incident.iter().copied().filter(|&p| {
                    p != pos && (self.edges[p].active || self.options.propagate_to_dead)
                }));
            }
        }
        out
    }

    /// Recomputes both indexes from the edge list and compares them with the
    /// maintained ones.
    pub fn indexes_consistent(&self) -> bool {
        let (incidence, out_degree) = build_indexes(&self.edges, self.options);
        incidence == self.incidence && out_degree == self.out_degree
    }
}

fn build_indexes(
    edges: &[Edge],
    options: PkgOptions,
) -> (BTreeMap<EntityId, BTreeSet<usize>>, BTreeMap<EntityId, usize>) {
    let mut incidence: BTreeMap<EntityId, BTreeSet<usize>> = BTreeMap::new();
    let mut out_degree: BTreeMap<EntityId, usize> = BTreeMap::new();
    for (pos, edge) in edges.iter().enumerate() {
        incidence.entry(edge.subject.clone()).or_default().insert(pos);
        incidence.entry(edge.object.clone()).or_default().insert(pos);
        if edge.active || options.outdegree_counts_dead {
            *out_degree.entry(edge.subject.clone()).or_default() += 1;
        }
    }
    (incidence, out_degree)
}


#[cfg(test)]
mod tests {
    use super::testing::graph;
    use super::*;

    fn ids(items: &[&str]) -> BTreeSet<EdgeId> {
        items.iter().map(|s| EdgeId::from(*s)).collect()
    }

    #[test]
    fn empty_source_gives_empty_graph() {
        let pkg = init_pkg(GraphSource::default()).unwrap();
        assert_eq!(pkg.edge_count(), 0);
        assert_eq!(pkg.entity_count(), 0);
        assert!(pkg.indexes_consistent());
    }

    #[test]
    fn single_triplet_starts_at_prior() {
        let pkg = graph(&[("e1", "A", "B")]);
        let edge = pkg.edge(&"e1".into()).unwrap();
        assert_eq!(edge.params, BetaParams { alpha: 1.0, beta: 1.0 });
        assert_eq!((edge.n_correct, edge.n_incorrect), (0, 0));
        assert_eq!(edge.posterior_mean(), 0.5);
    }

    #[test]
    fn duplicate_edge_is_rejected() {
        let source = GraphSource {
            entities: vec![Entity::new("A", "a"), Entity::new("B", "b")],
            predicates: vec![PredicateDef::new("p", "p")],
            edges: vec![EdgeSpec::new("e", "A", "p", "B"), EdgeSpec::new("e", "B", "p", "A")],
        };
        assert_eq!(init_pkg(source).unwrap_err(), PkgError::DuplicateEdge("e".into()));
    }

    #[test]
    fn dangling_entity_is_named() {
        let source = GraphSource {
            entities: vec![Entity::new("A", "a")],
            predicates: vec![PredicateDef::new("p", "p")],
            edges: vec![EdgeSpec::new("e", "A", "p", "Z")],
        };
        let err = init_pkg(source).unwrap_err();
        assert_eq!(
            err,
            PkgError::DanglingEntity {
                edge: "e".into(),
                entity: "Z".into()
            }
        );
        assert!(err.to_string().contains('Z'));
    }

    #[test]
    fn dangling_predicate_is_rejected() {
        let source = GraphSource {
            entities: vec![Entity::new("A", "a")],
            predicates: vec![],
            edges: vec![EdgeSpec::new("e", "A", "q", "A")],
        };
        assert!(matches!(init_pkg(source), Err(PkgError::DanglingPredicate { .. })));
    }

    #[test]
    fn isolated_edge_has_no_neighbors() {
        let pkg = graph(&[("e1", "A", "B"), ("e2", "C", "D")]);
        assert!(pkg.one_degree_neighbors(&"e1".into()).unwrap().is_empty());
    }

    #[test]
    fn star_neighbors_share_the_center() {
        let pkg = graph(&[("cx1", "C", "X1"), ("cx2", "C", "X2"), ("cx3", "C", "X3")]);
        assert_eq!(pkg.one_degree_neighbors(&"cx1".into()).unwrap(), ids(&["cx2", "cx3"]));
    }

    #[test]
    fn chain_neighbors_come_from_both_endpoints() {
        let pkg = graph(&[("ab", "A", "B"), ("bc", "B", "C"), ("cd", "C", "D")]);
        assert_eq!(pkg.one_degree_neighbors(&"bc".into()).unwrap(), ids(&["ab", "cd"]));
    }

    #[test]
    fn neighbors_of_unknown_edge_fail() {
        let pkg = graph(&[("ab", "A", "B")]);
        assert_eq!(
            pkg.one_degree_neighbors(&"zz".into()).unwrap_err(),
            PkgError::UnknownEdge("zz".into())
        );
    }

    #[test]
    fn dead_edges_stay_in_adjacency_but_not_in_neighbors() {
        let source = GraphSource {
            entities: vec![Entity::new("A", "a"), Entity::new("B", "b"), Entity::new("C", "c")],
            predicates: vec![PredicateDef::new("p", "p")],
            edges: vec![
                EdgeSpec::new("ab", "A", "p", "B"),
                EdgeSpec::new("bc", "B", "p", "C").dead(),
            ],
        };
        let mut pkg = init_pkg(source).unwrap();
        assert!(pkg.one_degree_neighbors(&"ab".into()).unwrap().is_empty());
        assert_eq!(pkg.out_degree(&"B".into()), 0);
        pkg.set_options(PkgOptions {
            propagate_to_dead: true,
            outdegree_counts_dead: true,
        });
        assert_eq!(pkg.one_degree_neighbors(&"ab".into()).unwrap(), ids(&["bc"]));
        assert_eq!(pkg.out_degree(&"B".into()), 1);
        assert!(pkg.indexes_consistent());
    }

    #[test]
    fn self_loop_is_not_its_own_neighbor() {
        let pkg = graph(&[("aa", "A", "A"), ("ab", "A", "B")]);
        assert_eq!(pkg.one_degree_neighbors(&"aa".into()).unwrap(), ids(&["ab"]));
        assert_eq!(pkg.one_degree_neighbors(&"ab".into()).unwrap(), ids(&["aa"]));
    }

    #[test]
    fn posterior_mean_examples() {
        let close = |a: f64, b: f64| (a - b).abs() < 1e-9;
        assert!(close(BetaParams::PRIOR.mean(), 0.5));
        assert!(close(BetaParams::new(4.0, 2.0).unwrap().mean(), 2.0 / 3.0));
        assert!(close(BetaParams::new(1.0, 101.0).unwrap().mean(), 1.0 / 102.0));
        assert!((BetaParams::new(1.0, 101.0).unwrap().mean() - 0.0098).abs() < 1e-4);
    }

    #[test]
    fn params_below_prior_floor_are_invalid() {
        assert!(BetaParams::new(0.5, 1.0).is_err());
        assert!(BetaParams::new(1.0, f64::NAN).is_err());
    }

    #[test]
    fn out_degree_counts_active_subject_edges() {
        let pkg = graph(&[("ab", "A", "B"), ("ac", "A", "C"), ("ba", "B", "A")]);
        assert_eq!(pkg.out_degree(&"A".into()), 2);
        assert_eq!(pkg.out_degree(&"B".into()), 1);
        assert_eq!(pkg.out_degree(&"C".into()), 0);
    }

    #[test]
    fn group_values_sort_naturally() {
        let mut values = vec![
            GroupValue::from("b"),
            GroupValue::from(2019),
            GroupValue::from("a"),
            GroupValue::from(2018),
        ];
        values.sort_by(|a, b| a.natural_cmp(b));
        let shown: Vec<String> = values.iter().map(ToString::to_string).collect();
        assert_eq!(shown, ["2018", "2019", "a", "b"]);
    }
}
