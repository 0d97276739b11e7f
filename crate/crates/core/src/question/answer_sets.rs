use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::Rng;

use super::QuestionError;
use crate::pkg::{Edge, Entity, EntityId, ParameterizedKG, PkgRecord, PredicateId};

/// Truth sets keyed by (subject, predicate) and candidate sets keyed by
/// predicate.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnswerSets {
    truth: HashMap<(EntityId, PredicateId), BTreeSet<EntityId>>,
    candidates: HashMap<PredicateId, BTreeSet<EntityId>>,
}

static EMPTY: BTreeSet<EntityId> = BTreeSet::new();

impl AnswerSets {
    pub fn build<'a, I>(triplets: I) -> Self
    where
        I: IntoIterator<Item = (&'a EntityId, &'a PredicateId, &'a EntityId)>,
    {
        let mut sets = Self::default();
        sets.extend(triplets);
        sets
    }

    /// Every edge of the graph, dead ones included: a dead edge is still a
    /// true fact and must never be offered as a negative.
    pub fn from_pkg(pkg: &ParameterizedKG) -> Self {
        Self::build(pkg.edges().map(|e| (&e.subject, &e.predicate, &e.object)))
    }

    pub fn extend<'a, I>(&mut self, triplets: I)
    where
        I: IntoIterator<Item = (&'a EntityId, &'a PredicateId, &'a EntityId)>,
    {
        for (s, p, o) in triplets {
            self.truth.entry((s.clone(), p.clone())).or_default().insert(o.clone());
            self.candidates.entry(p.clone()).or_default().insert(o.clone());
        }
    }

    pub fn truth(&self, subject: &EntityId, predicate: &PredicateId) -> &BTreeSet<EntityId> {
        self.truth
            .get(&(subject.clone(), predicate.clone()))
            .unwrap_or(&EMPTY)
    }

    pub fn candidates(&self, predicate: &PredicateId) -> &BTreeSet<EntityId> {
        self.candidates.get(predicate).unwrap_or(&EMPTY)
    }

    /// Candidates for the predicate that are not true for the subject.
    pub fn negative_pool(&self, subject: &EntityId, predicate: &PredicateId) -> Vec<&EntityId> {
        let truth = self.truth(subject, predicate);
        self.candidates(predicate)
            .iter()
            .filter(|o| !truth.contains(*o))
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.truth.is_empty()
    }
}

/// Uniform draw from C(predicate) minus T(subject, predicate).
pub fn sample_negative<R: Rng + ?Sized>(
    edge: &Edge,
    sets: &AnswerSets,
    rng: &mut R,
) -> Result<EntityId, QuestionError> {
    let pool = sets.negative_pool(&edge.subject, &edge.predicate);
    if pool.is_empty() {
        return Err(QuestionError::NegativePoolExhausted {
            subject: edge.subject.clone(),
            predicate: edge.predicate.to_string(),
        });
    }
    Ok(pool[rng.random_range(0..pool.len())].clone())
}

/// Answer sets plus labels for entities that only occur in the supplemental
/// reference (and so are absent from the graph under test).
#[derive(Debug, Clone, Default)]
pub struct Reference {
    pub sets: AnswerSets,
    extra_entities: BTreeMap<EntityId, Entity>,
}

impl Reference {
    pub fn from_pkg(pkg: &ParameterizedKG) -> Self {
        Self {
            sets: AnswerSets::from_pkg(pkg),
            extra_entities: BTreeMap::new(),
        }
    }

    /// Adds triplets and entity metadata from a supplemental answer file.
    pub fn add_supplement(&mut self, records: &[PkgRecord]) {
        for record in records {
            match record {
                PkgRecord::Entity(e) => {
                    self.extra_entities.entry(e.id.clone()).or_insert_with(|| e.clone());
                }
                PkgRecord::Edge(e) => self.sets.extend([(&e.subject, &e.predicate, &e.object)]),
                PkgRecord::Header { .. } | PkgRecord::Predicate(_) => {}
            }
        }
    }

    pub fn entity<'a>(&'a self, pkg: &'a ParameterizedKG, id: &EntityId) -> Option<&'a Entity> {
        pkg.entity(id).or_else(|| self.extra_entities.get(id))
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::pkg::testing::graph;
    use crate::pkg::{BetaParams, EdgeId};
    use crate::rng::seeded;

    fn ids(items: &[&str]) -> BTreeSet<EntityId> {
        items.iter().map(|s| EntityId::from(*s)).collect()
    }

    fn triple(s: &str, p: &str, o: &str) -> (EntityId, PredicateId, EntityId) {
        (s.into(), p.into(), o.into())
    }

    fn edge(s: &str, p: &str, o: &str) -> Edge {
        Edge {
            id: EdgeId::from("e"),
            subject: s.into(),
            predicate: p.into(),
            object: o.into(),
            active: true,
            params: BetaParams::PRIOR,
            n_correct: 0,
            n_incorrect: 0,
        }
    }

    fn sets(triplets: &[(EntityId, PredicateId, EntityId)]) -> AnswerSets {
        AnswerSets::build(triplets.iter().map(|(s, p, o)| (s, p, o)))
    }

    #[test]
    fn definition_unrolled() {
        let t = [triple("A", "p", "B"), triple("A", "p", "C"), triple("D", "p", "B")];
        let s = sets(&t);
        assert_eq!(s.truth(&"A".into(), &"p".into()), &ids(&["B", "C"]));
        assert_eq!(s.truth(&"D".into(), &"p".into()), &ids(&["B"]));
        assert_eq!(s.candidates(&"p".into()), &ids(&["B", "C"]));
    }

    #[test]
    fn empty_store_gives_empty_sets() {
        let s = sets(&[]);
        assert!(s.is_empty());
        assert!(s.candidates(&"p".into()).is_empty());
        assert!(s.truth(&"A".into(), &"p".into()).is_empty());
    }

    #[test]
    fn predicates_are_keyed_independently() {
        let s = sets(&[triple("A", "p", "B"), triple("C", "q", "B"), triple("C", "q", "D")]);
        assert_eq!(s.candidates(&"p".into()), &ids(&["B"]));
        assert_eq!(s.candidates(&"q".into()), &ids(&["B", "D"]));
    }

    #[test]
    fn negatives_are_uniform_over_the_difference() {
        // C(p) = {B, C, D}, T(A, p) = {B}
        let s = sets(&[triple("A", "p", "B"), triple("X", "p", "C"), triple("Y", "p", "D")]);
        let e = edge("A", "p", "B");
        let trials = 10_000u32;
        let mut counts: BTreeMap<EntityId, u32> = BTreeMap::new();
        let mut rng = seeded(17);
        for _ in 0..trials {
            *counts.entry(sample_negative(&e, &s, &mut rng).unwrap()).or_default() += 1;
        }
        assert_eq!(counts.keys().cloned().collect::<BTreeSet<_>>(), ids(&["C", "D"]));
        // Binomial(10000, 1/2): sd = 50
        let sd = (trials as f64 * 0.25).sqrt();
        for count in counts.values() {
            assert!((*count as f64 - trials as f64 / 2.0).abs() <= 3.0 * sd, "{counts:?}");
        }
    }

    #[test]
    fn exhausted_pool_is_an_error() {
        let s = sets(&[triple("A", "p", "B")]);
        assert!(matches!(
            sample_negative(&edge("A", "p", "B"), &s, &mut seeded(1)),
            Err(QuestionError::NegativePoolExhausted { .. })
        ));
    }

    #[test]
    fn singleton_pool_with_empty_truth() {
        let s = sets(&[triple("Z", "p", "X")]);
        assert_eq!(sample_negative(&edge("A", "p", "B"), &s, &mut seeded(1)).unwrap(), "X".into());
    }

    #[test]
    fn dead_edges_count_as_truth() {
        let pkg = graph(&[("ab", "A", "B"), ("cb", "C", "D")]);
        let s = AnswerSets::from_pkg(&pkg);
        assert_eq!(s.truth(&"A".into(), &"p".into()), &ids(&["B"]));
        assert_eq!(s.candidates(&"p".into()), &ids(&["B", "D"]));
    }
}
