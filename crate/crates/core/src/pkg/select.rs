use rand::Rng;
use rand_distr::{Beta, Distribution};

use super::{EdgeId, ParameterizedKG, PkgError};

impl ParameterizedKG {
    /// Thompson selection of the `n` edges most likely to be answered wrong.
    ///
    /// One failure probability is drawn per active edge (in id order) from its
    /// Beta posterior; the edges with the `n` largest draws are returned in
    /// descending order of the draw, ties broken by edge id.
    pub fn select_batch<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<EdgeId>, PkgError> {
        if n == 0 {
            return Err(PkgError::EmptyBatch);
        }
        let mut draws: Vec<(f64, usize)> = Vec::with_capacity(self.edges.len());
        for (pos, edge) in self.edges.iter().enumerate() {
            if !edge.active {
                continue;
            }
            let dist = Beta::new(edge.params.alpha, edge.params.beta)
                .map_err(|_| PkgError::InvalidParams {
                    alpha: edge.params.alpha,
                    beta: edge.params.beta,
                })?;
            draws.push((dist.sample(rng), pos));
        }
        if draws.is_empty() {
            return Err(PkgError::NoActiveEdges);
        }
        // positions follow id order, so comparing positions breaks ties by id
        let by_rank = |a: &(f64, usize), b: &(f64, usize)| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1));
        let take = n.min(draws.len());
        if take < draws.len() {
            draws.select_nth_unstable_by(take - 1, by_rank);
            draws.truncate(take);
        }
        draws.sort_unstable_by(by_rank);
        Ok(draws.into_iter().map(|(_, pos)| self.edges[pos].id.clone()).collect())
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::super::testing::graph;
    use super::super::{BetaParams, EdgeSpec, Entity, GraphSource, PredicateDef};
    use super::*;
    use crate::rng::seeded;

    fn star(n: usize) -> ParameterizedKG {
        let edges: Vec<(String, String)> = (0..n).map(|i| (format!("e{i:04}"), format!("X{i:04}"))).collect();
        let refs: Vec<(&str, &str, &str)> = edges.iter().map(|(e, x)| (e.as_str(), "C", x.as_str())).collect();
        graph(&refs)
    }

    fn set_params(pkg: &mut ParameterizedKG, id: &str, alpha: f64, beta: f64) {
        let pos = pkg.position(&id.into()).unwrap();
        pkg.edges[pos].params = BetaParams::new(alpha, beta).unwrap();
    }

    #[test]
    fn returns_all_edges_when_n_exceeds_count() {
        let pkg = graph(&[("a", "A", "B"), ("b", "B", "C"), ("c", "C", "D")]);
        let mut picked = pkg.select_batch(5, &mut seeded(1)).unwrap();
        picked.sort();
        assert_eq!(picked, vec![EdgeId::from("a"), "b".into(), "c".into()]);
    }

    #[test]
    fn zero_batch_is_rejected() {
        let pkg = graph(&[("a", "A", "B")]);
        assert_eq!(pkg.select_batch(0, &mut seeded(1)).unwrap_err(), PkgError::EmptyBatch);
    }

    #[test]
    fn graph_without_active_edges_is_not_examinable() {
        let source = GraphSource {
            entities: vec![Entity::new("A", "a"), Entity::new("B", "b")],
            predicates: vec![PredicateDef::new("p", "p")],
            edges: vec![EdgeSpec::new("e", "A", "p", "B").dead()],
        };
        let pkg = super::super::init_pkg(source).unwrap();
        let err = pkg.select_batch(1, &mut seeded(1)).unwrap_err();
        assert_eq!(err.to_string(), "graph has no examinable edges");
    }

    #[test]
    fn dead_edges_are_never_selected() {
        let source = GraphSource {
            entities: vec![Entity::new("A", "a"), Entity::new("B", "b")],
            predicates: vec![PredicateDef::new("p", "p")],
            edges: vec![
                EdgeSpec::new("live", "A", "p", "B"),
                EdgeSpec::new("dead", "B", "p", "A").dead(),
            ],
        };
        let pkg = super::super::init_pkg(source).unwrap();
        for seed in 0..200 {
            assert_eq!(pkg.select_batch(2, &mut seeded(seed)).unwrap(), vec![EdgeId::from("live")]);
        }
    }

    #[test]
    fn confident_failure_beats_confident_success() {
        let mut pkg = graph(&[("hard", "A", "B"), ("easy", "C", "D")]);
        set_params(&mut pkg, "hard", 100.0, 1.0);
        set_params(&mut pkg, "easy", 1.0, 100.0);
        let mut rng = seeded(42);
        let wins = (0..1000)
            .filter(|_| pkg.select_batch(1, &mut rng).unwrap()[0].as_str() == "hard")
            .count();
        assert!(wins >= 950, "hard edge selected {wins} / 1000 times");
    }

    #[test]
    fn uniform_prior_selects_uniformly() {
        // Oracle: under identical priors every edge is selected with
        // probability n/|E| per trial, so counts are Binomial(T, n/|E|).
        let edges = 128;
        let n = 64;
        let trials = 10_000;
        let pkg = star(edges);
        let mut counts: HashMap<EdgeId, u64> = HashMap::new();
        let mut rng = seeded(2024);
        for _ in 0..trials {
            for id in pkg.select_batch(n, &mut rng).unwrap() {
                *counts.entry(id).or_default() += 1;
            }
        }
        let p = n as f64 / edges as f64;
        let expected = trials as f64 * p;
        let sd = (trials as f64 * p * (1.0 - p)).sqrt();
        assert_eq!(counts.len(), edges);
        // With 128 independent 3-sigma checks a correct sampler trips at
        // least one about 29% of the time. Binomial(128, 0.0027) puts more
        // than two excursions at 0.5%, and any 4.5-sigma excursion below 0.1%.
        let mut beyond_three = Vec::new();
        for (id, count) in &counts {
            let z = (*count as f64 - expected).abs() / sd;
            assert!(z <= 4.5, "{id}: {count} vs {expected} ({z:.2} sd)");
            if z > 3.0 {
                beyond_three.push((id.clone(), z));
            }
        }
        assert!(beyond_three.len() <= 2, "3-sigma excursions: {beyond_three:?}");
    }

    #[test]
    fn raising_alpha_improves_expected_rank() {
        let edges = 20;
        let trials = 10_000;
        let mean_rank = |alpha: f64| {
            let mut pkg = star(edges);
            for e in pkg.edges.iter_mut() {
                e.params = BetaParams::new(2.0, 2.0).unwrap();
            }
            set_params(&mut pkg, "e0007", alpha, 2.0);
            let mut rng = seeded(99);
            let total: usize = (0..trials)
                .map(|_| {
                    let order = pkg.select_batch(edges, &mut rng).unwrap();
                    order.iter().position(|id| id.as_str() == "e0007").unwrap()
                })
                .sum();
            total as f64 / trials as f64
        };
        let base = mean_rank(2.0);
        let raised = mean_rank(3.0);
        let more = mean_rank(5.0);
        assert!(raised < base, "{raised} !< {base}");
        assert!(more < raised, "{more} !< {raised}");
    }

    #[test]
    fn same_seed_same_selection() {
        let pkg = star(50);
        let a = pkg.select_batch(10, &mut seeded(5)).unwrap();
        let b = pkg.select_batch(10, &mut seeded(5)).unwrap();
        let c = pkg.select_batch(10, &mut seeded(6)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn selection_is_distinct_and_sorted_by_draw() {
        let pkg = star(30);
        let picked = pkg.select_batch(30, &mut seeded(3)).unwrap();
        let mut unique = picked.clone();
        unique.sort();
        unique.dedup();
        assert_eq!(unique.len(), 30);
    }
}
