use std::collections::BTreeSet;

use kgprobe_core::exam::{Evaluation, NullLog, Roles, RunConfig};
use kgprobe_core::gateway::{GoldMatchJudge, SimulatedExaminee, SimulatorConfig};
use kgprobe_core::pkg::{
    init_pkg, read_pkg, write_pkg, EdgeSpec, Entity, GraphSource, ParameterizedKG, PkgError, PkgOptions,
    PredicateDef, Signal,
};
use kgprobe_core::question::{ExamMode, Reference, TemplateWriter};
use kgprobe_core::rng::seeded;
use proptest::prelude::*;

/// Up to 8 entities, distinct edges without self-loops, some dead.
fn arb_source() -> impl Strategy<Value = GraphSource> {
    proptest::collection::btree_set((0u8..8, 0u8..8, 0u8..2), 1..24).prop_flat_map(|triples| {
        let triples: Vec<_> = triples.into_iter().filter(|(s, o, _)| s != o).collect();
        let n = triples.len();
        (Just(triples), proptest::collection::vec(prop::bool::weighted(0.8), n))
    })
    .prop_filter_map("needs an active edge", |(triples, alive)| {
        if !alive.iter().any(|a| *a) {
            return None;
        }
        let edges = triples
            .iter()
            .zip(&alive)
            .enumerate()
            .map(|(i, ((s, o, p), active))| {
                let e = EdgeSpec::new(format!("e{i}"), format!("n{s}"), format!("p{p}"), format!("n{o}"));
                if *active {
                    e
                } else {
                    e.dead()
                }
            })
            .collect();
        Some(GraphSource {
            entities: (0..8).map(|i| Entity::new(format!("n{i}"), format!("node {i}"))).collect(),
            predicates: (0..2).map(|i| PredicateDef::new(format!("p{i}"), format!("pred {i}"))).collect(),
            edges,
        })
    })
}

/// Signals for a subset of the active edges.
fn arb_case() -> impl Strategy<Value = (GraphSource, Vec<Signal>)> {
    arb_source().prop_flat_map(|src| {
        let active: Vec<String> = src.edges.iter().filter(|e| e.active).map(|e| e.id.to_string()).collect();
        let n = active.len();
        (
            Just(src),
            proptest::collection::vec(prop::option::of(any::<bool>()), n).prop_map(move |choice| {
                active
                    .iter()
                    .zip(choice)
                    .filter_map(|(id, c)| c.map(|correct| if correct { Signal::correct(id.as_str()) } else { Signal::incorrect(id.as_str()) }))
                    .collect::<Vec<_>>()
            }),
        )
    })
}

fn touches(a: &EdgeSpec, b: &EdgeSpec) -> bool {
    let ends = [&a.subject, &a.object];
    ends.contains(&&b.subject) || ends.contains(&&b.object)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn update_matches_neighbor_counting((src, signals) in arb_case(), propagate in any::<bool>()) {
        let mut pkg = init_pkg(src.clone()).unwrap();
        pkg.apply_signals(&signals, propagate).unwrap();
        for spec in &src.edges {
            let edge = pkg.edge(&spec.id).unwrap();
            let own = signals.iter().find(|s| s.edge_id == spec.id);
            let mut want_alpha = 1.0 + own.map_or(0.0, |s| if s.correct { 0.0 } else { 1.0 });
            let mut want_beta = 1.0 + own.map_or(0.0, |s| if s.correct { 1.0 } else { 0.0 });
            if propagate && spec.active {
                for other in src.edges.iter().filter(|o| o.id != spec.id && touches(o, spec)) {
                    if let Some(s) = signals.iter().find(|s| s.edge_id == other.id) {
                        if s.correct { want_beta += 1.0 } else { want_alpha += 1.0 }
                    }
                }
            }
            prop_assert_eq!((edge.params.alpha, edge.params.beta), (want_alpha, want_beta), "edge {}", spec.id);
            prop_assert!(edge.params.alpha >= 1.0 && edge.params.beta >= 1.0);
            let tally = own.map_or((0, 0), |s| if s.correct { (1, 0) } else { (0, 1) });
            prop_assert_eq!((edge.n_correct, edge.n_incorrect), tally);
        }
        prop_assert!(pkg.indexes_consistent());
    }

    #[test]
    fn update_ignores_signal_order((src, mut signals) in arb_case()) {
        let mut a = init_pkg(src.clone()).unwrap();
        let mut b = init_pkg(src).unwrap();
        a.apply_batch_update(&signals).unwrap();
        signals.reverse();
        b.apply_batch_update(&signals).unwrap();
        let mut wa = Vec::new();
        let mut wb = Vec::new();
        write_pkg(&a, &mut wa).unwrap();
        write_pkg(&b, &mut wb).unwrap();
        prop_assert_eq!(wa, wb);
    }

    #[test]
    fn rejected_batch_changes_nothing((src, mut signals) in arb_case()) {
        let mut pkg = init_pkg(src).unwrap();
        let mut before = Vec::new();
        write_pkg(&pkg, &mut before).unwrap();
        signals.push(Signal::incorrect("no-such-edge"));
        prop_assert_eq!(pkg.apply_batch_update(&signals), Err(PkgError::UnknownEdge("no-such-edge".into())));
        let mut after = Vec::new();
        write_pkg(&pkg, &mut after).unwrap();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn file_round_trip_is_lossless((src, signals) in arb_case()) {
        let mut pkg = init_pkg(src).unwrap();
        pkg.apply_batch_update(&signals).unwrap();
        let mut first = Vec::new();
        write_pkg(&pkg, &mut first).unwrap();
        let back = read_pkg(&first[..], PkgOptions::default()).unwrap();
        let mut second = Vec::new();
        write_pkg(&back, &mut second).unwrap();
        prop_assert_eq!(first, second);
    }

    #[test]
    fn selection_returns_distinct_active_edges(src in arb_source(), n in 1usize..30, seed in any::<u64>()) {
        let pkg = init_pkg(src).unwrap();
        let picked = pkg.select_batch(n, &mut seeded(seed)).unwrap();
        prop_assert_eq!(picked.len(), n.min(pkg.active_edge_count()));
        let distinct: BTreeSet<_> = picked.iter().collect();
        prop_assert_eq!(distinct.len(), picked.len());
        prop_assert!(picked.iter().all(|id| pkg.edge(id).unwrap().active));
    }
}

fn step_pkg(src: GraphSource, batch: usize, seed: u64) -> ParameterizedKG {
    let mut pkg = init_pkg(src).unwrap();
    let reference = Reference::from_pkg(&pkg);
    let ex = SimulatedExaminee::new(SimulatorConfig {
        seed,
        ..SimulatorConfig::default()
    })
    .unwrap();
    let roles = Roles {
        examinee: &ex,
        writer: &TemplateWriter,
        judge: &GoldMatchJudge,
    };
    let config = RunConfig {
        iterations: 10,
        batch_size: batch,
        mode: ExamMode::Hard,
        seed,
        ..RunConfig::default()
    };
    let mut sink = NullLog;
    let mut eval = Evaluation::new(&mut pkg, &reference, config, roles, &mut sink).unwrap();
    for _ in 0..10 {
        let report = eval.step().unwrap();
        assert!(report.point.signals + report.point.skipped <= batch);
        assert_eq!(report.selected.len(), batch.min(eval.pkg().active_edge_count()));
    }
    pkg
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    /// Ten batches through the full loop: at most one signal per selected edge.
    #[test]
    fn loop_sends_one_signal_per_selected_edge(src in arb_source(), batch in 1usize..6, seed in any::<u64>()) {
        let pkg = step_pkg(src, batch, seed);
        let tallies: u64 = pkg.edges().map(|e| e.n_correct + e.n_incorrect).sum();
        prop_assert!(tallies <= 10 * batch as u64);
        prop_assert!(pkg.edges().all(|e| e.active || e.n_correct + e.n_incorrect == 0));
    }
}
