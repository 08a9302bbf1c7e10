//! Differential property tests: the three evaluation routes agree on random
//! inputs, rebuilding matches a brute-force congruence oracle, evaluation is
//! insensitive to the variable ordering, and JSON round-trips are lossless.

mod common;

use common::{congruence_classes, oracle_same, random_egraph, random_pattern};
use proptest::prelude::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rem_core::gj::eval;
use rem_core::{
    bt_ematch_all, compile, dump, egraph_to_database, ematch, from_json, load, naive_cq_eval,
    plan, to_json, validate_ordering, Error, MatchOptions, VariableOrdering,
};

fn config() -> ProptestConfig {
    let cases = std::env::var("PROPTEST_CASES")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(96);
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    /// Generic join, backtracking, and naive enumeration produce the same
    /// match set on arbitrary e-graphs and patterns. The naive leg is skipped
    /// for bare variables (no conjunctive query form) and when its assignment
    /// space exceeds the cap.
    #[test]
    fn three_engines_agree(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (eg, _) = random_egraph(&mut rng, 60);
        let pattern = random_pattern(&mut rng);

        let gj = ematch(&eg, std::slice::from_ref(&pattern), &MatchOptions::default()).unwrap();
        let bt = bt_ematch_all(&eg, &pattern).unwrap();
        prop_assert!(
            gj.same_matches(&bt),
            "gj and bt disagree on `{pattern}`:\n{}",
            gj.diff(&bt, 8)
        );

        match compile(&pattern) {
            Err(Error::BareVariablePattern) => {}
            Err(e) => return Err(TestCaseError::fail(format!("compile failed: {e}"))),
            Ok(q) => {
                let db = egraph_to_database(&eg).unwrap();
                match naive_cq_eval(&q, &db, 1_000_000) {
                    Err(Error::NaiveCapExceeded { .. }) => {}
                    Err(e) => return Err(TestCaseError::fail(format!("naive failed: {e}"))),
                    Ok(naive) => prop_assert!(
                        gj.same_matches(&naive),
                        "gj and naive disagree on `{pattern}`:\n{}",
                        gj.diff(&naive, 8)
                    ),
                }
            }
        }
    }

    /// After `rebuild`, two added nodes share an e-class exactly when a
    /// brute-force congruence closure over the raw build log says so, and
    /// hash-consing leaves exactly one e-node per distinct canonical
    /// (symbol, children) application.
    #[test]
    fn congruence_closure_matches_brute_force(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (eg, log) = random_egraph(&mut rng, 40);
        let mut parent = congruence_classes(&log);

        for i in 0..log.ids.len() {
            for j in (i + 1)..log.ids.len() {
                let merged = eg.find(log.ids[i]) == eg.find(log.ids[j]);
                let oracle = oracle_same(&mut parent, i, j);
                prop_assert_eq!(
                    merged, oracle,
                    "nodes {} and {} ({:?} vs {:?}): e-graph says {}, oracle says {}",
                    i, j, log.nodes[i], log.nodes[j], merged, oracle
                );
            }
        }

        let mut canonical: Vec<(String, Vec<u32>)> = log
            .nodes
            .iter()
            .map(|(sym, children)| {
                (
                    sym.to_string(),
                    children.iter().map(|&c| eg.find(log.ids[c]).0).collect(),
                )
            })
            .collect();
        canonical.sort();
        canonical.dedup();
        prop_assert_eq!(canonical.len(), eg.n_nodes(), "hash-consing miscount");
    }

    /// Any valid variable ordering — planned, reversed, or shuffled — yields
    /// the same match set.
    #[test]
    fn ordering_choice_never_changes_matches(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (eg, _) = random_egraph(&mut rng, 60);
        let pattern = random_pattern(&mut rng);
        let q = match compile(&pattern) {
            Err(Error::BareVariablePattern) => return Ok(()),
            other => other.unwrap(),
        };
        let db = egraph_to_database(&eg).unwrap();

        let planned = plan(&q, &db).unwrap();
        let vars = q.variables();
        let reversed = VariableOrdering::singletons(vars.iter().rev().cloned().collect());
        let mut shuffled_vars = vars.clone();
        shuffled_vars.shuffle(&mut rng);
        let shuffled = VariableOrdering::singletons(shuffled_vars);

        for ord in [&planned, &reversed, &shuffled] {
            validate_ordering(&q, ord).unwrap();
        }
        let base = eval(&q, &db, &planned).unwrap();
        for (name, ord) in [("reversed", &reversed), ("shuffled", &shuffled)] {
            let other = eval(&q, &db, ord).unwrap();
            prop_assert!(
                base.same_matches(&other),
                "{} ordering {} changed matches on `{}`:\n{}",
                name, ord, pattern, base.diff(&other, 8)
            );
        }
    }

    /// Serializing an e-graph to JSON and loading it back preserves its
    /// structure (node and class counts, match counts for random patterns),
    /// and one reload reaches a serialization fixpoint. Loading renumbers
    /// e-class ids, so match sets are compared by size rather than by raw id.
    /// Graphs with cyclic e-classes cannot be serialized and are skipped.
    #[test]
    fn dump_load_round_trip_preserves_matches(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (eg, _) = random_egraph(&mut rng, 60);
        let text = match to_json(&eg) {
            Err(Error::CyclicEGraph) => return Ok(()),
            other => other.unwrap(),
        };
        let eg2 = from_json(&text).unwrap();
        prop_assert_eq!(eg.n_nodes(), eg2.n_nodes());
        prop_assert_eq!(eg.n_classes(), eg2.n_classes());

        for _ in 0..3 {
            let pattern = random_pattern(&mut rng);
            let a = bt_ematch_all(&eg, &pattern).unwrap();
            let b = bt_ematch_all(&eg2, &pattern).unwrap();
            prop_assert_eq!(
                a.len(), b.len(),
                "round trip changed match count on `{}`", pattern
            );
        }

        let d2 = dump(&eg2).unwrap();
        let eg3 = load(&d2).unwrap();
        prop_assert_eq!(d2, dump(&eg3).unwrap(), "dump/load did not stabilize");
    }
}
