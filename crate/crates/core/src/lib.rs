//! Relational e-matching: an e-graph whose pattern matcher compiles
//! patterns to conjunctive queries and evaluates them with a worst-case
//! optimal generic join over trie indices, next to a classic backtracking
//! e-matcher for comparison.
//!
//! The pipeline:
//!
//! 1. [`egraph`] — hash-consed e-graph with deferred congruence repair;
//! 2. [`db`] — each function symbol's e-nodes as a relation of canonical
//!    tuples;
//! 3. [`compile`] — patterns to conjunctive queries (auxiliary variables
//!    for nesting);
//! 4. [`plan`] — variable orderings: occurrence/size/functional-dependency
//!    heuristics plus batching of once-bound variables;
//! 5. [`trie`] — hash tries over relations, one level per ordering group;
//! 6. [`gj`] — the join itself, plus scan fast paths for flat patterns;
//! 7. [`baseline`] — the backtracking matcher and a naive evaluator used
//!    as oracles and benchmark baselines.

pub mod baseline;
pub mod bench;
pub mod compile;
pub mod db;
pub mod egraph;
pub mod error;
pub mod gj;
pub mod json;
pub mod matchset;
pub mod pattern;
pub mod plan;
pub mod rules;
pub mod saturate;
pub mod sexpr;
pub mod trie;

pub use baseline::{bt_ematch, bt_ematch_all, bt_match, naive_cq_eval, PartialSubst, NAIVE_DEFAULT_CAP};
pub use bench::{read_csv, run_bench, run_bench_engines, write_csv, BenchEngines, BenchRecord};
pub use compile::{compile, compile_multi, Atom, ConjunctiveQuery, QueryVar};
pub use db::{egraph_to_database, Database, Relation, Tuple};
pub use egraph::{EClassId, EGraph, ENode, Symbol};
pub use error::{Error, Result};
pub use gj::{ematch, Engine, MatchOptions};
pub use json::{dump, from_json, load, signature, to_json, EGraphFile};
pub use matchset::{join_matches, Counters, MatchSet, Substitution};
pub use pattern::{Pattern, PatternShape};
pub use plan::{plan, plan_stats, validate_ordering, PlanStats, VariableOrdering};
pub use rules::{parse_rule, parse_rules, RewriteRule};
pub use saturate::{
    add_term, declare_symbols, gen_fgn, instantiate, saturate, SaturateOptions,
    SaturationReport, StopReason,
};
pub use sexpr::{parse_lines, parse_pattern, parse_patterns, parse_term};
pub use trie::{build_trie, Key, Trie, TrieCache};
