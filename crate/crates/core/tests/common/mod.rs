//! Seeded random e-graphs, random patterns, and a brute-force congruence
//! oracle shared by the property suites. Everything is deterministic in the
//! seed so failures replay exactly.
//!
//! Each test binary compiles its own copy, so helpers one binary skips are
//! not dead weight.
#![allow(dead_code)]

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rem_core::{EClassId, EGraph, ENode, Pattern};

/// Symbol pool: constants, unary, binary, ternary.
pub const SYMBOLS: &[(&str, usize)] = &[
    ("a", 0),
    ("b", 0),
    ("c", 0),
    ("g", 1),
    ("h", 1),
    ("f", 2),
    ("j", 2),
    ("t", 3),
];

const VAR_POOL: &[&str] = &["x", "y", "z"];

/// Everything needed to re-derive the e-graph independently: the node ops
/// (children refer to earlier node indices), the union ops (node indices),
/// and the class id `add` returned for each node.
pub struct BuildLog {
    pub nodes: Vec<(&'static str, Vec<usize>)>,
    pub unions: Vec<(usize, usize)>,
    pub ids: Vec<EClassId>,
}

/// Builds a random rebuilt e-graph with at most `max_nodes` e-nodes,
/// interleaving adds and unions the way a saturation loop would.
pub fn random_egraph(rng: &mut ChaCha8Rng, max_nodes: usize) -> (EGraph, BuildLog) {
    let max_nodes = max_nodes.max(1);
    let mut eg = EGraph::new();
    for (s, k) in SYMBOLS {
        eg.declare(s, *k).unwrap();
    }
    let mut log = BuildLog { nodes: Vec::new(), unions: Vec::new(), ids: Vec::new() };
    let n_ops = rng.random_range(1..=max_nodes);
    for _ in 0..n_ops {
        let (sym, arity) = if log.nodes.is_empty() {
            SYMBOLS[rng.random_range(0..3)]
        } else {
            SYMBOLS[rng.random_range(0..SYMBOLS.len())]
        };
        let child_idx: Vec<usize> =
            (0..arity).map(|_| rng.random_range(0..log.nodes.len())).collect();
        let children: Vec<EClassId> = child_idx.iter().map(|&i| log.ids[i]).collect();
        let id = eg.add(ENode::new(sym, children)).unwrap();
        log.nodes.push((sym, child_idx));
        log.ids.push(id);
        if log.nodes.len() >= 2 && rng.random_range(0..6) == 0 {
            let i = rng.random_range(0..log.nodes.len());
            let j = rng.random_range(0..log.nodes.len());
            eg.union(log.ids[i], log.ids[j]).unwrap();
            log.unions.push((i, j));
        }
    }
    eg.rebuild();
    (eg, log)
}

/// Random pattern of depth ≤ 3 over ≤ 3 distinct variables, covering
/// degenerate shapes (bare variable, flat) and non-linear variable reuse.
pub fn random_pattern(rng: &mut ChaCha8Rng) -> Pattern {
    let n_vars = rng.random_range(1..=VAR_POOL.len());
    match rng.random_range(0..100) {
        0..5 => Pattern::Var(VAR_POOL[rng.random_range(0..n_vars)].to_string()),
        5..25 => {
            // Flat: one application whose children are all variables.
            let (sym, arity) = SYMBOLS[rng.random_range(3..SYMBOLS.len())];
            let children = (0..arity)
                .map(|_| Pattern::Var(VAR_POOL[rng.random_range(0..n_vars)].to_string()))
                .collect();
            Pattern::App(sym.into(), children)
        }
        _ => random_app(rng, 3, n_vars),
    }
}

fn random_app(rng: &mut ChaCha8Rng, depth: usize, n_vars: usize) -> Pattern {
    let (sym, arity) = SYMBOLS[rng.random_range(3..SYMBOLS.len())];
    let children = (0..arity)
        .map(|_| {
            if depth > 1 && rng.random_range(0..10) < 4 {
                random_app(rng, depth - 1, n_vars)
            } else if rng.random_range(0..10) < 2 {
                // Ground leaf.
                Pattern::App(SYMBOLS[rng.random_range(0..3)].0.into(), Vec::new())
            } else {
                Pattern::Var(VAR_POOL[rng.random_range(0..n_vars)].to_string())
            }
        })
        .collect();
    Pattern::App(sym.into(), children)
}

/// Brute-force congruence closure over the build log, ignoring the e-graph
/// entirely: returns a parent array partitioning node indices. Quadratic
/// pair scans to a fixpoint — an oracle, not an algorithm.
pub fn congruence_classes(log: &BuildLog) -> Vec<usize> {
    let n = log.nodes.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for &(i, j) in &log.unions {
        let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
        parent[ri] = rj;
    }
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in (i + 1)..n {
                if root(&mut parent, i) == root(&mut parent, j) {
                    continue;
                }
                let (si, ci) = &log.nodes[i];
                let (sj, cj) = &log.nodes[j];
                if si != sj || ci.len() != cj.len() {
                    continue;
                }
                let congruent = ci
                    .iter()
                    .zip(cj)
                    .all(|(&a, &b)| root(&mut parent, a) == root(&mut parent, b));
                if congruent {
                    let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                    parent[ri] = rj;
                    changed = true;
                }
            }
        }
        if !changed {
            return parent;
        }
    }
}

/// True iff the oracle puts `i` and `j` in one class.
pub fn oracle_same(parent: &mut Vec<usize>, i: usize, j: usize) -> bool {
    fn root(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    root(parent, i) == root(parent, j)
}
