//! Rule application until fixpoint, a node budget, or an iteration budget.
//!
//! Each iteration matches every rule against a snapshot of the e-graph,
//! then applies all instantiations and unions, then rebuilds once.
//! Matches are applied in rule order and in sorted row order, so runs are
//! deterministic.

use crate::egraph::{EClassId, EGraph, ENode, Symbol};
use crate::error::Result;
use crate::gj::{Engine, MatchOptions};
use crate::pattern::Pattern;
use crate::rules::RewriteRule;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    /// An iteration neither added a node nor merged two classes.
    Fixpoint,
    /// Applying one more instantiation would have exceeded `max_nodes`.
    NodeLimit,
    IterationLimit,
}

#[derive(Clone, Copy, Debug)]
pub struct SaturateOptions {
    pub max_iterations: usize,
    /// Budget on live (hash-consed) nodes; checked before every
    /// instantiation.
    pub max_nodes: usize,
}

impl Default for SaturateOptions {
    fn default() -> Self {
        SaturateOptions { max_iterations: 30, max_nodes: 100_000 }
    }
}

#[derive(Clone, Debug)]
pub struct SaturationReport {
    pub iterations: usize,
    pub stopped: StopReason,
    pub n_nodes: usize,
    pub n_classes: usize,
    /// Unions that actually merged two distinct classes.
    pub unions_applied: u64,
    /// Total match rows across all rules and iterations.
    pub matches_found: u64,
}

/// Builds the right-side template under a substitution, returning the class
/// of its root.
pub fn instantiate(
    eg: &mut EGraph,
    template: &Pattern,
    lookup: &dyn Fn(&str) -> EClassId,
) -> Result<EClassId> {
    match template {
        Pattern::Var(name) => Ok(eg.find(lookup(name))),
        Pattern::App(symbol, children) => {
            let mut kids = Vec::with_capacity(children.len());
            for c in children {
                kids.push(instantiate(eg, c, lookup)?);
            }
            eg.add(ENode::new(symbol.clone(), kids))
        }
    }
}

pub fn saturate(
    eg: &mut EGraph,
    rules: &[RewriteRule],
    opts: &SaturateOptions,
) -> Result<SaturationReport> {
    eg.rebuild();
    // Rules may mention symbols the e-graph has not seen; register them so
    // instantiation can add the nodes.
    for rule in rules {
        declare_symbols(eg, &rule.lhs)?;
        declare_symbols(eg, &rule.rhs)?;
    }
    let mut report = SaturationReport {
        iterations: 0,
        stopped: StopReason::IterationLimit,
        n_nodes: eg.n_nodes(),
        n_classes: eg.n_classes(),
        unions_applied: 0,
        matches_found: 0,
    };
    let match_opts = MatchOptions::default();
    while report.iterations < opts.max_iterations {
        // Match everything against the pre-iteration snapshot.
        let mut engine = Engine::new(eg)?;
        let mut batches: Vec<(usize, Vec<Vec<EClassId>>, Vec<String>)> = Vec::new();
        for (ri, rule) in rules.iter().enumerate() {
            let ms = engine.ematch(eg, std::slice::from_ref(&rule.lhs), &match_opts)?;
            report.matches_found += ms.len() as u64;
            if !ms.is_empty() {
                let head_vars: Vec<String> = ms.head().iter().map(|v| v.to_string()).collect();
                let rows: Vec<Vec<EClassId>> =
                    ms.sorted_rows().into_iter().cloned().collect();
                batches.push((ri, rows, head_vars));
            }
        }
        let mut progressed = false;
        for (ri, rows, head_vars) in &batches {
            let rule = &rules[*ri];
            let rhs_size = pattern_node_count(&rule.rhs);
            for row in rows {
                if eg.n_nodes() + rhs_size > opts.max_nodes {
                    eg.rebuild();
                    report.stopped = StopReason::NodeLimit;
                    report.n_nodes = eg.n_nodes();
                    report.n_classes = eg.n_classes();
                    return Ok(report);
                }
                // Resolve variables before instantiation mutates the graph.
                let resolved = resolve_template(&rule.rhs, &|name| {
                    let key = format!("?{name}");
                    let col = head_vars
                        .iter()
                        .position(|h| h == &key)
                        .expect("rhs variables are bound by the lhs");
                    eg.find(row[col])
                });
                let id = add_resolved(eg, &resolved)?;
                let root = eg.find(row[0]);
                if eg.find(id) != root {
                    report.unions_applied += 1;
                    progressed = true;
                }
                eg.union(id, root)?;
            }
        }
        let before_nodes = eg.n_nodes();
        eg.rebuild();
        report.iterations += 1;
        report.n_nodes = eg.n_nodes();
        report.n_classes = eg.n_classes();
        // Fresh nodes always sit in fresh classes, so their union with the
        // match root counts as progress; no progress means a fixpoint.
        debug_assert!(progressed || eg.n_nodes() == before_nodes);
        if !progressed {
            report.stopped = StopReason::Fixpoint;
            break;
        }
    }
    Ok(report)
}

/// A template with variables replaced by classes, ready to add bottom-up.
enum Resolved {
    Class(EClassId),
    App(Symbol, Vec<Resolved>),
}

fn resolve_template(p: &Pattern, lookup: &dyn Fn(&str) -> EClassId) -> Resolved {
    match p {
        Pattern::Var(name) => Resolved::Class(lookup(name)),
        Pattern::App(symbol, children) => Resolved::App(
            symbol.clone(),
            children.iter().map(|c| resolve_template(c, lookup)).collect(),
        ),
    }
}

fn add_resolved(eg: &mut EGraph, r: &Resolved) -> Result<EClassId> {
    match r {
        Resolved::Class(id) => Ok(eg.find(*id)),
        Resolved::App(symbol, children) => {
            let mut kids = Vec::with_capacity(children.len());
            for c in children {
                kids.push(add_resolved(eg, c)?);
            }
            eg.add(ENode::new(symbol.clone(), kids))
        }
    }
}

fn pattern_node_count(p: &Pattern) -> usize {
    match p {
        Pattern::Var(_) => 0,
        Pattern::App(_, children) => 1 + children.iter().map(pattern_node_count).sum::<usize>(),
    }
}

/// Registers every symbol of `p` (errors if a symbol is already registered
/// at a different arity).
pub fn declare_symbols(eg: &mut EGraph, p: &Pattern) -> Result<()> {
    if let Pattern::App(symbol, children) = p {
        eg.declare(symbol.as_str(), children.len())?;
        for c in children {
            declare_symbols(eg, c)?;
        }
    }
    Ok(())
}

/// Parses a ground term, registers its symbols, and adds it.
pub fn add_term(eg: &mut EGraph, term: &Pattern) -> Result<EClassId> {
    declare_symbols(eg, term)?;
    instantiate(eg, term, &|name| panic!("term contains variable ?{name}"))
}

/// Synthetic worst-case family for the backtracking matcher: `n` constants
/// `c0..`, all `g(c_i)` merged into one class, all `f(c_i, g(c_i))` merged
/// into one class. `(f ?a (g ?a))` has exactly `n` matches here, but a
/// backtracking matcher inspects every (f-node, g-node) pair.
pub fn gen_fgn(n: usize) -> EGraph {
    let mut eg = EGraph::new();
    eg.declare("f", 2).unwrap();
    eg.declare("g", 1).unwrap();
    let mut gs = Vec::with_capacity(n);
    let mut fs = Vec::with_capacity(n);
    for i in 0..n {
        let name = format!("c{i}");
        eg.declare(&name, 0).unwrap();
        let c = eg.add(ENode::leaf(name.as_str())).unwrap();
        let g = eg.add(ENode::new("g", vec![c])).unwrap();
        let f = eg.add(ENode::new("f", vec![c, g])).unwrap();
        gs.push(g);
        fs.push(f);
    }
    for w in gs.windows(2) {
        eg.union(w[0], w[1]).unwrap();
    }
    for w in fs.windows(2) {
        eg.union(w[0], w[1]).unwrap();
    }
    eg.rebuild();
    eg
}
