//! Reference matchers the relational engine is measured against.
//!
//! [`bt_match`] is the classic backtracking e-matcher written declaratively:
//! it refines a *set* of partial substitutions against one pattern at one
//! class. The variable case extends or filters each substitution; the
//! application case folds the set through the children of every e-node in
//! the class that carries the pattern's symbol, visiting each such e-node
//! once per enclosing candidate. The `candidates` counter increments exactly
//! on those visits, which is the work a hash-consed backtracking matcher
//! cannot avoid.
//!
//! [`bt_ematch_all`] unions `bt_match` over every canonical class and tags
//! each result with the class it was rooted at; [`bt_ematch`] joins several
//! patterns on their shared variables.
//!
//! [`naive_cq_eval`] evaluates a conjunctive query by enumerating the cross
//! product of per-variable active domains and checking every atom by tuple
//! lookup. It is deliberately unoptimized — an independent oracle for the
//! join engine — and refuses up front when the enumeration space exceeds a
//! cap.

use std::collections::BTreeMap;

use crate::compile::{ConjunctiveQuery, QueryVar};
use crate::db::Database;
use crate::egraph::{EClassId, EGraph};
use crate::error::{Error, Result};
use crate::matchset::{join_matches, MatchSet};
use crate::pattern::Pattern;

/// Refusal threshold for [`naive_cq_eval`]: alternatives above this many
/// candidate assignments error instead of running for hours.
pub const NAIVE_DEFAULT_CAP: u128 = 10_000_000;

/// A partial substitution as a name → class map.
pub type PartialSubst = BTreeMap<String, EClassId>;

/// Slot-indexed partial substitution; slots follow a fixed variable list.
type Partial = Vec<Option<EClassId>>;

/// Backtracking match of possibly-several simultaneous patterns. Results are
/// keyed like the compiled query head: one `root`/`root_k` per pattern, then
/// pattern variables in first-occurrence order.
pub fn bt_ematch(eg: &EGraph, patterns: &[Pattern]) -> Result<MatchSet> {
    if !eg.is_clean() {
        return Err(Error::PendingRebuild);
    }
    if patterns.is_empty() {
        return Err(Error::InvalidOrdering("no patterns to match".into()));
    }
    let mut joined: Option<MatchSet> = None;
    for (i, p) in patterns.iter().enumerate() {
        let one = bt_single(eg, p, i as u32);
        joined = Some(match joined {
            None => one,
            Some(acc) => {
                let candidates = acc.counters.candidates + one.counters.candidates;
                let leaves = acc.counters.leaves_emitted + one.counters.leaves_emitted;
                let mut j = join_matches(&acc, &one);
                j.counters.candidates = candidates;
                j.counters.leaves_emitted = leaves;
                j
            }
        });
    }
    let ms = joined.expect("at least one pattern");
    let mut target: Vec<QueryVar> = (0..patterns.len() as u32).map(QueryVar::Root).collect();
    for p in patterns {
        for v in p.variables() {
            let qv = QueryVar::Pat(v.to_string());
            if !target.contains(&qv) {
                target.push(qv);
            }
        }
    }
    Ok(reorder(ms, &target))
}

/// Matches one pattern against every canonical class; the first output
/// column is the class the match is rooted at.
pub fn bt_ematch_all(eg: &EGraph, pattern: &Pattern) -> Result<MatchSet> {
    if !eg.is_clean() {
        return Err(Error::PendingRebuild);
    }
    Ok(bt_single(eg, pattern, 0))
}

/// Refines every substitution in `s` by matching `pattern` against `class`.
///
/// Returns the extended substitution set and the number of e-nodes visited.
/// Substitutions may bind variables that do not occur in `pattern`; those
/// bindings pass through untouched.
pub fn bt_match(
    eg: &EGraph,
    pattern: &Pattern,
    class: EClassId,
    s: &[PartialSubst],
) -> (Vec<PartialSubst>, u64) {
    let mut vars: Vec<&str> = pattern.variables();
    for subst in s {
        for name in subst.keys() {
            if !vars.contains(&name.as_str()) {
                vars.push(name);
            }
        }
    }
    let set: Vec<Partial> = s
        .iter()
        .map(|subst| {
            vars.iter()
                .map(|v| subst.get(*v).copied())
                .collect::<Partial>()
        })
        .collect();
    let mut candidates = 0;
    let out = match_set(eg, pattern, class, set, &vars, &mut candidates);
    let named = out
        .into_iter()
        .map(|p| {
            vars.iter()
                .zip(p)
                .filter_map(|(v, b)| b.map(|c| (v.to_string(), c)))
                .collect::<PartialSubst>()
        })
        .collect();
    (named, candidates)
}

fn reorder(ms: MatchSet, target: &[QueryVar]) -> MatchSet {
    if ms.head() == target {
        return ms;
    }
    let perm: Vec<usize> = target
        .iter()
        .map(|v| ms.head().iter().position(|h| h == v).expect("head permutation"))
        .collect();
    let mut out = MatchSet::new(target.to_vec());
    out.counters = ms.counters.clone();
    for row in ms.rows() {
        out.insert(perm.iter().map(|&i| row[i]).collect());
    }
    out
}

/// Matches one pattern everywhere, with the root column named `Root(slot)`.
fn bt_single(eg: &EGraph, pattern: &Pattern, slot: u32) -> MatchSet {
    let mut head = vec![QueryVar::Root(slot)];
    head.extend(pattern.variables().into_iter().map(|v| QueryVar::Pat(v.to_string())));
    let vars: Vec<&str> = pattern.variables();
    let mut ms = MatchSet::new(head);
    for root in eg.canonical_ids() {
        let seed: Vec<Partial> = vec![vec![None; vars.len()]];
        let matched = match_set(eg, pattern, root, seed, &vars, &mut ms.counters.candidates);
        for subst in matched {
            let mut row = Vec::with_capacity(1 + subst.len());
            row.push(root);
            row.extend(subst.into_iter().map(|b| b.expect("fully bound")));
            ms.counters.leaves_emitted += 1;
            ms.insert(row);
        }
    }
    ms
}

/// The declarative matcher core over slot-indexed substitution sets.
///
/// Variable case: extend unbound slots with `class`, keep slots already
/// bound to `class`, drop conflicts. Application case: for every e-node in
/// `class` with the right symbol, fold the whole set through its children
/// left to right, then union the per-node results. Both cases maintain set
/// semantics by deduplicating.
fn match_set(
    eg: &EGraph,
    pattern: &Pattern,
    class: EClassId,
    s: Vec<Partial>,
    vars: &[&str],
    candidates: &mut u64,
) -> Vec<Partial> {
    if s.is_empty() {
        return s;
    }
    match pattern {
        Pattern::Var(name) => {
            let vi = vars.iter().position(|v| v == name).expect("own variable");
            let mut out: Vec<Partial> = s
                .into_iter()
                .filter_map(|mut subst| match subst[vi] {
                    None => {
                        subst[vi] = Some(class);
                        Some(subst)
                    }
                    Some(bound) if bound == class => Some(subst),
                    Some(_) => None,
                })
                .collect();
            dedup(&mut out);
            out
        }
        Pattern::App(symbol, children) => {
            let mut out: Vec<Partial> = Vec::new();
            for node in eg.nodes_of(class) {
                if node.symbol != *symbol {
                    continue;
                }
                *candidates += 1;
                debug_assert_eq!(node.children.len(), children.len());
                let mut cur = s.clone();
                for (child_p, &child_c) in children.iter().zip(node.children.iter()) {
                    cur = match_set(eg, child_p, eg.find(child_c), cur, vars, candidates);
                    if cur.is_empty() {
                        break;
                    }
                }
                out.extend(cur);
            }
            dedup(&mut out);
            out
        }
    }
}

fn dedup(set: &mut Vec<Partial>) {
    if set.len() > 1 {
        set.sort_unstable();
        set.dedup();
    }
}

/// Bottom-up conjunctive query evaluation by domain enumeration.
///
/// Each variable's active domain is the intersection of the value sets of
/// the columns it occupies; the full assignment space is the product of the
/// domain sizes. Spaces above `cap` refuse with
/// [`Error::NaiveCapExceeded`]. The `candidates` counter records assignments
/// tried.
pub fn naive_cq_eval(q: &ConjunctiveQuery, db: &Database, cap: u128) -> Result<MatchSet> {
    let vars = q.variables();
    let mut domains: Vec<Vec<EClassId>> = Vec::with_capacity(vars.len());
    for v in &vars {
        let mut dom: Option<Vec<EClassId>> = None;
        for atom in &q.atoms {
            let rel = db
                .relation(&atom.symbol)
                .ok_or_else(|| Error::UnknownRelation(atom.symbol.as_str().to_string()))?;
            if rel.width() != atom.vars.len() {
                return Err(Error::ArityMismatch {
                    symbol: atom.symbol.as_str().to_string(),
                    expected: rel.width(),
                    found: atom.vars.len(),
                });
            }
            for (col, av) in atom.vars.iter().enumerate() {
                if av != v {
                    continue;
                }
                let col_vals = rel.column(col);
                dom = Some(match dom {
                    None => col_vals,
                    Some(prev) => intersect_sorted(&prev, &col_vals),
                });
            }
        }
        domains.push(dom.expect("every query variable occurs in an atom"));
    }
    let space = domains
        .iter()
        .fold(1u128, |acc, d| acc.saturating_mul(d.len() as u128));
    if space > cap {
        return Err(Error::NaiveCapExceeded { space, cap });
    }

    let mut ms = MatchSet::new(q.head.clone());
    if domains.iter().any(Vec::is_empty) {
        return Ok(ms);
    }
    let head_idx: Vec<usize> = q
        .head
        .iter()
        .map(|h| vars.iter().position(|v| v == h).expect("head variable"))
        .collect();
    let mut odometer = vec![0usize; vars.len()];
    'assignments: loop {
        ms.counters.candidates += 1;
        let assignment: Vec<EClassId> = odometer
            .iter()
            .zip(&domains)
            .map(|(&i, d)| d[i])
            .collect();
        let ok = q.atoms.iter().all(|atom| {
            let rel = db.relation(&atom.symbol).expect("checked above");
            let tuple: Vec<EClassId> = atom
                .vars
                .iter()
                .map(|av| {
                    let vi = vars.iter().position(|v| v == av).expect("query variable");
                    assignment[vi]
                })
                .collect();
            rel.contains(&tuple)
        });
        if ok {
            ms.counters.leaves_emitted += 1;
            ms.insert(head_idx.iter().map(|&i| assignment[i]).collect());
        }
        for k in (0..odometer.len()).rev() {
            odometer[k] += 1;
            if odometer[k] < domains[k].len() {
                continue 'assignments;
            }
            odometer[k] = 0;
            if k == 0 {
                break 'assignments;
            }
        }
    }
    Ok(ms)
}

fn intersect_sorted(a: &[EClassId], b: &[EClassId]) -> Vec<EClassId> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}
