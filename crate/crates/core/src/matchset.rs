//! Match results and instrumentation counters.

use rustc_hash::FxHashSet;
use std::fmt;

use crate::compile::QueryVar;
use crate::egraph::EClassId;

/// Work counters, maintained unconditionally by every engine. The generic
/// join fields: `intersection_steps` counts keys examined while intersecting
/// a level (only the iterated, smallest relation's keys; probes into the
/// others are constant-time and uncounted), `values_enumerated` counts
/// candidates that survive all probes and get bound, and `leaves_emitted`
/// counts full substitutions. The backtracking matcher counts every e-node it
/// visits in `candidates`; the naive evaluator counts assignments tried.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct Counters {
    pub intersection_steps: u64,
    pub values_enumerated: u64,
    pub leaves_emitted: u64,
    pub candidates: u64,
    /// Largest candidate domain seen at each join level.
    pub level_domain_max: Vec<usize>,
}

/// A set of substitutions over a fixed head. Rows are id tuples aligned with
/// `head`; set semantics (projecting out auxiliary variables can collapse
/// derivations).
#[derive(Clone, Debug)]
pub struct MatchSet {
    head: Vec<QueryVar>,
    rows: FxHashSet<Vec<EClassId>>,
    pub counters: Counters,
}

impl MatchSet {
    pub fn new(head: Vec<QueryVar>) -> MatchSet {
        MatchSet { head, rows: FxHashSet::default(), counters: Counters::default() }
    }

    pub fn head(&self) -> &[QueryVar] {
        &self.head
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn insert(&mut self, row: Vec<EClassId>) {
        debug_assert_eq!(row.len(), self.head.len());
        self.rows.insert(row);
    }

    pub fn contains(&self, row: &[EClassId]) -> bool {
        self.rows.contains(row)
    }

    pub fn rows(&self) -> impl Iterator<Item = &Vec<EClassId>> {
        self.rows.iter()
    }

    /// Rows in lexicographic order; the printing order.
    pub fn sorted_rows(&self) -> Vec<&Vec<EClassId>> {
        let mut rows: Vec<&Vec<EClassId>> = self.rows.iter().collect();
        rows.sort();
        rows
    }

    pub fn iter(&self) -> impl Iterator<Item = Substitution<'_>> {
        self.rows.iter().map(move |row| Substitution { head: &self.head, row })
    }

    /// Whether two match sets denote the same set of substitutions. Heads
    /// must agree as sets; rows are compared under the other head's column
    /// order.
    pub fn same_matches(&self, other: &MatchSet) -> bool {
        if self.head.len() != other.head.len() || self.len() != other.len() {
            return false;
        }
        let Some(perm) = self
            .head
            .iter()
            .map(|v| other.head.iter().position(|w| w == v))
            .collect::<Option<Vec<usize>>>()
        else {
            return false;
        };
        self.rows.iter().all(|row| {
            let mut reordered = vec![EClassId(0); row.len()];
            for (i, &p) in perm.iter().enumerate() {
                reordered[p] = row[i];
            }
            other.rows.contains(&reordered)
        })
    }

    /// Rows present in exactly one of the two sets, rendered for diagnostics,
    /// truncated to `limit` per side.
    pub fn diff(&self, other: &MatchSet, limit: usize) -> String {
        let mut out = String::new();
        let mut count = 0;
        for row in self.sorted_rows() {
            if !other.rows.contains(row.as_slice()) {
                if count < limit {
                    out.push_str(&format!("  only left:  {}\n", render_row(&self.head, row)));
                }
                count += 1;
            }
        }
        let mut count_r = 0;
        for row in other.sorted_rows() {
            if !self.rows.contains(row.as_slice()) {
                if count_r < limit {
                    out.push_str(&format!("  only right: {}\n", render_row(&other.head, row)));
                }
                count_r += 1;
            }
        }
        if count > limit || count_r > limit {
            out.push_str(&format!(
                "  ... and {} more\n",
                (count.saturating_sub(limit)) + (count_r.saturating_sub(limit))
            ));
        }
        out
    }
}

fn render_row(head: &[QueryVar], row: &[EClassId]) -> String {
    head.iter()
        .zip(row)
        .map(|(v, id)| format!("{v}={id}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// One match: a binding of head variables to e-class ids.
#[derive(Clone, Copy, Debug)]
pub struct Substitution<'a> {
    head: &'a [QueryVar],
    row: &'a [EClassId],
}

impl<'a> Substitution<'a> {
    pub fn get(&self, var: &QueryVar) -> Option<EClassId> {
        self.head
            .iter()
            .position(|v| v == var)
            .map(|i| self.row[i])
    }

    pub fn row(&self) -> &'a [EClassId] {
        self.row
    }

    pub fn head(&self) -> &'a [QueryVar] {
        self.head
    }
}

impl fmt::Display for Substitution<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_row(self.head, self.row))
    }
}

/// Natural join of two match sets on their shared variables. The output head
/// is `left`'s followed by `right`'s unseen variables. Quadratic; used for
/// cross-checking multi-pattern results and by the backtracking engine.
pub fn join_matches(left: &MatchSet, right: &MatchSet) -> MatchSet {
    let mut head = left.head.clone();
    let mut extra_cols = Vec::new();
    for (i, v) in right.head.iter().enumerate() {
        if !head.contains(v) {
            head.push(v.clone());
            extra_cols.push(i);
        }
    }
    let shared: Vec<(usize, usize)> = left
        .head
        .iter()
        .enumerate()
        .filter_map(|(li, v)| {
            right.head.iter().position(|w| w == v).map(|ri| (li, ri))
        })
        .collect();
    let mut out = MatchSet::new(head);
    for lrow in &left.rows {
        for rrow in &right.rows {
            if shared.iter().all(|&(li, ri)| lrow[li] == rrow[ri]) {
                let mut row = lrow.clone();
                row.extend(extra_cols.iter().map(|&i| rrow[i]));
                out.insert(row);
            }
        }
    }
    out
}
