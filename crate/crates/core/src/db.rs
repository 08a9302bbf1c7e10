//! Relational view of an e-graph.
//!
//! Every symbol `f` of arity k yields a relation R_f of width k+1: one tuple
//! `(id, child_1, ..., child_k)` per canonical e-node, ids all canonical.
//! Hashconsing makes the columns `child_1..child_k -> id` a functional
//! dependency in any database derived from a rebuilt e-graph; databases built
//! directly from tuples (for tests and ad-hoc queries) need not satisfy it.

use std::collections::BTreeMap;

use crate::egraph::{EClassId, EGraph, Symbol};
use crate::error::{Error, Result};

pub type Tuple = Vec<EClassId>;

/// A set of same-width tuples. Tuples are kept sorted and deduplicated, so
/// iteration order is deterministic.
#[derive(Clone, Debug)]
pub struct Relation {
    symbol: Symbol,
    width: usize,
    tuples: Vec<Tuple>,
}

impl Relation {
    pub fn new(symbol: impl Into<Symbol>, width: usize, mut tuples: Vec<Tuple>) -> Result<Relation> {
        let symbol = symbol.into();
        for t in &tuples {
            if t.len() != width {
                return Err(Error::ArityMismatch {
                    symbol: symbol.as_str().to_string(),
                    expected: width,
                    found: t.len(),
                });
            }
        }
        tuples.sort();
        tuples.dedup();
        Ok(Relation { symbol, width, tuples })
    }

    pub fn symbol(&self) -> &Symbol {
        &self.symbol
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn tuples(&self) -> &[Tuple] {
        &self.tuples
    }

    pub fn contains(&self, tuple: &[EClassId]) -> bool {
        self.tuples.binary_search_by(|t| t.as_slice().cmp(tuple)).is_ok()
    }

    /// Distinct values in one column, sorted.
    pub fn column(&self, col: usize) -> Vec<EClassId> {
        let mut vals: Vec<EClassId> = self.tuples.iter().map(|t| t[col]).collect();
        vals.sort();
        vals.dedup();
        vals
    }

    /// Whether `child columns -> id column` holds.
    pub fn fd_holds(&self) -> bool {
        let mut seen: BTreeMap<&[EClassId], EClassId> = BTreeMap::new();
        for t in &self.tuples {
            match seen.insert(&t[1..], t[0]) {
                Some(prev) if prev != t[0] => return false,
                _ => {}
            }
        }
        true
    }
}

/// An immutable collection of relations keyed by symbol, together with the
/// value domain (every id appearing in any column). `version` identifies the
/// e-graph state a conversion came from, for trie-cache invalidation.
#[derive(Clone, Debug)]
pub struct Database {
    relations: BTreeMap<Symbol, Relation>,
    domain: Vec<EClassId>,
    version: u64,
}

impl Database {
    pub fn from_relations(relations: Vec<Relation>, version: u64) -> Database {
        let mut domain: Vec<EClassId> = relations
            .iter()
            .flat_map(|r| r.tuples().iter().flatten().copied())
            .collect();
        domain.sort();
        domain.dedup();
        let relations = relations
            .into_iter()
            .map(|r| (r.symbol.clone(), r))
            .collect();
        Database { relations, domain, version }
    }

    pub fn relation(&self, symbol: &Symbol) -> Option<&Relation> {
        self.relations.get(symbol)
    }

    pub fn relations(&self) -> impl Iterator<Item = &Relation> {
        self.relations.values()
    }

    /// All ids appearing anywhere, sorted. For an e-graph conversion this is
    /// exactly the set of canonical class ids.
    pub fn domain(&self) -> &[EClassId] {
        &self.domain
    }

    pub fn domain_size(&self) -> usize {
        self.domain.len()
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    /// Total tuple count across relations.
    pub fn n_tuples(&self) -> usize {
        self.relations.values().map(Relation::len).sum()
    }
}

/// Converts a rebuilt e-graph into its relational form, one relation per
/// registered symbol (empty relations included).
pub fn egraph_to_database(eg: &EGraph) -> Result<Database> {
    if !eg.is_clean() {
        return Err(Error::PendingRebuild);
    }
    let mut tuples: BTreeMap<Symbol, Vec<Tuple>> = eg
        .symbols()
        .into_iter()
        .map(|(sym, _)| (sym, Vec::new()))
        .collect();
    for id in eg.canonical_ids() {
        for node in eg.nodes_of(id) {
            let mut t = Vec::with_capacity(node.children.len() + 1);
            t.push(id);
            t.extend_from_slice(&node.children);
            tuples
                .get_mut(&node.symbol)
                .expect("stored node has a registered symbol")
                .push(t);
        }
    }
    let relations = eg
        .symbols()
        .into_iter()
        .map(|(sym, arity)| {
            let ts = tuples.remove(&sym).unwrap_or_default();
            Relation::new(sym, arity + 1, ts)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Database::from_relations(relations, eg.version()))
}
