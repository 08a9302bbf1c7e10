//! Hash tries over relations.
//!
//! A trie stores a relation's tuples root-to-leaf under a column grouping: a
//! permutation of the columns partitioned into consecutive groups, one trie
//! level per group. Keys at a level are the tuple of values in that group's
//! columns, so a plain permutation uses single-value keys and a batched
//! grouping binds several columns in one step. Tries are immutable once
//! built; the cache hands out shared handles and rebuilds when the database
//! version moves.

use rustc_hash::FxHashMap;
use smallvec::SmallVec;
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::db::{Database, Relation};
use crate::egraph::{EClassId, Symbol};
use crate::error::{Error, Result};

/// Values bound at one trie level.
pub type Key = SmallVec<[EClassId; 2]>;

/// A column grouping: each inner vec is one trie level's columns. Flattened,
/// it must be a permutation of `0..width`.
pub type ColumnGroups = Vec<Vec<usize>>;

#[derive(Clone, Debug)]
pub enum Trie {
    Leaf,
    Node(FxHashMap<Key, Trie>),
}

impl Trie {
    /// Children of an inner node. `None` on a leaf.
    pub fn children(&self) -> Option<&FxHashMap<Key, Trie>> {
        match self {
            Trie::Leaf => None,
            Trie::Node(map) => Some(map),
        }
    }

    /// Number of keys at this node; 0 on a leaf.
    pub fn len(&self) -> usize {
        self.children().map_or(0, FxHashMap::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Reconstructs the stored rows, each as the concatenation of level keys.
    /// Test and debugging aid.
    pub fn rows(&self) -> Vec<Vec<EClassId>> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        fn walk(t: &Trie, path: &mut Vec<EClassId>, out: &mut Vec<Vec<EClassId>>) {
            match t {
                Trie::Leaf => out.push(path.clone()),
                Trie::Node(map) => {
                    for (key, child) in map {
                        path.extend_from_slice(key);
                        walk(child, path, out);
                        path.truncate(path.len() - key.len());
                    }
                }
            }
        }
        walk(self, &mut path, &mut out);
        out.sort();
        out
    }
}

fn validate_groups(groups: &ColumnGroups, width: usize) -> Result<()> {
    let mut flat: Vec<usize> = groups.iter().flatten().copied().collect();
    flat.sort_unstable();
    if flat != (0..width).collect::<Vec<_>>() {
        return Err(Error::InvalidPermutation { perm: groups.clone(), width });
    }
    Ok(())
}

/// Builds the trie for `rel` under `groups`.
pub fn build_trie(rel: &Relation, groups: &ColumnGroups) -> Result<Trie> {
    validate_groups(groups, rel.width())?;
    let mut root = Trie::Node(FxHashMap::default());
    for tuple in rel.tuples() {
        insert(&mut root, tuple, groups, 0);
    }
    Ok(root)
}

fn insert(node: &mut Trie, tuple: &[EClassId], groups: &ColumnGroups, depth: usize) {
    if depth == groups.len() {
        return;
    }
    let key: Key = groups[depth].iter().map(|&c| tuple[c]).collect();
    let map = match node {
        Trie::Node(map) => map,
        Trie::Leaf => unreachable!("fixed depth per grouping"),
    };
    let child = map.entry(key).or_insert_with(|| {
        if depth + 1 == groups.len() {
            Trie::Leaf
        } else {
            Trie::Node(FxHashMap::default())
        }
    });
    insert(child, tuple, groups, depth + 1);
}

/// Keys present in every node, obtained by iterating the smallest node and
/// probing the others. Sorted for determinism.
pub fn intersect(nodes: &[&Trie]) -> Vec<Key> {
    let Some(smallest) = nodes.iter().min_by_key(|n| n.len()) else {
        return Vec::new();
    };
    let Some(base) = smallest.children() else {
        return Vec::new();
    };
    let mut out: Vec<Key> = base
        .keys()
        .filter(|key| {
            nodes.iter().all(|n| {
                n.children().map_or(false, |map| map.contains_key(*key))
            })
        })
        .cloned()
        .collect();
    out.sort();
    out
}

/// Memoized trie store keyed by `(symbol, grouping)`, invalidated whenever
/// the database version changes. Build time is reported so benchmarks can
/// separate index construction from join work; cache hits report zero.
#[derive(Default, Debug)]
pub struct TrieCache {
    version: u64,
    map: FxHashMap<(Symbol, ColumnGroups), Arc<Trie>>,
}

impl TrieCache {
    pub fn new() -> TrieCache {
        TrieCache::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn clear(&mut self) {
        self.map.clear();
    }

    pub fn get(
        &mut self,
        db: &Database,
        symbol: &Symbol,
        groups: &ColumnGroups,
    ) -> Result<(Arc<Trie>, Duration)> {
        if self.version != db.version() {
            self.map.clear();
            self.version = db.version();
        }
        let cache_key = (symbol.clone(), groups.clone());
        if let Some(trie) = self.map.get(&cache_key) {
            return Ok((Arc::clone(trie), Duration::ZERO));
        }
        let rel = db
            .relation(symbol)
            .ok_or_else(|| Error::UnknownRelation(symbol.as_str().to_string()))?;
        let start = Instant::now();
        let trie = Arc::new(build_trie(rel, groups)?);
        let elapsed = start.elapsed();
        self.map.insert(cache_key, Arc::clone(&trie));
        Ok((trie, elapsed))
    }
}
