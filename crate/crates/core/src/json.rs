//! JSON serialization of e-graphs.
//!
//! The file names e-nodes by their position in the `nodes` array:
//!
//! ```json
//! {
//!   "nodes": [["a", []], ["g", [0]], ["f", [0, 1]]],
//!   "unions": [[1, 2]]
//! }
//! ```
//!
//! A node's children refer to earlier nodes; the childrens' classes are the
//! targets. `unions` merges the classes of two node indices. Loading replays
//! adds in order, applies the unions, and rebuilds.
//!
//! Dumping emits nodes in a deterministic dependency order (a node waits
//! until every child class has an emitted representative), so a graph always
//! serializes to the same bytes. Graphs where some class is reachable only
//! through itself cannot be ordered and refuse with
//! [`Error::CyclicEGraph`].

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use std::collections::BinaryHeap;

use crate::egraph::{EClassId, EGraph, ENode};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq, Eq)]
pub struct EGraphFile {
    /// `[symbol, [child node indices]]` per node.
    pub nodes: Vec<(String, Vec<usize>)>,
    /// Pairs of node indices whose classes are merged.
    pub unions: Vec<(usize, usize)>,
}

/// Serializes a clean e-graph. Errors on pending merges or when no
/// dependency order exists.
pub fn dump(eg: &EGraph) -> Result<EGraphFile> {
    if !eg.is_clean() {
        return Err(Error::PendingRebuild);
    }
    let classes = eg.canonical_ids();
    // Node identity during ordering: (class, position in its node list).
    let mut pending: FxHashMap<(EClassId, usize), usize> = FxHashMap::default();
    let mut waiters: FxHashMap<EClassId, Vec<(EClassId, usize)>> = FxHashMap::default();
    let mut ready: BinaryHeap<std::cmp::Reverse<(EClassId, usize)>> = BinaryHeap::new();
    let mut total = 0usize;
    for &c in &classes {
        for (i, node) in eg.nodes_of(c).iter().enumerate() {
            total += 1;
            let mut deps: Vec<EClassId> = node.children.clone();
            deps.sort_unstable();
            deps.dedup();
            if deps.is_empty() {
                ready.push(std::cmp::Reverse((c, i)));
            } else {
                pending.insert((c, i), deps.len());
                for d in deps {
                    waiters.entry(d).or_default().push((c, i));
                }
            }
        }
    }

    let mut rep: FxHashMap<EClassId, usize> = FxHashMap::default();
    let mut members: FxHashMap<EClassId, Vec<usize>> = FxHashMap::default();
    let mut nodes: Vec<(String, Vec<usize>)> = Vec::with_capacity(total);
    while let Some(std::cmp::Reverse((c, i))) = ready.pop() {
        let node = &eg.nodes_of(c)[i];
        let idx = nodes.len();
        nodes.push((
            node.symbol.as_str().to_string(),
            node.children.iter().map(|ch| rep[ch]).collect(),
        ));
        members.entry(c).or_default().push(idx);
        if rep.contains_key(&c) {
            continue;
        }
        rep.insert(c, idx);
        for w in waiters.remove(&c).unwrap_or_default() {
            let n = pending.get_mut(&w).expect("waiter is pending");
            *n -= 1;
            if *n == 0 {
                pending.remove(&w);
                ready.push(std::cmp::Reverse(w));
            }
        }
    }
    if nodes.len() != total {
        return Err(Error::CyclicEGraph);
    }

    let mut unions: Vec<(usize, usize)> = Vec::new();
    for &c in &classes {
        let mem = &members[&c];
        for &other in &mem[1..] {
            unions.push((mem[0], other));
        }
    }
    Ok(EGraphFile { nodes, unions })
}

/// Reconstructs an e-graph from its serialized form. The result is rebuilt
/// and clean.
pub fn load(file: &EGraphFile) -> Result<EGraph> {
    let mut eg = EGraph::new();
    let mut class_of: Vec<EClassId> = Vec::with_capacity(file.nodes.len());
    for (i, (symbol, children)) in file.nodes.iter().enumerate() {
        eg.declare(symbol, children.len())?;
        let mut kids = Vec::with_capacity(children.len());
        for &ch in children {
            if ch >= i {
                return Err(Error::InvalidId(ch as u32));
            }
            kids.push(eg.find(class_of[ch]));
        }
        class_of.push(eg.add(ENode::new(symbol.as_str(), kids))?);
    }
    for &(a, b) in &file.unions {
        for idx in [a, b] {
            if idx >= class_of.len() {
                return Err(Error::InvalidId(idx as u32));
            }
        }
        eg.union(class_of[a], class_of[b])?;
    }
    eg.rebuild();
    Ok(eg)
}

pub fn to_json(eg: &EGraph) -> Result<String> {
    let file = dump(eg)?;
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn from_json(text: &str) -> Result<EGraph> {
    let file: EGraphFile = serde_json::from_str(text)?;
    load(&file)
}

/// A stable textual identity for a clean e-graph: equal strings mean equal
/// graphs (same classes, nodes, and symbols, up to id renaming via a full
/// reload cycle).
pub fn signature(eg: &EGraph) -> Result<String> {
    Ok(serde_json::to_string(&dump(eg)?)?)
}
