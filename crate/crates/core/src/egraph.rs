//! E-graph with hashconsing and deferred congruence repair.
//!
//! An e-graph is a union-find over e-class ids plus, per canonical class, the
//! set of e-nodes it contains. A hashcons maps each canonical e-node to its
//! class so `add` deduplicates. `union` only records the merge; congruence is
//! restored by `rebuild`, which drains a worklist of touched classes and
//! repairs stale hashcons entries until fixpoint.

use rustc_hash::FxHashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Dense e-class id. Allocated sequentially by [`EGraph::add`]; only
/// canonical ids (see [`EGraph::find`]) name live classes.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EClassId(pub u32);

impl EClassId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for EClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for EClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

/// Function symbol. Constants are symbols of arity 0.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Symbol(String);

impl Symbol {
    pub fn new(name: impl Into<String>) -> Symbol {
        Symbol(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Symbol {
        Symbol::new(s)
    }
}

/// An e-node: a symbol applied to e-class ids.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct ENode {
    pub symbol: Symbol,
    pub children: Vec<EClassId>,
}

impl ENode {
    pub fn new(symbol: impl Into<Symbol>, children: Vec<EClassId>) -> ENode {
        ENode { symbol: symbol.into(), children }
    }

    pub fn leaf(symbol: impl Into<Symbol>) -> ENode {
        ENode::new(symbol, Vec::new())
    }
}

/// Union-find over dense u32 ids with path compression and union by size.
#[derive(Clone, Default, Debug)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn make_set(&mut self) -> EClassId {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        self.size.push(1);
        EClassId(id)
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn contains(&self, id: EClassId) -> bool {
        id.index() < self.parent.len()
    }

    /// Canonical representative, without compressing paths.
    pub fn find(&self, id: EClassId) -> EClassId {
        let mut i = id.0;
        while self.parent[i as usize] != i {
            i = self.parent[i as usize];
        }
        EClassId(i)
    }

    /// Canonical representative, compressing the walked path.
    pub fn find_mut(&mut self, id: EClassId) -> EClassId {
        let root = self.find(id);
        let mut i = id.0;
        while self.parent[i as usize] != root.0 {
            let next = self.parent[i as usize];
            self.parent[i as usize] = root.0;
            i = next;
        }
        root
    }

    /// Merges two canonical roots; returns (winner, loser). Ties go to the
    /// smaller id so merge results are independent of call order history.
    fn union_roots(&mut self, a: EClassId, b: EClassId) -> (EClassId, EClassId) {
        debug_assert_eq!(self.find(a), a);
        debug_assert_eq!(self.find(b), b);
        let (win, lose) = match self.size[a.index()].cmp(&self.size[b.index()]) {
            std::cmp::Ordering::Greater => (a, b),
            std::cmp::Ordering::Less => (b, a),
            std::cmp::Ordering::Equal => {
                if a.0 <= b.0 {
                    (a, b)
                } else {
                    (b, a)
                }
            }
        };
        self.parent[lose.index()] = win.0;
        self.size[win.index()] += self.size[lose.index()];
        (win, lose)
    }
}

#[derive(Clone, Default, Debug)]
struct EClass {
    nodes: Vec<ENode>,
    /// E-nodes that mention this class as a child, with the class the node
    /// lives in. Consulted during rebuild to repair the hashcons.
    parents: Vec<(ENode, EClassId)>,
}

/// See module docs. All mutation bumps `version`, which downstream caches
/// (database conversion, tries) use for invalidation.
#[derive(Clone, Default, Debug)]
pub struct EGraph {
    uf: UnionFind,
    classes: FxHashMap<EClassId, EClass>,
    hashcons: FxHashMap<ENode, EClassId>,
    symbols: FxHashMap<String, usize>,
    dirty: Vec<EClassId>,
    version: u64,
}

impl EGraph {
    pub fn new() -> EGraph {
        EGraph::default()
    }

    /// Registers a symbol with its arity. Idempotent for matching arities.
    pub fn declare(&mut self, name: &str, arity: usize) -> Result<Symbol> {
        match self.symbols.get(name) {
            Some(&existing) if existing == arity => Ok(Symbol::new(name)),
            Some(&existing) => Err(Error::Redeclared {
                symbol: name.to_string(),
                existing,
                new: arity,
            }),
            None => {
                self.symbols.insert(name.to_string(), arity);
                self.version += 1;
                Ok(Symbol::new(name))
            }
        }
    }

    pub fn arity(&self, symbol: &Symbol) -> Option<usize> {
        self.symbols.get(symbol.as_str()).copied()
    }

    /// Registered symbols with arities, sorted by name.
    pub fn symbols(&self) -> Vec<(Symbol, usize)> {
        let mut out: Vec<(Symbol, usize)> = self
            .symbols
            .iter()
            .map(|(name, &arity)| (Symbol::new(name.clone()), arity))
            .collect();
        out.sort();
        out
    }

    pub fn find(&self, id: EClassId) -> EClassId {
        assert!(self.uf.contains(id), "e-class id {id} out of range");
        self.uf.find(id)
    }

    fn check_node(&self, node: &ENode) -> Result<()> {
        let arity = self
            .arity(&node.symbol)
            .ok_or_else(|| Error::UnknownSymbol(node.symbol.as_str().to_string()))?;
        if node.children.len() != arity {
            return Err(Error::ArityMismatch {
                symbol: node.symbol.as_str().to_string(),
                expected: arity,
                found: node.children.len(),
            });
        }
        for &c in &node.children {
            if !self.uf.contains(c) {
                return Err(Error::InvalidId(c.0));
            }
        }
        Ok(())
    }

    /// The node with every child replaced by its canonical id.
    pub fn canonicalize(&self, node: &ENode) -> ENode {
        ENode {
            symbol: node.symbol.clone(),
            children: node.children.iter().map(|&c| self.find(c)).collect(),
        }
    }

    /// Canonical class of `node` if it is present, else `None`.
    pub fn lookup(&self, node: &ENode) -> Option<EClassId> {
        let node = self.canonicalize(node);
        self.hashcons.get(&node).map(|&id| self.uf.find(id))
    }

    /// Inserts an e-node, returning the existing class on a hashcons hit or a
    /// fresh class otherwise.
    pub fn add(&mut self, node: ENode) -> Result<EClassId> {
        self.check_node(&node)?;
        let node = self.canonicalize(&node);
        if let Some(&id) = self.hashcons.get(&node) {
            return Ok(self.uf.find_mut(id));
        }
        let id = self.uf.make_set();
        for &c in &node.children {
            self.classes
                .get_mut(&c)
                .expect("canonical child has a class")
                .parents
                .push((node.clone(), id));
        }
        self.classes.insert(
            id,
            EClass { nodes: vec![node.clone()], parents: Vec::new() },
        );
        self.hashcons.insert(node, id);
        self.version += 1;
        Ok(id)
    }

    /// Asserts `a = b`. Congruence is not restored until [`EGraph::rebuild`].
    pub fn union(&mut self, a: EClassId, b: EClassId) -> Result<EClassId> {
        for id in [a, b] {
            if !self.uf.contains(id) {
                return Err(Error::InvalidId(id.0));
            }
        }
        let a = self.uf.find_mut(a);
        let b = self.uf.find_mut(b);
        if a == b {
            return Ok(a);
        }
        let (win, lose) = self.uf.union_roots(a, b);
        let merged = self.classes.remove(&lose).expect("canonical class");
        let class = self.classes.get_mut(&win).expect("canonical class");
        class.nodes.extend(merged.nodes);
        class.parents.extend(merged.parents);
        self.dirty.push(win);
        self.version += 1;
        Ok(win)
    }

    /// True when no merges are pending repair.
    pub fn is_clean(&self) -> bool {
        self.dirty.is_empty()
    }

    /// Restores congruence and hashcons canonicality; returns the number of
    /// hashcons entries that had to be re-keyed. Zero on a clean e-graph.
    pub fn rebuild(&mut self) -> usize {
        let mut repairs = 0;
        while let Some(id) = self.dirty.pop() {
            let id = self.uf.find_mut(id);
            let parents = match self.classes.get_mut(&id) {
                Some(class) => std::mem::take(&mut class.parents),
                None => continue,
            };
            // Re-key each parent under its canonical form; congruent parents
            // collide here, which is exactly what triggers further merges.
            let mut fresh: FxHashMap<ENode, EClassId> = FxHashMap::default();
            for (node, pid) in parents {
                self.hashcons.remove(&node);
                let canon = self.canonicalize(&node);
                if canon != node {
                    repairs += 1;
                }
                let pid = self.uf.find_mut(pid);
                let pid = match fresh.get(&canon) {
                    Some(&prev) if self.uf.find(prev) != pid => {
                        self.union(prev, pid).expect("ids valid")
                    }
                    Some(&prev) => self.uf.find_mut(prev),
                    None => pid,
                };
                fresh.insert(canon, pid);
            }
            for (node, pid) in &fresh {
                self.hashcons.insert(node.clone(), *pid);
            }
            let id = self.uf.find_mut(id);
            self.classes
                .get_mut(&id)
                .expect("canonical class")
                .parents
                .extend(fresh);
        }
        // Canonicalize stored nodes and rebuild the hashcons to exactly
        // mirror them. The repair loop re-keys one dirty class's parents at a
        // time, so a node re-keyed early can leave that key stale when a
        // later merge canonicalizes another of its children; reconstructing
        // from the stored nodes drops any such leftovers.
        let ids: Vec<EClassId> = self.classes.keys().copied().collect();
        self.hashcons.clear();
        for id in ids {
            let mut class = self.classes.remove(&id).expect("present");
            for node in &mut class.nodes {
                *node = self.canonicalize(node);
            }
            class.nodes.sort();
            class.nodes.dedup();
            for node in &class.nodes {
                let prev = self.hashcons.insert(node.clone(), id);
                debug_assert!(prev.is_none(), "stored e-nodes must be distinct after repair");
            }
            self.classes.insert(id, class);
        }
        if repairs > 0 {
            self.version += 1;
        }
        repairs
    }

    /// Number of distinct stored e-nodes.
    pub fn n_nodes(&self) -> usize {
        self.hashcons.len()
    }

    /// Number of canonical e-classes.
    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    /// Canonical class ids, sorted.
    pub fn canonical_ids(&self) -> Vec<EClassId> {
        let mut ids: Vec<EClassId> = self.classes.keys().copied().collect();
        ids.sort();
        ids
    }

    /// E-nodes stored in a canonical class.
    pub fn nodes_of(&self, id: EClassId) -> &[ENode] {
        match self.classes.get(&id) {
            Some(class) => &class.nodes,
            None => panic!("{id:?} is not a canonical e-class"),
        }
    }
}
