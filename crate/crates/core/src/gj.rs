//! Generic join over trie indices.
//!
//! Evaluation binds one variable group per level. At each level the candidate
//! set is the intersection of the current trie nodes of every atom touching
//! the group: the smallest node is iterated and the others are probed by
//! hash lookup, so a level costs O(min |node|) modulo hashing. Surviving
//! candidates advance each touched atom's cursor to the subtrie under the
//! bound key; when the last level binds, the head projection of the binding
//! is emitted. Repeated variables inside an atom are part of that atom's
//! level key, so consistency is enforced during descent, not by filtering
//! emitted rows.
//!
//! The recursion is driven by an explicit frame stack: pattern depth is
//! bounded by available memory, not the thread stack.

use rustc_hash::FxHashMap;
use smallvec::smallvec;
use std::sync::Arc;
use std::time::Duration;

use crate::compile::{compile_multi, ConjunctiveQuery, QueryVar};
use crate::db::{egraph_to_database, Database};
use crate::egraph::{EClassId, EGraph};
use crate::error::{Error, Result};
use crate::matchset::MatchSet;
use crate::pattern::{Pattern, PatternShape};
use crate::plan::{plan, required_permutations, VariableOrdering};
use crate::trie::{Key, Trie, TrieCache};

/// Knobs for [`ematch`]. `ordering` forces a specific variable ordering
/// (implying the compiled route even for degenerate patterns); `fast_path`
/// can be disabled to force compilation, for differential testing.
#[derive(Clone, Default, Debug)]
pub struct MatchOptions {
    pub ordering: Option<VariableOrdering>,
    pub no_fast_path: bool,
}

/// One atom's participation in a join level: which columns of its trie key
/// belong to which group variable.
struct Access {
    atom: usize,
    /// For each column of this level's key, the index of the group variable
    /// it binds.
    col_vars: Vec<usize>,
}

struct Level {
    /// Indices into the query's variable table.
    group_vars: Vec<usize>,
    accesses: Vec<Access>,
}

/// Evaluates `q` against `db` under `ordering`, building throwaway indices.
pub fn eval(q: &ConjunctiveQuery, db: &Database, ordering: &VariableOrdering) -> Result<MatchSet> {
    let mut cache = TrieCache::new();
    eval_with_cache(q, db, ordering, &mut cache).map(|(ms, _)| ms)
}

/// Like [`eval`] but reuses `cache` across calls and reports how much time
/// this call spent building indices (zero when everything was cached).
pub fn eval_with_cache(
    q: &ConjunctiveQuery,
    db: &Database,
    ordering: &VariableOrdering,
    cache: &mut TrieCache,
) -> Result<(MatchSet, Duration)> {
    let perms = required_permutations(q, ordering)?;
    let mut tries: Vec<Arc<Trie>> = Vec::with_capacity(q.atoms.len());
    let mut index_time = Duration::ZERO;
    for (atom, perm) in q.atoms.iter().zip(&perms) {
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
        let (trie, built) = cache.get(db, &atom.symbol, perm)?;
        index_time += built;
        tries.push(trie);
    }

    let vars = q.variables();
    let var_index =
        |v: &QueryVar| vars.iter().position(|x| x == v).expect("validated variable");
    let levels: Vec<Level> = ordering
        .groups()
        .iter()
        .map(|group| {
            let group_vars: Vec<usize> = group.iter().map(&var_index).collect();
            let accesses = q
                .atoms
                .iter()
                .enumerate()
                .filter_map(|(ai, atom)| {
                    let mut cols: Vec<(usize, usize)> = atom
                        .vars
                        .iter()
                        .enumerate()
                        .filter_map(|(col, v)| {
                            group.iter().position(|g| g == v).map(|gi| (gi, col))
                        })
                        .collect();
                    if cols.is_empty() {
                        return None;
                    }
                    cols.sort_unstable();
                    Some(Access {
                        atom: ai,
                        col_vars: cols.into_iter().map(|(gi, _)| gi).collect(),
                    })
                })
                .collect();
            Level { group_vars, accesses }
        })
        .collect();
    // The head is a prefix of the variable table by construction.
    debug_assert!(q.head.iter().enumerate().all(|(i, v)| vars[i] == *v));

    let mut ms = MatchSet::new(q.head.clone());
    ms.counters.level_domain_max = vec![0; levels.len()];
    if levels.is_empty() {
        return Ok((ms, index_time));
    }

    type Candidate<'a> = (Key, Vec<(usize, &'a Trie)>);
    struct Frame<'a> {
        level: usize,
        domain: Vec<Candidate<'a>>,
        next: usize,
        saved: Vec<(usize, &'a Trie)>,
    }

    let mut nodes: Vec<&Trie> = tries.iter().map(|t| t.as_ref()).collect();
    let mut binding: Vec<EClassId> = vec![EClassId(u32::MAX); vars.len()];
    let head_len = q.head.len();

    let domain = level_domain(&levels[0], 0, &nodes, &mut ms);
    let mut stack: Vec<Frame> = vec![Frame { level: 0, domain, next: 0, saved: Vec::new() }];
    while let Some(top) = stack.last_mut() {
        if top.next == top.domain.len() {
            let frame = stack.pop().expect("non-empty");
            for (atom, node) in frame.saved {
                nodes[atom] = node;
            }
            continue;
        }
        let level = top.level;
        let (values, children) = std::mem::take(&mut top.domain[top.next]);
        top.next += 1;
        for (i, &vi) in levels[level].group_vars.iter().enumerate() {
            binding[vi] = values[i];
        }
        if level + 1 == levels.len() {
            ms.counters.leaves_emitted += 1;
            ms.insert(binding[..head_len].to_vec());
        } else {
            let saved: Vec<(usize, &Trie)> = children
                .into_iter()
                .map(|(atom, child)| (atom, std::mem::replace(&mut nodes[atom], child)))
                .collect();
            let domain = level_domain(&levels[level + 1], level + 1, &nodes, &mut ms);
            stack.push(Frame { level: level + 1, domain, next: 0, saved });
        }
    }
    Ok((ms, index_time))
}

/// Intersects the current nodes of a level's accesses: iterate the smallest,
/// probe the rest, and keep the subtries every survivor descends into.
fn level_domain<'a>(
    level: &Level,
    lvl_idx: usize,
    nodes: &[&'a Trie],
    ms: &mut MatchSet,
) -> Vec<(Key, Vec<(usize, &'a Trie)>)> {
    let maps: Vec<(&Access, &FxHashMap<Key, Trie>)> = level
        .accesses
        .iter()
        .map(|acc| {
            let map = nodes[acc.atom]
                .children()
                .expect("atom participates at this level");
            (acc, map)
        })
        .collect();
    let min_pos = maps
        .iter()
        .enumerate()
        .min_by_key(|(_, (_, map))| map.len())
        .map(|(i, _)| i)
        .expect("levels have at least one access");
    let n_group = level.group_vars.len();
    debug_assert!(n_group <= 64, "group width fits the bound mask");
    let mut out = Vec::new();
    let (min_acc, min_map) = maps[min_pos];
    'candidates: for (key, child) in min_map {
        ms.counters.intersection_steps += 1;
        let mut values: Key = smallvec![EClassId(u32::MAX); n_group];
        let mut bound: u64 = 0;
        for (i, &gv) in min_acc.col_vars.iter().enumerate() {
            if bound & (1 << gv) != 0 {
                if values[gv] != key[i] {
                    continue 'candidates;
                }
            } else {
                values[gv] = key[i];
                bound |= 1 << gv;
            }
        }
        debug_assert_eq!(bound.count_ones() as usize, n_group);
        let mut children: Vec<(usize, &Trie)> = Vec::with_capacity(maps.len());
        children.push((min_acc.atom, child));
        for (j, (acc, map)) in maps.iter().enumerate() {
            if j == min_pos {
                continue;
            }
            let probe: Key = acc.col_vars.iter().map(|&gv| values[gv]).collect();
            match map.get(&probe) {
                Some(c) => children.push((acc.atom, c)),
                None => continue 'candidates,
            }
        }
        ms.counters.values_enumerated += 1;
        out.push((values, children));
    }
    let slot = &mut ms.counters.level_domain_max[lvl_idx];
    *slot = (*slot).max(out.len());
    out
}

/// Scans the single relation of a non-nested pattern `f(?x, ?y, ...)`,
/// applying repeated-variable equality on each tuple.
///
/// Panics if `p` is not [`PatternShape::NonNested`].
pub fn eval_nonnested(p: &Pattern, db: &Database) -> Result<MatchSet> {
    assert_eq!(p.shape(), PatternShape::NonNested, "eval_nonnested requires f(vars...)");
    let Pattern::App(symbol, children) = p else { unreachable!() };
    let mut head = vec![QueryVar::Root(0)];
    head.extend(p.variables().into_iter().map(|v| QueryVar::Pat(v.to_string())));
    // Column of the first occurrence of each head variable (offset by the id
    // column), and per-column variable index for the equality check.
    let var_names: Vec<&str> = p.variables();
    let col_var: Vec<usize> = children
        .iter()
        .map(|c| match c {
            Pattern::Var(name) => var_names.iter().position(|v| v == name).expect("own var"),
            Pattern::App(..) => unreachable!("non-nested"),
        })
        .collect();
    let mut ms = MatchSet::new(head);
    let Some(rel) = db.relation(symbol) else {
        return Ok(ms);
    };
    if rel.width() != children.len() + 1 {
        return Err(Error::ArityMismatch {
            symbol: symbol.as_str().to_string(),
            expected: rel.width(),
            found: children.len() + 1,
        });
    }
    'tuples: for tuple in rel.tuples() {
        ms.counters.values_enumerated += 1;
        let mut row = vec![EClassId(u32::MAX); 1 + var_names.len()];
        row[0] = tuple[0];
        let mut seen = vec![false; var_names.len()];
        for (i, &vi) in col_var.iter().enumerate() {
            let val = tuple[i + 1];
            if seen[vi] && row[1 + vi] != val {
                continue 'tuples;
            }
            row[1 + vi] = val;
            seen[vi] = true;
        }
        ms.counters.leaves_emitted += 1;
        ms.insert(row);
    }
    Ok(ms)
}

/// Matches a bare variable pattern: one substitution per canonical class,
/// with the root bound to the same class.
pub fn eval_bare(name: &str, db: &Database) -> MatchSet {
    let mut ms = MatchSet::new(vec![QueryVar::Root(0), QueryVar::Pat(name.to_string())]);
    for &c in db.domain() {
        ms.counters.values_enumerated += 1;
        ms.counters.leaves_emitted += 1;
        ms.insert(vec![c, c]);
    }
    ms
}

/// End-to-end relational matcher: converts the e-graph once per version and
/// memoizes tries across calls.
pub struct Engine {
    db: Database,
    cache: TrieCache,
    egraph_version: u64,
    last_index_time: Duration,
}

impl Engine {
    /// Errors if the e-graph has pending merges.
    pub fn new(eg: &EGraph) -> Result<Engine> {
        Ok(Engine {
            db: egraph_to_database(eg)?,
            cache: TrieCache::new(),
            egraph_version: eg.version(),
            last_index_time: Duration::ZERO,
        })
    }

    pub fn db(&self) -> &Database {
        &self.db
    }

    /// Reconverts if the e-graph moved since the engine was built. Returns
    /// whether a reconversion happened.
    pub fn refresh(&mut self, eg: &EGraph) -> Result<bool> {
        if eg.version() == self.egraph_version {
            return Ok(false);
        }
        self.db = egraph_to_database(eg)?;
        self.egraph_version = eg.version();
        Ok(true)
    }

    /// Index build time incurred by the most recent `ematch` call.
    pub fn last_index_time(&self) -> Duration {
        self.last_index_time
    }

    /// Drops memoized tries, forcing the next call to rebuild them.
    pub fn drop_indexes(&mut self) {
        self.cache.clear();
    }

    /// Matches one or several simultaneous patterns. Degenerate single
    /// patterns take their scan fast paths unless an explicit `ordering`
    /// forces the compiled route. Patterns naming unregistered symbols
    /// produce an empty result.
    pub fn ematch(
        &mut self,
        eg: &EGraph,
        patterns: &[Pattern],
        opts: &MatchOptions,
    ) -> Result<MatchSet> {
        self.refresh(eg)?;
        self.last_index_time = Duration::ZERO;
        if patterns.len() == 1 && opts.ordering.is_none() && !opts.no_fast_path {
            match &patterns[0] {
                Pattern::Var(name) => return Ok(eval_bare(name, &self.db)),
                p if p.shape() == PatternShape::NonNested => {
                    return eval_nonnested(p, &self.db)
                }
                _ => {}
            }
        }
        let q = compile_multi(patterns)?;
        // Unknown symbols match nothing rather than erroring: rewrite rules
        // routinely mention symbols an e-graph has not seen yet.
        for atom in &q.atoms {
            if self.db.relation(&atom.symbol).is_none() {
                return Ok(MatchSet::new(q.head));
            }
        }
        let ordering = match &opts.ordering {
            Some(ord) => ord.clone(),
            None => plan(&q, &self.db)?,
        };
        let (ms, index_time) = eval_with_cache(&q, &self.db, &ordering, &mut self.cache)?;
        self.last_index_time = index_time;
        Ok(ms)
    }
}

/// One-shot [`Engine::ematch`] without cache reuse.
pub fn ematch(eg: &EGraph, patterns: &[Pattern], opts: &MatchOptions) -> Result<MatchSet> {
    Engine::new(eg)?.ematch(eg, patterns, opts)
}
