//! Variable-ordering heuristics for generic join.
//!
//! The planner sorts variables by how constrained they are: first by the
//! number of atoms they appear in (descending: more relations intersect to a
//! smaller candidate set), then by the size of the smallest relation
//! containing them (ascending), then by functional-dependency depth so that a
//! variable determined by earlier ones contributes its (at most one) value
//! cheaply, and finally by first occurrence for reproducibility. Variables
//! that occur in a single atom constrain nothing else, so per atom they are
//! batched into one group and bound in a single enumeration step.

use rustc_hash::{FxHashMap, FxHashSet};
use std::fmt;

use crate::compile::{ConjunctiveQuery, QueryVar};
use crate::db::Database;
use crate::error::{Error, Result};
use crate::trie::ColumnGroups;

/// Sequence of variable groups, outermost join level first. Groups of size
/// greater than one are batched single-atom variables.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VariableOrdering(pub Vec<Vec<QueryVar>>);

impl VariableOrdering {
    pub fn singletons(vars: Vec<QueryVar>) -> VariableOrdering {
        VariableOrdering(vars.into_iter().map(|v| vec![v]).collect())
    }

    pub fn groups(&self) -> &[Vec<QueryVar>] {
        &self.0
    }

    pub fn flat(&self) -> impl Iterator<Item = &QueryVar> {
        self.0.iter().flatten()
    }

    /// Parses `a,b,c` (singleton levels) with `+` batching members into one
    /// group: `?a,$0+root`. Variable tokens use their display forms.
    pub fn parse(input: &str) -> Result<VariableOrdering> {
        let mut groups = Vec::new();
        for segment in input.split(',') {
            let segment = segment.trim();
            if segment.is_empty() {
                return Err(Error::InvalidOrdering("empty group".into()));
            }
            let group = segment
                .split('+')
                .map(|tok| QueryVar::parse(tok.trim()))
                .collect::<Result<Vec<_>>>()?;
            groups.push(group);
        }
        Ok(VariableOrdering(groups))
    }
}

impl fmt::Display for VariableOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, group) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            for (j, v) in group.iter().enumerate() {
                if j > 0 {
                    write!(f, "+")?;
                }
                write!(f, "{v}")?;
            }
        }
        Ok(())
    }
}

/// Per-variable facts the ordering heuristic works from.
#[derive(Clone, Debug)]
pub struct PlanEntry {
    pub var: QueryVar,
    /// Number of distinct atoms mentioning the variable.
    pub occurrences: usize,
    /// Total column positions across all atoms (> occurrences means the
    /// variable repeats inside an atom).
    pub positions: usize,
    /// Size of the smallest relation among the containing atoms.
    pub min_relation_size: usize,
    /// Longest chain of child-columns-determine-id-column edges below the
    /// variable; 0 for variables nothing determines.
    pub fd_depth: usize,
    /// (atom index, column index) of the first occurrence.
    pub first_occurrence: (usize, usize),
}

#[derive(Clone, Debug)]
pub struct PlanStats {
    pub entries: Vec<PlanEntry>,
}

impl PlanStats {
    pub fn entry(&self, var: &QueryVar) -> Option<&PlanEntry> {
        self.entries.iter().find(|e| &e.var == var)
    }
}

/// Computes the planner's inputs for `q` against `db`. Errors if an atom's
/// symbol has no relation.
pub fn plan_stats(q: &ConjunctiveQuery, db: &Database) -> Result<PlanStats> {
    let vars = q.variables();
    let index_of = |v: &QueryVar| vars.iter().position(|x| x == v).expect("known var");
    let mut sizes = Vec::with_capacity(q.atoms.len());
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
        sizes.push(rel.len());
    }

    // Functional dependencies: in every e-node relation the child columns
    // determine the id column, so each atom contributes edges child-var ->
    // id-var. Depth is longest-path; a cycle (possible only for hand-written
    // queries, never compiled patterns) parks its variables at one depth
    // past the acyclic part rather than failing.
    let mut edges: FxHashSet<(usize, usize)> = FxHashSet::default();
    for atom in &q.atoms {
        let id_var = index_of(&atom.vars[0]);
        for v in &atom.vars[1..] {
            let from = index_of(v);
            if from != id_var {
                edges.insert((from, id_var));
            }
        }
    }
    let n = vars.len();
    let mut indeg = vec![0usize; n];
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in &edges {
        out[a].push(b);
        indeg[b] += 1;
    }
    let mut depth = vec![0usize; n];
    let mut ready: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    ready.sort_unstable();
    let mut processed = vec![false; n];
    let mut queue = std::collections::VecDeque::from(ready);
    while let Some(i) = queue.pop_front() {
        processed[i] = true;
        for &j in &out[i] {
            depth[j] = depth[j].max(depth[i] + 1);
            indeg[j] -= 1;
            if indeg[j] == 0 {
                queue.push_back(j);
            }
        }
    }
    let max_depth = depth
        .iter()
        .zip(&processed)
        .filter(|(_, &p)| p)
        .map(|(&d, _)| d)
        .max()
        .unwrap_or(0);
    for i in 0..n {
        if !processed[i] {
            depth[i] = max_depth + 1;
        }
    }

    let entries = vars
        .iter()
        .enumerate()
        .map(|(vi, var)| {
            let mut occurrences = 0;
            let mut positions = 0;
            let mut min_relation_size = usize::MAX;
            let mut first_occurrence = (usize::MAX, usize::MAX);
            for (ai, atom) in q.atoms.iter().enumerate() {
                let in_atom = atom.vars.iter().filter(|v| *v == var).count();
                if in_atom > 0 {
                    occurrences += 1;
                    positions += in_atom;
                    min_relation_size = min_relation_size.min(sizes[ai]);
                    let col = atom.vars.iter().position(|v| v == var).expect("present");
                    first_occurrence = first_occurrence.min((ai, col));
                }
            }
            PlanEntry {
                var: var.clone(),
                occurrences,
                positions,
                min_relation_size,
                fd_depth: depth[vi],
                first_occurrence,
            }
        })
        .collect();
    Ok(PlanStats { entries })
}

/// Picks a variable ordering for `q` against `db`.
pub fn plan(q: &ConjunctiveQuery, db: &Database) -> Result<VariableOrdering> {
    let stats = plan_stats(q, db)?;
    // Join variables (2+ atoms) stand alone; single-atom variables batch per
    // atom, except that a variable repeated inside its one atom stays its own
    // level so descent can re-use the bound value.
    let mut groups: Vec<Vec<&PlanEntry>> = Vec::new();
    let mut batch_of_atom: FxHashMap<usize, usize> = FxHashMap::default();
    for entry in &stats.entries {
        if entry.occurrences != 1 || entry.positions != 1 {
            groups.push(vec![entry]);
        } else {
            let atom = entry.first_occurrence.0;
            match batch_of_atom.get(&atom) {
                Some(&g) => groups[g].push(entry),
                None => {
                    batch_of_atom.insert(atom, groups.len());
                    groups.push(vec![entry]);
                }
            }
        }
    }
    for group in &mut groups {
        group.sort_by_key(|e| e.first_occurrence);
    }
    groups.sort_by_key(|group| {
        let occ = group.iter().map(|e| e.occurrences).max().unwrap_or(0);
        let size = group
            .iter()
            .map(|e| e.min_relation_size)
            .min()
            .unwrap_or(usize::MAX);
        // A batch is free enumeration once its atom's other levels are
        // bound, so only its best-determined member matters for the
        // determinant-first tie-break.
        let fd = group.iter().map(|e| e.fd_depth).min().unwrap_or(0);
        let first = group
            .iter()
            .map(|e| e.first_occurrence)
            .min()
            .unwrap_or((usize::MAX, usize::MAX));
        (std::cmp::Reverse(occ), size, fd, first)
    });
    Ok(VariableOrdering(
        groups
            .into_iter()
            .map(|g| g.into_iter().map(|e| e.var.clone()).collect())
            .collect(),
    ))
}

/// Checks `ordering` covers exactly the variables of `q`, each once, and that
/// every multi-variable group batches only single-position variables of one
/// shared atom.
pub fn validate_ordering(q: &ConjunctiveQuery, ordering: &VariableOrdering) -> Result<()> {
    let vars = q.variables();
    let mut seen: Vec<&QueryVar> = Vec::new();
    for group in ordering.groups() {
        if group.is_empty() {
            return Err(Error::InvalidOrdering("empty group".into()));
        }
        for v in group {
            if !vars.contains(v) {
                return Err(Error::InvalidOrdering(format!("`{v}` is not a query variable")));
            }
            if seen.contains(&v) {
                return Err(Error::InvalidOrdering(format!("`{v}` appears twice")));
            }
            seen.push(v);
        }
        if group.len() > 1 {
            let mut home: Option<usize> = None;
            for v in group {
                let atoms: Vec<usize> = q
                    .atoms
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| a.vars.contains(v))
                    .map(|(i, _)| i)
                    .collect();
                let positions: usize = q
                    .atoms
                    .iter()
                    .flat_map(|a| a.vars.iter())
                    .filter(|x| *x == v)
                    .count();
                if atoms.len() != 1 || positions != 1 {
                    return Err(Error::InvalidOrdering(format!(
                        "`{v}` cannot be batched: it occurs in more than one position"
                    )));
                }
                match home {
                    None => home = Some(atoms[0]),
                    Some(h) if h != atoms[0] => {
                        return Err(Error::InvalidOrdering(
                            "batched variables must share an atom".into(),
                        ))
                    }
                    Some(_) => {}
                }
            }
        }
    }
    if seen.len() != vars.len() {
        let missing: Vec<String> = vars
            .iter()
            .filter(|v| !seen.contains(v))
            .map(|v| v.to_string())
            .collect();
        return Err(Error::InvalidOrdering(format!(
            "missing variables: {}",
            missing.join(", ")
        )));
    }
    Ok(())
}

/// The trie layout each atom needs under `ordering`: for every atom, the
/// ordered list of column groups (one trie level per ordering group that
/// touches the atom).
pub fn required_permutations(
    q: &ConjunctiveQuery,
    ordering: &VariableOrdering,
) -> Result<Vec<ColumnGroups>> {
    validate_ordering(q, ordering)?;
    let mut perms = Vec::with_capacity(q.atoms.len());
    for atom in &q.atoms {
        let mut groups: ColumnGroups = Vec::new();
        for group in ordering.groups() {
            let mut cols: Vec<(usize, usize)> = Vec::new();
            for (col, v) in atom.vars.iter().enumerate() {
                if let Some(gi) = group.iter().position(|g| g == v) {
                    cols.push((gi, col));
                }
            }
            if !cols.is_empty() {
                cols.sort_unstable();
                groups.push(cols.into_iter().map(|(_, col)| col).collect());
            }
        }
        perms.push(groups);
    }
    Ok(perms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile::{compile, Atom};
    use crate::db::{Database, Relation};
    use crate::egraph::EClassId;
    use crate::sexpr::parse_pattern;

    fn v(name: &str) -> QueryVar {
        QueryVar::Pat(name.into())
    }

    fn aux(k: u32) -> QueryVar {
        QueryVar::Aux(k)
    }

    fn root() -> QueryVar {
        QueryVar::Root(0)
    }

    /// A database with the named relations, each filled with `size` dummy
    /// tuples of the right width.
    fn db_with(rels: &[(&str, usize, usize)]) -> Database {
        let relations = rels
            .iter()
            .map(|&(name, width, size)| {
                let tuples = (0..size)
                    .map(|i| (0..width).map(|c| EClassId((i * width + c) as u32)).collect())
                    .collect();
                Relation::new(name, width, tuples).unwrap()
            })
            .collect();
        Database::from_relations(relations, 0)
    }

    #[test]
    fn chain_pattern_ordering_matches_hand_derivation() {
        // f(?a, (g ?a)): the shared variable goes first, then the chained
        // auxiliary, then the root.
        let q = compile(&parse_pattern("(f ?a (g ?a))").unwrap()).unwrap();
        let db = db_with(&[("f", 3, 10), ("g", 2, 10)]);
        let ord = plan(&q, &db).unwrap();
        assert_eq!(
            ord.groups(),
            &[vec![v("a")], vec![aux(0)], vec![root()]]
        );
    }

    #[test]
    fn fd_breaks_ties_toward_determinants() {
        // f((g ?a), (h ?a)): a, $0, $1 all occur twice over equal-size
        // relations; a determines both auxiliaries, so it goes first.
        let q = compile(&parse_pattern("(f (g ?a) (h ?a))").unwrap()).unwrap();
        let db = db_with(&[("f", 3, 50), ("g", 2, 50), ("h", 2, 50)]);
        let ord = plan(&q, &db).unwrap();
        assert_eq!(
            ord.groups(),
            &[vec![v("a")], vec![aux(0)], vec![aux(1)], vec![root()]]
        );
    }

    #[test]
    fn smaller_relations_bind_earlier() {
        // f(g(h(?a))) with R_h much smaller: the g-h join variable beats the
        // f-g one.
        let q = compile(&parse_pattern("(f (g (h ?a)))").unwrap()).unwrap();
        let db = db_with(&[("f", 2, 1000), ("g", 2, 1000), ("h", 2, 10)]);
        let ord = plan(&q, &db).unwrap();
        let flat: Vec<&QueryVar> = ord.flat().collect();
        let pos =
            |x: &QueryVar| flat.iter().position(|y| *y == x).expect("planned");
        // $0 chains f-g, $1 chains g-h.
        assert!(pos(&aux(1)) < pos(&aux(0)));
    }

    #[test]
    fn single_atom_variables_batch_per_atom() {
        // Q(x,y,z,w) <- R(x,y,a), S(a,z,w), hand-written.
        let q = ConjunctiveQuery {
            head: vec![v("x"), v("y"), v("z"), v("w")],
            atoms: vec![
                Atom {
                    symbol: "R".into(),
                    vars: vec![v("x"), v("y"), v("a")],
                },
                Atom {
                    symbol: "S".into(),
                    vars: vec![v("a"), v("z"), v("w")],
                },
            ],
        };
        let db = db_with(&[("R", 3, 20), ("S", 3, 20)]);
        let ord = plan(&q, &db).unwrap();
        assert_eq!(
            ord.groups(),
            &[
                vec![v("a")],
                vec![v("x"), v("y")],
                vec![v("z"), v("w")],
            ]
        );
        let perms = required_permutations(&q, &ord).unwrap();
        assert_eq!(perms[0], vec![vec![2], vec![0, 1]]);
        assert_eq!(perms[1], vec![vec![0], vec![1, 2]]);
    }

    #[test]
    fn fully_degenerate_atom_is_one_scan_level() {
        let q = compile(&parse_pattern("(f ?a ?b)").unwrap()).unwrap();
        let db = db_with(&[("f", 3, 5)]);
        let ord = plan(&q, &db).unwrap();
        assert_eq!(ord.groups(), &[vec![root(), v("a"), v("b")]]);
    }

    #[test]
    fn repeated_variable_stays_unbatched() {
        let q = compile(&parse_pattern("(f ?a ?a)").unwrap()).unwrap();
        let db = db_with(&[("f", 3, 5)]);
        let ord = plan(&q, &db).unwrap();
        // ?a occupies two positions, so it cannot join the root's batch.
        assert_eq!(ord.groups().len(), 2);
        assert!(validate_ordering(&q, &ord).is_ok());
        let bad = VariableOrdering(vec![vec![root(), v("a")]]);
        assert!(validate_ordering(&q, &bad).is_err());
    }

    #[test]
    fn cyclic_dependencies_do_not_panic() {
        // Triangle query: FD edges form a cycle; planning still works.
        let q = ConjunctiveQuery {
            head: vec![v("x"), v("y"), v("z")],
            atoms: vec![
                Atom { symbol: "R".into(), vars: vec![v("x"), v("y")] },
                Atom { symbol: "S".into(), vars: vec![v("y"), v("z")] },
                Atom { symbol: "T".into(), vars: vec![v("z"), v("x")] },
            ],
        };
        let db = db_with(&[("R", 2, 9), ("S", 2, 9), ("T", 2, 9)]);
        let ord = plan(&q, &db).unwrap();
        assert_eq!(
            ord.groups(),
            &[vec![v("x")], vec![v("y")], vec![v("z")]]
        );
    }

    #[test]
    fn validation_rejects_wrong_coverage() {
        let q = compile(&parse_pattern("(f ?a (g ?a))").unwrap()).unwrap();
        let missing = VariableOrdering::singletons(vec![v("a"), root()]);
        assert!(validate_ordering(&q, &missing).is_err());
        let duplicated =
            VariableOrdering::singletons(vec![v("a"), v("a"), aux(0), root()]);
        assert!(validate_ordering(&q, &duplicated).is_err());
        let unknown =
            VariableOrdering::singletons(vec![v("zz"), v("a"), aux(0), root()]);
        assert!(validate_ordering(&q, &unknown).is_err());
        let cross_atom = VariableOrdering(vec![vec![v("a"), root()], vec![aux(0)]]);
        assert!(validate_ordering(&q, &cross_atom).is_err());
    }

    #[test]
    fn permutations_follow_group_order() {
        let q = compile(&parse_pattern("(f ?a (g ?a))").unwrap()).unwrap();
        let ord =
            VariableOrdering::singletons(vec![v("a"), aux(0), root()]);
        let perms = required_permutations(&q, &ord).unwrap();
        // R_f(root, a, $0) visited a, $0, root -> columns 1, 2, 0.
        assert_eq!(perms[0], vec![vec![1], vec![2], vec![0]]);
        // R_g($0, a) visited a, $0 -> columns 1, 0.
        assert_eq!(perms[1], vec![vec![1], vec![0]]);
    }

    #[test]
    fn ordering_display_parse_round_trip() {
        let ord = VariableOrdering(vec![
            vec![v("a")],
            vec![aux(0), root()],
            vec![QueryVar::Root(1)],
        ]);
        let text = ord.to_string();
        assert_eq!(text, "?a,$0+root,root_2");
        assert_eq!(VariableOrdering::parse(&text).unwrap(), ord);
        assert!(VariableOrdering::parse("?a,,root").is_err());
        assert!(VariableOrdering::parse("bogus").is_err());
    }

    #[test]
    fn unknown_relation_errors() {
        let q = compile(&parse_pattern("(f ?a)").unwrap()).unwrap();
        let db = db_with(&[("g", 2, 3)]);
        assert!(matches!(
            plan(&q, &db),
            Err(Error::UnknownRelation(_))
        ));
    }
}
