//! Pattern-to-conjunctive-query compilation.
//!
//! Each function application in a pattern becomes one atom. The atom's first
//! variable is the class holding the application: the pattern's root variable
//! at the top, a fresh auxiliary variable below. `f(?a, (g ?a))` becomes
//!
//!   Q(root, a) <- R_f(root, a, $0), R_g($0, a)
//!
//! Auxiliary variables are numbered by pre-order traversal, so compilation is
//! deterministic and repeated runs agree syntactically.

use std::fmt;

use crate::egraph::Symbol;
use crate::error::{Error, Result};
use crate::pattern::Pattern;

/// A query variable. The three namespaces are disjoint by construction;
/// `Root(0)` prints as `root`, later roots as `root_2`, `root_3`, ...,
/// pattern variables keep their `?name`, and auxiliaries print as `$k`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum QueryVar {
    Root(u32),
    Pat(String),
    Aux(u32),
}

impl QueryVar {
    pub fn is_root(&self) -> bool {
        matches!(self, QueryVar::Root(_))
    }

    pub fn is_aux(&self) -> bool {
        matches!(self, QueryVar::Aux(_))
    }

    /// Parses the display form: `root`, `root_2`, `?name`, `$3`.
    pub fn parse(token: &str) -> Result<QueryVar> {
        if token == "root" {
            return Ok(QueryVar::Root(0));
        }
        if let Some(k) = token.strip_prefix("root_") {
            let k: u32 = k
                .parse()
                .map_err(|_| Error::InvalidOrdering(format!("bad root variable `{token}`")))?;
            if k == 0 {
                return Err(Error::InvalidOrdering(format!("bad root variable `{token}`")));
            }
            return Ok(QueryVar::Root(k - 1));
        }
        if let Some(name) = token.strip_prefix('?') {
            if name.is_empty() {
                return Err(Error::InvalidOrdering("`?` without a name".into()));
            }
            return Ok(QueryVar::Pat(name.to_string()));
        }
        if let Some(k) = token.strip_prefix('$') {
            let k: u32 = k
                .parse()
                .map_err(|_| Error::InvalidOrdering(format!("bad auxiliary variable `{token}`")))?;
            return Ok(QueryVar::Aux(k));
        }
        Err(Error::InvalidOrdering(format!(
            "unrecognized variable `{token}` (expected `root`, `root_k`, `?name`, or `$k`)"
        )))
    }
}

impl fmt::Display for QueryVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueryVar::Root(0) => write!(f, "root"),
            QueryVar::Root(k) => write!(f, "root_{}", k + 1),
            QueryVar::Pat(name) => write!(f, "?{name}"),
            QueryVar::Aux(k) => write!(f, "${k}"),
        }
    }
}

/// One body atom `R_symbol(vars...)`; `vars[0]` is the id column.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Atom {
    pub symbol: Symbol,
    pub vars: Vec<QueryVar>,
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R_{}(", self.symbol)?;
        for (i, v) in self.vars.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// A conjunctive query `Q(head...) <- atoms...`. The head lists the roots
/// first, then the pattern variables in first-occurrence order; auxiliary
/// variables appear only in the body.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConjunctiveQuery {
    pub head: Vec<QueryVar>,
    pub atoms: Vec<Atom>,
}

impl ConjunctiveQuery {
    /// All variables, head first, then remaining body variables in
    /// first-occurrence order.
    pub fn variables(&self) -> Vec<QueryVar> {
        let mut out = self.head.clone();
        for atom in &self.atoms {
            for v in &atom.vars {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
        }
        out
    }

    /// Atoms containing each variable, indexed as in [`Self::variables`].
    pub fn occurrences(&self) -> Vec<(QueryVar, Vec<usize>)> {
        let vars = self.variables();
        vars.into_iter()
            .map(|v| {
                let atoms = self
                    .atoms
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| a.vars.contains(&v))
                    .map(|(i, _)| i)
                    .collect();
                (v, atoms)
            })
            .collect()
    }
}

impl fmt::Display for ConjunctiveQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q(")?;
        for (i, v) in self.head.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ") <- ")?;
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

struct Compiler {
    atoms: Vec<Atom>,
    next_aux: u32,
}

impl Compiler {
    /// Emits atoms for `p` rooted at `at`, pre-order.
    fn emit(&mut self, p: &Pattern, at: QueryVar) -> Result<()> {
        match p {
            Pattern::Var(_) => unreachable!("emit is only called on applications"),
            Pattern::App(symbol, children) => {
                let mut vars = Vec::with_capacity(children.len() + 1);
                vars.push(at);
                let mut apps = Vec::new();
                for child in children {
                    match child {
                        Pattern::Var(name) => vars.push(QueryVar::Pat(name.clone())),
                        Pattern::App(..) => {
                            let v = QueryVar::Aux(self.next_aux);
                            self.next_aux += 1;
                            vars.push(v.clone());
                            apps.push((child, v));
                        }
                    }
                }
                self.atoms.push(Atom { symbol: symbol.clone(), vars });
                for (child, v) in apps {
                    self.emit(child, v)?;
                }
                Ok(())
            }
        }
    }
}

fn head_of(patterns: &[&Pattern]) -> Vec<QueryVar> {
    let mut head: Vec<QueryVar> = (0..patterns.len() as u32).map(QueryVar::Root).collect();
    for p in patterns {
        for name in p.variables() {
            let v = QueryVar::Pat(name.to_string());
            if !head.contains(&v) {
                head.push(v);
            }
        }
    }
    head
}

/// Compiles a single pattern. Bare variables have no conjunctive query form
/// and are rejected; callers handle them by scanning the class domain.
pub fn compile(p: &Pattern) -> Result<ConjunctiveQuery> {
    compile_multi(std::slice::from_ref(p))
}

/// Compiles simultaneous patterns into one query over a shared variable
/// namespace, with one root per pattern.
pub fn compile_multi(patterns: &[Pattern]) -> Result<ConjunctiveQuery> {
    compile_refs(&patterns.iter().collect::<Vec<_>>())
}

fn compile_refs(patterns: &[&Pattern]) -> Result<ConjunctiveQuery> {
    if patterns.is_empty() {
        return Err(Error::InvalidOrdering("no patterns to compile".into()));
    }
    for p in patterns {
        if matches!(p, Pattern::Var(_)) {
            return Err(Error::BareVariablePattern);
        }
    }
    let mut compiler = Compiler { atoms: Vec::new(), next_aux: 0 };
    for (i, p) in patterns.iter().enumerate() {
        compiler.emit(p, QueryVar::Root(i as u32))?;
    }
    Ok(ConjunctiveQuery { head: head_of(patterns), atoms: compiler.atoms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sexpr::parse_pattern;

    fn pat(s: &str) -> Pattern {
        parse_pattern(s).unwrap()
    }

    fn root() -> QueryVar {
        QueryVar::Root(0)
    }

    fn v(name: &str) -> QueryVar {
        QueryVar::Pat(name.into())
    }

    fn aux(k: u32) -> QueryVar {
        QueryVar::Aux(k)
    }

    fn atom(sym: &str, vars: Vec<QueryVar>) -> Atom {
        Atom { symbol: Symbol::new(sym), vars }
    }

    #[test]
    fn nonlinear_nested_pattern() {
        // f(?a, g(?a)): two atoms chained through one auxiliary variable.
        let q = compile(&pat("(f ?a (g ?a))")).unwrap();
        assert_eq!(q.head, vec![root(), v("a")]);
        assert_eq!(
            q.atoms,
            vec![
                atom("f", vec![root(), v("a"), aux(0)]),
                atom("g", vec![aux(0), v("a")]),
            ]
        );
    }

    #[test]
    fn two_branches_share_the_pattern_variable() {
        // f(g(?a), h(?a)).
        let q = compile(&pat("(f (g ?a) (h ?a))")).unwrap();
        assert_eq!(q.head, vec![root(), v("a")]);
        assert_eq!(
            q.atoms,
            vec![
                atom("f", vec![root(), aux(0), aux(1)]),
                atom("g", vec![aux(0), v("a")]),
                atom("h", vec![aux(1), v("a")]),
            ]
        );
    }

    #[test]
    fn multi_pattern_concatenates_atoms() {
        let q = compile_multi(&[pat("(f ?a ?b)"), pat("(f ?a ?c)")]).unwrap();
        assert_eq!(
            q.head,
            vec![QueryVar::Root(0), QueryVar::Root(1), v("a"), v("b"), v("c")]
        );
        assert_eq!(
            q.atoms,
            vec![
                atom("f", vec![QueryVar::Root(0), v("a"), v("b")]),
                atom("f", vec![QueryVar::Root(1), v("a"), v("c")]),
            ]
        );
        assert_eq!(QueryVar::Root(1).to_string(), "root_2");
    }

    #[test]
    fn singleton_multi_equals_compile() {
        let p = pat("(f ?a (g ?b))");
        assert_eq!(compile(&p).unwrap(), compile_multi(&[p]).unwrap());
    }

    #[test]
    fn counts_and_namespaces() {
        // Aux count = applications - roots; every aux occurs in exactly two
        // atoms: once defining, once as a child.
        let q = compile(&pat("(f (g (h ?x)) (h ?x))")).unwrap();
        let apps = 4;
        assert_eq!(q.atoms.len(), apps);
        let vars = q.variables();
        let auxes: Vec<_> = vars.iter().filter(|v| v.is_aux()).collect();
        assert_eq!(auxes.len(), apps - 1);
        for a in auxes {
            let occ = q
                .atoms
                .iter()
                .flat_map(|at| at.vars.iter())
                .filter(|x| *x == a)
                .count();
            assert_eq!(occ, 2);
        }
        // Head excludes auxiliaries.
        assert!(q.head.iter().all(|h| !h.is_aux()));
    }

    #[test]
    fn ground_subterms_become_atoms() {
        let q = compile(&pat("(+ zero ?x)")).unwrap();
        assert_eq!(
            q.atoms,
            vec![
                atom("+", vec![root(), aux(0), v("x")]),
                atom("zero", vec![aux(0)]),
            ]
        );
    }

    #[test]
    fn repeated_variable_keeps_repeated_positions() {
        let q = compile(&pat("(f ?a ?a)")).unwrap();
        assert_eq!(q.atoms, vec![atom("f", vec![root(), v("a"), v("a")])]);
        assert_eq!(q.head, vec![root(), v("a")]);
    }

    #[test]
    fn bare_variable_is_rejected() {
        assert!(matches!(
            compile(&Pattern::var("x")),
            Err(Error::BareVariablePattern)
        ));
        assert!(matches!(
            compile_multi(&[pat("(f ?x)"), Pattern::var("y")]),
            Err(Error::BareVariablePattern)
        ));
    }

    #[test]
    fn query_var_display_parse_round_trip() {
        for var in [root(), QueryVar::Root(3), v("abc"), aux(7)] {
            assert_eq!(QueryVar::parse(&var.to_string()).unwrap(), var);
        }
        assert!(QueryVar::parse("root_0").is_err());
        assert!(QueryVar::parse("x").is_err());
        assert!(QueryVar::parse("$x").is_err());
    }
}
