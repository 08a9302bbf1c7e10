//! Patterns: terms with named holes.

use std::fmt;

use crate::egraph::Symbol;

/// A pattern over the term language. Variables are written `?name` in the
/// concrete syntax; a symbol applied to no arguments is a constant.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Pattern {
    Var(String),
    App(Symbol, Vec<Pattern>),
}

/// Shape classes that get special treatment during matching. `BareVariable`
/// and `NonNested` bypass query compilation entirely.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PatternShape {
    /// `?x`: matched by scanning every canonical e-class.
    BareVariable,
    /// `f(?x, ?y, ...)`: a single-relation scan (repeated variables become
    /// equality constraints on the scanned tuple).
    NonNested,
    /// Everything else; compiled to a conjunctive query.
    Nested,
}

impl Pattern {
    pub fn var(name: impl Into<String>) -> Pattern {
        Pattern::Var(name.into())
    }

    pub fn app(symbol: impl Into<Symbol>, children: Vec<Pattern>) -> Pattern {
        Pattern::App(symbol.into(), children)
    }

    pub fn shape(&self) -> PatternShape {
        match self {
            Pattern::Var(_) => PatternShape::BareVariable,
            Pattern::App(_, children) => {
                if !children.is_empty()
                    && children.iter().all(|c| matches!(c, Pattern::Var(_)))
                {
                    PatternShape::NonNested
                } else {
                    PatternShape::Nested
                }
            }
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Pattern::Var(_) => false,
            Pattern::App(_, children) => children.iter().all(Pattern::is_ground),
        }
    }

    /// Distinct variable names in first-occurrence (pre-order) order.
    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Pattern::Var(v) => {
                if !out.contains(&v.as_str()) {
                    out.push(v);
                }
            }
            Pattern::App(_, children) => {
                for c in children {
                    c.collect_vars(out);
                }
            }
        }
    }

    /// True if some variable occurs more than once.
    pub fn is_nonlinear(&self) -> bool {
        fn count(p: &Pattern, seen: &mut Vec<(String, usize)>) {
            match p {
                Pattern::Var(v) => match seen.iter_mut().find(|(name, _)| name == v) {
                    Some((_, n)) => *n += 1,
                    None => seen.push((v.clone(), 1)),
                },
                Pattern::App(_, children) => children.iter().for_each(|c| count(c, seen)),
            }
        }
        let mut seen = Vec::new();
        count(self, &mut seen);
        seen.iter().any(|(_, n)| *n > 1)
    }

    pub fn depth(&self) -> usize {
        match self {
            Pattern::Var(_) => 0,
            Pattern::App(_, children) => {
                1 + children.iter().map(Pattern::depth).max().unwrap_or(0)
            }
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Var(v) => write!(f, "?{v}"),
            Pattern::App(sym, children) => {
                write!(f, "({sym}")?;
                for c in children {
                    write!(f, " {c}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        let bare = Pattern::var("x");
        assert_eq!(bare.shape(), PatternShape::BareVariable);
        let flat = Pattern::app("f", vec![Pattern::var("x"), Pattern::var("y")]);
        assert_eq!(flat.shape(), PatternShape::NonNested);
        let nested = Pattern::app("f", vec![Pattern::var("x"), flat.clone()]);
        assert_eq!(nested.shape(), PatternShape::Nested);
        // A ground constant argument makes the pattern nested: it compiles to
        // an extra atom.
        let with_const = Pattern::app("f", vec![Pattern::app("one", vec![])]);
        assert_eq!(with_const.shape(), PatternShape::Nested);
        // A constant on its own is also not a variable scan.
        assert_eq!(Pattern::app("one", vec![]).shape(), PatternShape::Nested);
    }

    #[test]
    fn variable_order_and_linearity() {
        let p = Pattern::app(
            "f",
            vec![
                Pattern::var("b"),
                Pattern::app("g", vec![Pattern::var("a"), Pattern::var("b")]),
            ],
        );
        assert_eq!(p.variables(), vec!["b", "a"]);
        assert!(p.is_nonlinear());
        assert!(!Pattern::app("f", vec![Pattern::var("x")]).is_nonlinear());
    }

    #[test]
    fn display_round_trips_shape() {
        let p = Pattern::app(
            "f",
            vec![Pattern::var("x"), Pattern::app("g", vec![Pattern::var("x")])],
        );
        assert_eq!(p.to_string(), "(f ?x (g ?x))");
        assert_eq!(p.depth(), 2);
    }
}
