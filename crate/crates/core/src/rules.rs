//! Rewrite rules: a named left pattern and a right template.
//!
//! Text form, one rule per line:
//!
//! ```text
//! add-comm: (+ ?a ?b) => (+ ?b ?a)
//! ```
//!
//! Blank lines and lines starting with `#` or `;` are skipped. The right
//! side may only use variables bound on the left.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::pattern::Pattern;
use crate::sexpr::parse_pattern;

#[derive(Clone, Debug)]
pub struct RewriteRule {
    pub name: String,
    pub lhs: Pattern,
    pub rhs: Pattern,
}

impl RewriteRule {
    /// Checks that every right-side variable is bound by the left side.
    pub fn new(name: impl Into<String>, lhs: Pattern, rhs: Pattern) -> Result<RewriteRule> {
        let name = name.into();
        let bound = lhs.variables();
        for v in rhs.variables() {
            if !bound.contains(&v) {
                return Err(Error::Parse {
                    line: 0,
                    col: 0,
                    msg: format!("rule `{name}`: right side uses unbound variable ?{v}"),
                });
            }
        }
        Ok(RewriteRule { name, lhs, rhs })
    }
}

impl std::fmt::Display for RewriteRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {} => {}", self.name, self.lhs, self.rhs)
    }
}

/// Parses a whole rules file. Errors carry the file line; columns are
/// relative to that line. Symbol arities must be consistent across all
/// patterns in the file.
pub fn parse_rules(text: &str) -> Result<Vec<RewriteRule>> {
    let mut rules = Vec::new();
    let mut arities: HashMap<String, usize> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        rules.push(parse_rule_line(raw, line_no, &mut arities)?);
    }
    Ok(rules)
}

/// Parses a single `name: lhs => rhs` rule (no comment handling).
pub fn parse_rule(line: &str) -> Result<RewriteRule> {
    parse_rule_line(line, 1, &mut HashMap::new())
}

fn parse_rule_line(
    raw: &str,
    line_no: usize,
    arities: &mut HashMap<String, usize>,
) -> Result<RewriteRule> {
    let colon = raw.find(':').ok_or_else(|| Error::Parse {
        line: line_no,
        col: raw.chars().count() + 1,
        msg: "expected `name: lhs => rhs`".into(),
    })?;
    let name = raw[..colon].trim();
    if name.is_empty() {
        return Err(Error::Parse { line: line_no, col: 1, msg: "empty rule name".into() });
    }
    let body = &raw[colon + 1..];
    let arrow = body.find("=>").ok_or_else(|| Error::Parse {
        line: line_no,
        col: raw.chars().count() + 1,
        msg: format!("rule `{name}`: missing `=>`"),
    })?;
    let lhs_src = &body[..arrow];
    let rhs_src = &body[arrow + 2..];
    let lhs = reanchor(parse_pattern(lhs_src), line_no, raw, lhs_src)?;
    let rhs = reanchor(parse_pattern(rhs_src), line_no, raw, rhs_src)?;
    for p in [&lhs, &rhs] {
        check_rule_arities(p, arities, line_no)?;
    }
    match RewriteRule::new(name, lhs, rhs) {
        Ok(r) => Ok(r),
        Err(Error::Parse { msg, .. }) => {
            Err(Error::Parse { line: line_no, col: 1, msg })
        }
        Err(e) => Err(e),
    }
}

/// Maps an error position inside `fragment` to a position in `raw` on file
/// line `line_no`.
fn reanchor(r: Result<Pattern>, line_no: usize, raw: &str, fragment: &str) -> Result<Pattern> {
    r.map_err(|e| match e {
        Error::Parse { col, msg, .. } => {
            let offset = fragment.as_ptr() as usize - raw.as_ptr() as usize;
            let chars_before = raw[..offset].chars().count();
            Error::Parse { line: line_no, col: chars_before + col, msg }
        }
        other => other,
    })
}

fn check_rule_arities(
    p: &Pattern,
    arities: &mut HashMap<String, usize>,
    line_no: usize,
) -> Result<()> {
    if let Pattern::App(symbol, children) = p {
        let name = symbol.as_str();
        match arities.get(name) {
            Some(&a) if a != children.len() => {
                return Err(Error::Parse {
                    line: line_no,
                    col: 1,
                    msg: format!(
                        "symbol {name} used with arity {} but previously {a}",
                        children.len()
                    ),
                });
            }
            Some(_) => {}
            None => {
                arities.insert(name.to_string(), children.len());
            }
        }
        for c in children {
            check_rule_arities(c, arities, line_no)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_rules_file() {
        let text = "\
# arithmetic
add-comm: (+ ?a ?b) => (+ ?b ?a)
mul-one:  (* ?a (one)) => ?a

; distributivity
distrib: (* ?a (+ ?b ?c)) => (+ (* ?a ?b) (* ?a ?c))
";
        let rules = parse_rules(text).unwrap();
        assert_eq!(rules.len(), 3);
        assert_eq!(rules[0].name, "add-comm");
        assert_eq!(rules[1].to_string(), "mul-one: (* ?a (one)) => ?a");
        assert_eq!(rules[2].lhs.variables(), vec!["a", "b", "c"]);
    }

    #[test]
    fn rejects_unbound_right_variables() {
        let err = parse_rule("bad: (f ?a) => (f ?b)").unwrap_err();
        match err {
            Error::Parse { msg, .. } => assert!(msg.contains("?b"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_inconsistent_arities_across_rules() {
        let err = parse_rules("a: (f ?x) => (f ?x)\nb: (f ?x ?y) => (f ?y ?x)\n").unwrap_err();
        match err {
            Error::Parse { line, msg, .. } => {
                assert_eq!(line, 2);
                assert!(msg.contains("arity"), "{msg}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn error_positions_point_into_the_file_line() {
        let err = parse_rules("# leading comment\nr: (f ?a => (f ?a)\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_pieces_are_reported() {
        assert!(matches!(parse_rule("no arrow here"), Err(Error::Parse { .. })));
        assert!(matches!(parse_rule(": (f ?a) => ?a"), Err(Error::Parse { .. })));
        assert!(matches!(parse_rule("r: (f ?a)"), Err(Error::Parse { .. })));
    }
}
