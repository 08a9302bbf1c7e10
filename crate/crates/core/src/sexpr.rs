//! S-expression concrete syntax for patterns and terms.
//!
//! `(f ?a (g ?a))` is an application, `?a` a variable, and a lone token like
//! `one` or `42` a constant. A top-level list whose first element is itself a
//! list is a multi-pattern: `((f ?a ?b) (f ?a ?c))`.

use rustc_hash::FxHashMap;

use crate::egraph::Symbol;
use crate::error::{Error, Result};
use crate::pattern::Pattern;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug)]
enum SExp {
    Atom(String, Pos),
    List(Vec<SExp>, Pos),
}

fn err(pos: Pos, msg: impl Into<String>) -> Error {
    Error::Parse { line: pos.line, col: pos.col, msg: msg.into() }
}

struct Scanner<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl<'a> Scanner<'a> {
    fn new(input: &'a str) -> Scanner<'a> {
        Scanner { chars: input.chars().peekable(), pos: Pos { line: 1, col: 1 } }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == ';' {
                while let Some(&c) = self.chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn parse_exp(&mut self) -> Result<SExp> {
        self.skip_ws();
        let start = self.pos;
        match self.chars.peek() {
            None => Err(err(start, "unexpected end of input")),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.chars.peek() {
                        None => return Err(err(self.pos, "unclosed `(`")),
                        Some(')') => {
                            self.bump();
                            return Ok(SExp::List(items, start));
                        }
                        Some(_) => items.push(self.parse_exp()?),
                    }
                }
            }
            Some(')') => Err(err(start, "unexpected `)`")),
            Some(_) => {
                let mut atom = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    atom.push(c);
                    self.bump();
                }
                Ok(SExp::Atom(atom, start))
            }
        }
    }

    fn parse_whole(&mut self) -> Result<SExp> {
        let exp = self.parse_exp()?;
        self.skip_ws();
        if self.chars.peek().is_some() {
            return Err(err(self.pos, "trailing input after expression"));
        }
        Ok(exp)
    }
}

fn pattern_of(exp: &SExp) -> Result<Pattern> {
    match exp {
        SExp::Atom(tok, pos) => {
            if let Some(name) = tok.strip_prefix('?') {
                if name.is_empty() {
                    return Err(err(*pos, "`?` must be followed by a variable name"));
                }
                Ok(Pattern::Var(name.to_string()))
            } else {
                Ok(Pattern::App(Symbol::new(tok.clone()), Vec::new()))
            }
        }
        SExp::List(items, pos) => {
            let (head, rest) = items
                .split_first()
                .ok_or_else(|| err(*pos, "empty list"))?;
            let sym = match head {
                SExp::Atom(tok, hpos) => {
                    if tok.starts_with('?') {
                        return Err(err(*hpos, "variable cannot be applied"));
                    }
                    Symbol::new(tok.clone())
                }
                SExp::List(_, hpos) => {
                    return Err(err(*hpos, "expected a symbol at head of application"))
                }
            };
            let children = rest.iter().map(pattern_of).collect::<Result<Vec<_>>>()?;
            Ok(Pattern::App(sym, children))
        }
    }
}

/// Checks every symbol is used with one arity throughout, reporting the
/// position-free offending symbol otherwise (positions are lost once patterns
/// are built, so this runs on the raw tree).
fn check_arities(exp: &SExp, seen: &mut FxHashMap<String, usize>) -> Result<()> {
    match exp {
        SExp::Atom(tok, pos) => {
            if !tok.starts_with('?') {
                match seen.get(tok) {
                    Some(&a) if a != 0 => {
                        return Err(err(
                            *pos,
                            format!("symbol `{tok}` used with arity 0, previously {a}"),
                        ))
                    }
                    _ => {
                        seen.insert(tok.clone(), 0);
                    }
                }
            }
            Ok(())
        }
        SExp::List(items, _) => {
            if let Some(SExp::Atom(tok, pos)) = items.first() {
                if !tok.starts_with('?') {
                    let arity = items.len() - 1;
                    match seen.get(tok) {
                        Some(&a) if a != arity => {
                            return Err(err(
                                *pos,
                                format!("symbol `{tok}` used with arity {arity}, previously {a}"),
                            ))
                        }
                        _ => {
                            seen.insert(tok.clone(), arity);
                        }
                    }
                }
            }
            for item in items.iter().skip(1) {
                check_arities(item, seen)?;
            }
            Ok(())
        }
    }
}

/// Parses a single pattern.
pub fn parse_pattern(input: &str) -> Result<Pattern> {
    let exp = Scanner::new(input).parse_whole()?;
    check_arities(&exp, &mut FxHashMap::default())?;
    pattern_of(&exp)
}

/// Parses either a single pattern or a multi-pattern (a list of lists),
/// returning one entry per pattern. Arity consistency is checked across the
/// whole group.
pub fn parse_patterns(input: &str) -> Result<Vec<Pattern>> {
    let exp = Scanner::new(input).parse_whole()?;
    check_arities_multi(&exp)?;
    match &exp {
        SExp::List(items, _) if items.first().map_or(false, |h| matches!(h, SExp::List(..))) => {
            items.iter().map(pattern_of).collect()
        }
        _ => Ok(vec![pattern_of(&exp)?]),
    }
}

fn check_arities_multi(exp: &SExp) -> Result<()> {
    let mut seen = FxHashMap::default();
    match exp {
        SExp::List(items, _) if items.first().map_or(false, |h| matches!(h, SExp::List(..))) => {
            for item in items {
                check_arities(item, &mut seen)?;
            }
            Ok(())
        }
        _ => check_arities(exp, &mut seen),
    }
}

/// Parses a ground term (a pattern with no variables).
pub fn parse_term(input: &str) -> Result<Pattern> {
    let p = parse_pattern(input)?;
    if !p.is_ground() {
        return Err(Error::Parse {
            line: 1,
            col: 1,
            msg: format!("expected a ground term, found variable in `{p}`"),
        });
    }
    Ok(p)
}

/// Parses a line-oriented file of patterns or terms: one entry per line,
/// blank lines and `;` or `#` comments skipped. Errors carry the file line.
pub fn parse_lines<T>(
    input: &str,
    mut parse_one: impl FnMut(&str) -> Result<T>,
) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        match parse_one(line) {
            Ok(v) => out.push(v),
            Err(Error::Parse { line: _, col, msg }) => {
                return Err(Error::Parse { line: i + 1, col, msg })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
