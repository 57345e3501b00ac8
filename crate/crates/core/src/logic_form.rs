//! Prolog-style lambda logic forms: the executable query language.
//!
//! A form like
//! `answer(A,count(B,(river(B),const(C,stateid(Mississippi)),loc(B,C)),A))`
//! is parsed into a [`Term`] tree of predicate applications, single-letter
//! variables, multi-word constants and parenthesised conjunctions. Rendering
//! is canonical: no whitespace around structural characters, constants kept
//! verbatim.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// One node of a logic form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    /// `name(arg, ...)` — a predicate application.
    Predicate { name: String, args: Vec<Term> },
    /// A single uppercase letter, e.g. `A`.
    Variable(char),
    /// A bare value, possibly containing spaces, e.g. `San Antonio`.
    Constant(String),
    /// `(t1,t2,...)` — an ordered conjunction of goals.
    Conjunction(Vec<Term>),
}

/// A complete logic form (the root term).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicForm {
    pub root: Term,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("offset {offset}: expected {expected}, found {found:?}")]
    Unexpected {
        offset: usize,
        expected: &'static str,
        found: String,
    },
    #[error("offset {offset}: unbalanced parentheses")]
    Unbalanced { offset: usize },
    #[error("offset {offset}: empty argument list")]
    EmptyArgs { offset: usize },
    #[error("input is empty")]
    Empty,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SubstituteError {
    #[error("no mapping for symbol {0}")]
    UnknownSymbol(String),
}

/// True for the injected symbol spellings `<k3>` / `<v0>`.
pub fn is_symbol_token(s: &str) -> bool {
    let b = s.as_bytes();
    if b.len() < 4 || b[0] != b'<' || b[b.len() - 1] != b'>' {
        return false;
    }
    (b[1] == b'k' || b[1] == b'v') && b[2..b.len() - 1].iter().all(|c| c.is_ascii_digit())
}

impl Term {
    pub fn predicate(name: &str, args: Vec<Term>) -> Term {
        Term::Predicate {
            name: name.to_string(),
            args,
        }
    }

    /// Depth of the tree (a leaf has depth 1).
    pub fn depth(&self) -> usize {
        match self {
            Term::Variable(_) | Term::Constant(_) => 1,
            Term::Predicate { args, .. } => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
            Term::Conjunction(ts) => 1 + ts.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    /// All variables in order of first appearance.
    pub fn variables(&self) -> Vec<char> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<char>) {
        match self {
            Term::Variable(v) => {
                if !out.contains(v) {
                    out.push(*v);
                }
            }
            Term::Constant(_) => {}
            Term::Predicate { args, .. } => args.iter().for_each(|t| t.collect_vars(out)),
            Term::Conjunction(ts) => ts.iter().for_each(|t| t.collect_vars(out)),
        }
    }

    /// Rename variables according to `map`; variables not in the map are kept.
    pub fn rename_vars(&self, map: &BTreeMap<char, char>) -> Term {
        match self {
            Term::Variable(v) => Term::Variable(*map.get(v).unwrap_or(v)),
            Term::Constant(c) => Term::Constant(c.clone()),
            Term::Predicate { name, args } => Term::Predicate {
                name: name.clone(),
                args: args.iter().map(|t| t.rename_vars(map)).collect(),
            },
            Term::Conjunction(ts) => {
                Term::Conjunction(ts.iter().map(|t| t.rename_vars(map)).collect())
            }
        }
    }
}

impl LogicForm {
    pub fn root_predicate(&self) -> Option<&str> {
        match &self.root {
            Term::Predicate { name, .. } => Some(name),
            _ => None,
        }
    }
}

impl fmt::Display for LogicForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", render(self))
    }
}

/// Parse a logic-form string into its unique AST.
pub fn parse(text: &str) -> Result<LogicForm, ParseError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(ParseError::Empty);
    }
    let mut p = Parser {
        src: trimmed.as_bytes(),
        pos: 0,
    };
    let root = p.term()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(ParseError::Unexpected {
            offset: p.pos,
            expected: "end of input",
            found: p.rest_preview(),
        });
    }
    Ok(LogicForm { root })
}

/// Render to the canonical surface string: `,`-separated arguments, no
/// spaces except the ones inside multi-word constants.
pub fn render(lf: &LogicForm) -> String {
    let mut out = String::new();
    render_term(&lf.root, &mut out);
    out
}

fn render_term(t: &Term, out: &mut String) {
    match t {
        Term::Variable(v) => out.push(*v),
        Term::Constant(c) => out.push_str(c),
        Term::Predicate { name, args } => {
            out.push_str(name);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                render_term(a, out);
            }
            out.push(')');
        }
        Term::Conjunction(ts) => {
            out.push('(');
            for (i, a) in ts.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                render_term(a, out);
            }
            out.push(')');
        }
    }
}

/// Collapse whitespace runs and drop spaces adjacent to `(`, `)` and `,`
/// (spaces inside constants survive). Used to compare surface strings that
/// differ only in layout.
pub fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for ch in text.trim().chars() {
        if ch.is_whitespace() {
            pending_space = !out.is_empty();
            continue;
        }
        if pending_space {
            let boundary = matches!(ch, '(' | ')' | ',')
                || matches!(out.chars().last(), Some('(') | Some(')') | Some(','));
            if !boundary {
                out.push(' ');
            }
            pending_space = false;
        }
        out.push(ch);
    }
    out
}

/// Case-insensitive equality of two rendered forms (constants in the corpora
/// are inconsistently capitalized).
pub fn forms_equal(a: &str, b: &str) -> bool {
    normalize(a).to_lowercase() == normalize(b).to_lowercase()
}

/// Replace every predicate or constant whose name is a symbol token with its
/// mapped phrase. Arity and depth are never altered.
pub fn substitute(
    lf: &LogicForm,
    lookup: &dyn Fn(&str) -> Option<String>,
) -> Result<LogicForm, SubstituteError> {
    fn walk(t: &Term, lookup: &dyn Fn(&str) -> Option<String>) -> Result<Term, SubstituteError> {
        Ok(match t {
            Term::Variable(v) => Term::Variable(*v),
            Term::Constant(c) => {
                if is_symbol_token(c) {
                    match lookup(c) {
                        Some(phrase) => Term::Constant(phrase),
                        None => return Err(SubstituteError::UnknownSymbol(c.clone())),
                    }
                } else {
                    Term::Constant(c.clone())
                }
            }
            Term::Predicate { name, args } => {
                let name = if is_symbol_token(name) {
                    match lookup(name) {
                        Some(phrase) => phrase,
                        None => return Err(SubstituteError::UnknownSymbol(name.clone())),
                    }
                } else {
                    name.clone()
                };
                let args = args
                    .iter()
                    .map(|a| walk(a, lookup))
                    .collect::<Result<_, _>>()?;
                Term::Predicate { name, args }
            }
            Term::Conjunction(ts) => Term::Conjunction(
                ts.iter()
                    .map(|a| walk(a, lookup))
                    .collect::<Result<_, _>>()?,
            ),
        })
    }
    Ok(LogicForm {
        root: walk(&lf.root, lookup)?,
    })
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn rest_preview(&self) -> String {
        let end = (self.pos + 12).min(self.src.len());
        String::from_utf8_lossy(&self.src[self.pos..end]).into_owned()
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        self.skip_ws();
        match self.peek() {
            None => Err(ParseError::Unexpected {
                offset: self.pos,
                expected: "a term",
                found: String::new(),
            }),
            Some(b'(') => self.conjunction(),
            Some(_) => self.atom_or_application(),
        }
    }

    fn conjunction(&mut self) -> Result<Term, ParseError> {
        let open = self.pos;
        self.pos += 1; // consume '('
        let terms = self.term_list(open)?;
        if terms.is_empty() {
            return Err(ParseError::EmptyArgs { offset: open });
        }
        Ok(Term::Conjunction(terms))
    }

    /// Comma-separated terms up to the matching ')'.
    fn term_list(&mut self, open: usize) -> Result<Vec<Term>, ParseError> {
        let mut terms = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b')') if terms.is_empty() => {
                    self.pos += 1;
                    return Ok(terms);
                }
                None => return Err(ParseError::Unbalanced { offset: open }),
                _ => {}
            }
            terms.push(self.term()?);
            self.skip_ws();
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b')') => {
                    self.pos += 1;
                    return Ok(terms);
                }
                None => return Err(ParseError::Unbalanced { offset: open }),
                _ => {
                    return Err(ParseError::Unexpected {
                        offset: self.pos,
                        expected: "',' or ')'",
                        found: self.rest_preview(),
                    })
                }
            }
        }
    }

    /// A variable, a predicate application, or a bare constant run.
    fn atom_or_application(&mut self) -> Result<Term, ParseError> {
        let start = self.pos;
        // Scan the constant-run: everything until a structural character.
        let mut end = self.pos;
        while end < self.src.len() && !matches!(self.src[end], b'(' | b')' | b',') {
            end += 1;
        }
        let run = String::from_utf8_lossy(&self.src[start..end]).into_owned();
        let run_trimmed = run.trim_end();

        if end < self.src.len() && self.src[end] == b'(' {
            // Application: the run is the predicate name.
            let name = run_trimmed.to_string();
            if name.is_empty() || !valid_predicate_name(&name) {
                return Err(ParseError::Unexpected {
                    offset: start,
                    expected: "predicate name",
                    found: name,
                });
            }
            self.pos = end + 1;
            let args = self.term_list(end)?;
            if args.is_empty() {
                return Err(ParseError::EmptyArgs { offset: end });
            }
            return Ok(Term::Predicate { name, args });
        }

        // Atom: single uppercase letter is a variable, anything else a constant.
        if run_trimmed.is_empty() {
            return Err(ParseError::Unexpected {
                offset: start,
                expected: "a term",
                found: self.rest_preview(),
            });
        }
        self.pos = start + run_trimmed.len();
        let mut chars = run_trimmed.chars();
        let first = chars.next().unwrap();
        if chars.next().is_none() && first.is_ascii_uppercase() {
            return Ok(Term::Variable(first));
        }
        Ok(Term::Constant(run_trimmed.to_string()))
    }
}

fn valid_predicate_name(name: &str) -> bool {
    if is_symbol_token(name) {
        return true;
    }
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pred(name: &str, args: Vec<Term>) -> Term {
        Term::predicate(name, args)
    }

    #[test]
    fn parses_single_predicate() {
        let lf = parse("state(B)").unwrap();
        assert_eq!(lf.root, pred("state", vec![Term::Variable('B')]));
    }

    #[test]
    fn parses_multiword_constant_inside_constructor() {
        let lf = parse("answer(A,population(B,A),const(B,cityid(San Antonio)))").unwrap();
        let Term::Predicate { name, args } = &lf.root else {
            panic!("root must be a predicate");
        };
        assert_eq!(name, "answer");
        assert_eq!(args.len(), 3);
        let Term::Predicate { name, args } = &args[2] else {
            panic!()
        };
        assert_eq!(name, "const");
        let Term::Predicate { name, args } = &args[1] else {
            panic!()
        };
        assert_eq!(name, "cityid");
        assert_eq!(args[0], Term::Constant("San Antonio".into()));
    }

    #[test]
    fn parses_conjunction_of_three_goals() {
        let s = "answer(A,count(B,(state(B),const(C,riverid(Mississippi)),traverse(C,B)),A))";
        let lf = parse(s).unwrap();
        let Term::Predicate { args, .. } = &lf.root else {
            panic!()
        };
        let Term::Predicate { name, args } = &args[1] else {
            panic!()
        };
        assert_eq!(name, "count");
        let Term::Conjunction(goals) = &args[1] else {
            panic!("count body must be a conjunction")
        };
        assert_eq!(goals.len(), 3);
    }

    #[test]
    fn render_is_canonical() {
        let lf = LogicForm {
            root: pred("state", vec![Term::Variable('B')]),
        };
        assert_eq!(render(&lf), "state(B)");
        let s = "answer(A,population(B,A),const(B,cityid(San Antonio)))";
        assert_eq!(render(&parse(s).unwrap()), s);
    }

    #[test]
    fn round_trips_spaced_variant() {
        let spaced = "answer(A, population(B,A), const(B,cityid(San Antonio)))";
        let lf = parse(spaced).unwrap();
        assert_eq!(render(&lf), normalize(spaced));
    }

    #[test]
    fn rejects_malformed_inputs() {
        assert!(matches!(parse(""), Err(ParseError::Empty)));
        assert!(matches!(
            parse("state(B"),
            Err(ParseError::Unbalanced { .. })
        ));
        assert!(parse("state(B))").is_err());
        assert!(matches!(parse("state()"), Err(ParseError::EmptyArgs { .. })));
        assert!(parse("state(B),").is_err());
    }

    #[test]
    fn substitute_recovers_fig_style_form() {
        let lf = parse("answer(A,<k0>(B,A),const(B,<k1>(<v0>)))").unwrap();
        let table: Vec<(&str, &str)> = vec![
            ("<k0>", "population"),
            ("<k1>", "cityid"),
            ("<v0>", "San Antonio"),
        ];
        let lookup = |sym: &str| {
            table
                .iter()
                .find(|(s, _)| *s == sym)
                .map(|(_, p)| p.to_string())
        };
        let out = substitute(&lf, &lookup).unwrap();
        assert_eq!(
            render(&out),
            "answer(A,population(B,A),const(B,cityid(San Antonio)))"
        );
    }

    #[test]
    fn substitute_is_identity_without_symbols() {
        let s = "answer(A,largest(B,(state(A),population(A,B))))";
        let lf = parse(s).unwrap();
        let out = substitute(&lf, &|_| None).unwrap();
        assert_eq!(render(&out), s);
    }

    #[test]
    fn substitute_single_constructor() {
        let lf = parse("<k2>(<v0>)").unwrap();
        let lookup = |sym: &str| match sym {
            "<k2>" => Some("riverid".to_string()),
            "<v0>" => Some("Mississippi".to_string()),
            _ => None,
        };
        assert_eq!(render(&substitute(&lf, &lookup).unwrap()), "riverid(Mississippi)");
    }

    #[test]
    fn substitute_reports_unknown_symbol() {
        let lf = parse("<k0>(A)").unwrap();
        assert_eq!(
            substitute(&lf, &|_| None),
            Err(SubstituteError::UnknownSymbol("<k0>".into()))
        );
    }

    #[test]
    fn symbol_token_shapes() {
        assert!(is_symbol_token("<k0>"));
        assert!(is_symbol_token("<v12>"));
        assert!(!is_symbol_token("<eok>"));
        assert!(!is_symbol_token("<k>"));
        assert!(!is_symbol_token("k0"));
    }
}
