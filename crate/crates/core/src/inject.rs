//! Symbol injection and recovery.
//!
//! Matched keyword phrases are enclosed in `<k i> ... <eok>`, value phrases
//! in `<v i> ... <eov>`, and each value's resolved type constructor is fed
//! into the question right before the value enclosure. The symbol table maps
//! every emitted symbol back to the database entry it stands for, which is
//! all the recovery step needs.

use thiserror::Error;

use crate::geo::GeoDatabase;
use crate::logic_form::{self, LogicForm, Term};
use crate::mapper::{AmbiguousValue, MatchKind, MatchPair};

pub const EOK: &str = "<eok>";
pub const EOV: &str = "<eov>";
/// Marker enclosing the phrase a comprehension record asks about.
pub const MARKER: &str = "<@>";

pub fn k_symbol(i: usize) -> String {
    format!("<k{i}>")
}

pub fn v_symbol(i: usize) -> String {
    format!("<v{i}>")
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InjectError {
    #[error("overlapping spans at tokens {0}..{1}")]
    OverlappingSpans(usize, usize),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RecoverError {
    #[error("no mapping for symbol {0}")]
    UnknownSymbol(String),
    #[error("output does not parse: {0}")]
    Unparseable(String),
}

/// Ordered symbol-to-phrase associations, dense per symbol class.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolTable {
    entries: Vec<(String, String)>,
}

impl SymbolTable {
    pub fn add(&mut self, sym: String, phrase: String) {
        debug_assert!(self.get(&sym).is_none(), "symbol {sym} emitted twice");
        self.entries.push((sym, phrase));
    }

    pub fn get(&self, sym: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(s, _)| s == sym)
            .map(|(_, p)| p.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(s, p)| (s.as_str(), p.as_str()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// The symbol-annotated question.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InjectedQuestion {
    pub tokens: Vec<String>,
}

impl InjectedQuestion {
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Resolves the type of an ambiguous value span in a question. Implemented
/// by the comprehension model, by a gold-form stub in tests, and by the
/// seeded random guesser of the no-comprehension ablation.
pub trait TypeResolver {
    /// `types` is non-empty and sorted; the result must be one of them.
    fn resolve(&self, question: &[String], value: &AmbiguousValue, types: &[String]) -> String;
}

/// Picks the single candidate; panics on genuine ambiguity. Useful where
/// ambiguity is known to be impossible.
pub struct SingleTypeResolver;

impl TypeResolver for SingleTypeResolver {
    fn resolve(&self, _q: &[String], v: &AmbiguousValue, types: &[String]) -> String {
        assert!(
            types.len() == 1,
            "value {:?} is ambiguous ({:?}) but no resolver is configured",
            v.phrase,
            types
        );
        types[0].clone()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct InjectOptions {
    /// Insert the resolved type constructor before each value enclosure.
    pub type_feeding: bool,
}

impl Default for InjectOptions {
    fn default() -> Self {
        InjectOptions { type_feeding: true }
    }
}

/// Enclose matched phrases in symbols, feed value types, and record the
/// symbol table. Pairs must be overlap-free and `values` must describe the
/// value-kind pairs.
pub fn spatial_injection(
    db: &GeoDatabase,
    tokens: &[String],
    pairs: &[MatchPair],
    values: &[AmbiguousValue],
    resolver: &dyn TypeResolver,
    opts: InjectOptions,
) -> Result<(InjectedQuestion, SymbolTable), InjectError> {
    let mut spans: Vec<&MatchPair> = pairs.iter().collect();
    spans.sort_by_key(|p| (p.start, p.end));
    for w in spans.windows(2) {
        if w[1].start < w[0].end {
            return Err(InjectError::OverlappingSpans(w[1].start, w[0].end));
        }
    }

    let mut out = Vec::new();
    let mut s2p = SymbolTable::default();
    let mut next_k = 0usize;
    let mut next_v = 0usize;
    let mut pos = 0usize;

    for pair in spans {
        while pos < pair.start {
            out.push(tokens[pos].to_lowercase());
            pos += 1;
        }
        match pair.kind {
            MatchKind::Keyword => {
                let sym = k_symbol(next_k);
                next_k += 1;
                out.push(sym.clone());
                out.extend(tokens[pair.start..pair.end].iter().cloned());
                out.push(EOK.to_string());
                s2p.add(sym, pair.entity.clone());
            }
            MatchKind::Value => {
                let value = values
                    .iter()
                    .find(|v| v.start == pair.start && v.end == pair.end);
                let table = value.and_then(|value| match &value.resolved_type {
                    Some(t) => Some(t.clone()),
                    None if value.types.len() == 1 => Some(value.types[0].clone()),
                    None if !value.types.is_empty() => {
                        Some(resolver.resolve(tokens, value, &value.types))
                    }
                    None => None,
                });
                if opts.type_feeding {
                    if let Some(ctor) = table.as_deref().and_then(|t| db.ctor_for_table(t)) {
                        let sym = k_symbol(next_k);
                        next_k += 1;
                        out.push(sym.clone());
                        out.push(ctor.to_string());
                        out.push(EOK.to_string());
                        s2p.add(sym, ctor.to_string());
                    }
                }
                // The recovery spelling follows the resolved table, so a
                // value shared across tables keeps the right casing.
                let display = table
                    .as_deref()
                    .and_then(|t| db.canonical_value_in(t, &pair.entity))
                    .unwrap_or(&pair.entity)
                    .to_string();
                let sym = v_symbol(next_v);
                next_v += 1;
                out.push(sym.clone());
                out.extend(tokens[pair.start..pair.end].iter().cloned());
                out.push(EOV.to_string());
                s2p.add(sym, display);
            }
        }
        pos = pair.end;
    }
    while pos < tokens.len() {
        out.push(tokens[pos].to_lowercase());
        pos += 1;
    }

    Ok((InjectedQuestion { tokens: out }, s2p))
}

/// Drop delimiter tokens and type-feed enclosures, leaving the original
/// question tokens (enclosed phrases keep their case; the rest was
/// lowercased during injection).
pub fn strip_injected(q: &InjectedQuestion, db: &GeoDatabase) -> Vec<String> {
    let mut out = Vec::new();
    let toks = &q.tokens;
    let mut i = 0;
    while i < toks.len() {
        let t = &toks[i];
        if logic_form::is_symbol_token(t) {
            // A type-feed enclosure holds exactly one constructor token.
            if t.starts_with("<k")
                && i + 2 < toks.len()
                && toks[i + 2] == EOK
                && db.is_ctor(&toks[i + 1])
            {
                i += 3;
                continue;
            }
            i += 1;
            continue;
        }
        if t == EOK || t == EOV || t == MARKER {
            i += 1;
            continue;
        }
        out.push(t.clone());
        i += 1;
    }
    out
}

/// Replace every symbol in the translated output with its original phrase.
pub fn recover(l_prime: &str, s2p: &SymbolTable) -> Result<String, RecoverError> {
    let lf = logic_form::parse(l_prime)
        .map_err(|e| RecoverError::Unparseable(e.to_string()))?;
    let recovered = substitute_symbols(&lf, s2p)?;
    Ok(logic_form::render(&recovered))
}

/// AST-level symbol substitution.
pub fn substitute_symbols(
    lf: &LogicForm,
    s2p: &SymbolTable,
) -> Result<LogicForm, RecoverError> {
    logic_form::substitute(lf, &|sym| s2p.get(sym).map(str::to_string)).map_err(
        |logic_form::SubstituteError::UnknownSymbol(s)| RecoverError::UnknownSymbol(s),
    )
}

/// The inverse of recovery: rewrite a gold form into its symbolic version by
/// replacing predicates named after `<k i>` entries and constants matching
/// `<v i>` entries. Phrases without symbols stay literal.
pub fn symbolic_form(gold: &LogicForm, s2p: &SymbolTable) -> LogicForm {
    fn keyword_symbol(s2p: &SymbolTable, name: &str) -> Option<String> {
        s2p.iter()
            .find(|(sym, phrase)| sym.starts_with("<k") && *phrase == name)
            .map(|(sym, _)| sym.to_string())
    }
    fn value_symbol(s2p: &SymbolTable, text: &str) -> Option<String> {
        s2p.iter()
            .find(|(sym, phrase)| {
                sym.starts_with("<v") && phrase.eq_ignore_ascii_case(text)
            })
            .map(|(sym, _)| sym.to_string())
    }
    fn walk(t: &Term, s2p: &SymbolTable) -> Term {
        match t {
            Term::Variable(v) => Term::Variable(*v),
            Term::Constant(c) => match value_symbol(s2p, c) {
                Some(sym) => Term::Constant(sym),
                None => Term::Constant(c.clone()),
            },
            Term::Predicate { name, args } => Term::Predicate {
                name: keyword_symbol(s2p, name).unwrap_or_else(|| name.clone()),
                args: args.iter().map(|a| walk(a, s2p)).collect(),
            },
            Term::Conjunction(ts) => {
                Term::Conjunction(ts.iter().map(|a| walk(a, s2p)).collect())
            }
        }
    }
    LogicForm {
        root: walk(&gold.root, s2p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::EmbeddingTable;
    use crate::geo::test_fixtures::toy_db;
    use crate::mapper::{map_question, MapperConfig};
    use crate::text::{eq_tokens_ci, tokenize};
    use std::collections::HashMap;

    struct Fixed(&'static str);
    impl TypeResolver for Fixed {
        fn resolve(&self, _q: &[String], _v: &AmbiguousValue, _t: &[String]) -> String {
            self.0.to_string()
        }
    }

    fn cfg() -> MapperConfig {
        MapperConfig {
            stop_words: ["what", "is", "the", "of", "does", "do", "in", "a", "how", "many",
                "have", "?"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            lexicon: vec![("how many".into(), "count".into())],
            ..MapperConfig::default()
        }
    }

    fn emb() -> EmbeddingTable {
        EmbeddingTable::from_vectors(48, HashMap::new())
    }

    #[test]
    fn injects_fig_style_question() {
        let dir = tempfile::tempdir().unwrap();
        let db = toy_db(dir.path());
        let q = tokenize("What is the population of Jackson ?");
        let (pairs, values) = map_question(&db, &q, &emb(), &cfg());
        let (inj, s2p) = spatial_injection(
            &db,
            &q,
            &pairs,
            &values,
            &Fixed("city"),
            InjectOptions::default(),
        )
        .unwrap();
        assert_eq!(
            inj.text(),
            "what is the <k0> population <eok> of <k1> cityid <eok> <v0> Jackson <eov> ?"
        );
        assert_eq!(s2p.get("<k0>"), Some("population"));
        assert_eq!(s2p.get("<k1>"), Some("cityid"));
        assert_eq!(s2p.get("<v0>"), Some("Jackson"));
    }

    #[test]
    fn empty_matches_keep_question_lowercased_only() {
        let dir = tempfile::tempdir().unwrap();
        let db = toy_db(dir.path());
        let q = tokenize("Hello there ?");
        let (inj, s2p) =
            spatial_injection(&db, &q, &[], &[], &SingleTypeResolver, InjectOptions::default())
                .unwrap();
        assert_eq!(inj.text(), "hello there ?");
        assert!(s2p.is_empty());
    }

    #[test]
    fn strip_restores_question_tokens() {
        let dir = tempfile::tempdir().unwrap();
        let db = toy_db(dir.path());
        let q = tokenize("How many rivers does Mississippi have ?");
        let (pairs, values) = map_question(&db, &q, &emb(), &cfg());
        let (inj, _) = spatial_injection(
            &db,
            &q,
            &pairs,
            &values,
            &Fixed("state"),
            InjectOptions::default(),
        )
        .unwrap();
        let stripped = strip_injected(&inj, &db);
        assert!(eq_tokens_ci(&stripped, &q), "{stripped:?} vs {q:?}");
    }

    #[test]
    fn recover_substitutes_all_symbols() {
        let mut s2p = SymbolTable::default();
        s2p.add("<k0>".into(), "population".into());
        s2p.add("<k1>".into(), "cityid".into());
        s2p.add("<v0>".into(), "San Antonio".into());
        let out = recover("answer(A,<k0>(B,A),const(B,<k1>(<v0>)))", &s2p).unwrap();
        assert_eq!(out, "answer(A,population(B,A),const(B,cityid(San Antonio)))");
        assert_eq!(recover("state(B)", &s2p).unwrap(), "state(B)");
        assert!(matches!(
            recover("answer(A,<k7>(A))", &s2p),
            Err(RecoverError::UnknownSymbol(_))
        ));
    }

    #[test]
    fn symbolic_then_recover_is_identity() {
        let mut s2p = SymbolTable::default();
        s2p.add("<k0>".into(), "count".into());
        s2p.add("<k1>".into(), "river".into());
        s2p.add("<k2>".into(), "stateid".into());
        s2p.add("<v0>".into(), "Mississippi".into());
        let gold = "answer(A,count(B,(river(B),const(C,stateid(Mississippi)),loc(B,C)),A))";
        let sym = symbolic_form(&crate::logic_form::parse(gold).unwrap(), &s2p);
        assert_eq!(
            crate::logic_form::render(&sym),
            "answer(A,<k0>(B,(<k1>(B),const(C,<k2>(<v0>)),loc(B,C)),A))"
        );
        let back = recover(&crate::logic_form::render(&sym), &s2p).unwrap();
        assert_eq!(back, gold);
    }

    #[test]
    fn overlapping_spans_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let db = toy_db(dir.path());
        let mk = |start, end| crate::mapper::MatchPair {
            start,
            end,
            phrase: "x".into(),
            entity: "state".into(),
            kind: crate::mapper::MatchKind::Keyword,
            method: crate::mapper::MatchMethod::Exact,
            distance: 0.0,
        };
        let q = tokenize("a b c ?");
        let err = spatial_injection(
            &db,
            &q,
            &[mk(0, 2), mk(1, 3)],
            &[],
            &SingleTypeResolver,
            InjectOptions::default(),
        )
        .unwrap_err();
        assert_eq!(err, InjectError::OverlappingSpans(1, 2));
    }
}
