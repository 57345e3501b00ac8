//! Detection of keywords and data elements mentioned in a question.
//!
//! Every k-gram of the question, longest first, is compared against the
//! database vocabulary three ways: exact string match, semantic distance in
//! embedding space (keywords only), and edit distance. Value matches that
//! occur in several tables are collected as ambiguous, to be resolved by the
//! comprehension model before injection.

use std::collections::BTreeSet;
use std::path::Path;

use crate::embed::{edit_distance, EmbeddingTable};
use crate::geo::GeoDatabase;
use crate::text::is_punct;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MatchKind {
    Value,
    Keyword,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MatchMethod {
    Exact,
    Edit,
    Semantic,
}

/// A phrase-to-entity match: span `[start, end)` of the question mapped to a
/// database entry.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchPair {
    pub start: usize,
    pub end: usize,
    /// Surface text from the question.
    pub phrase: String,
    /// The matched database entry, in its canonical spelling.
    pub entity: String,
    pub kind: MatchKind,
    pub method: MatchMethod,
    /// Edit or semantic distance; 0 for exact and lexicon matches.
    pub distance: f64,
}

/// A value match together with every table it occurs in.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguousValue {
    pub start: usize,
    pub end: usize,
    pub phrase: String,
    /// Canonical value spelling.
    pub entity: String,
    /// Candidate tables, sorted.
    pub types: Vec<String>,
    pub resolved_type: Option<String>,
}

#[derive(Debug, Clone)]
pub struct MapperConfig {
    /// Longest n-gram considered.
    pub max_ngram: usize,
    pub tau_sem: f64,
    pub tau_ed: usize,
    pub stop_words: BTreeSet<String>,
    /// Phrase -> keyword mappings that embeddings cannot cover
    /// ("how many" -> count).
    pub lexicon: Vec<(String, String)>,
}

impl Default for MapperConfig {
    fn default() -> Self {
        MapperConfig {
            max_ngram: 4,
            tau_sem: 0.368,
            tau_ed: 2,
            stop_words: BTreeSet::new(),
            lexicon: Vec::new(),
        }
    }
}

impl MapperConfig {
    pub fn load_stopwords(&mut self, path: &Path) -> std::io::Result<()> {
        let text = std::fs::read_to_string(path)?;
        self.stop_words = text
            .lines()
            .map(|l| l.trim().to_lowercase())
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect();
        Ok(())
    }

    /// Tab-separated `phrase<TAB>entity` pairs.
    pub fn load_lexicon(&mut self, path: &Path) -> std::io::Result<()> {
        let text = std::fs::read_to_string(path)?;
        self.lexicon = text
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
            .filter_map(|l| {
                l.split_once('\t')
                    .map(|(p, e)| (p.trim().to_lowercase(), e.trim().to_string()))
            })
            .collect();
        Ok(())
    }

    fn lexicon_entity(&self, phrase: &str) -> Option<&str> {
        self.lexicon
            .iter()
            .find(|(p, _)| p == phrase)
            .map(|(_, e)| e.as_str())
    }
}

/// Run the k-gram match loop and collect matching pairs and ambiguous values.
pub fn spatial_mapper(
    db: &GeoDatabase,
    tokens: &[String],
    emb: &EmbeddingTable,
    cfg: &MapperConfig,
) -> (Vec<MatchPair>, Vec<AmbiguousValue>) {
    let mut pairs = Vec::new();
    let lowered: Vec<String> = tokens.iter().map(|t| t.to_lowercase()).collect();

    // Keyword embeddings are reused across spans.
    let keywords: Vec<(&str, Vec<f64>)> = db
        .keyword_set
        .iter()
        .map(|k| {
            let toks: Vec<&str> = k.split_whitespace().collect();
            (k.as_str(), emb.embed_phrase(&toks))
        })
        .collect();

    for k in (1..=cfg.max_ngram.min(tokens.len())).rev() {
        for start in 0..=(tokens.len() - k) {
            let end = start + k;
            let span = &tokens[start..end];
            if span.iter().any(|t| is_punct(t)) {
                continue;
            }
            let phrase = span.join(" ");
            let phrase_low = lowered[start..end].join(" ");

            // Human-curated synonym mappings have priority over everything,
            // including the stop-word filter.
            if let Some(entity) = cfg.lexicon_entity(&phrase_low) {
                pairs.push(MatchPair {
                    start,
                    end,
                    phrase: phrase.clone(),
                    entity: entity.to_string(),
                    kind: MatchKind::Keyword,
                    method: MatchMethod::Exact,
                    distance: 0.0,
                });
                continue;
            }
            let stop_count = lowered[start..end]
                .iter()
                .filter(|t| cfg.stop_words.contains(*t))
                .count();
            if stop_count == k {
                continue;
            }
            // Averaging dilutes longer spans toward whichever content word
            // dominates, which floods the match set, so semantic matching is
            // restricted to single content words; multi-token synonym
            // phrases belong in the lexicon.
            let semantic_ok = stop_count == 0 && k == 1;

            // Values: exact, then edit distance.
            if db.entity_index.contains_key(&phrase_low) {
                pairs.push(MatchPair {
                    start,
                    end,
                    phrase: phrase.clone(),
                    entity: db
                        .canonical_value(&phrase_low)
                        .unwrap_or(&phrase)
                        .to_string(),
                    kind: MatchKind::Value,
                    method: MatchMethod::Exact,
                    distance: 0.0,
                });
            } else if cfg.tau_ed > 1 {
                let mut best: Option<(usize, &str)> = None;
                for value in db.entity_index.keys() {
                    if value.len().abs_diff(phrase_low.len()) >= cfg.tau_ed {
                        continue;
                    }
                    let d = edit_distance(&phrase_low, value);
                    if d > 0 && d < cfg.tau_ed && best.map_or(true, |(bd, _)| d < bd) {
                        best = Some((d, value));
                    }
                }
                if let Some((d, value)) = best {
                    pairs.push(MatchPair {
                        start,
                        end,
                        phrase: phrase.clone(),
                        entity: db.canonical_value(value).unwrap_or(value).to_string(),
                        kind: MatchKind::Value,
                        method: MatchMethod::Edit,
                        distance: d as f64,
                    });
                }
            }

            // Keywords: exact, edit, then semantic.
            let span_refs: Vec<&str> = lowered[start..end].iter().map(|s| s.as_str()).collect();
            let span_vec = emb.embed_phrase(&span_refs);
            for (kw, kw_vec) in &keywords {
                if phrase_low == *kw {
                    pairs.push(MatchPair {
                        start,
                        end,
                        phrase: phrase.clone(),
                        entity: kw.to_string(),
                        kind: MatchKind::Keyword,
                        method: MatchMethod::Exact,
                        distance: 0.0,
                    });
                    continue;
                }
                let d = edit_distance(&phrase_low, kw);
                if d < cfg.tau_ed {
                    pairs.push(MatchPair {
                        start,
                        end,
                        phrase: phrase.clone(),
                        entity: kw.to_string(),
                        kind: MatchKind::Keyword,
                        method: MatchMethod::Edit,
                        distance: d as f64,
                    });
                    continue;
                }
                if !semantic_ok {
                    continue;
                }
                if let Some(sd) = cosine_distance(&span_vec, kw_vec) {
                    if sd < cfg.tau_sem {
                        pairs.push(MatchPair {
                            start,
                            end,
                            phrase: phrase.clone(),
                            entity: kw.to_string(),
                            kind: MatchKind::Keyword,
                            method: MatchMethod::Semantic,
                            distance: sd,
                        });
                    }
                }
            }
        }
    }

    let values = collect_ambiguous(db, &pairs);
    (pairs, values)
}

fn cosine_distance(a: &[f64], b: &[f64]) -> Option<f64> {
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Some(1.0 - dot / (na * nb))
}

/// One entry per value-kind pair, with all tables the value belongs to.
pub fn collect_ambiguous(db: &GeoDatabase, pairs: &[MatchPair]) -> Vec<AmbiguousValue> {
    let mut out: Vec<AmbiguousValue> = Vec::new();
    for p in pairs {
        if p.kind != MatchKind::Value {
            continue;
        }
        if out.iter().any(|v| v.start == p.start && v.end == p.end) {
            continue;
        }
        let types = db.value_types(&p.entity);
        if types.is_empty() {
            continue;
        }
        out.push(AmbiguousValue {
            start: p.start,
            end: p.end,
            phrase: p.phrase.clone(),
            entity: p.entity.clone(),
            types,
            resolved_type: None,
        });
    }
    out
}

/// Longest-span-first, leftmost-first selection of non-overlapping matches.
/// Equal spans prefer exact over edit over semantic, then smaller distance,
/// then values over keywords.
pub fn resolve_overlaps(pairs: &[MatchPair]) -> Vec<MatchPair> {
    let mut sorted: Vec<&MatchPair> = pairs.iter().collect();
    sorted.sort_by(|a, b| {
        (b.end - b.start)
            .cmp(&(a.end - a.start))
            .then(a.start.cmp(&b.start))
            .then(a.method.cmp(&b.method))
            .then(a.distance.total_cmp(&b.distance))
            .then(a.kind.cmp(&b.kind))
    });
    let mut kept: Vec<MatchPair> = Vec::new();
    for p in sorted {
        if kept
            .iter()
            .all(|q| p.end <= q.start || q.end <= p.start)
        {
            kept.push(p.clone());
        }
    }
    kept.sort_by_key(|p| (p.start, p.end));
    kept
}

/// Mapper + overlap resolution + ambiguity collection in one call.
pub fn map_question(
    db: &GeoDatabase,
    tokens: &[String],
    emb: &EmbeddingTable,
    cfg: &MapperConfig,
) -> (Vec<MatchPair>, Vec<AmbiguousValue>) {
    let (pairs, _) = spatial_mapper(db, tokens, emb, cfg);
    let kept = resolve_overlaps(&pairs);
    let values = collect_ambiguous(db, &kept);
    (kept, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::EmbeddingTable;
    use crate::geo::test_fixtures::toy_db;
    use crate::text::tokenize;
    use std::collections::HashMap;

    fn cfg() -> MapperConfig {
        MapperConfig {
            stop_words: ["what", "is", "the", "of", "does", "do", "in", "a", "an", "how",
                "many", "where", "have", "?"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            lexicon: vec![("how many".into(), "count".into())],
            ..MapperConfig::default()
        }
    }

    fn emb() -> EmbeddingTable {
        // "spot" sits next to "area" to exercise the semantic route. A wide
        // dimension keeps the hash vectors of unknown tokens near-orthogonal,
        // as with real 300-d embeddings.
        let dim = 48;
        let basis = |i: usize, scale: f64| {
            let mut v = vec![0.0; dim];
            v[i] = scale;
            v
        };
        let mut v: HashMap<String, Vec<f64>> = HashMap::new();
        v.insert("area".into(), basis(0, 1.0));
        let mut spot = basis(0, 0.95);
        spot[1] = 0.05;
        v.insert("spot".into(), spot);
        v.insert("population".into(), basis(1, 1.0));
        EmbeddingTable::from_vectors(dim, v)
    }

    #[test]
    fn finds_values_keywords_and_ambiguity() {
        let dir = tempfile::tempdir().unwrap();
        let db = toy_db(dir.path());
        let q = tokenize("How many rivers does Mississippi have ?");
        let (pairs, values) = map_question(&db, &q, &emb(), &cfg());
        assert!(pairs.iter().any(|p| p.entity == "count" && p.start == 0));
        assert!(pairs
            .iter()
            .any(|p| p.entity == "river" && p.method == MatchMethod::Edit));
        let miss = pairs
            .iter()
            .find(|p| p.entity == "Mississippi")
            .expect("value match");
        assert_eq!(miss.kind, MatchKind::Value);
        assert_eq!(miss.method, MatchMethod::Exact);
        let v = values.iter().find(|v| v.phrase == "Mississippi").unwrap();
        assert_eq!(v.types, vec!["river".to_string(), "state".to_string()]);
    }

    #[test]
    fn semantic_route_matches_keyword() {
        let dir = tempfile::tempdir().unwrap();
        let db = toy_db(dir.path());
        let q = tokenize("what is the spot ?");
        let (pairs, _) = map_question(&db, &q, &emb(), &cfg());
        let m = pairs.iter().find(|p| p.phrase == "spot").expect("match");
        assert_eq!(m.entity, "area");
        assert_eq!(m.method, MatchMethod::Semantic);
    }

    #[test]
    fn unrelated_question_matches_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let db = toy_db(dir.path());
        let q = tokenize("hello there ?");
        let (pairs, values) = map_question(&db, &q, &emb(), &cfg());
        assert!(pairs.is_empty());
        assert!(values.is_empty());
    }

    #[test]
    fn overlap_keeps_longest_then_exact() {
        let mk = |start, end, method, distance, entity: &str| MatchPair {
            start,
            end,
            phrase: format!("p{start}{end}"),
            entity: entity.into(),
            kind: MatchKind::Value,
            method,
            distance,
        };
        let pairs = vec![
            mk(0, 2, MatchMethod::Edit, 1.0, "new york"),
            mk(1, 2, MatchMethod::Exact, 0.0, "york"),
            mk(3, 4, MatchMethod::Semantic, 0.2, "x"),
            mk(3, 4, MatchMethod::Exact, 0.0, "y"),
        ];
        let kept = resolve_overlaps(&pairs);
        assert_eq!(kept.len(), 2);
        assert_eq!(kept[0].entity, "new york");
        assert_eq!(kept[1].entity, "y");
    }

    #[test]
    fn mapper_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let db = toy_db(dir.path());
        let q = tokenize("How many rivers does Mississippi have ?");
        let a = map_question(&db, &q, &emb(), &cfg());
        let b = map_question(&db, &q, &emb(), &cfg());
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }
}
