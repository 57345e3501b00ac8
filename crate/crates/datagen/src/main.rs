//! Writes the bundled fixture datasets: a geography database with 880
//! question/logic-form pairs, a restaurant database with 251 pairs, word
//! vectors, stop words, lexicons and train/test splits. Every generated pair
//! is checked against the parser, the denotation engine and the
//! injection/recovery round trip before it is written.

mod emb;
mod geo;
mod rest;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spatialnli_core::embed::EmbeddingTable;
use spatialnli_core::geo::{evaluate, GeoDatabase};
use spatialnli_core::inject::{
    recover, spatial_injection, strip_injected, symbolic_form, InjectOptions, SymbolTable,
    TypeResolver,
};
use spatialnli_core::logic_form::{self, forms_equal, normalize, parse, render};
use spatialnli_core::mapper::{map_question, AmbiguousValue, MapperConfig};
use spatialnli_core::text::{eq_tokens_ci, tokenize};

const STOPWORDS: &str = "what\nwhich\nwhere\nwho\nwhen\nhow\nmany\nmuch\nis\nare\nwas\nwere\n\
the\na\nan\nof\nin\non\nat\nto\nfor\nwith\nby\nfrom\nand\nor\nnot\nno\ndo\ndoes\ndid\nhas\n\
have\nhad\nthere\nthat\nthis\nit\nits\nbe\nbeen\nas\nabout\nthan\nname\nall\nme\ni\nyou\ncan\n";

const GEO_SEED: u64 = 11;
const REST_SEED: u64 = 23;
const EMB_SEED: u64 = 31;

fn main() {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("data"));
    std::fs::create_dir_all(out.join("geo/facts")).unwrap();
    std::fs::create_dir_all(out.join("rest/facts")).unwrap();
    std::fs::create_dir_all(out.join("embeddings")).unwrap();

    write(out.join("stopwords.txt"), STOPWORDS);

    write(out.join("geo/schema.txt"), geo::schema());
    write(out.join("geo/facts/state.csv"), &geo::state_csv());
    write(out.join("geo/facts/city.csv"), &geo::city_csv());
    write(out.join("geo/facts/river.csv"), &geo::river_csv());
    write(out.join("geo/facts/place.csv"), &geo::place_csv());
    write(out.join("geo/lexicon.tsv"), geo::lexicon());
    write(out.join("geo/meta.toml"), "[ctors]\n");

    write(out.join("rest/schema.txt"), rest::schema());
    write(out.join("rest/facts/restaurant.csv"), &rest::restaurant_csv());
    write(out.join("rest/facts/city.csv"), &rest::city_csv());
    write(out.join("rest/facts/county.csv"), &rest::county_csv());
    write(out.join("rest/facts/food.csv"), &rest::food_csv());
    write(out.join("rest/lexicon.tsv"), rest::lexicon());
    write(out.join("rest/meta.toml"), rest::meta());

    let geo_db = load_db(&out.join("geo"), &BTreeMap::new());
    let mut rest_ctors = BTreeMap::new();
    rest_ctors.insert("restaurant".to_string(), "restid".to_string());
    let rest_db = load_db(&out.join("rest"), &rest_ctors);

    let geo_corpus = build_corpus(
        "geo",
        geo::question_pool(),
        geo::PINNED,
        880,
        GEO_SEED,
        &geo_db,
    );
    let rest_corpus = build_corpus("rest", rest::question_pool(), &[], 251, REST_SEED, &rest_db);

    // Word vectors cover every token of both corpora plus the keywords.
    let mut tokens: BTreeSet<String> = BTreeSet::new();
    for (q, _) in geo_corpus.iter().chain(rest_corpus.iter()) {
        tokens.extend(tokenize(q).into_iter().map(|t| t.to_lowercase()));
    }
    tokens.extend(geo_db.keyword_set.iter().cloned());
    tokens.extend(rest_db.keyword_set.iter().cloned());
    tokens.extend(STOPWORDS.lines().map(str::to_string));
    tokens.extend(["km2", "per", "run", "runs", "serve", "serves", "live"].map(String::from));
    write(
        out.join("embeddings/vectors300.txt"),
        &emb::vectors_file(&tokens, EMB_SEED),
    );

    let emb_table = EmbeddingTable::load(&out.join("embeddings/vectors300.txt")).unwrap();
    validate_corpus("geo", &geo_corpus, &geo_db, &emb_table, &out);
    validate_corpus("rest", &rest_corpus, &rest_db, &emb_table, &out);

    write_corpus(&out.join("geo/corpus.tsv"), &geo_corpus);
    write_corpus(&out.join("rest/corpus.tsv"), &rest_corpus);
    write_split(&out.join("geo"), geo_corpus.len(), 600, geo::PINNED.len(), GEO_SEED);
    write_split(&out.join("rest"), rest_corpus.len(), 201, 0, REST_SEED);

    println!(
        "wrote {} geo pairs and {} rest pairs under {}",
        geo_corpus.len(),
        rest_corpus.len(),
        out.display()
    );
}

fn write(path: PathBuf, content: &str) {
    std::fs::write(&path, content).unwrap_or_else(|e| panic!("write {}: {e}", path.display()));
}

fn load_db(dir: &Path, ctors: &BTreeMap<String, String>) -> GeoDatabase {
    GeoDatabase::load(&dir.join("schema.txt"), &dir.join("facts"), ctors)
        .unwrap_or_else(|e| panic!("loading {}: {e}", dir.display()))
}

/// Deduplicate, pin the fixed sentences at the front, sample to `target`.
fn build_corpus(
    name: &str,
    pool: Vec<(String, String)>,
    pinned: &[(&str, &str)],
    target: usize,
    seed: u64,
    db: &GeoDatabase,
) -> Vec<(String, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut corpus: Vec<(String, String)> = pinned
        .iter()
        .map(|(q, f)| (q.to_string(), f.to_string()))
        .collect();
    let mut seen: BTreeSet<String> = corpus.iter().map(|(q, _)| q.to_lowercase()).collect();

    // Keep only answerable questions; nobody asks about restaurants that
    // do not exist, and empty answer sets would make denotation matching
    // vacuous.
    let mut rest: Vec<(String, String)> = pool
        .into_iter()
        .filter(|(q, _)| seen.insert(q.to_lowercase()))
        .filter(|(q, f)| {
            let lf = parse(f).unwrap_or_else(|e| panic!("{name}: {q}: {e}"));
            let d = evaluate(&lf, db).unwrap_or_else(|e| panic!("{name}: {q}: {f}: {e}"));
            !d.is_empty()
        })
        .collect();
    rest.shuffle(&mut rng);
    assert!(
        corpus.len() + rest.len() >= target,
        "{name}: pool too small ({} + {} < {target})",
        corpus.len(),
        rest.len()
    );
    corpus.extend(rest.into_iter().take(target - corpus.len()));

    // Sanity: every gold form parses, renders canonically, and evaluates.
    for (q, f) in &corpus {
        let lf = parse(f).unwrap_or_else(|e| panic!("{name}: {q}: {e}"));
        assert_eq!(render(&lf), normalize(f), "{name}: non-canonical gold: {q}");
        evaluate(&lf, db).unwrap_or_else(|e| panic!("{name}: {q}: {f}: {e}"));
    }
    corpus
}

struct GoldResolver<'a> {
    gold: &'a logic_form::LogicForm,
    db: &'a GeoDatabase,
}

impl TypeResolver for GoldResolver<'_> {
    fn resolve(&self, _q: &[String], v: &AmbiguousValue, types: &[String]) -> String {
        gold_type_of(self.gold, self.db, &v.entity, types).unwrap_or_else(|| types[0].clone())
    }
}

/// The table whose constructor wraps this value in the gold form.
fn gold_type_of(
    gold: &logic_form::LogicForm,
    db: &GeoDatabase,
    value: &str,
    types: &[String],
) -> Option<String> {
    use logic_form::Term;
    fn walk(t: &Term, db: &GeoDatabase, value: &str, out: &mut Vec<String>) {
        match t {
            Term::Predicate { name, args } => {
                if let (Some(table), Some(Term::Constant(c))) =
                    (db.ctor_table(name), args.first())
                {
                    if c.eq_ignore_ascii_case(value) {
                        out.push(table.to_string());
                    }
                }
                args.iter().for_each(|a| walk(a, db, value, out));
            }
            Term::Conjunction(ts) => ts.iter().for_each(|a| walk(a, db, value, out)),
            _ => {}
        }
    }
    let mut found = Vec::new();
    walk(&gold.root, db, value, &mut found);
    found.into_iter().find(|t| types.contains(t))
}

/// The full injection/recovery loop must round-trip on every pair.
fn validate_corpus(
    name: &str,
    corpus: &[(String, String)],
    db: &GeoDatabase,
    emb: &EmbeddingTable,
    out: &Path,
) {
    let mut cfg = MapperConfig::default();
    cfg.load_stopwords(&out.join("stopwords.txt")).unwrap();
    cfg.load_lexicon(&out.join(name).join("lexicon.tsv")).unwrap();

    for (q, f) in corpus {
        let gold = parse(f).unwrap();
        let tokens = tokenize(q);
        let (pairs, values) = map_question(db, &tokens, emb, &cfg);

        // Ambiguous mentions must include the gold table among candidates.
        for v in &values {
            if v.types.len() > 1 {
                if let Some(t) = gold_type_of(&gold, db, &v.entity, &v.types) {
                    assert!(v.types.contains(&t), "{name}: {q}: {t} not in {:?}", v.types);
                }
            }
        }

        let resolver = GoldResolver { gold: &gold, db };
        let (inj, s2p) = spatial_injection(
            db,
            &tokens,
            &pairs,
            &values,
            &resolver,
            InjectOptions::default(),
        )
        .unwrap_or_else(|e| panic!("{name}: {q}: {e}"));

        let stripped = strip_injected(&inj, db);
        assert!(
            eq_tokens_ci(&stripped, &tokens),
            "{name}: {q}: strip mismatch: {stripped:?}"
        );

        let symbolic = symbolic_form(&gold, &s2p);
        let recovered =
            recover(&render(&symbolic), &s2p).unwrap_or_else(|e| panic!("{name}: {q}: {e}"));
        assert!(
            forms_equal(&recovered, f),
            "{name}: {q}: recover mismatch:\n  {recovered}\n  {f}"
        );
        check_symbols_known(&s2p, &inj.tokens, name, q);
    }
}

fn check_symbols_known(s2p: &SymbolTable, tokens: &[String], name: &str, q: &str) {
    for t in tokens {
        if logic_form::is_symbol_token(t) {
            assert!(s2p.get(t).is_some(), "{name}: {q}: {t} missing from table");
        }
    }
}

fn write_corpus(path: &Path, corpus: &[(String, String)]) {
    let mut out = String::new();
    for (q, f) in corpus {
        out.push_str(q);
        out.push('\t');
        out.push_str(f);
        out.push('\n');
    }
    std::fs::write(path, out).unwrap();
}

/// Index files; the first `pin` corpus lines always land in train.
fn write_split(dir: &Path, total: usize, train_size: usize, pin: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x517);
    let mut rest: Vec<usize> = (pin..total).collect();
    rest.shuffle(&mut rng);
    let mut train: Vec<usize> = (0..pin).collect();
    train.extend(rest.iter().take(train_size - pin).copied());
    let mut test: Vec<usize> = rest.into_iter().skip(train_size - pin).collect();
    train.sort_unstable();
    test.sort_unstable();
    let fmt = |ids: &[usize]| {
        ids.iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join("\n")
            + "\n"
    };
    std::fs::write(dir.join("split_train.txt"), fmt(&train)).unwrap();
    std::fs::write(dir.join("split_test.txt"), fmt(&test)).unwrap();
}
