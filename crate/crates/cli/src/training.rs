//! Training-data preparation, model training, and corpus evaluation.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use spatialnli_core::augment::{
    conjunction_combine, entity_replace, nested_replace, pp_shuffle, QaPair,
};
use spatialnli_core::geo::denotation_match;
use spatialnli_core::inject::TypeResolver;
use spatialnli_core::logic_form::{forms_equal, parse, render};
use spatialnli_core::mapper::map_question;

use spatialnli_neural::comprehension::{
    build_records, replicate_positives, Comprehension, ComprehensionConfig, ComprehensionRecord,
};
use spatialnli_neural::params::ParameterStore;
use spatialnli_neural::translator::{
    tokenize_logic_form, Translator, TranslatorConfig, Vocab,
};

use crate::pipeline::{
    gold_target, gold_type_of, prepare_source, run_pipeline, GoldResolver, ModelResolver,
    PipelineOptions, RandomResolver,
};
use crate::resources::{CorpusEntry, Dataset, Resources};

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct RunConfig {
    #[serde(default)]
    pub comprehension: ComprehensionConfig,
    #[serde(default)]
    pub translator: TranslatorConfig,
    #[serde(default)]
    pub augment: AugmentConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AugmentConfig {
    pub enabled: bool,
    /// Cap on generated pairs per source pair and augmentation type.
    pub max_per_source: usize,
    pub seed: u64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            enabled: true,
            max_per_source: 2,
            seed: 97,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, String> {
        let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        toml::from_str(&text).map_err(|e| e.to_string())
    }
}

/// Which pipeline pieces a training/evaluation run uses; ablations switch
/// these off one at a time.
#[derive(Debug, Clone, Copy)]
pub struct Variant {
    pub inject: bool,
    pub type_feeding: bool,
    pub copy: bool,
    pub augment: bool,
    /// Resolve ambiguous types randomly instead of with the model.
    pub random_types: bool,
}

impl Default for Variant {
    fn default() -> Self {
        Variant {
            inject: true,
            type_feeding: true,
            copy: true,
            augment: true,
            random_types: false,
        }
    }
}

impl Variant {
    pub fn options(&self) -> PipelineOptions {
        PipelineOptions {
            inject: self.inject,
            type_feeding: self.type_feeding,
        }
    }
}

/// Candidate type inventory: every table of the database.
pub fn type_inventory(ds: &Dataset) -> Vec<String> {
    let mut tables: Vec<String> = ds.db.tables.iter().map(|t| t.name.clone()).collect();
    tables.sort();
    tables
}

/// How often each table occurs as a gold type in the train split (argmax
/// tie-break order).
pub fn type_frequency(ds: &Dataset) -> BTreeMap<String, usize> {
    let mut freq = BTreeMap::new();
    for entry in ds.train() {
        let (_, values) = map_question(&ds.db, &entry.tokens, &EMPTY_EMB, &ds.mapper);
        for v in &values {
            if let Some(t) = gold_type_of(&entry.form, &ds.db, &v.entity, &v.types) {
                *freq.entry(t).or_insert(0) += 1;
            }
        }
    }
    freq
}

// Frequency counting only needs value matches, which never use embeddings.
static EMPTY_EMB: std::sync::LazyLock<spatialnli_core::embed::EmbeddingTable> =
    std::sync::LazyLock::new(|| {
        spatialnli_core::embed::EmbeddingTable::from_vectors(4, std::collections::HashMap::new())
    });

/// A question's ambiguous values with their gold types.
pub struct QuestionAmbiguity {
    pub tokens: Vec<String>,
    pub values: Vec<(usize, usize, Vec<String>, String)>, // start, end, types, gold
}

/// Comprehension samples for a split: per-question groups plus the flat
/// record list over the whole type inventory.
pub fn comprehension_data(
    res: &Resources,
    ds: &Dataset,
    entries: &[&CorpusEntry],
) -> (Vec<ComprehensionRecord>, Vec<QuestionAmbiguity>) {
    let inventory = type_inventory(ds);
    let mut records = Vec::new();
    let mut questions = Vec::new();
    for entry in entries {
        let (_, values) = map_question(&ds.db, &entry.tokens, &res.embeddings, &ds.mapper);
        let mut q_values = Vec::new();
        for v in &values {
            if v.types.len() < 2 {
                continue;
            }
            let Some(gold) = gold_type_of(&entry.form, &ds.db, &v.entity, &v.types) else {
                continue;
            };
            records.extend(build_records(
                &entry.tokens,
                v.start,
                v.end,
                &inventory,
                &gold,
            ));
            q_values.push((v.start, v.end, v.types.clone(), gold));
        }
        if !q_values.is_empty() {
            questions.push(QuestionAmbiguity {
                tokens: entry.tokens.clone(),
                values: q_values,
            });
        }
    }
    (records, questions)
}

pub fn train_comprehension(
    res: &Resources,
    ds: &Dataset,
    config: ComprehensionConfig,
    mut log: impl FnMut(String),
) -> (Comprehension, ParameterStore) {
    let mut vocab: Vec<String> = Vec::new();
    for entry in &ds.corpus {
        vocab.extend(entry.tokens.iter().map(|t| t.to_lowercase()));
    }
    vocab.extend(type_inventory(ds));
    vocab.sort();
    vocab.dedup();

    let mut store = ParameterStore::new(config.seed);
    let model = Comprehension::new(config, vocab, &mut store, Some(&res.embeddings));
    let train_entries: Vec<&CorpusEntry> = ds.train().collect();
    let (records, _) = comprehension_data(res, ds, &train_entries);
    let balanced = replicate_positives(&records);
    log(format!(
        "comprehension[{}]: {} records ({} after balancing)",
        ds.name,
        records.len(),
        balanced.len()
    ));
    model
        .train(&mut store, &balanced, &mut |epoch, loss| {
            log(format!("comprehension[{}] epoch {epoch}: loss {loss:.4}", ds.name));
        })
        .expect("comprehension training produced a non-finite loss");
    (model, store)
}

/// Record accuracy (threshold 0.5) and question accuracy (argmax over each
/// value's own candidate types) over a split.
pub fn comprehension_metrics(
    res: &Resources,
    ds: &Dataset,
    model: &Comprehension,
    store: &ParameterStore,
    entries: &[&CorpusEntry],
) -> (f64, f64) {
    let (records, questions) = comprehension_data(res, ds, entries);
    let acc_rcd = spatialnli_neural::comprehension::accuracy_records(model, store, &records);
    if questions.is_empty() {
        return (acc_rcd, 1.0);
    }
    let freq = type_frequency(ds);
    let correct = questions
        .iter()
        .filter(|q| {
            q.values.iter().all(|(start, end, types, gold)| {
                model.resolve_type(store, &q.tokens, *start, *end, types, &freq) == *gold
            })
        })
        .count();
    (acc_rcd, correct as f64 / questions.len() as f64)
}

/// Augmented question/form pairs for the train split (pre-injection).
pub fn augmented_pairs(ds: &Dataset, cfg: &AugmentConfig) -> Vec<(String, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let train: Vec<QaPair> = ds
        .train()
        .map(|e| QaPair {
            question: e.tokens.clone(),
            form: e.form.clone(),
        })
        .collect();
    let mut out: Vec<(String, String)> = Vec::new();
    let mut push = |q: &[String], form: &spatialnli_core::logic_form::LogicForm| {
        out.push((q.join(" "), render(form)));
    };

    for pair in &train {
        if let Some(shuffled) = pp_shuffle(&pair.question) {
            push(&shuffled, &pair.form);
        }
        let mut replaced = entity_replace(pair, &ds.db);
        replaced.shuffle(&mut rng);
        for r in replaced.iter().take(cfg.max_per_source) {
            push(&r.question, &r.form);
        }
    }
    // Recombination over sampled pairs of training questions.
    let mut nested = 0usize;
    let mut conjoined = 0usize;
    let budget = cfg.max_per_source * 40;
    for _ in 0..train.len() * 2 {
        if nested >= budget && conjoined >= budget {
            break;
        }
        let a = &train[rng.gen_range(0..train.len())];
        let b = &train[rng.gen_range(0..train.len())];
        if nested < budget {
            if let Some(n) = nested_replace(a, b, &ds.db) {
                push(&n.question, &n.form);
                nested += 1;
            }
        }
        if conjoined < budget && !std::ptr::eq(a, b) {
            if let Some(c) = conjunction_combine(a, b, &ds.db) {
                push(&c.question, &c.form);
                conjoined += 1;
            }
        }
    }
    // Keep only pairs whose question text is new.
    let existing: std::collections::BTreeSet<String> = ds
        .corpus
        .iter()
        .map(|e| e.question.to_lowercase())
        .collect();
    let mut seen = existing;
    out.retain(|(q, _)| seen.insert(q.to_lowercase()));
    out
}

/// (source tokens, target tokens) pairs for translator training.
pub fn translator_pairs(
    res: &Resources,
    ds: &Dataset,
    variant: Variant,
    augment_cfg: &AugmentConfig,
) -> Vec<(Vec<String>, Vec<String>)> {
    let mut raw: Vec<(Vec<String>, spatialnli_core::logic_form::LogicForm)> = ds
        .train()
        .map(|e| (e.tokens.clone(), e.form.clone()))
        .collect();
    if variant.augment && augment_cfg.enabled {
        for (q, f) in augmented_pairs(ds, augment_cfg) {
            let tokens = spatialnli_core::text::tokenize(&q);
            let form = parse(&f).expect("augmented forms are rendered by us");
            raw.push((tokens, form));
        }
    }

    let opts = variant.options();
    let mut out = Vec::with_capacity(raw.len());
    for (tokens, form) in &raw {
        let resolver = GoldResolver {
            gold: form,
            db: &ds.db,
        };
        let (src, s2p, _, _) =
            prepare_source(ds, &res.embeddings, &ds.mapper, tokens, &resolver, opts)
                .expect("mapper output is always injectable");
        let tgt_str = gold_target(form, &s2p, opts);
        out.push((src, tokenize_logic_form(&tgt_str)));
    }
    out
}

pub fn train_translator(
    pairs: &[(Vec<String>, Vec<String>)],
    mut config: TranslatorConfig,
    variant: Variant,
    res: &Resources,
    checkpoint: Option<&Path>,
    mut log: impl FnMut(String),
) -> (Translator, ParameterStore) {
    config.copy = variant.copy;
    let vocab = Vocab::build(pairs, config.max_symbols);
    let mut store = ParameterStore::new(config.seed);
    let glove = config.glove_init.then_some(&res.embeddings);
    let model = Translator::new(config, vocab, &mut store, glove);
    model
        .train(&mut store, pairs, &mut |epoch, loss, snapshot| {
            log(format!("translator epoch {epoch}: loss {loss:.4}"));
            if let Some(path) = checkpoint {
                model.save(snapshot, path).expect("checkpoint write failed");
            }
        })
        .expect("translator training failed");
    (model, store)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScoreMode {
    Denotation,
    Exact,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalRow {
    pub question: String,
    pub gold: String,
    pub predicted: String,
    pub ok: bool,
    /// Failure stage: mapper | type | translation | recovery.
    pub stage: Option<&'static str>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub dataset: String,
    pub mode: ScoreMode,
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub confusion: BTreeMap<&'static str, usize>,
    #[serde(skip)]
    pub rows: Vec<EvalRow>,
}

pub struct EvalModels<'a> {
    pub translator: &'a Translator,
    pub tr_store: &'a ParameterStore,
    pub comprehension: Option<(&'a Comprehension, &'a ParameterStore)>,
    pub random_seed: u64,
}

/// Score a split end to end; unevaluable predictions count as failures.
pub fn evaluate_corpus(
    res: &Resources,
    ds: &Dataset,
    models: &EvalModels,
    variant: Variant,
    entries: &[&CorpusEntry],
    mode: ScoreMode,
) -> EvalReport {
    let freq = type_frequency(ds);
    let random = RandomResolver::new(models.random_seed);
    let model_resolver = models.comprehension.map(|(model, store)| ModelResolver {
        model,
        store,
        frequency: &freq,
    });
    let mut rows = Vec::with_capacity(entries.len());
    let mut confusion: BTreeMap<&'static str, usize> = BTreeMap::new();
    let mut correct = 0usize;
    for entry in entries {
        let resolver: &dyn TypeResolver = match (&model_resolver, variant.random_types) {
            (Some(m), false) => m,
            _ => &random,
        };
        let outcome = run_pipeline(
            ds,
            &res.embeddings,
            models.translator,
            models.tr_store,
            &entry.tokens,
            resolver,
            variant.options(),
        );
        let (predicted, trace) = match outcome {
            Ok(v) => v,
            Err(e) => {
                let stage = if e.stage == "translation" {
                    "translation"
                } else {
                    "recovery"
                };
                *confusion.entry(stage).or_insert(0) += 1;
                rows.push(EvalRow {
                    question: entry.question.clone(),
                    gold: entry.form_text.clone(),
                    predicted: format!("<{e}>"),
                    ok: false,
                    stage: Some(stage),
                });
                continue;
            }
        };
        let ok = match mode {
            ScoreMode::Exact => forms_equal(&predicted, &entry.form_text),
            ScoreMode::Denotation => match parse(&predicted) {
                Ok(pred_form) => {
                    denotation_match(&pred_form, &entry.form, &ds.db).unwrap_or(false)
                }
                Err(_) => false,
            },
        };
        let stage = if ok {
            None
        } else {
            Some(attribute_failure(ds, res, entry, &trace, variant))
        };
        if ok {
            correct += 1;
        } else {
            *confusion.entry(stage.unwrap()).or_insert(0) += 1;
        }
        rows.push(EvalRow {
            question: entry.question.clone(),
            gold: entry.form_text.clone(),
            predicted,
            ok,
            stage,
        });
    }
    EvalReport {
        dataset: ds.name.clone(),
        mode,
        total: entries.len(),
        correct,
        accuracy: correct as f64 / entries.len().max(1) as f64,
        confusion,
        rows,
    }
}

/// Attach each failure to exactly one stage, checked in pipeline order.
fn attribute_failure(
    ds: &Dataset,
    res: &Resources,
    entry: &CorpusEntry,
    trace: &crate::pipeline::Trace,
    variant: Variant,
) -> &'static str {
    let _ = res;
    // Mapper: a gold entity mention in the question has no value match.
    let mentions = gold_value_mentions(ds, entry);
    for (start, end) in &mentions {
        let covered = trace
            .pairs
            .iter()
            .any(|p| p.start <= *start && *end <= p.end);
        if !covered {
            return "mapper";
        }
    }
    // Type: an ambiguous value was fed the wrong constructor.
    if variant.inject && variant.type_feeding {
        for v in &trace.values {
            if v.types.len() < 2 {
                continue;
            }
            if let Some(gold) = gold_type_of(&entry.form, &ds.db, &v.entity, &v.types) {
                if let Some(resolved) = &v.resolved_type {
                    if *resolved != gold {
                        return "type";
                    }
                }
            }
        }
    }
    // Translation: the emitted symbolic form differs from the gold target.
    let gold_tgt = gold_target(&entry.form, &trace.s2p, variant.options());
    if !forms_equal(&trace.translated, &gold_tgt) {
        return "translation";
    }
    "recovery"
}

/// Token spans of the question that mention constants of the gold form.
fn gold_value_mentions(ds: &Dataset, entry: &CorpusEntry) -> Vec<(usize, usize)> {
    use spatialnli_core::logic_form::Term;
    fn constants(t: &Term, ds: &Dataset, out: &mut Vec<String>) {
        match t {
            Term::Predicate { name, args } => {
                if let (Some(_), Some(Term::Constant(c))) =
                    (ds.db.ctor_table(name), args.first())
                {
                    out.push(c.clone());
                }
                args.iter().for_each(|a| constants(a, ds, out));
            }
            Term::Conjunction(ts) => ts.iter().for_each(|a| constants(a, ds, out)),
            _ => {}
        }
    }
    let mut texts = Vec::new();
    constants(&entry.form.root, ds, &mut texts);
    let lowered: Vec<String> = entry.tokens.iter().map(|t| t.to_lowercase()).collect();
    let mut spans = Vec::new();
    for text in texts {
        let words: Vec<String> = text.split_whitespace().map(|w| w.to_lowercase()).collect();
        if words.is_empty() {
            continue;
        }
        for start in 0..lowered.len() {
            let end = start + words.len();
            if end <= lowered.len() && lowered[start..end] == words[..] {
                spans.push((start, end));
                break;
            }
        }
    }
    spans
}

