//! End-to-end question answering: mapper, type resolution, injection,
//! translation, recovery — with a full trace for debugging and error
//! attribution.

use std::cell::RefCell;
use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use spatialnli_core::embed::EmbeddingTable;
use spatialnli_core::geo::GeoDatabase;
use spatialnli_core::inject::{
    recover, spatial_injection, symbolic_form, InjectOptions, InjectedQuestion, SymbolTable,
    TypeResolver,
};
use spatialnli_core::logic_form::{render, LogicForm, Term};
use spatialnli_core::mapper::{map_question, AmbiguousValue, MapperConfig, MatchPair};

use spatialnli_neural::comprehension::Comprehension;
use spatialnli_neural::params::ParameterStore;
use spatialnli_neural::translator::{detokenize_logic_form, Translator};

use crate::resources::Dataset;

#[derive(Debug, Error)]
#[error("{stage}: {message}")]
pub struct PipelineError {
    pub stage: &'static str,
    pub message: String,
}

fn stage_err<E: std::fmt::Display>(stage: &'static str) -> impl Fn(E) -> PipelineError {
    move |e| PipelineError {
        stage,
        message: e.to_string(),
    }
}

/// Everything the pipeline produced on the way to its answer.
#[derive(Debug, Clone)]
pub struct Trace {
    pub pairs: Vec<MatchPair>,
    pub values: Vec<AmbiguousValue>,
    pub injected: InjectedQuestion,
    pub s2p: SymbolTable,
    pub translated: String,
    pub recovered: String,
}

/// The table whose constructor wraps `value` in a gold form (for the
/// gold-type stub and for training-label derivation).
pub fn gold_type_of(
    gold: &LogicForm,
    db: &GeoDatabase,
    value: &str,
    types: &[String],
) -> Option<String> {
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

/// Reads the type out of the gold form; used for building training data and
/// for the deterministic worked-example checks.
pub struct GoldResolver<'a> {
    pub gold: &'a LogicForm,
    pub db: &'a GeoDatabase,
}

impl TypeResolver for GoldResolver<'_> {
    fn resolve(&self, _q: &[String], v: &AmbiguousValue, types: &[String]) -> String {
        gold_type_of(self.gold, self.db, &v.entity, types).unwrap_or_else(|| types[0].clone())
    }
}

/// The trained comprehension model.
pub struct ModelResolver<'a> {
    pub model: &'a Comprehension,
    pub store: &'a ParameterStore,
    pub frequency: &'a BTreeMap<String, usize>,
}

impl TypeResolver for ModelResolver<'_> {
    fn resolve(&self, q: &[String], v: &AmbiguousValue, types: &[String]) -> String {
        self.model
            .resolve_type(self.store, q, v.start, v.end, types, self.frequency)
    }
}

/// Seeded uniform guess, for the no-comprehension ablation.
pub struct RandomResolver {
    rng: RefCell<ChaCha8Rng>,
}

impl RandomResolver {
    pub fn new(seed: u64) -> RandomResolver {
        use rand::SeedableRng;
        RandomResolver {
            rng: RefCell::new(ChaCha8Rng::seed_from_u64(seed)),
        }
    }
}

impl TypeResolver for RandomResolver {
    fn resolve(&self, _q: &[String], _v: &AmbiguousValue, types: &[String]) -> String {
        let i = self.rng.borrow_mut().gen_range(0..types.len());
        types[i].clone()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PipelineOptions {
    /// Enclose matches in symbols at all (information injection).
    pub inject: bool,
    /// Insert the resolved type constructor before each value.
    pub type_feeding: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            inject: true,
            type_feeding: true,
        }
    }
}

/// Build the translator source side for a question: the injected question
/// plus its symbol table, or the bare lowercased question when injection is
/// disabled.
pub fn prepare_source(
    ds: &Dataset,
    emb: &EmbeddingTable,
    mapper: &MapperConfig,
    tokens: &[String],
    resolver: &dyn TypeResolver,
    opts: PipelineOptions,
) -> Result<(Vec<String>, SymbolTable, Vec<MatchPair>, Vec<AmbiguousValue>), PipelineError> {
    let (pairs, values) = map_question(&ds.db, tokens, emb, mapper);
    if !opts.inject {
        let lowered = tokens.iter().map(|t| t.to_lowercase()).collect();
        return Ok((lowered, SymbolTable::default(), pairs, values));
    }
    let (inj, s2p) = spatial_injection(
        &ds.db,
        tokens,
        &pairs,
        &values,
        resolver,
        InjectOptions {
            type_feeding: opts.type_feeding,
        },
    )
    .map_err(stage_err("injection"))?;
    Ok((inj.tokens, s2p, pairs, values))
}

/// Resolve every ambiguous value's type up front so the trace records what
/// was fed to the injection step.
fn resolve_values(tokens: &[String], values: &mut [AmbiguousValue], resolver: &dyn TypeResolver) {
    for v in values.iter_mut() {
        if v.resolved_type.is_some() {
            continue;
        }
        v.resolved_type = Some(if v.types.len() == 1 {
            v.types[0].clone()
        } else {
            resolver.resolve(tokens, v, &v.types)
        });
    }
}

/// Mapper -> comprehension-backed injection -> translation -> recovery.
pub fn run_pipeline(
    ds: &Dataset,
    emb: &EmbeddingTable,
    translator: &Translator,
    store: &ParameterStore,
    tokens: &[String],
    resolver: &dyn TypeResolver,
    opts: PipelineOptions,
) -> Result<(String, Trace), PipelineError> {
    let (pairs, mut values) = map_question(&ds.db, tokens, emb, &ds.mapper);
    resolve_values(tokens, &mut values, resolver);
    let (source, s2p) = if opts.inject {
        let (inj, s2p) = spatial_injection(
            &ds.db,
            tokens,
            &pairs,
            &values,
            resolver,
            InjectOptions {
                type_feeding: opts.type_feeding,
            },
        )
        .map_err(stage_err("injection"))?;
        (inj, s2p)
    } else {
        (
            InjectedQuestion {
                tokens: tokens.iter().map(|t| t.to_lowercase()).collect(),
            },
            SymbolTable::default(),
        )
    };

    let out_tokens = translator
        .infer(store, &source.tokens)
        .map_err(stage_err("translation"))?;
    let translated = detokenize_logic_form(&out_tokens);
    let recovered = recover(&translated, &s2p).map_err(stage_err("recovery"))?;
    Ok((
        recovered.clone(),
        Trace {
            pairs,
            values,
            injected: source,
            s2p,
            translated,
            recovered,
        },
    ))
}

/// The gold symbolic target for a question under a given source mapping:
/// what the translator should emit.
pub fn gold_target(gold: &LogicForm, s2p: &SymbolTable, opts: PipelineOptions) -> String {
    if !opts.inject {
        return render(gold).to_lowercase_preserving_vars();
    }
    render(&symbolic_form(gold, s2p))
}

trait LowercasePreservingVars {
    fn to_lowercase_preserving_vars(&self) -> String;
}

impl LowercasePreservingVars for String {
    /// Lowercase a rendered form but keep single-letter variables intact;
    /// used for the no-injection ablation where the translator works on
    /// folded tokens.
    fn to_lowercase_preserving_vars(&self) -> String {
        let tokens = spatialnli_neural::translator::tokenize_logic_form(self);
        let folded: Vec<String> = tokens
            .iter()
            .map(|t| {
                let mut chars = t.chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) if c.is_ascii_uppercase() => t.clone(),
                    _ => t.to_lowercase(),
                }
            })
            .collect();
        detokenize_logic_form(&folded)
    }
}
