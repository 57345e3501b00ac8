//! Ablation runs: retrain the translator with one component disabled and
//! score the result against the full configuration.

use std::collections::BTreeSet;
use std::path::PathBuf;

use crate::resources::Resources;
use crate::training::{
    evaluate_corpus, train_comprehension, train_translator, translator_pairs, EvalModels,
    EvalReport, RunConfig, ScoreMode, Variant,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Flag {
    NoCopy,
    NoComprehension,
    NoAugment,
    NoTypefeed,
    NoInject,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum FlagError {
    #[error("unknown ablation flag {0:?}")]
    Unknown(String),
    #[error("no-inject already removes type feeding; drop no-typefeed")]
    IncompatibleFlags,
}

pub fn parse_flags(text: &str) -> Result<BTreeSet<Flag>, FlagError> {
    let mut out = BTreeSet::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        out.insert(match part {
            "no-copy" => Flag::NoCopy,
            "no-comprehension" => Flag::NoComprehension,
            "no-augment" => Flag::NoAugment,
            "no-typefeed" => Flag::NoTypefeed,
            "no-inject" => Flag::NoInject,
            other => return Err(FlagError::Unknown(other.to_string())),
        });
    }
    if out.contains(&Flag::NoInject) && out.contains(&Flag::NoTypefeed) {
        return Err(FlagError::IncompatibleFlags);
    }
    Ok(out)
}

pub fn variant_for(flags: &BTreeSet<Flag>) -> Variant {
    Variant {
        inject: !flags.contains(&Flag::NoInject),
        type_feeding: !flags.contains(&Flag::NoInject) && !flags.contains(&Flag::NoTypefeed),
        copy: !flags.contains(&Flag::NoCopy),
        augment: !flags.contains(&Flag::NoAugment),
        random_types: flags.contains(&Flag::NoComprehension),
    }
}

/// Train under the ablated configuration and score the test split.
pub fn run_ablation(
    res: &Resources,
    name: &str,
    flags: &BTreeSet<Flag>,
    cfg: &RunConfig,
    mut log: impl FnMut(String),
) -> EvalReport {
    let ds = res.datasets.get(name).expect("dataset");
    let variant = variant_for(flags);
    log(format!("ablation {flags:?} -> {variant:?}"));

    let pairs = translator_pairs(res, ds, variant, &cfg.augment);
    log(format!("training pool: {} pairs", pairs.len()));
    let (translator, tr_store) = train_translator(
        &pairs,
        cfg.translator.clone(),
        variant,
        res,
        None,
        |m| log(m),
    );

    // The comprehension model is only consulted when types are resolved by
    // model; the random-guess ablation skips training it.
    let comp = if variant.random_types || !variant.inject {
        None
    } else {
        Some(train_comprehension(res, ds, cfg.comprehension.clone(), |m| {
            log(m)
        }))
    };
    let entries: Vec<_> = ds.test().collect();
    let models = EvalModels {
        translator: &translator,
        tr_store: &tr_store,
        comprehension: comp.as_ref().map(|(m, s)| (m, s)),
        random_seed: 7,
    };
    evaluate_corpus(res, ds, &models, variant, &entries, ScoreMode::Denotation)
}

pub fn cmd_ablate(
    res: &Resources,
    name: &str,
    flags_text: &str,
    report: Option<PathBuf>,
    cfg: &RunConfig,
) {
    let flags = match parse_flags(flags_text) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    let rep = run_ablation(res, name, &flags, cfg, |m| println!("{m}"));
    if let Some(path) = report {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir).expect("report dir");
            }
        }
        let mut out = String::new();
        for row in &rep.rows {
            out.push_str(&serde_json::to_string(row).unwrap());
            out.push('\n');
        }
        std::fs::write(&path, out).expect("write report");
    }
    println!(
        "{} with {flags_text:?}: {}/{} = {:.1}%",
        rep.dataset,
        rep.correct,
        rep.total,
        100.0 * rep.accuracy
    );
    for (stage, n) in &rep.confusion {
        println!("  failed at {stage}: {n}");
    }
}
