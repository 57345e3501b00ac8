//! Command-line interface: train the models, answer questions, score the
//! corpora, run ablations, generate augmented pairs, and inspect traces.


use std::io::{BufRead, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use spatialnli_neural::comprehension::{Comprehension, ComprehensionConfig};
use spatialnli_neural::params::ParameterStore;
use spatialnli_neural::translator::Translator;

use spatialnli_cli::{ablate, pipeline, resources, training};

use pipeline::{run_pipeline, ModelResolver, PipelineOptions};
use resources::{data_root, load_resources, Resources};
use training::{
    comprehension_data, comprehension_metrics, evaluate_corpus, train_comprehension,
    train_translator, translator_pairs, type_frequency, EvalModels, RunConfig, ScoreMode, Variant,
};

#[derive(Parser)]
#[command(name = "spatialnli", about = "Natural-language interface to spatial databases")]
struct Cli {
    /// Resource root (falls back to $SPATIALNLI_DATA, then ./data).
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// TOML file overriding model hyperparameters.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Word-vector file (defaults to the bundled vectors).
    #[arg(long, global = true)]
    embeddings: Option<PathBuf>,
    /// Semantic-distance threshold for keyword matching.
    #[arg(long, global = true)]
    tau_sem: Option<f64>,
    /// Edit-distance threshold (matches need distance strictly below).
    #[arg(long, global = true)]
    tau_ed: Option<usize>,
    /// Longest n-gram the mapper considers.
    #[arg(long, global = true)]
    max_ngram: Option<usize>,
    /// Replacement stop-word file.
    #[arg(long, global = true)]
    stopwords: Option<PathBuf>,
    /// Extra synonym lexicon appended to every dataset's own.
    #[arg(long, global = true)]
    lexicon: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ModelPaths {
    /// Translator checkpoint path.
    #[arg(long, default_value = "work/translator.ckpt")]
    translator_checkpoint: PathBuf,
    /// Comprehension checkpoint path.
    #[arg(long, default_value = "work/comprehension.ckpt")]
    comprehension_checkpoint: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Train the comprehension model and the translator for a dataset.
    Train {
        /// Dataset directory name under the resource root.
        #[arg(long, default_value = "geo")]
        dataset: String,
        /// Pool every dataset into one shared translator.
        #[arg(long)]
        joint: bool,
        #[command(flatten)]
        paths: ModelPaths,
        /// Skip augmentation when building the training set.
        #[arg(long)]
        no_augment: bool,
    },
    /// Translate one question (reads --question or stdin).
    Infer {
        #[arg(long, default_value = "geo")]
        dataset: String,
        #[arg(long)]
        question: Option<String>,
        #[arg(long)]
        beam_width: Option<usize>,
        #[arg(long)]
        max_len: Option<usize>,
        #[command(flatten)]
        paths: ModelPaths,
    },
    /// Score a split (accuracy plus per-stage failure breakdown).
    Evaluate {
        #[arg(long, default_value = "geo")]
        dataset: String,
        /// denotation | exact
        #[arg(long, default_value = "denotation")]
        mode: String,
        /// train | test
        #[arg(long, default_value = "test")]
        split: String,
        #[command(flatten)]
        paths: ModelPaths,
        /// Line-delimited JSON report destination.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Retrain and evaluate with components disabled.
    Ablate {
        #[arg(long, default_value = "rest")]
        dataset: String,
        /// Comma-separated: no-copy, no-comprehension, no-augment,
        /// no-typefeed, no-inject. Empty runs the full model.
        #[arg(long, default_value = "")]
        flags: String,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Generate augmented training pairs.
    Augment {
        #[arg(long, default_value = "geo")]
        dataset: String,
        /// Comma-separated subset of pp,entity,nested,conj.
        #[arg(long, default_value = "pp,entity,nested,conj")]
        types: String,
        /// Input TSV (defaults to the dataset's train split).
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2)]
        max_per_source: usize,
    },
    /// Interactive loop printing the full pipeline trace per question.
    Repl {
        #[arg(long, default_value = "geo")]
        dataset: String,
        #[command(flatten)]
        paths: ModelPaths,
    },
    /// Train/evaluate the comprehension model alone, or dump its records.
    Comprehend {
        #[arg(long, default_value = "geo")]
        dataset: String,
        #[command(flatten)]
        paths: ModelPaths,
        /// Write the training records as TSV instead of training.
        #[arg(long)]
        dump_records: Option<PathBuf>,
        /// Evaluate an existing checkpoint instead of training.
        #[arg(long)]
        eval_only: bool,
    },
}

fn main() {
    let cli = Cli::parse();
    let run_config = match &cli.config {
        Some(path) => RunConfig::load(path).unwrap_or_else(|e| {
            eprintln!("bad config {}: {e}", path.display());
            std::process::exit(2);
        }),
        None => RunConfig::default(),
    };
    let root = data_root(cli.data.as_deref());
    let mut resources = load_resources(&root, &["geo", "rest"], |mapper| {
        if let Some(t) = cli.tau_sem {
            mapper.tau_sem = t;
        }
        if let Some(t) = cli.tau_ed {
            mapper.tau_ed = t;
        }
        if let Some(k) = cli.max_ngram {
            mapper.max_ngram = k;
        }
        if let Some(path) = &cli.stopwords {
            mapper.load_stopwords(path).expect("stopword file");
        }
    })
    .unwrap_or_else(|e| {
        eprintln!("cannot load resources under {}: {e}", root.display());
        std::process::exit(2);
    });
    if let Some(path) = &cli.embeddings {
        resources.embeddings =
            spatialnli_core::embed::EmbeddingTable::load(path).expect("embedding file");
    }
    if let Some(path) = &cli.lexicon {
        for ds in resources.datasets.values_mut() {
            let mut extra = ds.mapper.clone();
            extra.load_lexicon(path).expect("lexicon file");
            ds.mapper.lexicon.extend(extra.lexicon);
        }
    }

    match cli.command {
        Command::Train {
            dataset,
            joint,
            paths,
            no_augment,
        } => cmd_train(&resources, &dataset, joint, &paths, no_augment, &run_config),
        Command::Infer {
            dataset,
            question,
            beam_width,
            max_len,
            paths,
        } => cmd_infer(&resources, &dataset, question, beam_width, max_len, &paths),
        Command::Evaluate {
            dataset,
            mode,
            split,
            paths,
            report,
        } => cmd_evaluate(&resources, &dataset, &mode, &split, &paths, report),
        Command::Ablate {
            dataset,
            flags,
            report,
        } => ablate::cmd_ablate(&resources, &dataset, &flags, report, &run_config),
        Command::Augment {
            dataset,
            types,
            input,
            out,
            max_per_source,
        } => cmd_augment(&resources, &dataset, &types, input, &out, max_per_source),
        Command::Repl { dataset, paths } => cmd_repl(&resources, &dataset, &paths),
        Command::Comprehend {
            dataset,
            paths,
            dump_records,
            eval_only,
        } => cmd_comprehend(&resources, &dataset, &paths, dump_records, eval_only, &run_config),
    }
}

fn dataset<'a>(res: &'a Resources, name: &str) -> &'a resources::Dataset {
    res.datasets.get(name).unwrap_or_else(|| {
        eprintln!("unknown dataset {name}; available: geo, rest");
        std::process::exit(2);
    })
}

fn ensure_parent(path: &PathBuf) {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).expect("create output directory");
        }
    }
}

fn save_comprehension(
    model: &Comprehension,
    store: &ParameterStore,
    path: &PathBuf,
    dataset: &str,
) {
    ensure_parent(path);
    let header = serde_json::json!({
        "kind": "comprehension",
        "config": model.config,
        "vocab": model.vocab_tokens(),
        "dataset": dataset,
    });
    store
        .save(path, &header.to_string())
        .expect("write comprehension checkpoint");
}

fn load_comprehension(path: &PathBuf) -> Result<(Comprehension, ParameterStore), String> {
    let header = ParameterStore::read_header(path).map_err(|e| e.to_string())?;
    let parsed: serde_json::Value = serde_json::from_str(&header).map_err(|e| e.to_string())?;
    let config: ComprehensionConfig =
        serde_json::from_value(parsed["config"].clone()).map_err(|e| e.to_string())?;
    let vocab: Vec<String> =
        serde_json::from_value(parsed["vocab"].clone()).map_err(|e| e.to_string())?;
    let mut store = ParameterStore::new(config.seed);
    let model = Comprehension::new(config, vocab, &mut store, None);
    store.load(path).map_err(|e| e.to_string())?;
    Ok((model, store))
}

fn load_models(paths: &ModelPaths) -> (Translator, ParameterStore, Comprehension, ParameterStore) {
    let (translator, tr_store) =
        Translator::load(&paths.translator_checkpoint, 0).unwrap_or_else(|e| {
            eprintln!(
                "cannot load translator checkpoint {}: {e}",
                paths.translator_checkpoint.display()
            );
            std::process::exit(2);
        });
    let (comp, comp_store) = load_comprehension(&paths.comprehension_checkpoint)
        .unwrap_or_else(|e| {
            eprintln!(
                "cannot load comprehension checkpoint {}: {e}",
                paths.comprehension_checkpoint.display()
            );
            std::process::exit(2);
        });
    (translator, tr_store, comp, comp_store)
}

fn cmd_train(
    res: &Resources,
    name: &str,
    joint: bool,
    paths: &ModelPaths,
    no_augment: bool,
    cfg: &RunConfig,
) {
    let ds = dataset(res, name);
    let variant = Variant {
        augment: !no_augment,
        ..Variant::default()
    };

    let (comp, comp_store) =
        train_comprehension(res, ds, cfg.comprehension.clone(), |m| println!("{m}"));
    save_comprehension(&comp, &comp_store, &paths.comprehension_checkpoint, name);
    let train_entries: Vec<_> = ds.train().collect();
    let (rcd, qu) = comprehension_metrics(res, ds, &comp, &comp_store, &train_entries);
    println!("comprehension[{name}] train: acc_rcd {rcd:.3} acc_qu {qu:.3}");

    let mut pairs = translator_pairs(res, ds, variant, &cfg.augment);
    if joint {
        for other in res.datasets.values() {
            if other.name != ds.name {
                pairs.extend(translator_pairs(res, other, variant, &cfg.augment));
            }
        }
        println!("joint training pool: {} pairs", pairs.len());
    }
    ensure_parent(&paths.translator_checkpoint);
    let _ = train_translator(
        &pairs,
        cfg.translator.clone(),
        variant,
        res,
        Some(&paths.translator_checkpoint),
        |m| println!("{m}"),
    );
    println!(
        "checkpoints: {} and {}",
        paths.translator_checkpoint.display(),
        paths.comprehension_checkpoint.display()
    );
}

fn cmd_infer(
    res: &Resources,
    name: &str,
    question: Option<String>,
    beam_width: Option<usize>,
    max_len: Option<usize>,
    paths: &ModelPaths,
) {
    let ds = dataset(res, name);
    let (mut translator, tr_store, comp, comp_store) = load_models(paths);
    if let Some(w) = beam_width {
        translator.config.beam_width = w;
    }
    if let Some(l) = max_len {
        translator.config.max_len = l;
    }
    let freq = type_frequency(ds);
    let resolver = ModelResolver {
        model: &comp,
        store: &comp_store,
        frequency: &freq,
    };
    let line = question.unwrap_or_else(|| {
        let mut buf = String::new();
        std::io::stdin().read_line(&mut buf).expect("read stdin");
        buf.trim().to_string()
    });
    let tokens = spatialnli_core::text::tokenize(&line);
    match run_pipeline(
        ds,
        &res.embeddings,
        &translator,
        &tr_store,
        &tokens,
        &resolver,
        PipelineOptions::default(),
    ) {
        Ok((answer, _)) => println!("{answer}"),
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(1);
        }
    }
}

fn cmd_evaluate(
    res: &Resources,
    name: &str,
    mode: &str,
    split: &str,
    paths: &ModelPaths,
    report: Option<PathBuf>,
) {
    let ds = dataset(res, name);
    let (translator, tr_store, comp, comp_store) = load_models(paths);
    let mode = match mode {
        "exact" => ScoreMode::Exact,
        _ => ScoreMode::Denotation,
    };
    let entries: Vec<_> = if split == "train" {
        ds.train().collect()
    } else {
        ds.test().collect()
    };
    let models = EvalModels {
        translator: &translator,
        tr_store: &tr_store,
        comprehension: Some((&comp, &comp_store)),
        random_seed: 7,
    };
    let rep = evaluate_corpus(res, ds, &models, Variant::default(), &entries, mode);
    print_report(&rep, report);
}

fn print_report(rep: &training::EvalReport, path: Option<PathBuf>) {
    if let Some(path) = path {
        ensure_parent(&path);
        let mut f = std::fs::File::create(&path).expect("report file");
        for row in &rep.rows {
            writeln!(f, "{}", serde_json::to_string(row).unwrap()).unwrap();
        }
        println!("rows written to {}", path.display());
    }
    println!(
        "{} {:?}: {}/{} = {:.1}%",
        rep.dataset,
        rep.mode,
        rep.correct,
        rep.total,
        100.0 * rep.accuracy
    );
    for (stage, n) in &rep.confusion {
        println!("  failed at {stage}: {n}");
    }
}

fn cmd_augment(
    res: &Resources,
    name: &str,
    types: &str,
    input: Option<PathBuf>,
    out: &PathBuf,
    max_per_source: usize,
) {
    use spatialnli_core::augment::{
        conjunction_combine, entity_replace, nested_replace, pp_shuffle, QaPair,
    };
    use spatialnli_core::logic_form::render;
    let ds = dataset(res, name);
    let wanted: Vec<&str> = types.split(',').map(str::trim).collect();
    let pairs: Vec<QaPair> = match input {
        Some(path) => std::fs::read_to_string(&path)
            .expect("input TSV")
            .lines()
            .filter_map(|l| l.split_once('\t').map(|(q, f)| (q.to_string(), f.to_string())))
            .map(|(q, f)| QaPair {
                question: spatialnli_core::text::tokenize(&q),
                form: spatialnli_core::logic_form::parse(&f).expect("input forms must parse"),
            })
            .collect(),
        None => ds
            .train()
            .map(|e| QaPair {
                question: e.tokens.clone(),
                form: e.form.clone(),
            })
            .collect(),
    };

    let mut out_lines: Vec<(Vec<String>, String)> = Vec::new();
    for pair in &pairs {
        if wanted.contains(&"pp") {
            if let Some(q) = pp_shuffle(&pair.question) {
                out_lines.push((q, render(&pair.form)));
            }
        }
        if wanted.contains(&"entity") {
            for r in entity_replace(pair, &ds.db).into_iter().take(max_per_source) {
                out_lines.push((r.question, render(&r.form)));
            }
        }
    }
    if wanted.contains(&"nested") || wanted.contains(&"conj") {
        let mut budget_nested = max_per_source * pairs.len().min(50);
        let mut budget_conj = budget_nested;
        'outer: for a in &pairs {
            for b in &pairs {
                if std::ptr::eq(a, b) {
                    continue;
                }
                if budget_nested == 0 && budget_conj == 0 {
                    break 'outer;
                }
                if wanted.contains(&"nested") && budget_nested > 0 {
                    if let Some(n) = nested_replace(a, b, &ds.db) {
                        out_lines.push((n.question, render(&n.form)));
                        budget_nested -= 1;
                    }
                }
                if wanted.contains(&"conj") && budget_conj > 0 {
                    if let Some(c) = conjunction_combine(a, b, &ds.db) {
                        out_lines.push((c.question, render(&c.form)));
                        budget_conj -= 1;
                    }
                }
            }
        }
    }
    ensure_parent(out);
    let mut f = std::fs::File::create(out).expect("output file");
    for (q, form) in &out_lines {
        writeln!(f, "{}\t{}", q.join(" "), form).unwrap();
    }
    println!("wrote {} augmented pairs to {}", out_lines.len(), out.display());
}

fn cmd_repl(res: &Resources, name: &str, paths: &ModelPaths) {
    let ds = dataset(res, name);
    let (translator, tr_store, comp, comp_store) = load_models(paths);
    let freq = type_frequency(ds);
    let resolver = ModelResolver {
        model: &comp,
        store: &comp_store,
        frequency: &freq,
    };
    let stdin = std::io::stdin();
    println!("enter questions, one per line (ctrl-d to quit):");
    for line in stdin.lock().lines() {
        let Ok(line) = line else { break };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let tokens = spatialnli_core::text::tokenize(line);
        match run_pipeline(
            ds,
            &res.embeddings,
            &translator,
            &tr_store,
            &tokens,
            &resolver,
            PipelineOptions::default(),
        ) {
            Ok((answer, trace)) => {
                println!("matches:");
                for p in &trace.pairs {
                    println!(
                        "  [{}..{}) {:?} -> {} ({:?}, {:?})",
                        p.start, p.end, p.phrase, p.entity, p.kind, p.method
                    );
                }
                for v in &trace.values {
                    println!(
                        "  value {:?}: types {:?} resolved {:?}",
                        v.phrase, v.types, v.resolved_type
                    );
                }
                println!("q':     {}", trace.injected.text());
                println!("s2p:    {:?}", trace.s2p.iter().collect::<Vec<_>>());
                println!("l':     {}", trace.translated);
                println!("answer: {answer}");
                if let Ok(form) = spatialnli_core::logic_form::parse(&answer) {
                    match spatialnli_core::geo::evaluate(&form, &ds.db) {
                        Ok(d) => println!(
                            "denotation: {{{}}}",
                            d.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
                        ),
                        Err(e) => println!("denotation: <{e}>"),
                    }
                }
            }
            Err(e) => println!("error: {e}"),
        }
    }
}

fn cmd_comprehend(
    res: &Resources,
    name: &str,
    paths: &ModelPaths,
    dump_records: Option<PathBuf>,
    eval_only: bool,
    cfg: &RunConfig,
) {
    let ds = dataset(res, name);
    if let Some(path) = dump_records {
        let entries: Vec<_> = ds.train().collect();
        let (records, _) = comprehension_data(res, ds, &entries);
        ensure_parent(&path);
        let mut f = std::fs::File::create(&path).expect("records file");
        for r in &records {
            writeln!(f, "{}", r.to_tsv()).unwrap();
        }
        println!("wrote {} records to {}", records.len(), path.display());
        return;
    }
    let (comp, comp_store) = if eval_only {
        load_comprehension(&paths.comprehension_checkpoint).unwrap_or_else(|e| {
            eprintln!("{e}");
            std::process::exit(2);
        })
    } else {
        let (model, store) =
            train_comprehension(res, ds, cfg.comprehension.clone(), |m| println!("{m}"));
        save_comprehension(&model, &store, &paths.comprehension_checkpoint, name);
        (model, store)
    };
    for (split, entries) in [
        ("train", ds.train().collect::<Vec<_>>()),
        ("test", ds.test().collect::<Vec<_>>()),
    ] {
        let (rcd, qu) = comprehension_metrics(res, ds, &comp, &comp_store, &entries);
        println!(
            "{name} {split}: acc_rcd {:.1}% acc_qu {:.1}%",
            100.0 * rcd,
            100.0 * qu
        );
    }
}
