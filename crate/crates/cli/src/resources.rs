//! Loading of the data root: databases, corpora, splits, vectors, lexicons.
//!
//! The root comes from `--data`, then the `SPATIALNLI_DATA` environment
//! variable, then `./data`. Each dataset lives in its own directory with a
//! schema, per-table CSV facts, a tab-separated corpus, split index files,
//! a lexicon, and an optional `meta.toml` with constructor overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use spatialnli_core::embed::EmbeddingTable;
use spatialnli_core::geo::GeoDatabase;
use spatialnli_core::logic_form::{self, LogicForm};
use spatialnli_core::mapper::MapperConfig;
use spatialnli_core::text::tokenize;

#[derive(Debug, Error)]
pub enum ResourceError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Store(#[from] spatialnli_core::geo::StoreError),
    #[error(transparent)]
    Embed(#[from] spatialnli_core::embed::EmbedError),
    #[error("{path}:{line}: corpus line needs `question<TAB>form`")]
    CorpusFormat { path: String, line: usize },
    #[error("{path}:{line}: {source}")]
    CorpusParse {
        path: String,
        line: usize,
        source: logic_form::ParseError,
    },
    #[error("{0}: bad meta.toml: {1}")]
    Meta(String, String),
}

/// One corpus entry, pre-tokenized and pre-parsed.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub question: String,
    pub tokens: Vec<String>,
    pub form_text: String,
    pub form: LogicForm,
}

pub struct Dataset {
    pub name: String,
    pub db: GeoDatabase,
    pub corpus: Vec<CorpusEntry>,
    pub train_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
    pub mapper: MapperConfig,
}

impl Dataset {
    pub fn train(&self) -> impl Iterator<Item = &CorpusEntry> {
        self.train_idx.iter().map(|&i| &self.corpus[i])
    }

    pub fn test(&self) -> impl Iterator<Item = &CorpusEntry> {
        self.test_idx.iter().map(|&i| &self.corpus[i])
    }
}

pub struct Resources {
    pub root: PathBuf,
    pub embeddings: EmbeddingTable,
    pub datasets: BTreeMap<String, Dataset>,
}

pub fn data_root(flag: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Ok(env) = std::env::var("SPATIALNLI_DATA") {
        if !env.is_empty() {
            return PathBuf::from(env);
        }
    }
    PathBuf::from("data")
}

fn read(path: &Path) -> Result<String, ResourceError> {
    std::fs::read_to_string(path).map_err(|source| ResourceError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load_meta_ctors(dir: &Path) -> Result<BTreeMap<String, String>, ResourceError> {
    let path = dir.join("meta.toml");
    if !path.exists() {
        return Ok(BTreeMap::new());
    }
    let text = read(&path)?;
    let value: toml::Value = text
        .parse()
        .map_err(|e: toml::de::Error| ResourceError::Meta(path.display().to_string(), e.to_string()))?;
    let mut out = BTreeMap::new();
    if let Some(ctors) = value.get("ctors").and_then(|v| v.as_table()) {
        for (table, ctor) in ctors {
            if let Some(c) = ctor.as_str() {
                out.insert(table.clone(), c.to_string());
            }
        }
    }
    Ok(out)
}

pub fn load_dataset(
    root: &Path,
    name: &str,
    mapper_defaults: &MapperConfig,
) -> Result<Dataset, ResourceError> {
    let dir = root.join(name);
    let ctors = load_meta_ctors(&dir)?;
    let db = GeoDatabase::load(&dir.join("schema.txt"), &dir.join("facts"), &ctors)?;

    let corpus_path = dir.join("corpus.tsv");
    let text = read(&corpus_path)?;
    let mut corpus = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (q, f) = line.split_once('\t').ok_or_else(|| ResourceError::CorpusFormat {
            path: corpus_path.display().to_string(),
            line: lineno + 1,
        })?;
        let form = logic_form::parse(f).map_err(|source| ResourceError::CorpusParse {
            path: corpus_path.display().to_string(),
            line: lineno + 1,
            source,
        })?;
        corpus.push(CorpusEntry {
            question: q.to_string(),
            tokens: tokenize(q),
            form_text: f.to_string(),
            form,
        });
    }

    let read_split = |file: &str| -> Result<Vec<usize>, ResourceError> {
        Ok(read(&dir.join(file))?
            .lines()
            .filter(|l| !l.trim().is_empty())
            .filter_map(|l| l.trim().parse().ok())
            .collect())
    };
    let train_idx = read_split("split_train.txt")?;
    let test_idx = read_split("split_test.txt")?;

    let mut mapper = mapper_defaults.clone();
    mapper
        .load_lexicon(&dir.join("lexicon.tsv"))
        .map_err(|source| ResourceError::Io {
            path: dir.join("lexicon.tsv").display().to_string(),
            source,
        })?;
    Ok(Dataset {
        name: name.to_string(),
        db,
        corpus,
        train_idx,
        test_idx,
        mapper,
    })
}

pub fn load_resources(
    root: &Path,
    datasets: &[&str],
    mapper_overrides: impl Fn(&mut MapperConfig),
) -> Result<Resources, ResourceError> {
    let mut defaults = MapperConfig::default();
    defaults
        .load_stopwords(&root.join("stopwords.txt"))
        .map_err(|source| ResourceError::Io {
            path: root.join("stopwords.txt").display().to_string(),
            source,
        })?;
    mapper_overrides(&mut defaults);
    let embeddings = EmbeddingTable::load(&root.join("embeddings/vectors300.txt"))?;
    let mut map = BTreeMap::new();
    for name in datasets {
        map.insert(name.to_string(), load_dataset(root, name, &defaults)?);
    }
    Ok(Resources {
        root: root.to_path_buf(),
        embeddings,
        datasets: map,
    })
}
