//! The context-comprehension classifier: does a marked phrase in a question
//! have a given type?
//!
//! Both the question (with the phrase enclosed in `<@>` markers) and the
//! candidate type run through their own two-layer LSTM encoders. An
//! attentive LSTM then walks the type phrase while attending over the
//! question states, in both directions, and a small MLP turns the final
//! states into a yes/no probability.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use spatialnli_core::embed::EmbeddingTable;
use spatialnli_core::inject::MARKER;

use crate::attention::{AttentionParams, Normalization};
use crate::optim::{train_step, Adam, AdamConfig, TrainError};
use crate::params::{Init, ParamId, ParameterStore};
use crate::rnn::{lstm_forward, LstmParams};
use crate::tape::{NodeId, Tape};

pub const UNK: &str = "<unk>";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComprehensionConfig {
    pub embed_dim: usize,
    pub hidden: usize,
    pub attn_dim: usize,
    pub mlp_hidden: usize,
    pub lr: f64,
    pub epochs: usize,
    pub batch: usize,
    pub seed: u64,
    /// "softmax" or "ratio" attention normalization.
    pub attention: String,
}

impl Default for ComprehensionConfig {
    fn default() -> Self {
        ComprehensionConfig {
            embed_dim: 300,
            hidden: 200,
            attn_dim: 200,
            mlp_hidden: 100,
            lr: 1e-3,
            epochs: 18,
            batch: 16,
            seed: 42,
            attention: "softmax".into(),
        }
    }
}

/// One training/evaluation sample: a question with exactly one enclosed
/// span, a candidate type phrase, and the gold answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComprehensionRecord {
    pub question: Vec<String>,
    pub type_phrase: Vec<String>,
    pub label: bool,
}

impl ComprehensionRecord {
    pub fn to_tsv(&self) -> String {
        format!(
            "{}\t{}\t{}",
            self.question.join(" "),
            self.type_phrase.join(" "),
            if self.label { "True" } else { "False" }
        )
    }
}

/// Enclose `[start, end)` in marker tokens.
pub fn mark_span(tokens: &[String], start: usize, end: usize) -> Vec<String> {
    let mut out = tokens[..start].to_vec();
    out.push(MARKER.to_string());
    out.extend(tokens[start..end].iter().cloned());
    out.push(MARKER.to_string());
    out.extend(tokens[end..].iter().cloned());
    out
}

/// For one ambiguous value: one record per type in the inventory, labeled
/// against the gold type.
pub fn build_records(
    tokens: &[String],
    start: usize,
    end: usize,
    inventory: &[String],
    gold_type: &str,
) -> Vec<ComprehensionRecord> {
    let question = mark_span(tokens, start, end);
    inventory
        .iter()
        .map(|t| ComprehensionRecord {
            question: question.clone(),
            type_phrase: vec![t.clone()],
            label: t == gold_type,
        })
        .collect()
}

/// Copy positives until they roughly balance the negatives.
pub fn replicate_positives(records: &[ComprehensionRecord]) -> Vec<ComprehensionRecord> {
    let pos = records.iter().filter(|r| r.label).count();
    let neg = records.len() - pos;
    if pos == 0 || neg <= pos {
        return records.to_vec();
    }
    let copies = neg / pos;
    let mut out = Vec::with_capacity(neg + pos * copies);
    for r in records {
        if r.label {
            for _ in 0..copies {
                out.push(r.clone());
            }
        } else {
            out.push(r.clone());
        }
    }
    out
}

pub struct Comprehension {
    pub config: ComprehensionConfig,
    vocab: BTreeMap<String, usize>,
    emb: ParamId,
    q1: LstmParams,
    q2: LstmParams,
    t1: LstmParams,
    t2: LstmParams,
    att_fwd: LstmParams,
    att_bwd: LstmParams,
    attn_fwd: AttentionParams,
    attn_bwd: AttentionParams,
    mlp_w1: ParamId,
    mlp_b1: ParamId,
    mlp_w2: ParamId,
    mlp_b2: ParamId,
}

impl Comprehension {
    /// Declare all parameters. `vocab_tokens` fixes the embedding rows;
    /// known tokens are initialized from the pre-trained vectors.
    pub fn new(
        config: ComprehensionConfig,
        vocab_tokens: Vec<String>,
        store: &mut ParameterStore,
        pretrained: Option<&EmbeddingTable>,
    ) -> Comprehension {
        let mut vocab = BTreeMap::new();
        let mut tokens = vec![UNK.to_string(), MARKER.to_string()];
        tokens.extend(vocab_tokens);
        for t in tokens {
            let t = t.to_lowercase();
            let next = vocab.len();
            vocab.entry(t).or_insert(next);
        }

        let d = config.embed_dim;
        let h = config.hidden;
        // Component scale matches typical pre-trained vectors; rows are
        // overwritten below where the table covers the token.
        let emb = store.get_or_init("comp.emb", vocab.len(), d, Init::Uniform(0.4));
        if let Some(table) = pretrained {
            for (tok, &row) in &vocab {
                if table.contains(tok) {
                    store.set_row(emb, row, &table.vector(tok));
                }
            }
        }
        let q1 = LstmParams::init(store, "comp.q1", d, h);
        let q2 = LstmParams::init(store, "comp.q2", h, h);
        let t1 = LstmParams::init(store, "comp.t1", d, h);
        let t2 = LstmParams::init(store, "comp.t2", h, h);
        let att_fwd = LstmParams::init(store, "comp.att_f", 2 * h, h);
        let att_bwd = LstmParams::init(store, "comp.att_b", 2 * h, h);
        let attn_fwd = AttentionParams::init(store, "comp.attn_f", h, 2 * h, config.attn_dim);
        let attn_bwd = AttentionParams::init(store, "comp.attn_b", h, 2 * h, config.attn_dim);
        // Each direction contributes its final state and its final attention
        // context; with a single-token type the context is the only path
        // through which the question reaches the classifier.
        let mlp_w1 = store.get_or_init("comp.mlp_w1", config.mlp_hidden, 4 * h, Init::FanIn);
        let mlp_b1 = store.get_or_init("comp.mlp_b1", 1, config.mlp_hidden, Init::Zeros);
        let mlp_w2 = store.get_or_init("comp.mlp_w2", 2, config.mlp_hidden, Init::FanIn);
        let mlp_b2 = store.get_or_init("comp.mlp_b2", 1, 2, Init::Zeros);
        Comprehension {
            config,
            vocab,
            emb,
            q1,
            q2,
            t1,
            t2,
            att_fwd,
            att_bwd,
            attn_fwd,
            attn_bwd,
            mlp_w1,
            mlp_b1,
            mlp_w2,
            mlp_b2,
        }
    }

    fn norm(&self) -> Normalization {
        if self.config.attention == "ratio" {
            Normalization::Ratio
        } else {
            Normalization::Softmax
        }
    }

    fn embed(&self, tape: &mut Tape, store: &ParameterStore, tokens: &[String]) -> Vec<NodeId> {
        tokens
            .iter()
            .map(|t| {
                let row = self
                    .vocab
                    .get(&t.to_lowercase())
                    .copied()
                    .unwrap_or_else(|| self.vocab[UNK]);
                tape.embed_row(store, self.emb, row)
            })
            .collect()
    }

    /// Two logits (false, true).
    pub fn logits(
        &self,
        tape: &mut Tape,
        store: &ParameterStore,
        record: &ComprehensionRecord,
    ) -> NodeId {
        let h = self.config.hidden;
        let q_emb = self.embed(tape, store, &record.question);
        let t_emb = self.embed(tape, store, &record.type_phrase);
        let hq = {
            let l1 = lstm_forward(tape, store, &self.q1, &q_emb);
            lstm_forward(tape, store, &self.q2, &l1)
        };
        let ht = {
            let l1 = lstm_forward(tape, store, &self.t1, &t_emb);
            lstm_forward(tape, store, &self.t2, &l1)
        };

        let run = |tape: &mut Tape,
                   order: Vec<usize>,
                   att: &LstmParams,
                   attn: &AttentionParams|
         -> NodeId {
            let proj = attn.project(tape, store, &hq);
            let mut beta = tape.zeros(h);
            let mut d = tape.zeros(h);
            let mut c = tape.zeros(h);
            for i in order {
                let input = tape.concat(vec![ht[i], beta]);
                let (nd, nc) = att.step(tape, store, input, d, c);
                d = nd;
                c = nc;
                let query = tape.concat(vec![ht[i], d]);
                let scores = attn.scores(tape, store, &proj, query);
                let weights = match self.norm() {
                    Normalization::Softmax => tape.softmax(scores),
                    Normalization::Ratio => tape.ratio_norm(scores),
                };
                beta = tape.weighted_sum(weights, hq.clone());
            }
            tape.concat(vec![d, beta])
        };

        let m = ht.len();
        let d_fwd = run(tape, (0..m).collect(), &self.att_fwd, &self.attn_fwd);
        let d_bwd = run(tape, (0..m).rev().collect(), &self.att_bwd, &self.attn_bwd);
        let both = tape.concat(vec![d_fwd, d_bwd]);
        let pre = tape.affine(store, self.mlp_w1, Some(self.mlp_b1), both);
        let act = tape.tanh(pre);
        tape.affine(store, self.mlp_w2, Some(self.mlp_b2), act)
    }

    pub fn loss(
        &self,
        tape: &mut Tape,
        store: &ParameterStore,
        record: &ComprehensionRecord,
    ) -> NodeId {
        let logits = self.logits(tape, store, record);
        tape.multi_hot_loss(logits, vec![usize::from(record.label)])
    }

    /// P(label = true).
    pub fn predict(&self, store: &ParameterStore, record: &ComprehensionRecord) -> f64 {
        let mut tape = Tape::new();
        let logits = self.logits(&mut tape, store, record);
        tape.softmax_value(logits)[1]
    }

    /// P(true) for a phrase span and a candidate type in a raw question.
    pub fn predict_span(
        &self,
        store: &ParameterStore,
        tokens: &[String],
        start: usize,
        end: usize,
        type_phrase: &str,
    ) -> f64 {
        let record = ComprehensionRecord {
            question: mark_span(tokens, start, end),
            type_phrase: type_phrase.split_whitespace().map(str::to_string).collect(),
            label: true,
        };
        self.predict(store, &record)
    }

    /// Argmax over candidate types; ties break by `frequency` then name.
    pub fn resolve_type(
        &self,
        store: &ParameterStore,
        tokens: &[String],
        start: usize,
        end: usize,
        types: &[String],
        frequency: &BTreeMap<String, usize>,
    ) -> String {
        assert!(!types.is_empty());
        if types.len() == 1 {
            return types[0].clone();
        }
        let mut best: Option<(f64, usize, &String)> = None;
        for t in types {
            let p = self.predict_span(store, tokens, start, end, t);
            let freq = frequency.get(t).copied().unwrap_or(0);
            let better = match &best {
                None => true,
                Some((bp, bf, bt)) => {
                    p > *bp || (p == *bp && (freq > *bf || (freq == *bf && t.as_str() < bt.as_str())))
                }
            };
            if better {
                best = Some((p, freq, t));
            }
        }
        best.unwrap().2.clone()
    }

    pub fn train(
        &self,
        store: &mut ParameterStore,
        records: &[ComprehensionRecord],
        on_epoch: &mut dyn FnMut(usize, f64),
    ) -> Result<(), TrainError> {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut adam = Adam::new(AdamConfig {
            lr: self.config.lr,
            ..AdamConfig::default()
        });
        let mut order: Vec<usize> = (0..records.len()).collect();
        for epoch in 0..self.config.epochs {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(
                self.config.seed ^ (epoch as u64).wrapping_mul(0x9e3779b97f4a7c15),
            );
            order.shuffle(&mut rng);
            let mut total = 0.0;
            let mut seen = 0usize;
            for chunk in order.chunks(self.config.batch.max(1)) {
                let batch: Vec<&ComprehensionRecord> = chunk.iter().map(|&i| &records[i]).collect();
                let loss = train_step(store, &mut adam, &batch, |tape, store, r| {
                    self.loss(tape, store, r)
                })?;
                total += loss * batch.len() as f64;
                seen += batch.len();
            }
            on_epoch(epoch, total / seen.max(1) as f64);
        }
        Ok(())
    }

    pub fn vocab_tokens(&self) -> Vec<String> {
        let mut tokens: Vec<(usize, &String)> =
            self.vocab.iter().map(|(t, &i)| (i, t)).collect();
        tokens.sort_unstable();
        tokens.into_iter().map(|(_, t)| t.clone()).collect()
    }
}

/// Record-level accuracy of thresholded predictions.
pub fn accuracy_records(
    model: &Comprehension,
    store: &ParameterStore,
    records: &[ComprehensionRecord],
) -> f64 {
    if records.is_empty() {
        return 1.0;
    }
    let correct = records
        .iter()
        .filter(|r| (model.predict(store, r) > 0.5) == r.label)
        .count();
    correct as f64 / records.len() as f64
}
