//! Additive attention: scores v . tanh(W_h h_j + W_q query), normalized
//! either by softmax (default) or by the plain ratio e / sum(e).

use crate::params::{Init, ParamId, ParameterStore};
use crate::tape::{NodeId, Tape};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AttendError {
    #[error("attention over an empty sequence")]
    EmptySequence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    Softmax,
    /// e / sum(e) as printed; can leave [0,1] when scores mix signs.
    Ratio,
}

#[derive(Debug, Clone, Copy)]
pub struct AttentionParams {
    pub w_h: ParamId,
    pub w_q: ParamId,
    pub v: ParamId,
    pub dim: usize,
}

impl AttentionParams {
    pub fn init(
        store: &mut ParameterStore,
        name: &str,
        state_dim: usize,
        query_dim: usize,
        attn_dim: usize,
    ) -> Self {
        AttentionParams {
            w_h: store.get_or_init(&format!("{name}.w_h"), attn_dim, state_dim, Init::FanIn),
            w_q: store.get_or_init(&format!("{name}.w_q"), attn_dim, query_dim, Init::FanIn),
            v: store.get_or_init(&format!("{name}.v"), 1, attn_dim, Init::FanIn),
            dim: attn_dim,
        }
    }

    /// Project the attended states once per sequence; reused across steps.
    pub fn project(
        &self,
        tape: &mut Tape,
        store: &ParameterStore,
        states: &[NodeId],
    ) -> Vec<NodeId> {
        states
            .iter()
            .map(|h| tape.affine(store, self.w_h, None, *h))
            .collect()
    }

    /// Unnormalized scores for a query against pre-projected states.
    pub fn scores(
        &self,
        tape: &mut Tape,
        store: &ParameterStore,
        projected: &[NodeId],
        query: NodeId,
    ) -> NodeId {
        let q = tape.affine(store, self.w_q, None, query);
        tape.score_each(store, projected.to_vec(), q, self.v)
    }
}

/// Full attention pass: weights over `states` for `query`, and the weighted
/// context vector.
pub fn attend(
    tape: &mut Tape,
    store: &ParameterStore,
    params: &AttentionParams,
    states: &[NodeId],
    query: NodeId,
    norm: Normalization,
) -> Result<(NodeId, NodeId), AttendError> {
    if states.is_empty() {
        return Err(AttendError::EmptySequence);
    }
    let projected = params.project(tape, store, states);
    let scores = params.scores(tape, store, &projected, query);
    let weights = match norm {
        Normalization::Softmax => tape.softmax(scores),
        Normalization::Ratio => tape.ratio_norm(scores),
    };
    let context = tape.weighted_sum(weights, states.to_vec());
    Ok((context, weights))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_state_gets_weight_one() {
        let mut store = ParameterStore::new(2);
        let p = AttentionParams::init(&mut store, "a", 3, 2, 4);
        let mut tape = Tape::new();
        let h = tape.input(vec![0.3, -0.2, 0.9]);
        let q = tape.input(vec![0.1, 0.1]);
        let (context, weights) =
            attend(&mut tape, &store, &p, &[h], q, Normalization::Softmax).unwrap();
        assert_eq!(tape.value(weights), &[1.0]);
        assert_eq!(tape.value(context), tape.value(h));
    }

    #[test]
    fn identical_states_get_uniform_weights() {
        let mut store = ParameterStore::new(2);
        let p = AttentionParams::init(&mut store, "a", 3, 2, 4);
        let mut tape = Tape::new();
        let h1 = tape.input(vec![0.3, -0.2, 0.9]);
        let h2 = tape.input(vec![0.3, -0.2, 0.9]);
        let q = tape.input(vec![0.1, 0.1]);
        let (_, weights) =
            attend(&mut tape, &store, &p, &[h1, h2], q, Normalization::Softmax).unwrap();
        let w = tape.value(weights);
        assert!((w[0] - 0.5).abs() < 1e-12);
        assert!((w[0] + w[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matches_direct_formula() {
        let mut store = ParameterStore::new(9);
        let p = AttentionParams::init(&mut store, "a", 2, 2, 3);
        let mut tape = Tape::new();
        let states = [
            tape.input(vec![0.5, -1.0]),
            tape.input(vec![-0.3, 0.8]),
            tape.input(vec![1.2, 0.1]),
        ];
        let q = tape.input(vec![0.2, -0.4]);
        let (context, weights) =
            attend(&mut tape, &store, &p, &states, q, Normalization::Softmax).unwrap();

        // Recompute with plain loops.
        let wh = store.get(p.w_h);
        let wq = store.get(p.w_q);
        let vv = &store.get(p.v).data;
        let qv = [0.2, -0.4];
        let sv = [[0.5, -1.0], [-0.3, 0.8], [1.2, 0.1]];
        let mut scores = [0.0; 3];
        for (j, s) in sv.iter().enumerate() {
            let mut e = 0.0;
            for a in 0..3 {
                let mut u = 0.0;
                for k in 0..2 {
                    u += wh.data[a * 2 + k] * s[k] + wq.data[a * 2 + k] * qv[k];
                }
                e += vv[a] * u.tanh();
            }
            scores[j] = e;
        }
        let m = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = scores.iter().map(|x| (x - m).exp()).collect();
        let z: f64 = exps.iter().sum();
        let want_w: Vec<f64> = exps.iter().map(|e| e / z).collect();
        for (a, b) in tape.value(weights).iter().zip(&want_w) {
            assert!((a - b).abs() < 1e-12);
        }
        let mut want_c = [0.0; 2];
        for (j, s) in sv.iter().enumerate() {
            for k in 0..2 {
                want_c[k] += want_w[j] * s[k];
            }
        }
        for (a, b) in tape.value(context).iter().zip(&want_c) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn ratio_norm_weights_sum_to_one() {
        let mut store = ParameterStore::new(2);
        let p = AttentionParams::init(&mut store, "a", 2, 2, 3);
        let mut tape = Tape::new();
        let states = [tape.input(vec![0.5, -1.0]), tape.input(vec![0.7, 0.3])];
        let q = tape.input(vec![0.2, -0.4]);
        let (_, weights) =
            attend(&mut tape, &store, &p, &states, q, Normalization::Ratio).unwrap();
        let w = tape.value(weights);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn empty_sequence_is_an_error() {
        let mut store = ParameterStore::new(2);
        let p = AttentionParams::init(&mut store, "a", 2, 2, 3);
        let mut tape = Tape::new();
        let q = tape.input(vec![0.2, -0.4]);
        assert_eq!(
            attend(&mut tape, &store, &p, &[], q, Normalization::Softmax).unwrap_err(),
            AttendError::EmptySequence
        );
    }
}
