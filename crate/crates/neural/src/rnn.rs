//! LSTM and GRU cells and sequence runners on the tape.

use crate::params::{Init, ParamId, ParameterStore};
use crate::tape::{NodeId, Tape};

/// Single-layer LSTM; gate order in the packed weight is i, f, g, o and the
/// forget-gate bias starts at one.
#[derive(Debug, Clone, Copy)]
pub struct LstmParams {
    pub w: ParamId,
    pub b: ParamId,
    pub input_dim: usize,
    pub hidden: usize,
}

impl LstmParams {
    pub fn init(store: &mut ParameterStore, name: &str, input_dim: usize, hidden: usize) -> Self {
        let w = store.get_or_init(
            &format!("{name}.w"),
            4 * hidden,
            input_dim + hidden,
            Init::ScaledFanIn(1.6),
        );
        let b = store.get_or_init(
            &format!("{name}.b"),
            1,
            4 * hidden,
            Init::ZerosWithOnes(hidden, hidden),
        );
        LstmParams {
            w,
            b,
            input_dim,
            hidden,
        }
    }

    pub fn step(
        &self,
        tape: &mut Tape,
        store: &ParameterStore,
        x: NodeId,
        h: NodeId,
        c: NodeId,
    ) -> (NodeId, NodeId) {
        let hsz = self.hidden;
        let xh = tape.concat(vec![x, h]);
        let z = tape.affine(store, self.w, Some(self.b), xh);
        let zi = tape.slice(z, 0, hsz);
        let zf = tape.slice(z, hsz, hsz);
        let zg = tape.slice(z, 2 * hsz, hsz);
        let zo = tape.slice(z, 3 * hsz, hsz);
        let i = tape.sigmoid(zi);
        let f = tape.sigmoid(zf);
        let g = tape.tanh(zg);
        let o = tape.sigmoid(zo);
        let fc = tape.hadamard(f, c);
        let ig = tape.hadamard(i, g);
        let c_next = tape.add(fc, ig);
        let tc = tape.tanh(c_next);
        let h_next = tape.hadamard(o, tc);
        (h_next, c_next)
    }
}

/// All hidden states of an LSTM over a sequence, zero initial state.
pub fn lstm_forward(
    tape: &mut Tape,
    store: &ParameterStore,
    params: &LstmParams,
    inputs: &[NodeId],
) -> Vec<NodeId> {
    let mut h = tape.zeros(params.hidden);
    let mut c = tape.zeros(params.hidden);
    let mut out = Vec::with_capacity(inputs.len());
    for &x in inputs {
        let (nh, nc) = params.step(tape, store, x, h, c);
        h = nh;
        c = nc;
        out.push(h);
    }
    out
}

/// Single-layer GRU; h' = (1 - z) * h + z * hcand.
#[derive(Debug, Clone, Copy)]
pub struct GruParams {
    pub w_zr: ParamId,
    pub b_zr: ParamId,
    pub w_h: ParamId,
    pub b_h: ParamId,
    pub input_dim: usize,
    pub hidden: usize,
}

impl GruParams {
    pub fn init(store: &mut ParameterStore, name: &str, input_dim: usize, hidden: usize) -> Self {
        let w_zr = store.get_or_init(
            &format!("{name}.w_zr"),
            2 * hidden,
            input_dim + hidden,
            Init::ScaledFanIn(1.6),
        );
        let b_zr = store.get_or_init(&format!("{name}.b_zr"), 1, 2 * hidden, Init::Zeros);
        let w_h = store.get_or_init(
            &format!("{name}.w_h"),
            hidden,
            input_dim + hidden,
            Init::ScaledFanIn(1.6),
        );
        let b_h = store.get_or_init(&format!("{name}.b_h"), 1, hidden, Init::Zeros);
        GruParams {
            w_zr,
            b_zr,
            w_h,
            b_h,
            input_dim,
            hidden,
        }
    }

    pub fn step(&self, tape: &mut Tape, store: &ParameterStore, x: NodeId, h: NodeId) -> NodeId {
        let hsz = self.hidden;
        let xh = tape.concat(vec![x, h]);
        let zr_pre = tape.affine(store, self.w_zr, Some(self.b_zr), xh);
        let zr = tape.sigmoid(zr_pre);
        let z = tape.slice(zr, 0, hsz);
        let r = tape.slice(zr, hsz, hsz);
        let rh = tape.hadamard(r, h);
        let xrh = tape.concat(vec![x, rh]);
        let cand_pre = tape.affine(store, self.w_h, Some(self.b_h), xrh);
        let cand = tape.tanh(cand_pre);
        let keep = tape.one_minus(z);
        let kh = tape.hadamard(keep, h);
        let zc = tape.hadamard(z, cand);
        tape.add(kh, zc)
    }
}

pub fn gru_forward(
    tape: &mut Tape,
    store: &ParameterStore,
    params: &GruParams,
    inputs: &[NodeId],
) -> Vec<NodeId> {
    let mut h = tape.zeros(params.hidden);
    let mut out = Vec::with_capacity(inputs.len());
    for &x in inputs {
        h = params.step(tape, store, x, h);
        out.push(h);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Init;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_input_empty_output() {
        let mut store = ParameterStore::new(3);
        let lstm = LstmParams::init(&mut store, "l", 4, 5);
        let gru = GruParams::init(&mut store, "g", 4, 5);
        let mut tape = Tape::new();
        assert!(lstm_forward(&mut tape, &store, &lstm, &[]).is_empty());
        assert!(gru_forward(&mut tape, &store, &gru, &[]).is_empty());
    }

    #[test]
    fn zero_weights_zero_input_give_zero_states() {
        let mut store = ParameterStore::new(3);
        let lstm = LstmParams::init(&mut store, "l", 4, 5);
        let gru = GruParams::init(&mut store, "g", 4, 5);
        for p in [lstm.w, lstm.b, gru.w_zr, gru.b_zr, gru.w_h, gru.b_h] {
            let n = store.get(p).len();
            store.set_values(p, &vec![0.0; n]);
        }
        let mut tape = Tape::new();
        let x = tape.zeros(4);
        let hs = lstm_forward(&mut tape, &store, &lstm, &[x]);
        assert!(tape.value(hs[0]).iter().all(|v| *v == 0.0));
        let hs = gru_forward(&mut tape, &store, &gru, &[x]);
        assert!(tape.value(hs[0]).iter().all(|v| *v == 0.0));
    }

    /// Plain scalar-loop re-implementations used as an independent oracle.
    fn lstm_reference(
        w: &[f64],
        b: &[f64],
        inputs: &[Vec<f64>],
        in_dim: usize,
        hidden: usize,
    ) -> Vec<Vec<f64>> {
        let cols = in_dim + hidden;
        let mut h = vec![0.0; hidden];
        let mut c = vec![0.0; hidden];
        let mut out = Vec::new();
        for x in inputs {
            let mut xh = x.clone();
            xh.extend_from_slice(&h);
            let gate = |row: usize| -> f64 {
                let mut acc = b[row];
                for k in 0..cols {
                    acc += w[row * cols + k] * xh[k];
                }
                acc
            };
            let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
            let mut nh = vec![0.0; hidden];
            let mut nc = vec![0.0; hidden];
            for j in 0..hidden {
                let i = sig(gate(j));
                let f = sig(gate(hidden + j));
                let g = gate(2 * hidden + j).tanh();
                let o = sig(gate(3 * hidden + j));
                nc[j] = f * c[j] + i * g;
                nh[j] = o * nc[j].tanh();
            }
            h = nh;
            c = nc;
            out.push(h.clone());
        }
        out
    }

    fn gru_reference(
        w_zr: &[f64],
        b_zr: &[f64],
        w_h: &[f64],
        b_h: &[f64],
        inputs: &[Vec<f64>],
        in_dim: usize,
        hidden: usize,
    ) -> Vec<Vec<f64>> {
        let cols = in_dim + hidden;
        let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
        let mut h = vec![0.0; hidden];
        let mut out = Vec::new();
        for x in inputs {
            let mut xh = x.clone();
            xh.extend_from_slice(&h);
            let mut z = vec![0.0; hidden];
            let mut r = vec![0.0; hidden];
            for j in 0..hidden {
                let mut az = b_zr[j];
                let mut ar = b_zr[hidden + j];
                for k in 0..cols {
                    az += w_zr[j * cols + k] * xh[k];
                    ar += w_zr[(hidden + j) * cols + k] * xh[k];
                }
                z[j] = sig(az);
                r[j] = sig(ar);
            }
            let mut xrh = x.clone();
            for j in 0..hidden {
                xrh.push(r[j] * h[j]);
            }
            let mut nh = vec![0.0; hidden];
            for j in 0..hidden {
                let mut a = b_h[j];
                for k in 0..cols {
                    a += w_h[j * cols + k] * xrh[k];
                }
                nh[j] = (1.0 - z[j]) * h[j] + z[j] * a.tanh();
            }
            h = nh;
            out.push(h.clone());
        }
        out
    }

    #[test]
    fn lstm_matches_scalar_reference() {
        let mut store = ParameterStore::new(11);
        let lstm = LstmParams::init(&mut store, "l", 3, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let inputs: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let mut tape = Tape::new();
        let nodes: Vec<_> = inputs.iter().map(|x| tape.input(x.clone())).collect();
        let hs = lstm_forward(&mut tape, &store, &lstm, &nodes);
        let want = lstm_reference(
            &store.get(lstm.w).data,
            &store.get(lstm.b).data,
            &inputs,
            3,
            4,
        );
        for (got, want) in hs.iter().zip(&want) {
            for (a, b) in tape.value(*got).iter().zip(want) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn gru_matches_scalar_reference() {
        let mut store = ParameterStore::new(13);
        let gru = GruParams::init(&mut store, "g", 3, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let inputs: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let mut tape = Tape::new();
        let nodes: Vec<_> = inputs.iter().map(|x| tape.input(x.clone())).collect();
        let hs = gru_forward(&mut tape, &store, &gru, &nodes);
        let want = gru_reference(
            &store.get(gru.w_zr).data,
            &store.get(gru.b_zr).data,
            &store.get(gru.w_h).data,
            &store.get(gru.b_h).data,
            &inputs,
            3,
            4,
        );
        for (got, want) in hs.iter().zip(&want) {
            for (a, b) in tape.value(*got).iter().zip(want) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }
}
