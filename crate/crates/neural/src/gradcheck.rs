//! Central finite-difference verification of the analytic gradients.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::params::ParameterStore;
use crate::tape::{NodeId, Tape};

/// Max relative error between analytic and numeric derivatives over up to
/// `max_coords` randomly sampled parameter coordinates (all coordinates when
/// fewer exist). `forward` must be a pure function of the store.
pub fn grad_check(
    store: &mut ParameterStore,
    eps: f64,
    max_coords: usize,
    seed: u64,
    mut forward: impl FnMut(&mut Tape, &ParameterStore) -> NodeId,
) -> f64 {
    store.zero_grads();
    let mut tape = Tape::new();
    let loss = forward(&mut tape, store);
    tape.backward(loss, store);

    let mut coords: Vec<(usize, usize)> = (0..store.len())
        .flat_map(|p| {
            let n = store.get(crate::params::ParamId(p)).len();
            (0..n).map(move |i| (p, i))
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    coords.shuffle(&mut rng);
    coords.truncate(max_coords);

    let mut worst: f64 = 0.0;
    for (p, i) in coords {
        let id = crate::params::ParamId(p);
        let analytic = store.get(id).grad[i];
        let orig = store.get(id).data[i];

        store.get_mut(id).data[i] = orig + eps;
        let mut t = Tape::new();
        let id_up = forward(&mut t, store);
        let up = t.scalar(id_up);
        store.get_mut(id).data[i] = orig - eps;
        let mut t = Tape::new();
        let id_down = forward(&mut t, store);
        let down = t.scalar(id_down);
        store.get_mut(id).data[i] = orig;

        let numeric = (up - down) / (2.0 * eps);
        // Central differences bottom out near 1e-16/eps from cancellation in
        // up - down; coordinates whose derivative sits at that noise level
        // on both sides carry no signal and count as matching.
        let floor = 1e-10 / eps;
        if analytic.abs() < floor && numeric.abs() < floor {
            continue;
        }
        let rel = (analytic - numeric).abs() / (analytic.abs() + numeric.abs() + 1e-12);
        if rel > worst {
            worst = rel;
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attention::{attend, AttentionParams, Normalization};
    use crate::params::Init;
    use crate::rnn::{gru_forward, lstm_forward, GruParams, LstmParams};

    /// Reduce a vector node to a scalar by a fixed weighted sum, so losses
    /// exercise every output coordinate.
    fn spread_loss(tape: &mut Tape, x: NodeId) -> NodeId {
        let n = tape.value(x).len();
        let coeffs: Vec<f64> = (0..n).map(|i| 0.3 + 0.1 * i as f64).collect();
        let c = tape.input(coeffs);
        let prod = tape.hadamard(c, x);
        // Sum via an all-ones weighted sum of the single item.
        let one = tape.input(vec![1.0]);
        let summed = tape.weighted_sum(one, vec![prod]);
        let mut total = tape.slice(summed, 0, 1);
        for i in 1..n {
            let s = tape.slice(summed, i, 1);
            total = tape.add(total, s);
        }
        total
    }

    #[test]
    fn linear_layer_gradient_is_exact() {
        let mut store = ParameterStore::new(21);
        let w = store.get_or_init("w", 3, 4, Init::FanIn);
        let b = store.get_or_init("b", 1, 3, Init::Uniform(0.5));
        let err = grad_check(&mut store, 1e-6, 200, 1, |tape, store| {
            let x = tape.input(vec![0.4, -0.2, 0.8, 0.1]);
            let y = tape.affine(store, w, Some(b), x);
            spread_loss(tape, y)
        });
        assert!(err <= 1e-9, "linear layer rel err {err}");
    }

    #[test]
    fn lstm_stack_gradient_within_tolerance() {
        let mut store = ParameterStore::new(22);
        let l1 = LstmParams::init(&mut store, "l1", 3, 4);
        let l2 = LstmParams::init(&mut store, "l2", 4, 4);
        let err = grad_check(&mut store, 1e-5, 250, 2, |tape, store| {
            let xs: Vec<NodeId> = (0..3)
                .map(|i| tape.input(vec![0.1 * i as f64, -0.3, 0.5]))
                .collect();
            let h1 = lstm_forward(tape, store, &l1, &xs);
            let h2 = lstm_forward(tape, store, &l2, &h1);
            spread_loss(tape, *h2.last().unwrap())
        });
        assert!(err <= 1e-4, "lstm stack rel err {err}");
    }

    #[test]
    fn gru_gradient_within_tolerance() {
        let mut store = ParameterStore::new(23);
        let g = GruParams::init(&mut store, "g", 3, 4);
        let err = grad_check(&mut store, 1e-5, 250, 3, |tape, store| {
            let xs: Vec<NodeId> = (0..3)
                .map(|i| tape.input(vec![0.2 * i as f64, 0.3, -0.5]))
                .collect();
            let hs = gru_forward(tape, store, &g, &xs);
            spread_loss(tape, *hs.last().unwrap())
        });
        assert!(err <= 1e-4, "gru rel err {err}");
    }

    #[test]
    fn attention_cell_gradient_within_tolerance() {
        let mut store = ParameterStore::new(24);
        let p = AttentionParams::init(&mut store, "a", 3, 2, 4);
        let err = grad_check(&mut store, 1e-5, 250, 4, |tape, store| {
            let states = [
                tape.input(vec![0.5, -1.0, 0.2]),
                tape.input(vec![-0.3, 0.8, 0.7]),
                tape.input(vec![0.9, 0.1, -0.4]),
            ];
            let q = tape.input(vec![0.2, -0.4]);
            let (context, _) =
                attend(tape, store, &p, &states, q, Normalization::Softmax).unwrap();
            spread_loss(tape, context)
        });
        assert!(err <= 1e-4, "attention rel err {err}");
    }
}
