//! Optimization: gradient clipping by global norm plus Adam, and the shared
//! one-batch training step.

use thiserror::Error;

use crate::params::ParameterStore;
use crate::tape::{NodeId, Tape};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("non-finite loss at step {step} (loss {loss})")]
    NonFiniteLoss { step: usize, loss: f64 },
}

#[derive(Debug, Clone)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub clip_norm: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            clip_norm: 5.0,
        }
    }
}

pub struct Adam {
    pub config: AdamConfig,
    step: usize,
}

impl Adam {
    pub fn new(config: AdamConfig) -> Adam {
        Adam { config, step: 0 }
    }

    pub fn steps_taken(&self) -> usize {
        self.step
    }

    /// Clip accumulated gradients to the configured global norm and apply
    /// one Adam update.
    pub fn apply(&mut self, store: &mut ParameterStore) {
        let norm = store.grad_global_norm();
        if self.config.clip_norm > 0.0 && norm > self.config.clip_norm {
            store.scale_grads(self.config.clip_norm / norm);
        }
        self.step += 1;
        store.adam_step(
            self.step,
            self.config.lr,
            self.config.beta1,
            self.config.beta2,
            self.config.eps,
        );
    }
}

/// Forward/backward over a batch, clip, update. Returns the mean pre-update
/// loss. `forward` must record one scalar loss node per example.
pub fn train_step<E>(
    store: &mut ParameterStore,
    opt: &mut Adam,
    batch: &[E],
    mut forward: impl FnMut(&mut Tape, &ParameterStore, &E) -> NodeId,
) -> Result<f64, TrainError> {
    assert!(!batch.is_empty(), "train_step needs a non-empty batch");
    store.zero_grads();
    let mut total = 0.0;
    let scale = 1.0 / batch.len() as f64;
    for example in batch {
        let mut tape = Tape::new();
        let loss = forward(&mut tape, store, example);
        let scaled = tape.scale(loss, scale);
        total += tape.scalar(loss);
        tape.backward(scaled, store);
    }
    let mean = total * scale;
    if !mean.is_finite() {
        return Err(TrainError::NonFiniteLoss {
            step: opt.steps_taken() + 1,
            loss: mean,
        });
    }
    opt.apply(store);
    Ok(mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Init;

    #[test]
    fn clips_gradient_norm_to_threshold() {
        let mut store = ParameterStore::new(1);
        let w = store.get_or_init("w", 1, 4, Init::Zeros);
        store.get_mut(w).grad.copy_from_slice(&[6.0, 0.0, 8.0, 0.0]); // norm 10
        let norm = store.grad_global_norm();
        assert!((norm - 10.0).abs() < 1e-12);
        let mut adam = Adam::new(AdamConfig {
            clip_norm: 5.0,
            lr: 0.0,
            ..AdamConfig::default()
        });
        adam.apply(&mut store);
        assert!((store.grad_global_norm() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn loss_decreases_on_separable_toy() {
        // Logistic regression on two separable points.
        let mut store = ParameterStore::new(4);
        let w = store.get_or_init("w", 2, 2, Init::FanIn);
        let b = store.get_or_init("b", 1, 2, Init::Zeros);
        let data = [(vec![1.0, 0.0], 0usize), (vec![0.0, 1.0], 1usize)];
        let mut adam = Adam::new(AdamConfig::default());
        let mut losses = Vec::new();
        for _ in 0..3 {
            let loss = train_step(&mut store, &mut adam, &data, |tape, store, (x, y)| {
                let xin = tape.input(x.clone());
                let logits = tape.affine(store, w, Some(b), xin);
                tape.multi_hot_loss(logits, vec![*y])
            })
            .unwrap();
            losses.push(loss);
        }
        assert!(losses[1] < losses[0]);
        assert!(losses[2] < losses[1]);
    }
}
