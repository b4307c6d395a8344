use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::network::{backward, forward_all, forward_stack, mse_grad, Activation, Dense};
use super::{init_sae, SaeConfig, SaeModel};
use crate::error::{Error, Result};
use crate::seed;

/// A reconstructed element counts as accurate when within this distance of
/// its target.
pub const ACCURACY_TOLERANCE: f64 = 0.05;

// Generator streams of the config seed. Stream 0 belongs to `init_sae`.
const PRETRAIN_DECODER_STREAM: u64 = 16;
const SHUFFLE_STREAM: u64 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub loss: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    /// `pretrain-1` … `pretrain-L`, then `finetune`.
    pub name: String,
    pub epochs: Vec<EpochRecord>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainingLog {
    pub phases: Vec<Phase>,
}

impl TrainingLog {
    pub fn phase(&self, name: &str) -> Option<&Phase> {
        self.phases.iter().find(|p| p.name == name)
    }

    pub fn finetune(&self) -> Option<&Phase> {
        self.phase("finetune")
    }
}

struct Trainer<'a> {
    phase: String,
    config: &'a SaeConfig,
    batch: usize,
    shuffle_stream: u64,
}

impl Trainer<'_> {
    /// Minibatch Adam on `layers` so that `input` maps onto `target`. Returns
    /// the per-epoch records. Loss and accuracy are accumulated over the
    /// batches as they are seen, before each update.
    fn run(&self, layers: &mut [Dense], input: &Array2<f64>, target: &Array2<f64>) -> Result<Vec<EpochRecord>> {
        let n = input.nrows();
        let elements = (n * target.ncols()) as f64;
        let mut rng = seed::rng(self.config.seed, self.shuffle_stream);
        let mut adam = Adam::new(self.config.learning_rate, layers);
        let mut order: Vec<usize> = (0..n).collect();
        let mut records = Vec::with_capacity(self.config.epochs);
        for epoch in 1..=self.config.epochs {
            order.shuffle(&mut rng);
            let mut sq_sum = 0.0;
            let mut hits = 0usize;
            for chunk in order.chunks(self.batch) {
                let x = input.select(Axis(0), chunk);
                let t = target.select(Axis(0), chunk);
                let outputs = forward_all(layers, &x);
                let pred = outputs.last().expect("non-empty stack");
                for (p, y) in pred.iter().zip(&t) {
                    let diff = p - y;
                    sq_sum += diff * diff;
                    if diff.abs() <= ACCURACY_TOLERANCE {
                        hits += 1;
                    }
                }
                let grads = backward(layers, &outputs, mse_grad(pred, &t));
                adam.step(layers, &grads);
            }
            let loss = sq_sum / elements;
            if !loss.is_finite() || !layers.iter().all(Dense::is_finite) {
                return Err(Error::Divergence {
                    phase: self.phase.clone(),
                    epoch,
                    loss,
                });
            }
            records.push(EpochRecord {
                epoch,
                loss,
                accuracy: hits as f64 / elements,
            });
        }
        Ok(records)
    }
}

/// Greedy layer-wise pretraining followed by end-to-end fine-tuning.
///
/// Phase `l` fits encoder layer `l` together with a throwaway decoder layer
/// (from stream 16 + l) that reconstructs the layer's input: sigmoid output
/// for the first layer, whose targets are the `[0, 1]` data, identity for the
/// deeper layers, whose targets are unbounded ReLU outputs. The fitted layer
/// is frozen and its output over all rows becomes the next phase's input.
///
/// The fine-tune phase then trains encoder plus the freshly initialized
/// decoder from [`init_sae`] against the original data. Every phase shuffles
/// with its own stream (32 + phase index) and keeps the last partial batch.
pub fn train_layerwise(config: &SaeConfig, data: &Array2<f64>) -> Result<(SaeModel, TrainingLog)> {
    let mut model = init_sae(config)?;
    if data.nrows() == 0 {
        return Err(Error::Invalid("training data has no rows".into()));
    }
    model.check_input(data)?;

    let depth = model.encoder.len();
    let mut log = TrainingLog::default();
    let mut representation = data.clone();
    for l in 0..depth {
        let encoder_layer = model.encoder[l].clone();
        let reconstruction = if l == 0 {
            Activation::Sigmoid
        } else {
            Activation::Identity
        };
        let mut dec_rng = seed::rng(config.seed, PRETRAIN_DECODER_STREAM + l as u64);
        let decoder_layer = Dense::he_uniform(
            encoder_layer.output_dim(),
            encoder_layer.input_dim(),
            reconstruction,
            &mut dec_rng,
        );
        let mut pair = vec![encoder_layer, decoder_layer];
        let trainer = Trainer {
            phase: format!("pretrain-{}", l + 1),
            config,
            batch: config.pretrain_batch,
            shuffle_stream: SHUFFLE_STREAM + l as u64,
        };
        let epochs = trainer.run(&mut pair, &representation, &representation)?;
        log.phases.push(Phase {
            name: trainer.phase,
            epochs,
        });
        let trained = pair.swap_remove(0);
        representation = forward_stack(std::slice::from_ref(&trained), &representation);
        model.encoder[l] = trained;
    }

    let mut stack = model.layers();
    let trainer = Trainer {
        phase: "finetune".into(),
        config,
        batch: config.finetune_batch,
        shuffle_stream: SHUFFLE_STREAM + depth as u64,
    };
    let epochs = trainer.run(&mut stack, data, data)?;
    log.phases.push(Phase {
        name: trainer.phase,
        epochs,
    });
    model.decoder = stack.split_off(depth);
    model.encoder = stack;
    Ok((model, log))
}
