//! Stacked autoencoder used to compress document vectors into short codes.
//!
//! The encoder is a ReLU stack (768 → 512 → 256 → 128 → 64 → 32 by
//! default). The decoder mirrors it back to the input width with ReLU hidden
//! layers and a sigmoid output, so inputs are expected in `[0, 1]`.
//!
//! Training is greedy: each encoder layer is first fitted as a one-hidden-layer
//! autoencoder on the frozen output of the layers beneath it, then the whole
//! stack is fine-tuned end to end. See [`train_layerwise`].

mod adam;
mod gradcheck;
mod io;
pub mod network;
mod train;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use network::{forward_all, forward_stack, Activation, Dense};

pub use adam::Adam;
pub use gradcheck::{gradient_check, parameter_gradients};
pub use io::{read_training_log, write_training_log};
pub use train::{train_layerwise, EpochRecord, Phase, TrainingLog, ACCURACY_TOLERANCE};

/// Epoch counts explored for this architecture; any positive count is accepted.
pub const EPOCH_SETTINGS: [usize; 3] = [20, 30, 40];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SaeConfig {
    pub input_dim: usize,
    pub layer_dims: Vec<usize>,
    pub learning_rate: f64,
    pub pretrain_batch: usize,
    pub finetune_batch: usize,
    pub epochs: usize,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
    pub seed: u64,
}

impl Default for SaeConfig {
    fn default() -> Self {
        Self {
            input_dim: 768,
            layer_dims: vec![512, 256, 128, 64, 32],
            learning_rate: 0.001,
            pretrain_batch: 256,
            finetune_batch: 128,
            epochs: 30,
            hidden_activation: Activation::Relu,
            output_activation: Activation::Sigmoid,
            seed: 0,
        }
    }
}

impl SaeConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.input_dim == 0 {
            return fail("input_dim must be positive".into());
        }
        if self.layer_dims.is_empty() {
            return fail("layer_dims must not be empty".into());
        }
        let mut prev = self.input_dim;
        for &d in &self.layer_dims {
            if d == 0 || d >= prev {
                return fail(format!(
                    "layer_dims must be positive and strictly decreasing from input_dim, got {} then {:?}",
                    self.input_dim, self.layer_dims
                ));
            }
            prev = d;
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail("learning_rate must be positive".into());
        }
        if self.pretrain_batch == 0 || self.finetune_batch == 0 {
            return fail("batch sizes must be at least 1".into());
        }
        if self.epochs == 0 {
            return fail("epochs must be at least 1".into());
        }
        if self.hidden_activation != Activation::Relu {
            return fail("hidden_activation is fixed to relu".into());
        }
        if self.output_activation != Activation::Sigmoid {
            return fail("output_activation is fixed to sigmoid".into());
        }
        Ok(())
    }

    pub fn code_dim(&self) -> usize {
        *self.layer_dims.last().expect("validated config")
    }

    /// Widths from input to code: `[input_dim, layer_dims...]`.
    fn widths(&self) -> Vec<usize> {
        std::iter::once(self.input_dim)
            .chain(self.layer_dims.iter().copied())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaeModel {
    pub config: SaeConfig,
    pub encoder: Vec<Dense>,
    pub decoder: Vec<Dense>,
}

/// Result of a full encoder/decoder pass.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    /// Output of every hidden layer, encoder first, then decoder hidden layers.
    pub hidden: Vec<Array2<f64>>,
    pub reconstruction: Array2<f64>,
}

impl ForwardPass {
    pub fn code(&self, model: &SaeModel) -> &Array2<f64> {
        &self.hidden[model.encoder.len() - 1]
    }
}

/// Fresh model: He-uniform weights from stream 0 of the config seed, encoder
/// layers first, then decoder layers, each in row-major order. Biases are zero.
pub fn init_sae(config: &SaeConfig) -> Result<SaeModel> {
    config.validate()?;
    let mut rng = seed::rng(config.seed, 0);
    let widths = config.widths();
    let encoder = widths
        .windows(2)
        .map(|w| Dense::he_uniform(w[0], w[1], Activation::Relu, &mut rng))
        .collect();
    let decoder = decoder_layers(&widths, &mut rng);
    Ok(SaeModel {
        config: config.clone(),
        encoder,
        decoder,
    })
}

fn decoder_layers<R: rand::Rng + ?Sized>(widths: &[usize], rng: &mut R) -> Vec<Dense> {
    let depth = widths.len() - 1;
    (0..depth)
        .rev()
        .map(|l| {
            let activation = if l == 0 { Activation::Sigmoid } else { Activation::Relu };
            Dense::he_uniform(widths[l + 1], widths[l], activation, rng)
        })
        .collect()
}

impl SaeModel {
    pub fn code_dim(&self) -> usize {
        self.encoder.last().map_or(0, Dense::output_dim)
    }

    pub fn input_dim(&self) -> usize {
        self.config.input_dim
    }

    pub fn layers(&self) -> Vec<Dense> {
        self.encoder.iter().chain(&self.decoder).cloned().collect()
    }

    pub fn param_count(&self) -> usize {
        self.encoder.iter().chain(&self.decoder).map(Dense::param_count).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.encoder.iter().chain(&self.decoder).all(Dense::is_finite)
    }

    /// Checks the layer chain against the config.
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        let widths = self.config.widths();
        let depth = widths.len() - 1;
        if self.encoder.len() != depth || self.decoder.len() != depth {
            return Err(Error::Invalid(format!(
                "expected {depth} encoder and decoder layers, found {} and {}",
                self.encoder.len(),
                self.decoder.len()
            )));
        }
        let expected = widths
            .windows(2)
            .map(|w| (w[0], w[1], Activation::Relu))
            .chain((0..depth).rev().map(|l| {
                (
                    widths[l + 1],
                    widths[l],
                    if l == 0 { Activation::Sigmoid } else { Activation::Relu },
                )
            }));
        for (i, (layer, (input, output, act))) in self.encoder.iter().chain(&self.decoder).zip(expected).enumerate() {
            if layer.input_dim() != input || layer.output_dim() != output || layer.bias.len() != output {
                return Err(Error::Dimension {
                    context: format!("layer {i} shape"),
                    expected: input * output,
                    found: layer.weights.len(),
                });
            }
            if layer.activation != act {
                return Err(Error::Invalid(format!(
                    "layer {i} has activation {:?}",
                    layer.activation
                )));
            }
        }
        if !self.is_finite() {
            return Err(Error::NonFinite("model parameters".into()));
        }
        Ok(())
    }

    fn check_input(&self, data: &Array2<f64>) -> Result<()> {
        if data.ncols() != self.input_dim() {
            return Err(Error::Dimension {
                context: "autoencoder input columns".into(),
                expected: self.input_dim(),
                found: data.ncols(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("autoencoder input".into()));
        }
        Ok(())
    }
}

pub fn forward(model: &SaeModel, batch: &Array2<f64>) -> Result<ForwardPass> {
    model.check_input(batch)?;
    let layers = model.layers();
    let mut outputs = forward_all(&layers, batch);
    let reconstruction = outputs.pop().expect("at least one layer");
    outputs.remove(0);
    Ok(ForwardPass {
        hidden: outputs,
        reconstruction,
    })
}

/// Codes of `data` under the encoder stack.
pub fn encode(model: &SaeModel, data: &Array2<f64>) -> Result<Array2<f64>> {
    model.check_input(data)?;
    Ok(forward_stack(&model.encoder, data))
}

pub fn mse_loss(pred: &Array2<f64>, target: &Array2<f64>) -> Result<f64> {
    if pred.dim() != target.dim() {
        return Err(Error::Dimension {
            context: "mse operands".into(),
            expected: target.len(),
            found: pred.len(),
        });
    }
    if pred.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = pred.iter().zip(target).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok(sum / pred.len() as f64)
}
