//! Dense feed-forward layers with hand-written backpropagation.

use ndarray::{Array1, Array2, Axis, Zip};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Sigmoid,
    Identity,
}

impl Activation {
    fn apply(self, z: &mut Array2<f64>) {
        match self {
            Activation::Relu => z.mapv_inplace(|v| v.max(0.0)),
            Activation::Sigmoid => z.mapv_inplace(sigmoid),
            Activation::Identity => {}
        }
    }

    /// Multiplies `grad` by the activation derivative, expressed through the
    /// activation's output. The ReLU derivative at zero is taken as zero.
    fn backprop(self, grad: &mut Array2<f64>, output: &Array2<f64>) {
        match self {
            Activation::Relu => Zip::from(grad).and(output).for_each(|g, &y| {
                if y <= 0.0 {
                    *g = 0.0;
                }
            }),
            Activation::Sigmoid => Zip::from(grad).and(output).for_each(|g, &y| *g *= y * (1.0 - y)),
            Activation::Identity => {}
        }
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `y = act(x W + b)` with `W` stored `in × out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub activation: Activation,
}

impl Dense {
    /// He-uniform weights on `±sqrt(6 / fan_in)`, zero bias. Weights are
    /// drawn in row-major order.
    pub fn he_uniform<R: Rng + ?Sized>(fan_in: usize, fan_out: usize, activation: Activation, rng: &mut R) -> Self {
        let limit = (6.0 / fan_in as f64).sqrt();
        let weights = Array2::from_shape_simple_fn((fan_in, fan_out), || rng.random_range(-limit..=limit));
        Self {
            weights,
            bias: Array1::zeros(fan_out),
            activation,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn forward(&self, input: &Array2<f64>) -> Array2<f64> {
        let mut z = input.dot(&self.weights);
        z += &self.bias;
        self.activation.apply(&mut z);
        z
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(self.bias.iter()).all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone)]
pub struct Gradient {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

/// Outputs of every layer of a stack; `outputs[0]` is the input itself.
pub fn forward_all(layers: &[Dense], input: &Array2<f64>) -> Vec<Array2<f64>> {
    let mut outputs = Vec::with_capacity(layers.len() + 1);
    outputs.push(input.clone());
    for layer in layers {
        let next = layer.forward(outputs.last().expect("non-empty"));
        outputs.push(next);
    }
    outputs
}

pub fn forward_stack(layers: &[Dense], input: &Array2<f64>) -> Array2<f64> {
    let mut current = input.clone();
    for layer in layers {
        current = layer.forward(&current);
    }
    current
}

/// Gradients of the loss w.r.t. every layer's parameters, given the outputs
/// from [`forward_all`] and `dL/d(final output)`.
pub fn backward(layers: &[Dense], outputs: &[Array2<f64>], grad_output: Array2<f64>) -> Vec<Gradient> {
    debug_assert_eq!(outputs.len(), layers.len() + 1);
    let mut grads = Vec::with_capacity(layers.len());
    let mut delta = grad_output;
    for (l, layer) in layers.iter().enumerate().rev() {
        layer.activation.backprop(&mut delta, &outputs[l + 1]);
        let weights = outputs[l].t().dot(&delta);
        let bias = delta.sum_axis(Axis(0));
        if l > 0 {
            delta = delta.dot(&layer.weights.t());
        }
        grads.push(Gradient { weights, bias });
    }
    grads.reverse();
    grads
}

/// MSE gradient `2 (pred - target) / (b d)`.
pub fn mse_grad(pred: &Array2<f64>, target: &Array2<f64>) -> Array2<f64> {
    let scale = 2.0 / pred.len() as f64;
    let mut g = pred - target;
    g *= scale;
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use ndarray::array;

    #[test]
    fn sigmoid_is_stable_at_extremes() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0);
        assert_eq!(sigmoid(800.0), 1.0);
    }

    #[test]
    fn he_uniform_respects_limit() {
        let layer = Dense::he_uniform(24, 5, Activation::Relu, &mut seed::rng(1, 0));
        let limit = (6.0f64 / 24.0).sqrt();
        assert!(layer.weights.iter().all(|w| w.abs() <= limit));
        assert!(layer.bias.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn single_layer_gradient_by_hand() {
        // y = x W + b, L = mean((y - t)^2) over 2 elements
        let layer = Dense {
            weights: array![[2.0], [-1.0]],
            bias: array![0.5],
            activation: Activation::Identity,
        };
        let x = array![[1.0, 3.0], [0.0, 1.0]];
        let t = array![[0.0], [0.0]];
        let outs = forward_all(std::slice::from_ref(&layer), &x);
        assert_eq!(outs[1], array![[-0.5], [-0.5]]);
        let g = backward(std::slice::from_ref(&layer), &outs, mse_grad(&outs[1], &t));
        // dL/dy = 2 * (-0.5) / 2 = -0.5 per row
        assert_eq!(g[0].bias, array![-1.0]);
        assert_eq!(g[0].weights, array![[-0.5], [-2.0]]);
    }
}
