use ndarray::{Array2, Zip};

use super::network::{backward, forward_all, mse_grad, sigmoid, Activation, Dense};
use super::SaeModel;
use crate::error::{Error, Result};

/// Analytic gradient of the reconstruction MSE over every parameter of the
/// full stack, flattened layer by layer (weights row-major, then bias).
pub fn parameter_gradients(model: &SaeModel, batch: &Array2<f64>) -> Result<Vec<f64>> {
    model.check_input(batch)?;
    let layers = model.layers();
    let outputs = forward_all(&layers, batch);
    let pred = outputs.last().expect("non-empty stack");
    let grads = backward(&layers, &outputs, mse_grad(pred, batch));
    Ok(grads
        .iter()
        .flat_map(|g| g.weights.iter().chain(g.bias.iter()).copied())
        .collect())
}

/// `act(z + d) - act(z)` in a form that does not subtract two nearly equal
/// outputs.
fn activation_difference(activation: Activation, z: f64, d: f64) -> f64 {
    match activation {
        Activation::Identity => d,
        Activation::Relu => {
            if z > 0.0 && z + d > 0.0 {
                d
            } else {
                (z + d).max(0.0) - z.max(0.0)
            }
        }
        // s(a) - s(b) = s(a) s(-b) (1 - e^(b - a))
        Activation::Sigmoid => sigmoid(z + d) * sigmoid(-z) * -(-d).exp_m1(),
    }
}

/// Exact change of the stack output when one parameter of layer `l` moves
/// by `step`, carried forward as differences. `inputs[k]` and `pre[k]` are
/// the unperturbed input and pre-activation of layer `k`.
fn output_change(
    layers: &[Dense],
    inputs: &[Array2<f64>],
    pre: &[Array2<f64>],
    l: usize,
    index: usize,
    step: f64,
) -> Array2<f64> {
    let layer = &layers[l];
    let (rows, cols) = (pre[l].nrows(), layer.weights.ncols());
    let mut dz = Array2::<f64>::zeros((rows, cols));
    if index < layer.weights.len() {
        let (i, j) = (index / cols, index % cols);
        for r in 0..rows {
            dz[[r, j]] = step * inputs[l][[r, i]];
        }
    } else {
        dz.column_mut(index - layer.weights.len()).fill(step);
    }
    let mut delta = dz;
    for k in l..layers.len() {
        if k > l {
            delta = delta.dot(&layers[k].weights);
        }
        let act = layers[k].activation;
        Zip::from(&mut delta)
            .and(&pre[k])
            .for_each(|d, &z| *d = activation_difference(act, z, *d));
    }
    delta
}

/// Largest relative disagreement between backpropagated gradients and
/// central differences `(L(θ+h) - L(θ-h)) / 2h`, over every parameter.
/// Relative error is `|a - n| / max(1e-12, |a| + |n|)`.
///
/// The perturbed losses are never formed and subtracted as totals: the
/// change in every layer's output is propagated instead, and with
/// `p± = p + Δ±` the loss difference is `mean((Δ+ - Δ-)(Δ+ + Δ- + 2(p - t)))`.
/// This keeps the rounding error proportional to the gradient rather than to
/// the loss, which small steps and small gradients need. Steps are the ones
/// actually representable, `(θ+h) - θ` and `θ - (θ-h)`.
pub fn gradient_check(model: &SaeModel, batch: &Array2<f64>, h: f64) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Invalid(format!("finite-difference step {h} must be positive")));
    }
    let analytic = parameter_gradients(model, batch)?;
    let layers = model.layers();
    let outputs = forward_all(&layers, batch);
    let pre: Vec<Array2<f64>> = layers
        .iter()
        .zip(&outputs)
        .map(|(layer, input)| input.dot(&layer.weights) + &layer.bias)
        .collect();
    let residual = outputs.last().expect("non-empty stack") - batch;

    let mut worst = 0.0f64;
    let mut k = 0;
    for (l, layer) in layers.iter().enumerate() {
        let w = layer.weights.len();
        for p in 0..layer.param_count() {
            let cols = layer.weights.ncols();
            let original = if p < w {
                layer.weights[[p / cols, p % cols]]
            } else {
                layer.bias[p - w]
            };
            let up = (original + h) - original;
            let down = (original - h) - original;
            let plus = output_change(&layers, &outputs, &pre, l, p, up);
            let minus = output_change(&layers, &outputs, &pre, l, p, down);
            let mut diff = 0.0;
            for ((dp, dm), r) in plus.iter().zip(&minus).zip(&residual) {
                diff += (dp - dm) * (dp + dm + 2.0 * r);
            }
            let numeric = diff / batch.len() as f64 / (up - down);

            let a = analytic[k];
            let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-12);
            worst = worst.max(rel);
            k += 1;
        }
    }
    Ok(worst)
}
