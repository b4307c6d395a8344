use ndarray::{Array1, Array2, Zip};

use super::network::{Dense, Gradient};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

struct Moments {
    m_w: Array2<f64>,
    v_w: Array2<f64>,
    m_b: Array1<f64>,
    v_b: Array1<f64>,
}

/// Adam with bias correction, one moment pair per layer tensor.
pub struct Adam {
    learning_rate: f64,
    step: i32,
    moments: Vec<Moments>,
}

impl Adam {
    pub fn new(learning_rate: f64, layers: &[Dense]) -> Self {
        let moments = layers
            .iter()
            .map(|l| Moments {
                m_w: Array2::zeros(l.weights.raw_dim()),
                v_w: Array2::zeros(l.weights.raw_dim()),
                m_b: Array1::zeros(l.bias.raw_dim()),
                v_b: Array1::zeros(l.bias.raw_dim()),
            })
            .collect();
        Self {
            learning_rate,
            step: 0,
            moments,
        }
    }

    pub fn step(&mut self, layers: &mut [Dense], grads: &[Gradient]) {
        self.step += 1;
        let c1 = 1.0 - BETA1.powi(self.step);
        let c2 = 1.0 - BETA2.powi(self.step);
        let lr = self.learning_rate;
        let update = move |p: &mut f64, m: &mut f64, v: &mut f64, g: &f64| {
            *m = BETA1 * *m + (1.0 - BETA1) * g;
            *v = BETA2 * *v + (1.0 - BETA2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= lr * m_hat / (v_hat.sqrt() + EPSILON);
        };
        for ((layer, grad), mom) in layers.iter_mut().zip(grads).zip(&mut self.moments) {
            Zip::from(&mut layer.weights)
                .and(&mut mom.m_w)
                .and(&mut mom.v_w)
                .and(&grad.weights)
                .for_each(update);
            Zip::from(&mut layer.bias)
                .and(&mut mom.m_b)
                .and(&mut mom.v_b)
                .and(&grad.bias)
                .for_each(update);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sae::network::Activation;
    use ndarray::array;

    #[test]
    fn first_step_moves_by_learning_rate() {
        // After one step m_hat = g and v_hat = g^2, so the update is lr * sign(g)
        // up to epsilon.
        let mut layers = vec![Dense {
            weights: array![[1.0, -1.0]],
            bias: array![0.0, 0.0],
            activation: Activation::Identity,
        }];
        let mut adam = Adam::new(0.001, &layers);
        let grads = vec![Gradient {
            weights: array![[4.0, -0.25]],
            bias: array![0.0, 1e-3],
        }];
        adam.step(&mut layers, &grads);
        assert!((layers[0].weights[[0, 0]] - 0.999).abs() < 1e-9);
        assert!((layers[0].weights[[0, 1]] + 0.999).abs() < 1e-9);
        assert_eq!(layers[0].bias[0], 0.0);
        assert!((layers[0].bias[1] + 0.001).abs() < 1e-7);
    }
}
