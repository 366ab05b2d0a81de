//! Two-hidden-layer tanh perceptron with a hand-written backward pass, and Adam.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::{Distribution, Normal};

/// Dense layers `d → h → h → 1` with tanh on the hidden layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    /// Weight matrices, `fan_in × fan_out`.
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

/// Activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct MlpTrace {
    input: Array2<f64>,
    hidden: Vec<Array2<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpGrad {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl MlpGrad {
    pub fn norm(&self) -> f64 {
        self.weights
            .iter()
            .map(|w| w.iter().map(|v| v * v).sum::<f64>())
            .chain(
                self.biases
                    .iter()
                    .map(|b| b.iter().map(|v| v * v).sum::<f64>()),
            )
            .sum::<f64>()
            .sqrt()
    }
}

impl Mlp {
    /// Normal initialization with standard deviation `1/√fan_in`, zero biases.
    pub fn new(rng: &mut impl Rng, input_dim: usize, hidden: usize) -> Self {
        let sizes = [input_dim, hidden, hidden, 1];
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in sizes.windows(2) {
            let dist = Normal::new(0.0, 1.0 / (w[0] as f64).sqrt()).expect("valid std");
            weights.push(Array2::from_shape_simple_fn((w[0], w[1]), || {
                dist.sample(rng)
            }));
            biases.push(Array1::zeros(w[1]));
        }
        Mlp { weights, biases }
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Vec<f64> {
        self.forward(x).0
    }

    /// One scalar per input row.
    pub fn forward(&self, x: ArrayView2<'_, f64>) -> (Vec<f64>, MlpTrace) {
        let last = self.weights.len() - 1;
        let mut hidden = Vec::with_capacity(last);
        let mut act = x.to_owned();
        for (k, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = act.dot(w) + b;
            if k < last {
                z.mapv_inplace(f64::tanh);
                hidden.push(z.clone());
            }
            act = z;
        }
        let out = act.column(0).to_vec();
        (
            out,
            MlpTrace {
                input: x.to_owned(),
                hidden,
            },
        )
    }

    /// Parameter gradient and input gradient for cotangents on the outputs.
    pub fn backward(&self, trace: &MlpTrace, grad_out: &[f64]) -> (MlpGrad, Array2<f64>) {
        let layers = self.weights.len();
        let mut gw = vec![Array2::zeros((0, 0)); layers];
        let mut gb = vec![Array1::zeros(0); layers];
        let mut delta = Array2::from_shape_vec((grad_out.len(), 1), grad_out.to_vec())
            .expect("column of outputs");
        for k in (0..layers).rev() {
            let act_in = if k == 0 {
                &trace.input
            } else {
                &trace.hidden[k - 1]
            };
            gw[k] = act_in.t().dot(&delta);
            gb[k] = delta.sum_axis(Axis(0));
            let mut back = delta.dot(&self.weights[k].t());
            if k > 0 {
                // tanh' = 1 − tanh²
                back.zip_mut_with(&trace.hidden[k - 1], |g, &h| *g *= 1.0 - h * h);
            }
            delta = back;
        }
        (
            MlpGrad {
                weights: gw,
                biases: gb,
            },
            delta,
        )
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|v| v.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 3e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Adam {
    cfg: AdamConfig,
    step: i32,
    m: MlpGrad,
    v: MlpGrad,
}

impl Adam {
    pub fn new(cfg: AdamConfig, model: &Mlp) -> Self {
        let zeros = MlpGrad {
            weights: model
                .weights
                .iter()
                .map(|w| Array2::zeros(w.dim()))
                .collect(),
            biases: model
                .biases
                .iter()
                .map(|b| Array1::zeros(b.len()))
                .collect(),
        };
        Adam {
            cfg,
            step: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    pub fn update(&mut self, model: &mut Mlp, grad: &MlpGrad) {
        self.step += 1;
        let c = self.cfg;
        let bc1 = 1.0 - c.beta1.powi(self.step);
        let bc2 = 1.0 - c.beta2.powi(self.step);
        let apply = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
            *m = c.beta1 * *m + (1.0 - c.beta1) * g;
            *v = c.beta2 * *v + (1.0 - c.beta2) * g * g;
            *p -= c.learning_rate * (*m / bc1) / ((*v / bc2).sqrt() + c.epsilon);
        };
        for k in 0..model.weights.len() {
            ndarray::Zip::from(&mut model.weights[k])
                .and(&grad.weights[k])
                .and(&mut self.m.weights[k])
                .and(&mut self.v.weights[k])
                .for_each(|p, &g, m, v| apply(p, g, m, v));
            ndarray::Zip::from(&mut model.biases[k])
                .and(&grad.biases[k])
                .and(&mut self.m.biases[k])
                .and(&mut self.v.biases[k])
                .for_each(|p, &g, m, v| apply(p, g, m, v));
        }
    }
}
