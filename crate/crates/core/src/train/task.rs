//! Synthetic ordering task: only the order of the latent scores is observed.

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Minimum gap between two truth values of one instance.
pub const MIN_TRUTH_GAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskDims {
    pub input_dim: usize,
    /// Set size per instance.
    pub n: usize,
    pub train_size: usize,
    pub val_size: usize,
}

impl TaskDims {
    pub fn with_n(n: usize) -> Self {
        TaskDims {
            n,
            ..TaskDims::default()
        }
    }
}

impl Default for TaskDims {
    fn default() -> Self {
        TaskDims {
            input_dim: 16,
            n: 5,
            train_size: 4096,
            val_size: 256,
        }
    }
}

/// `n` feature rows together with their hidden scores.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub inputs: Array2<f64>,
    pub truth: Vec<f64>,
}

/// The latent map `x ↦ tanh(w·x/√d + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentFn {
    pub weights: Array1<f64>,
    pub bias: f64,
}

impl LatentFn {
    pub fn eval(&self, x: ndarray::ArrayView1<'_, f64>) -> f64 {
        let d = self.weights.len() as f64;
        (self.weights.dot(&x) / d.sqrt() + self.bias).tanh()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTask {
    pub dims: TaskDims,
    pub latent: LatentFn,
    pub train: Vec<Instance>,
    pub val: Vec<Instance>,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn sample_instance(rng: &mut ChaCha8Rng, dims: &TaskDims, latent: &LatentFn) -> Instance {
    loop {
        let inputs = Array2::from_shape_simple_fn((dims.n, dims.input_dim), || normal(rng));
        let truth: Vec<f64> = inputs.rows().into_iter().map(|r| latent.eval(r)).collect();
        let mut sorted = truth.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).all(|w| w[1] - w[0] >= MIN_TRUTH_GAP) {
            return Instance { inputs, truth };
        }
    }
}

/// Deterministic task for a seed. Instances whose truth values come closer
/// than [`MIN_TRUTH_GAP`] are redrawn.
pub fn make_task(seed: u64, dims: TaskDims) -> Result<SyntheticTask> {
    if dims.input_dim == 0 || dims.n == 0 {
        return Err(Error::domain("task needs input_dim >= 1 and n >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let latent = LatentFn {
        weights: Array1::from_shape_simple_fn(dims.input_dim, || normal(&mut rng)),
        bias: 0.1 * normal(&mut rng),
    };
    let train = (0..dims.train_size)
        .map(|_| sample_instance(&mut rng, &dims, &latent))
        .collect();
    let val = (0..dims.val_size)
        .map(|_| sample_instance(&mut rng, &dims, &latent))
        .collect();
    Ok(SyntheticTask {
        dims,
        latent,
        train,
        val,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> TaskDims {
        TaskDims {
            train_size: 64,
            val_size: 16,
            ..TaskDims::default()
        }
    }

    #[test]
    fn deterministic() {
        let a = make_task(3, small()).unwrap();
        let b = make_task(3, small()).unwrap();
        assert_eq!(a, b);
        let c = make_task(4, small()).unwrap();
        assert_ne!(a.latent.weights, c.latent.weights);
    }

    #[test]
    fn truth_matches_latent_and_has_gaps() {
        let t = make_task(1, small()).unwrap();
        for inst in t.train.iter().chain(&t.val) {
            assert_eq!(inst.inputs.dim(), (5, 16));
            for (row, &y) in inst.inputs.rows().into_iter().zip(&inst.truth) {
                assert_eq!(t.latent.eval(row), y);
            }
            let mut s = inst.truth.clone();
            s.sort_by(f64::total_cmp);
            assert!(s.windows(2).all(|w| w[1] - w[0] >= MIN_TRUTH_GAP));
        }
    }

    #[test]
    fn rejects_empty_dims() {
        assert!(make_task(0, TaskDims { n: 0, ..small() }).is_err());
    }
}
