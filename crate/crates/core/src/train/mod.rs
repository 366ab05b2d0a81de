//! Ordering-supervised training of a scalar predictor through a relaxed
//! sorting network.
//!
//! Each step scores a batch of instances with an [`Mlp`], sorts every
//! instance's scores with the configured network, and takes the
//! cross-entropy between the relaxed permutation matrix and the true one.
//! The data is a [`SyntheticTask`] whose hidden scores are never shown to the
//! model, only their order.

mod mlp;
mod task;

pub use mlp::{Adam, AdamConfig, Mlp, MlpGrad};
pub use task::{make_task, Instance, LatentFn, SyntheticTask, TaskDims, MIN_TRUTH_GAP};

use std::io::Write;
use std::time::{Duration, Instant};

use ndarray::{Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{
    backward, cross_entropy_grad, cross_entropy_loss, forward, hard_rank_perm, rank_metrics,
};
use crate::error::{Error, Result};
use crate::network::{NetworkPlan, PlanFamily};
use crate::sigmoid::{SigmoidKind, SigmoidSpec};
use crate::swap::SwapConfig;

pub const HIDDEN_WIDTH: usize = 64;

/// Tabulated inverse temperatures: odd-even columns, then bitonic columns.
const ODD_EVEN_NS: [usize; 6] = [3, 5, 7, 9, 15, 32];
const BITONIC_NS: [usize; 2] = [16, 32];

fn beta_row(kind: SigmoidKind) -> ([f64; 6], [f64; 2]) {
    use std::f64::consts::PI;
    match kind {
        SigmoidKind::Logistic => ([79.0, 30.0, 33.0, 54.0, 32.0, 128.0], [43.0, 8.0]),
        SigmoidKind::LogisticArt => ([15.0, 20.0, 13.0, 34.0, 16.0, 29.0], [28.0, 26.0]),
        SigmoidKind::Reciprocal => ([14.0, 60.0, 69.0, 44.0, 120.0, 1140.0], [124.0, 76.0]),
        SigmoidKind::Cauchy => (
            [14.5, 51.0, 71.0, 15.0, 40.0, 169.0].map(|b| b * PI),
            [12.0, 48.5].map(|b| b * PI),
        ),
        SigmoidKind::Optimal => ([6.0, 20.0, 29.0, 32.0, 25.0, 124.0], [17.0, 25.0]),
    }
}

/// Default β for a sigmoid, family and set size; untabulated sizes use the
/// nearest tabulated one (the smaller on a tie).
pub fn default_beta(kind: SigmoidKind, plan: PlanFamily, n: usize) -> f64 {
    let (oe, bi) = beta_row(kind);
    let (ns, betas): (&[usize], &[f64]) = match plan {
        PlanFamily::OddEven => (&ODD_EVEN_NS, &oe),
        PlanFamily::Bitonic => (&BITONIC_NS, &bi),
    };
    let idx = (0..ns.len())
        .min_by_key(|&i| ns[i].abs_diff(n))
        .expect("non-empty table");
    betas[idx]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub sigmoid: SigmoidSpec,
    pub beta: f64,
    pub plan: PlanFamily,
    pub n: usize,
    pub steps: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub eval_every: usize,
    pub seed: u64,
}

impl TrainConfig {
    /// Defaults for a sigmoid and set size, with the tabulated β.
    pub fn new(kind: SigmoidKind, n: usize) -> Self {
        TrainConfig {
            sigmoid: SigmoidSpec::new(kind),
            beta: default_beta(kind, PlanFamily::OddEven, n),
            plan: PlanFamily::OddEven,
            n,
            steps: 10_000,
            learning_rate: 3e-4,
            batch_size: 32,
            eval_every: 500,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.swap()?;
        if self.steps == 0 {
            return Err(Error::domain("steps must be at least 1"));
        }
        if self.batch_size == 0 || self.eval_every == 0 {
            return Err(Error::domain(
                "batch size and eval interval must be positive",
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::domain(format!(
                "learning rate {}",
                self.learning_rate
            )));
        }
        self.plan.build(self.n).map(|_| ())
    }

    pub fn swap(&self) -> Result<SwapConfig> {
        SwapConfig::new(self.sigmoid, self.beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalPoint {
    pub step: usize,
    pub loss: f64,
    pub exact_rate: f64,
    pub element_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub config: TrainConfig,
    pub evals: Vec<EvalPoint>,
    /// Set when the training loss became non-finite; `evals` stop there.
    pub diverged: bool,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl RunRecord {
    pub fn final_metrics(&self) -> EvalPoint {
        *self.evals.last().expect("every run is evaluated at step 0")
    }

    /// One JSON object per evaluation point, config fields inlined.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Line<'a> {
            kind: SigmoidKind,
            beta: f64,
            plan: PlanFamily,
            n: usize,
            seed: u64,
            #[serde(flatten)]
            eval: &'a EvalPoint,
            diverged: bool,
        }
        for eval in &self.evals {
            let line = Line {
                kind: self.config.sigmoid.kind,
                beta: self.config.beta,
                plan: self.config.plan,
                n: self.config.n,
                seed: self.config.seed,
                eval,
                diverged: self.diverged,
            };
            serde_json::to_writer(&mut out, &line)?;
            writeln!(out).map_err(|e| Error::io("<jsonl>", e))?;
        }
        Ok(())
    }
}

/// Statistics of one optimization step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats {
    pub loss: f64,
    /// Norm of the gradient of the first layer's weights.
    pub input_layer_grad_norm: f64,
}

/// Model, optimizer and sorting network of one run.
#[derive(Debug, Clone)]
pub struct Trainer {
    pub model: Mlp,
    optimizer: Adam,
    plan: NetworkPlan,
    swap: SwapConfig,
}

impl Trainer {
    pub fn new(cfg: &TrainConfig, input_dim: usize) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let model = Mlp::new(&mut rng, input_dim, HIDDEN_WIDTH);
        let optimizer = Adam::new(
            AdamConfig {
                learning_rate: cfg.learning_rate,
                ..AdamConfig::default()
            },
            &model,
        );
        Ok(Trainer {
            model,
            optimizer,
            plan: cfg.plan.build(cfg.n)?,
            swap: cfg.swap()?,
        })
    }

    fn stack(batch: &[&Instance]) -> Array2<f64> {
        let views: Vec<_> = batch.iter().map(|i| i.inputs.view()).collect();
        ndarray::concatenate(Axis(0), &views).expect("instances share a width")
    }

    /// Loss on a batch and its gradient with respect to the predicted scores.
    fn batch_loss(
        &self,
        batch: &[&Instance],
        scores: &[f64],
        with_grad: bool,
    ) -> Result<(f64, Vec<f64>)> {
        let n = self.plan.n();
        let mut total = 0.0;
        let mut grad = vec![0.0; scores.len()];
        let scale = 1.0 / batch.len() as f64;
        for (k, inst) in batch.iter().enumerate() {
            let s = &scores[k * n..(k + 1) * n];
            let sorted = forward(s, &self.plan, &self.swap)?;
            let q = hard_rank_perm(&inst.truth)?;
            total += cross_entropy_loss(sorted.p(), &q)?;
            if with_grad {
                let gp = cross_entropy_grad(sorted.p(), &q)? * scale;
                let gs = backward(&sorted, &vec![0.0; n], Some(gp.view()))?;
                grad[k * n..(k + 1) * n].copy_from_slice(&gs);
            }
        }
        Ok((total * scale, grad))
    }

    /// One Adam step on the batch. The model is left untouched when the loss
    /// or its gradient is not finite.
    pub fn step(&mut self, batch: &[&Instance]) -> Result<StepStats> {
        let x = Self::stack(batch);
        let (scores, trace) = self.model.forward(x.view());
        if scores.iter().any(|s| !s.is_finite()) {
            return Ok(StepStats {
                loss: f64::NAN,
                input_layer_grad_norm: f64::NAN,
            });
        }
        let (loss, grad) = self.batch_loss(batch, &scores, true)?;
        let (pgrad, _) = self.model.backward(&trace, &grad);
        let input_layer_grad_norm = pgrad.weights[0].iter().map(|v| v * v).sum::<f64>().sqrt();
        if loss.is_finite() && pgrad.norm().is_finite() {
            self.optimizer.update(&mut self.model, &pgrad);
        }
        Ok(StepStats {
            loss,
            input_layer_grad_norm,
        })
    }

    pub fn evaluate(&self, step: usize, data: &[Instance]) -> Result<EvalPoint> {
        if data.is_empty() {
            return Err(Error::domain("evaluation set is empty"));
        }
        let batch: Vec<&Instance> = data.iter().collect();
        let scores = self.model.predict(Self::stack(&batch).view());
        let (loss, _) = self.batch_loss(&batch, &scores, false)?;
        let n = self.plan.n();
        let (mut exact, mut element) = (0.0, 0.0);
        for (k, inst) in data.iter().enumerate() {
            let m = rank_metrics(&scores[k * n..(k + 1) * n], &inst.truth)?;
            exact += f64::from(u8::from(m.exact_match));
            element += m.element_rate;
        }
        let count = data.len() as f64;
        Ok(EvalPoint {
            step,
            loss,
            exact_rate: exact / count,
            element_rate: element / count,
        })
    }
}

/// Trains with fresh batches drawn from the task's training pool and
/// evaluates on its validation set at step 0, every `eval_every` steps and
/// at the end.
pub fn train(task: &SyntheticTask, cfg: &TrainConfig) -> Result<RunRecord> {
    let start = Instant::now();
    if task.dims.n != cfg.n {
        return Err(Error::shape(
            format!("tasks with n = {}", cfg.n),
            format!("n = {}", task.dims.n),
        ));
    }
    if task.train.is_empty() {
        return Err(Error::domain("training pool is empty"));
    }
    let mut trainer = Trainer::new(cfg, task.dims.input_dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut evals = vec![trainer.evaluate(0, &task.val)?];
    let mut diverged = false;
    for step in 1..=cfg.steps {
        let batch: Vec<&Instance> = (0..cfg.batch_size)
            .map(|_| &task.train[rng.random_range(0..task.train.len())])
            .collect();
        let stats = trainer.step(&batch)?;
        if !stats.loss.is_finite() || !trainer.model.is_finite() {
            diverged = true;
            break;
        }
        if step % cfg.eval_every == 0 || step == cfg.steps {
            evals.push(trainer.evaluate(step, &task.val)?);
        }
    }
    Ok(RunRecord {
        config: *cfg,
        evals,
        diverged,
        wall_time: start.elapsed(),
    })
}

/// One run per β with the shared seed; runs execute in parallel.
pub fn sweep_beta(
    task: &SyntheticTask,
    base: &TrainConfig,
    betas: &[f64],
) -> Result<Vec<RunRecord>> {
    if betas.is_empty() {
        return Err(Error::domain("beta list is empty"));
    }
    betas
        .par_iter()
        .map(|&beta| train(task, &TrainConfig { beta, ..*base }))
        .collect()
}

/// Columns `beta, kind, plan, n, exact_rate, element_rate` from the final
/// evaluation of each run.
pub fn write_sweep_csv<W: Write>(out: W, records: &[RunRecord]) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        beta: String,
        kind: &'static str,
        plan: &'static str,
        n: usize,
        exact_rate: String,
        element_rate: String,
    }
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        let m = r.final_metrics();
        w.serialize(Row {
            beta: crate::csvio::format_f64(r.config.beta),
            kind: r.config.sigmoid.kind.name(),
            plan: r.config.plan.name(),
            n: r.config.n,
            exact_rate: crate::csvio::format_f64(m.exact_rate),
            element_rate: crate::csvio::format_f64(m.element_rate),
        })?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}
