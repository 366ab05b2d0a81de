//! Differentiable sorting through a network plan.
//!
//! [`forward`] pushes a vector through the plan with relaxed swaps and
//! accumulates the relaxed permutation matrix `P` (rows are output ranks,
//! columns are inputs) so that `x̂ = P·x`. [`backward`] is the matching
//! reverse pass; it accepts cotangents on `x̂`, on `P`, or both.

use ndarray::{Array2, ArrayView2};

use crate::error::{ensure_finite, Error, Result};
use crate::network::NetworkPlan;
use crate::swap::SwapConfig;

/// Lower clamp applied to `P` entries inside the logarithm of the loss.
pub const LOG_CLAMP: f64 = 1e-12;

/// One executed comparator, as needed by the reverse pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapRecord {
    pub i: usize,
    pub j: usize,
    /// Values on wires `i` and `j` before the swap.
    pub a: f64,
    pub b: f64,
    pub blend: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SortCache {
    pub cfg: SwapConfig,
    pub layers: Vec<Vec<SwapRecord>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SortResult {
    x_hat: Vec<f64>,
    p: Array2<f64>,
    cache: Option<SortCache>,
}

impl SortResult {
    pub fn x_hat(&self) -> &[f64] {
        &self.x_hat
    }

    /// Relaxed permutation matrix; row `i` is output rank `i`, column `j` is input `j`.
    pub fn p(&self) -> &Array2<f64> {
        &self.p
    }

    pub fn n(&self) -> usize {
        self.x_hat.len()
    }

    pub fn cache(&self) -> Option<&SortCache> {
        self.cache.as_ref()
    }

    /// Drops the backward cache, keeping only `x̂` and `P`.
    pub fn without_cache(mut self) -> Self {
        self.cache = None;
        self
    }

    pub fn into_parts(self) -> (Vec<f64>, Array2<f64>) {
        (self.x_hat, self.p)
    }

    pub fn backward(
        &self,
        grad_x_hat: &[f64],
        grad_p: Option<ArrayView2<'_, f64>>,
    ) -> Result<Vec<f64>> {
        backward(self, grad_x_hat, grad_p)
    }

    /// Full Jacobian `∂x̂_i/∂x_j`, one reverse pass per output.
    pub fn jacobian(&self) -> Result<Array2<f64>> {
        let n = self.n();
        let mut jac = Array2::zeros((n, n));
        let mut unit = vec![0.0; n];
        for i in 0..n {
            unit[i] = 1.0;
            let row = self.backward(&unit, None)?;
            unit[i] = 0.0;
            for (j, g) in row.into_iter().enumerate() {
                jac[[i, j]] = g;
            }
        }
        Ok(jac)
    }
}

pub fn forward(x: &[f64], plan: &NetworkPlan, cfg: &SwapConfig) -> Result<SortResult> {
    if x.len() != plan.n() {
        return Err(Error::shape(
            format!("input of length {}", plan.n()),
            format!("length {}", x.len()),
        ));
    }
    for &v in x {
        ensure_finite("sort input", v)?;
    }
    cfg.validate()?;

    let n = x.len();
    let mut values = x.to_vec();
    let mut p = Array2::eye(n);
    let mut layers = Vec::with_capacity(plan.layer_count());
    for layer in plan.layers() {
        let mut records = Vec::with_capacity(layer.len());
        for &(i, j) in layer {
            let (a, b) = (values[i], values[j]);
            let out = cfg.swap_unchecked(a, b);
            values[i] = out.lo;
            values[j] = out.hi;
            mix_rows(&mut p, i, j, out.blend);
            records.push(SwapRecord {
                i,
                j,
                a,
                b,
                blend: out.blend,
            });
        }
        layers.push(records);
    }
    Ok(SortResult {
        x_hat: values,
        p,
        cache: Some(SortCache { cfg: *cfg, layers }),
    })
}

/// Reverse pass: returns `dL/dx` for a loss whose cotangents on `x̂` and
/// (optionally) `P` are given.
pub fn backward(
    result: &SortResult,
    grad_x_hat: &[f64],
    grad_p: Option<ArrayView2<'_, f64>>,
) -> Result<Vec<f64>> {
    let cache = result
        .cache
        .as_ref()
        .ok_or(Error::State("sort result has no backward cache"))?;
    let n = result.n();
    if grad_x_hat.len() != n {
        return Err(Error::shape(
            format!("x_hat cotangent of length {n}"),
            format!("length {}", grad_x_hat.len()),
        ));
    }
    let cfg = &cache.cfg;
    let mut g = grad_x_hat.to_vec();

    let Some(grad_p) = grad_p else {
        for layer in cache.layers.iter().rev() {
            for r in layer {
                let (da, db) = cfg.pullback(r.a, r.b, r.blend, g[r.i], g[r.j], 0.0);
                g[r.i] = da;
                g[r.j] = db;
            }
        }
        return Ok(g);
    };

    if grad_p.dim() != (n, n) {
        return Err(Error::shape(
            format!("P cotangent of shape {n}x{n}"),
            format!("{:?}", grad_p.dim()),
        ));
    }
    // P_k = L_k · P_{k-1}; the prefixes are rebuilt from the cached blends.
    let mut prefixes = Vec::with_capacity(cache.layers.len());
    let mut p = Array2::<f64>::eye(n);
    for layer in &cache.layers {
        prefixes.push(p.clone());
        for r in layer {
            mix_rows(&mut p, r.i, r.j, r.blend);
        }
    }
    let mut gp = grad_p.to_owned();
    for (layer, prev) in cache.layers.iter().zip(prefixes.iter()).rev() {
        for r in layer {
            // Cotangent of the four block entries of L_k is (G_P · P_{k-1}ᵀ) restricted to {i, j}².
            let dot = |row: usize, col: usize| -> f64 { gp.row(row).dot(&prev.row(col)) };
            let d_blend = dot(r.i, r.i) + dot(r.j, r.j) - dot(r.i, r.j) - dot(r.j, r.i);
            let (da, db) = cfg.pullback(r.a, r.b, r.blend, g[r.i], g[r.j], d_blend);
            g[r.i] = da;
            g[r.j] = db;
            // G_{P_{k-1}} = L_kᵀ · G_{P_k}; the block is symmetric.
            mix_rows(&mut gp, r.i, r.j, r.blend);
        }
    }
    Ok(g)
}

/// Left-multiplies `m` by the identity with a swap block at rows/cols `i, j`.
fn mix_rows(m: &mut Array2<f64>, i: usize, j: usize, v: f64) {
    let w = 1.0 - v;
    let cols = m.ncols();
    for c in 0..cols {
        let (ri, rj) = (m[[i, c]], m[[j, c]]);
        m[[i, c]] = v * ri + w * rj;
        m[[j, c]] = w * ri + v * rj;
    }
}

/// Ascending copy of `x`.
pub fn hard_sort(x: &[f64]) -> Vec<f64> {
    let mut out = x.to_vec();
    out.sort_by(f64::total_cmp);
    out
}

/// Stable ascending argsort: `order[r]` is the input index with rank `r`.
pub fn argsort(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order
}

/// Rank of every input under a stable ascending sort.
pub fn ranks(values: &[f64]) -> Vec<usize> {
    let mut r = vec![0; values.len()];
    for (rank, idx) in argsort(values).into_iter().enumerate() {
        r[idx] = rank;
    }
    r
}

/// Hard permutation `Q` with `Q[r][order[r]] = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruthPerm {
    order: Vec<usize>,
}

impl GroundTruthPerm {
    pub fn from_order(order: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; order.len()];
        for &j in &order {
            if j >= order.len() || std::mem::replace(&mut seen[j], true) {
                return Err(Error::domain(format!("{order:?} is not a permutation")));
            }
        }
        Ok(GroundTruthPerm { order })
    }

    pub fn identity(n: usize) -> Self {
        GroundTruthPerm {
            order: (0..n).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.order.len()
    }

    /// Input index placed at each output rank.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn matrix(&self) -> Array2<f64> {
        let n = self.n();
        let mut q = Array2::zeros((n, n));
        for (r, &j) in self.order.iter().enumerate() {
            q[[r, j]] = 1.0;
        }
        q
    }
}

/// `Q` from ground-truth values; ties go to the lower input index first.
pub fn hard_rank_perm(y: &[f64]) -> Result<GroundTruthPerm> {
    for &v in y {
        ensure_finite("ground truth value", v)?;
    }
    Ok(GroundTruthPerm { order: argsort(y) })
}

fn check_loss_shapes(p: &Array2<f64>, q: &GroundTruthPerm) -> Result<()> {
    let n = q.n();
    if p.dim() != (n, n) {
        return Err(Error::shape(
            format!("{n}x{n} matrix"),
            format!("{:?}", p.dim()),
        ));
    }
    Ok(())
}

/// Row-wise categorical cross-entropy `−(1/n) Σ_r log P[r, order[r]]`, with
/// `P` entries clamped to `[1e−12, 1]`.
pub fn cross_entropy_loss(p: &Array2<f64>, q: &GroundTruthPerm) -> Result<f64> {
    check_loss_shapes(p, q)?;
    let n = q.n();
    if n == 0 {
        return Ok(0.0);
    }
    let total: f64 = q
        .order
        .iter()
        .enumerate()
        .map(|(r, &j)| -p[[r, j]].clamp(LOG_CLAMP, 1.0).ln())
        .sum();
    Ok(total / n as f64)
}

/// Gradient of [`cross_entropy_loss`] with respect to `P`. Entries below the
/// clamp receive zero gradient.
pub fn cross_entropy_grad(p: &Array2<f64>, q: &GroundTruthPerm) -> Result<Array2<f64>> {
    check_loss_shapes(p, q)?;
    let n = q.n();
    let mut g = Array2::zeros((n, n));
    for (r, &j) in q.order.iter().enumerate() {
        let v = p[[r, j]];
        if v >= LOG_CLAMP {
            g[[r, j]] = -1.0 / (n as f64 * v.min(1.0));
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankMetrics {
    pub exact_match: bool,
    /// Fraction of elements whose predicted rank equals the true rank.
    pub element_rate: f64,
}

pub fn rank_metrics(scores: &[f64], truth: &[f64]) -> Result<RankMetrics> {
    if scores.len() != truth.len() {
        return Err(Error::shape(
            format!("{} scores", truth.len()),
            format!("{}", scores.len()),
        ));
    }
    if scores.is_empty() {
        return Ok(RankMetrics {
            exact_match: true,
            element_rate: 1.0,
        });
    }
    let (rs, rt) = (ranks(scores), ranks(truth));
    let hits = rs.iter().zip(&rt).filter(|(a, b)| a == b).count();
    Ok(RankMetrics {
        exact_match: hits == scores.len(),
        element_rate: hits as f64 / scores.len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigmoid::SigmoidKind::{self, *};
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn cfg(kind: SigmoidKind, beta: f64) -> SwapConfig {
        SwapConfig::new(kind, beta).unwrap()
    }

    #[test]
    fn two_wire_optimal_example() {
        let plan = NetworkPlan::odd_even(2).unwrap();
        let r = forward(&[1.0, 0.0], &plan, &cfg(Optimal, 1.0)).unwrap();
        assert_abs_diff_eq!(r.x_hat()[0], 0.0625, epsilon = 1e-15);
        assert_abs_diff_eq!(r.x_hat()[1], 0.9375, epsilon = 1e-15);
        assert_abs_diff_eq!(r.p()[[0, 0]], 0.0625, epsilon = 1e-15);
        assert_abs_diff_eq!(r.p()[[0, 1]], 0.9375, epsilon = 1e-15);
    }

    #[test]
    fn sorted_input_at_high_beta_is_identity() {
        let plan = NetworkPlan::odd_even(5).unwrap();
        let x = [-1.0, 0.2, 0.9, 3.0, 4.5];
        let r = forward(&x, &plan, &cfg(Logistic, 1e6)).unwrap();
        let eye = Array2::<f64>::eye(5);
        let dev = (r.p() - &eye).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(dev <= 1e-4);
        for (a, b) in r.x_hat().iter().zip(&x) {
            assert!((a - b).abs() <= 1e-4);
        }
    }

    #[test]
    fn p_times_x_and_doubly_stochastic() {
        let plan = NetworkPlan::bitonic(8).unwrap();
        let x = [0.3, -2.0, 1.1, 0.9, 5.0, -0.4, 2.2, 0.0];
        for kind in SigmoidKind::ALL {
            let r = forward(&x, &plan, &cfg(kind, 1.5)).unwrap();
            let px = r.p().dot(&ndarray::arr1(&x));
            for (a, b) in px.iter().zip(r.x_hat()) {
                assert!((a - b).abs() <= 1e-9);
            }
            for s in r
                .p()
                .sum_axis(ndarray::Axis(0))
                .iter()
                .chain(r.p().sum_axis(ndarray::Axis(1)).iter())
            {
                assert!((s - 1.0).abs() <= 1e-9);
            }
            let total: f64 = x.iter().sum();
            assert!((r.x_hat().iter().sum::<f64>() - total).abs() <= 1e-9);
        }
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let plan = NetworkPlan::odd_even(3).unwrap();
        assert!(matches!(
            forward(&[1.0, 2.0], &plan, &cfg(Cauchy, 1.0)),
            Err(Error::Shape { .. })
        ));
        assert!(forward(&[1.0, f64::NAN, 0.0], &plan, &cfg(Cauchy, 1.0)).is_err());
    }

    #[test]
    fn backward_without_cache_is_state_error() {
        let plan = NetworkPlan::odd_even(3).unwrap();
        let r = forward(&[3.0, 1.0, 2.0], &plan, &cfg(Cauchy, 1.0))
            .unwrap()
            .without_cache();
        assert!(matches!(r.backward(&[1.0; 3], None), Err(Error::State(_))));
    }

    #[test]
    fn unit_cotangent_passes_through() {
        let plan = NetworkPlan::odd_even(6).unwrap();
        let r = forward(
            &[3.0, 1.0, 2.0, -1.0, 0.4, 0.41],
            &plan,
            &cfg(Reciprocal, 2.0),
        )
        .unwrap();
        for g in r.backward(&[1.0; 6], None).unwrap() {
            assert_abs_diff_eq!(g, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn gradient_shape_errors() {
        let plan = NetworkPlan::odd_even(3).unwrap();
        let r = forward(&[3.0, 1.0, 2.0], &plan, &cfg(Cauchy, 1.0)).unwrap();
        assert!(r.backward(&[1.0; 2], None).is_err());
        let bad = Array2::<f64>::zeros((2, 3));
        assert!(r.backward(&[1.0; 3], Some(bad.view())).is_err());
    }

    #[test]
    fn hard_rank_perm_examples() {
        let q = hard_rank_perm(&[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(q.order(), &[1, 2, 0]);
        assert_eq!(
            q.matrix(),
            array![[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]
        );
        assert_eq!(
            hard_rank_perm(&[0.0, 1.0, 5.0]).unwrap().matrix(),
            Array2::<f64>::eye(3)
        );
        assert_eq!(
            hard_rank_perm(&[2.0, 2.0, 1.0]).unwrap().order(),
            &[2, 0, 1]
        );
    }

    #[test]
    fn ground_truth_rejects_non_permutations() {
        assert!(GroundTruthPerm::from_order(vec![0, 0, 1]).is_err());
        assert!(GroundTruthPerm::from_order(vec![0, 3, 1]).is_err());
        assert!(GroundTruthPerm::from_order(vec![2, 0, 1]).is_ok());
    }

    #[test]
    fn cross_entropy_examples() {
        let q = hard_rank_perm(&[3.0, 1.0, 2.0]).unwrap();
        assert!(cross_entropy_loss(&q.matrix(), &q).unwrap().abs() <= 1e-11);
        let half = Array2::from_elem((2, 2), 0.5);
        for q in [
            GroundTruthPerm::identity(2),
            GroundTruthPerm::from_order(vec![1, 0]).unwrap(),
        ] {
            assert_abs_diff_eq!(
                cross_entropy_loss(&half, &q).unwrap(),
                std::f64::consts::LN_2,
                epsilon = 1e-15
            );
        }
        assert!(cross_entropy_loss(&half, &GroundTruthPerm::identity(3)).is_err());
    }

    #[test]
    fn cross_entropy_grad_matches_differences() {
        let q = GroundTruthPerm::from_order(vec![2, 0, 1]).unwrap();
        let p = array![[0.2, 0.3, 0.5], [0.6, 0.1, 0.3], [0.2, 0.6, 0.2]];
        let g = cross_entropy_grad(&p, &q).unwrap();
        let h = 1e-6;
        for r in 0..3 {
            for c in 0..3 {
                let mut up = p.clone();
                up[[r, c]] += h;
                let mut dn = p.clone();
                dn[[r, c]] -= h;
                let fd = (cross_entropy_loss(&up, &q).unwrap()
                    - cross_entropy_loss(&dn, &q).unwrap())
                    / (2.0 * h);
                assert!((fd - g[[r, c]]).abs() <= 1e-6);
            }
        }
        let mut dead = p.clone();
        dead[[0, 2]] = 0.0;
        assert_eq!(cross_entropy_grad(&dead, &q).unwrap()[[0, 2]], 0.0);
    }

    #[test]
    fn rank_metric_examples() {
        let truth = [0.3, -1.0, 2.0, 0.5];
        let scores: Vec<f64> = truth.iter().map(|t: &f64| t.exp() * 3.0 - 1.0).collect();
        let m = rank_metrics(&scores, &truth).unwrap();
        assert!(m.exact_match);
        assert_eq!(m.element_rate, 1.0);

        let m = rank_metrics(&[4.0, 3.0, 2.0, 1.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(!m.exact_match);
        assert_eq!(m.element_rate, 0.0);

        let m = rank_metrics(&[1.0, 3.0, 2.0, 4.0, 5.0], &[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert!(!m.exact_match);
        assert_abs_diff_eq!(m.element_rate, 0.6);

        assert!(rank_metrics(&[1.0], &[1.0, 2.0]).is_err());
    }
}
