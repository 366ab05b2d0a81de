//! Relaxed conditional swap of two wires.
//!
//! With `v = f(β(b − a))` the soft minimum is `a·v + b·(1 − v)` and the soft
//! maximum `a·(1 − v) + b·v`. The sigmoid is evaluated once and the mirrored
//! weight is taken as `1 − v`, which is exactly `f(β(a − b))` for the odd
//! symmetric sigmoids in [`crate::sigmoid`].

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::sigmoid::{SigmoidKind, SigmoidSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwapConfig {
    pub sigmoid: SigmoidSpec,
    /// Inverse temperature; larger is closer to a hard swap.
    pub beta: f64,
}

/// Result of one relaxed swap. The lower wire receives `lo`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapOutcome {
    pub lo: f64,
    pub hi: f64,
    /// Weight `v` with which the pair is passed through unswapped.
    pub blend: f64,
}

impl SwapConfig {
    pub fn new(sigmoid: impl Into<SigmoidSpec>, beta: f64) -> Result<Self> {
        let cfg = SwapConfig {
            sigmoid: sigmoid.into(),
            beta,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn kind(&self) -> SigmoidKind {
        self.sigmoid.kind
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::domain(format!(
                "inverse temperature must be positive and finite, got {}",
                self.beta
            )));
        }
        self.sigmoid.validate()
    }

    pub fn soft_swap(&self, a: f64, b: f64) -> Result<SwapOutcome> {
        check_pair(a, b)?;
        Ok(self.swap_unchecked(a, b))
    }

    /// The 2×2 doubly stochastic block mapping `(a, b)` to `(lo, hi)`.
    pub fn swap_block(&self, a: f64, b: f64) -> Result<[[f64; 2]; 2]> {
        check_pair(a, b)?;
        let v = self.blend(a, b);
        let w = 1.0 - v;
        Ok([[v, w], [w, v]])
    }

    /// Pulls the cotangents `(d_lo, d_hi)` of the outputs back to the inputs.
    pub fn swap_grad(&self, a: f64, b: f64, d_lo: f64, d_hi: f64) -> Result<(f64, f64)> {
        check_pair(a, b)?;
        ensure_finite("d_lo", d_lo)?;
        ensure_finite("d_hi", d_hi)?;
        let v = self.blend(a, b);
        Ok(self.pullback(a, b, v, d_lo, d_hi, 0.0))
    }

    pub(crate) fn blend(&self, a: f64, b: f64) -> f64 {
        self.sigmoid.value(self.beta * (b - a))
    }

    /// `dv/db`; `dv/da` is its negation.
    pub(crate) fn blend_slope(&self, a: f64, b: f64) -> f64 {
        self.beta * self.sigmoid.slope(self.beta * (b - a))
    }

    pub(crate) fn swap_unchecked(&self, a: f64, b: f64) -> SwapOutcome {
        let v = self.blend(a, b);
        let w = 1.0 - v;
        SwapOutcome {
            lo: a * v + b * w,
            hi: a * w + b * v,
            blend: v,
        }
    }

    /// Vector-Jacobian product of one swap. `d_blend` is an additional
    /// cotangent arriving directly on `v` (from the permutation-matrix path).
    pub(crate) fn pullback(
        &self,
        a: f64,
        b: f64,
        v: f64,
        d_lo: f64,
        d_hi: f64,
        d_blend: f64,
    ) -> (f64, f64) {
        let w = 1.0 - v;
        // lo = a v + b (1 − v): ∂lo/∂v = a − b;  hi = a (1 − v) + b v: ∂hi/∂v = b − a.
        let dv = (d_lo - d_hi) * (a - b) + d_blend;
        let s = self.blend_slope(a, b);
        let d_a = d_lo * v + d_hi * w - s * dv;
        let d_b = d_lo * w + d_hi * v + s * dv;
        (d_a, d_b)
    }
}

fn check_pair(a: f64, b: f64) -> Result<()> {
    ensure_finite("swap input a", a)?;
    ensure_finite("swap input b", b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigmoid::SigmoidKind::*;
    use approx::assert_abs_diff_eq;

    fn cfg(kind: SigmoidKind, beta: f64) -> SwapConfig {
        SwapConfig::new(kind, beta).unwrap()
    }

    fn all_cfgs() -> Vec<SwapConfig> {
        let mut out = Vec::new();
        for kind in SigmoidKind::ALL {
            for beta in [0.5, 1.0, 4.0, 16.0] {
                out.push(cfg(kind, beta));
            }
        }
        out
    }

    #[test]
    fn idempotent_on_equal_inputs() {
        for c in all_cfgs() {
            let o = c.soft_swap(1.7, 1.7).unwrap();
            assert_eq!(o.lo, 1.7);
            assert_eq!(o.hi, 1.7);
            assert_eq!(o.blend, 0.5);
        }
    }

    #[test]
    fn optimal_soft_min_at_kink() {
        let o = cfg(Optimal, 1.0).soft_swap(0.25, 0.0).unwrap();
        assert_abs_diff_eq!(o.lo, 1.0 / 16.0, epsilon = 1e-15);
    }

    #[test]
    fn hard_limit() {
        let o = cfg(Logistic, 1e6).soft_swap(3.0, 1.0).unwrap();
        assert_abs_diff_eq!(o.lo, 1.0, epsilon = 1e-5);
        assert_abs_diff_eq!(o.hi, 3.0, epsilon = 1e-5);
    }

    #[test]
    fn axioms_hold() {
        let pts = [-3.0, -0.4, -0.1, 0.0, 0.05, 0.3, 1.0, 2.5, 11.0];
        for c in all_cfgs() {
            for &a in &pts {
                for &b in &pts {
                    let o = c.soft_swap(a, b).unwrap();
                    // sum preservation
                    assert!((o.lo + o.hi - (a + b)).abs() <= 1e-12);
                    // ordering and bounded by hard versions
                    let tol = 1e-12;
                    assert!(a.min(b) - tol <= o.lo && o.lo <= o.hi + tol);
                    assert!(o.hi <= a.max(b) + tol);
                    assert!((0.0..=1.0).contains(&o.blend));
                    // commutativity
                    let r = c.soft_swap(b, a).unwrap();
                    assert!((o.lo - r.lo).abs() <= 1e-12 && (o.hi - r.hi).abs() <= 1e-12);
                    // inversion
                    let n = c.soft_swap(-a, -b).unwrap();
                    assert!((o.lo + n.hi).abs() <= 1e-12);
                    // shift invariance
                    for shift in [-1e3, -2.0, 0.5, 1e3] {
                        let s = c.soft_swap(a + shift, b + shift).unwrap();
                        assert!((s.lo - (o.lo + shift)).abs() <= 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn block_examples() {
        let half = cfg(Cauchy, 3.0).swap_block(2.0, 2.0).unwrap();
        assert_eq!(half, [[0.5, 0.5], [0.5, 0.5]]);
        let b = cfg(Optimal, 1.0).swap_block(0.0, 1.0).unwrap();
        assert_abs_diff_eq!(b[0][0], 0.9375, epsilon = 1e-15);
        assert_abs_diff_eq!(b[0][1], 0.0625, epsilon = 1e-15);
        assert_abs_diff_eq!(b[1][0], 0.0625, epsilon = 1e-15);
        assert_abs_diff_eq!(b[1][1], 0.9375, epsilon = 1e-15);
    }

    #[test]
    fn block_is_doubly_stochastic_and_reproduces_swap() {
        for c in all_cfgs() {
            for (a, b) in [(0.3, -0.7), (5.0, 5.5), (-2.0, 8.0)] {
                let m = c.swap_block(a, b).unwrap();
                assert_eq!(m[0][0] + m[0][1], 1.0);
                assert_eq!(m[1][0] + m[1][1], 1.0);
                assert_eq!(m[0][0] + m[1][0], 1.0);
                assert_eq!(m[0][1] + m[1][1], 1.0);
                let o = c.soft_swap(a, b).unwrap();
                assert!((m[0][0] * a + m[0][1] * b - o.lo).abs() <= 1e-14);
                assert!((m[1][0] * a + m[1][1] * b - o.hi).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn grad_with_unit_cotangents_is_one() {
        for c in all_cfgs() {
            let (da, db) = c.swap_grad(0.3, -1.1, 1.0, 1.0).unwrap();
            assert_abs_diff_eq!(da, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(db, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn grad_at_tie_splits_evenly() {
        let (da, db) = cfg(Reciprocal, 1.0).swap_grad(0.0, 0.0, 1.0, 0.0).unwrap();
        assert_abs_diff_eq!(da, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(db, 0.5, epsilon = 1e-15);
    }

    fn fd_grad(c: &SwapConfig, a: f64, b: f64, d_lo: f64, d_hi: f64) -> (f64, f64) {
        let h = 1e-5;
        let loss = |a: f64, b: f64| {
            let o = c.soft_swap(a, b).unwrap();
            d_lo * o.lo + d_hi * o.hi
        };
        (
            (loss(a + h, b) - loss(a - h, b)) / (2.0 * h),
            (loss(a, b + h) - loss(a, b - h)) / (2.0 * h),
        )
    }

    #[test]
    fn grad_matches_finite_differences() {
        let c = cfg(Logistic, 2.0);
        let (d_lo, d_hi) = (0.37, -1.21);
        let (da, db) = c.swap_grad(0.3, -0.7, d_lo, d_hi).unwrap();
        let (fa, fb) = fd_grad(&c, 0.3, -0.7, d_lo, d_hi);
        assert!((da - fa).abs() <= 1e-6 * fa.abs().max(1.0));
        assert!((db - fb).abs() <= 1e-6 * fb.abs().max(1.0));

        for c in all_cfgs() {
            for (a, b) in [(0.3, -0.7), (1.9, 2.4), (-3.0, 0.2)] {
                let z = c.beta * (b - a);
                if c.kind() == Optimal && (z.abs() - 0.25).abs() < 1e-4 {
                    continue;
                }
                let (da, db) = c.swap_grad(a, b, 0.8, 0.1).unwrap();
                let (fa, fb) = fd_grad(&c, a, b, 0.8, 0.1);
                assert!((da - fa).abs() <= 1e-6 * fa.abs().max(1.0), "{c:?} {a} {b}");
                assert!((db - fb).abs() <= 1e-6 * fb.abs().max(1.0), "{c:?} {a} {b}");
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(SwapConfig::new(Optimal, 0.0).is_err());
        assert!(SwapConfig::new(Optimal, f64::INFINITY).is_err());
        let c = cfg(Optimal, 1.0);
        assert!(c.soft_swap(f64::NAN, 0.0).is_err());
        assert!(c.swap_block(0.0, f64::NEG_INFINITY).is_err());
    }
}
