//! Monotonic differentiable sorting networks.
//!
//! Sorting networks whose conditional swaps are relaxed with a sigmoid of the
//! scaled difference `β(b − a)`. With the reciprocal, Cauchy or optimal
//! sigmoid every softly-sorted output is non-decreasing in every input, and
//! the deviation from a hard sort is bounded by `ε·ℓ` for `ℓ` layers.
//!
//! ```
//! use monosort::{forward, NetworkPlan, SigmoidKind, SwapConfig};
//!
//! let plan = NetworkPlan::odd_even(3)?;
//! let cfg = SwapConfig::new(SigmoidKind::Optimal, 1000.0)?;
//! let sorted = forward(&[3.0, 1.0, 2.0], &plan, &cfg)?;
//! assert!((sorted.x_hat()[0] - 1.0).abs() < 1e-3);
//! # Ok::<(), monosort::Error>(())
//! ```

pub mod cli;
pub mod csvio;
pub mod engine;
pub mod error;
pub mod harness;
pub mod network;
pub mod sigmoid;
pub mod swap;
pub mod train;

pub use engine::{
    backward, cross_entropy_grad, cross_entropy_loss, forward, hard_rank_perm, hard_sort,
    rank_metrics, GroundTruthPerm, RankMetrics, SortResult,
};
pub use error::{Error, Result};
pub use network::{NetworkPlan, PlanFamily};
pub use sigmoid::{SigmoidKind, SigmoidSpec};
pub use swap::{SwapConfig, SwapOutcome};
