//! Sigmoid relaxations of the step function.
//!
//! Every function here is evaluated at canonical scale (inverse temperature
//! one); [`crate::swap::SwapConfig`] multiplies the argument by β before
//! calling in. All of them map ℝ → [0, 1], are non-decreasing and satisfy
//! `f(z) = 1 − f(−z)`, so `f(0) = 1/2`.
//!
//! | kind           | f(z)                                   | f′(z)              | sup f′ |
//! |----------------|----------------------------------------|--------------------|--------|
//! | `logistic`     | 1 / (1 + e^(−z))                       | f(z) f(−z)         | 1/4    |
//! | `logistic_art` | logistic(z / (\|z\|^λ + ε))            | chain rule         | —      |
//! | `reciprocal`   | z / (1 + 2\|z\|) + 1/2                 | 1 / (1 + 2\|z\|)²  | 1      |
//! | `cauchy`       | arctan(z) / π + 1/2                    | 1 / (π (1 + z²))   | 1/π    |
//! | `optimal`      | piecewise, see below                   | 1/(16z²) or 1      | 1      |
//!
//! The optimal sigmoid is `−1/(16z)` for `z < −1/4`, `1 − 1/(16z)` for
//! `z > 1/4` and `z + 1/2` in between. It is the 1-Lipschitz sigmoid with the
//! smallest swap error among those giving monotonic swaps.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Default exponent of the activation replacement transform.
pub const DEFAULT_ART_LAMBDA: f64 = 0.25;
/// Default denominator guard of the activation replacement transform.
pub const DEFAULT_ART_EPSILON: f64 = 1e-10;

/// Location of the two kinks of the optimal sigmoid.
pub const OPTIMAL_KINK: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmoidKind {
    Logistic,
    LogisticArt,
    Reciprocal,
    Cauchy,
    Optimal,
}

impl SigmoidKind {
    pub const ALL: [SigmoidKind; 5] = [
        SigmoidKind::Logistic,
        SigmoidKind::LogisticArt,
        SigmoidKind::Reciprocal,
        SigmoidKind::Cauchy,
        SigmoidKind::Optimal,
    ];

    /// The kinds whose relaxed swaps are monotonic.
    pub const MONOTONIC: [SigmoidKind; 3] = [
        SigmoidKind::Reciprocal,
        SigmoidKind::Cauchy,
        SigmoidKind::Optimal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SigmoidKind::Logistic => "logistic",
            SigmoidKind::LogisticArt => "logistic_art",
            SigmoidKind::Reciprocal => "reciprocal",
            SigmoidKind::Cauchy => "cauchy",
            SigmoidKind::Optimal => "optimal",
        }
    }

    /// Whether `min_f(x, 0)` is non-decreasing in `x`.
    pub fn is_monotonic(self) -> bool {
        matches!(
            self,
            SigmoidKind::Reciprocal | SigmoidKind::Cauchy | SigmoidKind::Optimal
        )
    }
}

impl fmt::Display for SigmoidKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SigmoidKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "logistic" | "sigmoid" => Ok(SigmoidKind::Logistic),
            "logistic_art" | "art" => Ok(SigmoidKind::LogisticArt),
            "reciprocal" => Ok(SigmoidKind::Reciprocal),
            "cauchy" => Ok(SigmoidKind::Cauchy),
            "optimal" => Ok(SigmoidKind::Optimal),
            other => Err(Error::Parse(format!("unknown sigmoid kind `{other}`"))),
        }
    }
}

/// A sigmoid relaxation together with its shape parameters.
///
/// `lambda` and `epsilon_art` only affect [`SigmoidKind::LogisticArt`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmoidSpec {
    pub kind: SigmoidKind,
    pub lambda: f64,
    pub epsilon_art: f64,
}

impl SigmoidSpec {
    pub fn new(kind: SigmoidKind) -> Self {
        SigmoidSpec {
            kind,
            lambda: DEFAULT_ART_LAMBDA,
            epsilon_art: DEFAULT_ART_EPSILON,
        }
    }

    /// Logistic sigmoid behind the activation replacement transform
    /// `z ↦ z / (|z|^λ + ε)`.
    pub fn art(lambda: f64, epsilon_art: f64) -> Result<Self> {
        let spec = SigmoidSpec {
            kind: SigmoidKind::LogisticArt,
            lambda,
            epsilon_art,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::domain(format!(
                "ART exponent lambda must lie in [0, 1], got {}",
                self.lambda
            )));
        }
        if !(self.epsilon_art > 0.0 && self.epsilon_art.is_finite()) {
            return Err(Error::domain(format!(
                "ART epsilon must be positive, got {}",
                self.epsilon_art
            )));
        }
        Ok(())
    }

    pub fn eval(&self, z: f64) -> Result<f64> {
        ensure_finite("sigmoid argument", z)?;
        Ok(self.value(z))
    }

    /// First derivative. At the optimal sigmoid's kinks (±1/4) this returns
    /// the linear-branch slope 1.
    pub fn deriv(&self, z: f64) -> Result<f64> {
        ensure_finite("sigmoid argument", z)?;
        Ok(self.slope(z))
    }

    /// `sup_z f′(z)`; the normalizing constant α at β = 1.
    pub fn lipschitz_constant(&self) -> Result<f64> {
        match self.kind {
            SigmoidKind::Logistic => Ok(0.25),
            SigmoidKind::Reciprocal | SigmoidKind::Optimal => Ok(1.0),
            SigmoidKind::Cauchy => Ok(1.0 / PI),
            SigmoidKind::LogisticArt => Err(Error::Unsupported {
                kind: self.kind.name(),
                reason: "slope is unbounded at 0 for lambda > 0, no Lipschitz normalization",
            }),
        }
    }

    pub(crate) fn value(&self, z: f64) -> f64 {
        match self.kind {
            SigmoidKind::Logistic => logistic(z),
            SigmoidKind::LogisticArt => logistic(self.art_transform(z)),
            SigmoidKind::Reciprocal => z / (1.0 + 2.0 * z.abs()) + 0.5,
            SigmoidKind::Cauchy => z.atan() / PI + 0.5,
            SigmoidKind::Optimal => {
                if z < -OPTIMAL_KINK {
                    -1.0 / (16.0 * z)
                } else if z > OPTIMAL_KINK {
                    1.0 - 1.0 / (16.0 * z)
                } else {
                    z + 0.5
                }
            }
        }
    }

    pub(crate) fn slope(&self, z: f64) -> f64 {
        match self.kind {
            SigmoidKind::Logistic => logistic_slope(z),
            SigmoidKind::LogisticArt => {
                let az = z.abs().powf(self.lambda);
                let denom = az + self.epsilon_art;
                let d_phi = ((1.0 - self.lambda) * az + self.epsilon_art) / (denom * denom);
                logistic_slope(z / denom) * d_phi
            }
            SigmoidKind::Reciprocal => {
                let d = 1.0 + 2.0 * z.abs();
                1.0 / (d * d)
            }
            SigmoidKind::Cauchy => 1.0 / (PI * (1.0 + z * z)),
            SigmoidKind::Optimal => {
                if z.abs() > OPTIMAL_KINK {
                    1.0 / (16.0 * z * z)
                } else {
                    1.0
                }
            }
        }
    }

    fn art_transform(&self, z: f64) -> f64 {
        z / (z.abs().powf(self.lambda) + self.epsilon_art)
    }
}

impl From<SigmoidKind> for SigmoidSpec {
    fn from(kind: SigmoidKind) -> Self {
        SigmoidSpec::new(kind)
    }
}

// exp(−|z|) never overflows, and the two branches are mirror images so
// f(z) + f(−z) = 1 holds to rounding.
fn logistic(z: f64) -> f64 {
    let e = (-z.abs()).exp();
    if z >= 0.0 {
        1.0 / (1.0 + e)
    } else {
        e / (1.0 + e)
    }
}

fn logistic_slope(z: f64) -> f64 {
    let e = (-z.abs()).exp();
    let d = 1.0 + e;
    e / (d * d)
}
