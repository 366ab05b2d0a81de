//! Numerical checks of the monotonicity and error-bound properties.
//!
//! Each check returns a [`PropertyReport`]; a failing report always carries a
//! [`Witness`]. [`run_suite`] bundles the checks together with the outcome
//! each one is expected to have (the logistic relaxations are expected to
//! fail the monotonicity and decay checks).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{cross_entropy_loss, forward, hard_sort, GroundTruthPerm};
use crate::error::{Error, Result};
use crate::network::NetworkPlan;
use crate::sigmoid::{SigmoidKind, SigmoidSpec};
use crate::swap::SwapConfig;

/// Slopes above this count as non-decreasing (rounding noise in flat regions).
pub const SLOPE_TOLERANCE: f64 = -1e-9;
/// A non-monotonicity witness must have a slope at most this.
pub const WITNESS_SLOPE: f64 = -1e-3;
pub const STOCHASTIC_TOLERANCE: f64 = 1e-9;
pub const NETWORK_BOUND_SLACK: f64 = 1e-9;
/// Side length of the permutahedron sampling grid.
pub const PERMUTAHEDRON_GRID: usize = 201;
/// Inverse temperature used for the permutahedron surface unless overridden.
pub const PERMUTAHEDRON_BETA: f64 = 32.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub input: Vec<f64>,
    pub measured: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    #[serde(rename = "name")]
    pub check_name: String,
    pub passed: bool,
    pub witness: Option<Witness>,
    pub samples: usize,
}

impl PropertyReport {
    fn pass(name: impl Into<String>, samples: usize) -> Self {
        PropertyReport {
            check_name: name.into(),
            passed: true,
            witness: None,
            samples,
        }
    }

    fn fail(name: impl Into<String>, samples: usize, witness: Witness) -> Self {
        PropertyReport {
            check_name: name.into(),
            passed: false,
            witness: Some(witness),
            samples,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Evenly spaced sample points, both ends included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, points: usize) -> Self {
        Grid { lo, hi, points }
    }

    /// `[−20/β, 20/β]` with 20 001 points.
    pub fn for_beta(beta: f64) -> Self {
        Grid::new(-20.0 / beta, 20.0 / beta, 20_001)
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        let last = self.points.saturating_sub(1).max(1) as f64;
        (0..self.points).map(move |k| self.lo + (self.hi - self.lo) * k as f64 / last)
    }
}

fn soft_min_at(cfg: &SwapConfig, x: f64) -> f64 {
    cfg.swap_unchecked(x, 0.0).lo
}

/// Central-difference slope of `x ↦ min_f(x, 0)` over the grid; fails with
/// the most negative slope found.
pub fn check_swap_monotone(cfg: &SwapConfig, grid: &Grid) -> PropertyReport {
    let name = format!("monotone/{}/beta={}", cfg.kind(), cfg.beta);
    let h = (grid.hi - grid.lo).abs() * 2.5e-6;
    let (worst_x, worst) = grid
        .iter()
        .map(|x| {
            (
                x,
                (soft_min_at(cfg, x + h) - soft_min_at(cfg, x - h)) / (2.0 * h),
            )
        })
        .fold(
            (0.0, f64::INFINITY),
            |acc, cur| if cur.1 < acc.1 { cur } else { acc },
        );
    if worst >= SLOPE_TOLERANCE {
        PropertyReport::pass(name, grid.points)
    } else {
        PropertyReport::fail(
            name,
            grid.points,
            Witness {
                input: vec![worst_x],
                measured: worst,
                threshold: SLOPE_TOLERANCE,
            },
        )
    }
}

/// `sup_x min_f(x, 0)` and its Lipschitz normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundMeasurement {
    pub kind: SigmoidKind,
    pub beta: f64,
    pub measured_sup: f64,
    /// Where the supremum was found (the largest probe for monotonic kinds).
    pub argmax: f64,
    /// Lipschitz constant of `z ↦ f(βz)`; absent for the ART sigmoid.
    pub alpha: Option<f64>,
    pub normalized: Option<f64>,
}

/// Reference error bounds at unit Lipschitz constant.
pub fn reference_bound(kind: SigmoidKind) -> Option<f64> {
    match kind {
        SigmoidKind::Logistic => Some(0.0696),
        SigmoidKind::Reciprocal => Some(0.25),
        SigmoidKind::Cauchy => Some(1.0 / (PI * PI)),
        SigmoidKind::Optimal => Some(1.0 / 16.0),
        SigmoidKind::LogisticArt => None,
    }
}

/// Numerically maximizes `min_f(x, 0)` over `x ∈ (0, 10⁶/β]`.
///
/// Monotonic kinds take the value at the far end of the range; the others
/// take the log-grid maximum refined by golden-section search.
pub fn measure_error_bound(sigmoid: SigmoidSpec, beta: f64) -> Result<BoundMeasurement> {
    let cfg = SwapConfig::new(sigmoid, beta)?;
    let (x_lo, x_hi) = (1e-6 / beta, 1e6 / beta);
    let (argmax, measured_sup) = if sigmoid.kind.is_monotonic() {
        (x_hi, soft_min_at(&cfg, x_hi))
    } else {
        let steps = 4000;
        let ratio = (x_hi / x_lo).ln();
        let xs: Vec<f64> = (0..=steps)
            .map(|k| x_lo * (ratio * k as f64 / steps as f64).exp())
            .collect();
        let (best, _) = xs
            .iter()
            .enumerate()
            .map(|(k, &x)| (k, soft_min_at(&cfg, x)))
            .fold((0, f64::NEG_INFINITY), |acc, cur| {
                if cur.1 > acc.1 {
                    cur
                } else {
                    acc
                }
            });
        let a = xs[best.saturating_sub(1)];
        let b = xs[(best + 1).min(steps)];
        golden_max(|x| soft_min_at(&cfg, x), a, b)
    };
    let alpha = sigmoid.lipschitz_constant().ok().map(|l| l * beta);
    Ok(BoundMeasurement {
        kind: sigmoid.kind,
        beta,
        measured_sup,
        argmax,
        alpha,
        normalized: alpha.map(|a| a * measured_sup),
    })
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-13 * (a.abs() + b.abs()) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Entries in `[0, 1]` and unit row and column sums, to 1e−9.
pub fn check_doubly_stochastic(p: &Array2<f64>) -> PropertyReport {
    let name = "doubly_stochastic";
    let (rows, cols) = p.dim();
    if rows != cols {
        return PropertyReport::fail(
            name,
            0,
            Witness {
                input: vec![rows as f64, cols as f64],
                measured: f64::NAN,
                threshold: 0.0,
            },
        );
    }
    let tol = STOCHASTIC_TOLERANCE;
    for ((r, c), &v) in p.indexed_iter() {
        if !(-tol..=1.0 + tol).contains(&v) {
            return PropertyReport::fail(
                name,
                rows,
                Witness {
                    input: vec![r as f64, c as f64],
                    measured: v,
                    threshold: tol,
                },
            );
        }
    }
    // Witness input is [axis, index] with axis 0 = row, 1 = column.
    for (axis, sums) in [
        (0usize, p.sum_axis(ndarray::Axis(1))),
        (1, p.sum_axis(ndarray::Axis(0))),
    ] {
        for (idx, &s) in sums.iter().enumerate() {
            if (s - 1.0).abs() > tol {
                return PropertyReport::fail(
                    name,
                    rows,
                    Witness {
                        input: vec![axis as f64, idx as f64],
                        measured: s,
                        threshold: tol,
                    },
                );
            }
        }
    }
    PropertyReport::pass(name, rows)
}

/// Random input whose spread varies log-uniformly around the swap's active
/// region `~1/β`.
pub fn random_input(rng: &mut impl Rng, n: usize, beta: f64) -> Vec<f64> {
    let spread = (0.1 / beta) * 10f64.powf(rng.random_range(0.0..3.0)) * n.max(2) as f64;
    (0..n).map(|_| rng.random_range(-spread..=spread)).collect()
}

/// `‖x̂ − sort(x)‖∞ ≤ ℓ·ε + 1e−9` over random inputs, with ε the measured
/// per-swap bound at this β.
pub fn check_network_error_bound(
    plan: &NetworkPlan,
    cfg: &SwapConfig,
    trials: usize,
    seed: u64,
) -> Result<PropertyReport> {
    let eps = measure_error_bound(cfg.sigmoid, cfg.beta)?.measured_sup;
    let bound = plan.layer_count() as f64 * eps + NETWORK_BOUND_SLACK;
    let name = format!(
        "network_bound/{}/beta={}/n={}/layers={}",
        cfg.kind(),
        cfg.beta,
        plan.n(),
        plan.layer_count()
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let x = random_input(&mut rng, plan.n(), cfg.beta);
        let r = forward(&x, plan, cfg)?;
        let err = sup_distance(r.x_hat(), &hard_sort(&x));
        if err > bound {
            return Ok(PropertyReport::fail(
                name,
                trials,
                Witness {
                    input: x,
                    measured: err,
                    threshold: bound,
                },
            ));
        }
    }
    Ok(PropertyReport::pass(name, trials))
}

pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Decay probes for `r(x) = f′(x)·x²`.
pub const DECAY_PROBES: [f64; 5] = [1e1, 1e2, 1e3, 1e4, 1e5];

/// Passes when `f′(x)·x²` stays within a factor of ten over `x ∈ [10, 10⁵]`,
/// i.e. `f′ ∈ Θ(1/x²)`. Faster-decaying slopes fail with the ratio
/// `r(10⁵)/r(10)` as measured value.
pub fn check_decay_class(sigmoid: SigmoidSpec) -> PropertyReport {
    let name = format!("decay/{}", sigmoid.kind);
    let r: Vec<f64> = DECAY_PROBES
        .iter()
        .map(|&x| sigmoid.slope(x) * x * x)
        .collect();
    let ratio = r[r.len() - 1] / r[0];
    if r.iter().all(|v| v.is_finite() && *v > 0.0) && (0.1..=10.0).contains(&ratio) {
        PropertyReport::pass(name, r.len())
    } else {
        PropertyReport::fail(
            name,
            r.len(),
            Witness {
                input: vec![DECAY_PROBES[0], DECAY_PROBES[4]],
                measured: ratio,
                threshold: 0.1,
            },
        )
    }
}

/// A numeric table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        crate::csvio::write_table(out, &self.header, &self.rows)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

/// `min_f(x, 0)` for each sigmoid over the grid; columns `x, <kind>...`.
pub fn emit_swap_curves(kinds: &[SigmoidSpec], beta: f64, grid: &Grid) -> Result<Table> {
    let cfgs = kinds
        .iter()
        .map(|&k| SwapConfig::new(k, beta))
        .collect::<Result<Vec<_>>>()?;
    let header = std::iter::once("x".to_string())
        .chain(kinds.iter().map(|k| k.kind.name().to_string()))
        .collect();
    let rows = grid
        .iter()
        .map(|x| {
            std::iter::once(x)
                .chain(cfgs.iter().map(|c| soft_min_at(c, x)))
                .collect()
        })
        .collect();
    Ok(Table { header, rows })
}

/// Orthonormal coordinates of a point in the plane `x₀ + x₁ + x₂ = const`.
pub fn project_to_plane(x: [f64; 3]) -> (f64, f64) {
    (
        (x[1] - x[0]) / 2f64.sqrt(),
        (2.0 * x[2] - x[0] - x[1]) / 6f64.sqrt(),
    )
}

/// Cross-entropy against the identity ordering after sorting `x` with the
/// three-wire odd-even network.
pub fn permutahedron_loss(cfg: &SwapConfig, x: [f64; 3]) -> Result<f64> {
    let plan = NetworkPlan::odd_even(3)?;
    let r = forward(&x, &plan, cfg)?;
    cross_entropy_loss(r.p(), &GroundTruthPerm::identity(3))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PermutahedronSurface {
    /// Sample points `x` with their loss.
    pub samples: Vec<([f64; 3], f64)>,
}

impl PermutahedronSurface {
    /// Loss at a grid point, if `x` is one.
    pub fn loss_at(&self, x: [f64; 3]) -> Option<f64> {
        self.samples
            .iter()
            .find(|(p, _)| p.iter().zip(&x).all(|(a, b)| (a - b).abs() < 1e-9))
            .map(|&(_, l)| l)
    }

    pub fn min(&self) -> ([f64; 3], f64) {
        *self
            .samples
            .iter()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty surface")
    }

    pub fn max(&self) -> ([f64; 3], f64) {
        *self
            .samples
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty surface")
    }

    /// Columns `u, v, loss` with `(u, v)` from [`project_to_plane`].
    pub fn to_table(&self) -> Table {
        Table {
            header: vec!["u".into(), "v".into(), "loss".into()],
            rows: self
                .samples
                .iter()
                .map(|&(x, l)| {
                    let (u, v) = project_to_plane(x);
                    vec![u, v, l]
                })
                .collect(),
        }
    }
}

/// Samples the permutahedron of `(1, 2, 3)` on a 201×201 grid over
/// `x₀, x₁ ∈ [1, 3]` (with `x₂ = 6 − x₀ − x₁`), keeping the points inside the
/// hexagon. All six vertices lie on the grid.
pub fn emit_permutahedron_loss(cfg: &SwapConfig) -> Result<PermutahedronSurface> {
    let g = PERMUTAHEDRON_GRID - 1;
    let coord = |k: usize| 1.0 + 2.0 * k as f64 / g as f64;
    let tol = 1e-9;
    let mut samples = Vec::new();
    for a in 0..=g {
        for b in 0..=g {
            let x = [coord(a), coord(b), 6.0 - coord(a) - coord(b)];
            let inside = x.iter().all(|&v| (1.0 - tol..=3.0 + tol).contains(&v))
                && [(0, 1), (0, 2), (1, 2)]
                    .iter()
                    .all(|&(i, j)| (3.0 - tol..=5.0 + tol).contains(&(x[i] + x[j])));
            if inside {
                samples.push((x, permutahedron_loss(cfg, x)?));
            }
        }
    }
    Ok(PermutahedronSurface { samples })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckGroup {
    Monotone,
    Bounds,
    Stochastic,
    NetworkBound,
    Decay,
}

impl CheckGroup {
    pub const ALL: [CheckGroup; 5] = [
        CheckGroup::Monotone,
        CheckGroup::Bounds,
        CheckGroup::Stochastic,
        CheckGroup::NetworkBound,
        CheckGroup::Decay,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckGroup::Monotone => "monotone",
            CheckGroup::Bounds => "bounds",
            CheckGroup::Stochastic => "stochastic",
            CheckGroup::NetworkBound => "network-bound",
            CheckGroup::Decay => "decay",
        }
    }
}

impl fmt::Display for CheckGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckGroup::ALL
            .into_iter()
            .find(|g| g.name() == s || g.name().replace('-', "_") == s)
            .ok_or_else(|| Error::Parse(format!("unknown check `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteEntry {
    pub report: PropertyReport,
    pub expected_pass: bool,
}

impl SuiteEntry {
    /// Expected passes passed, and expected failures produced a witness.
    pub fn as_expected(&self) -> bool {
        if self.expected_pass {
            self.report.passed
        } else {
            !self.report.passed && self.report.witness.is_some()
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SuiteOutput {
    pub entries: Vec<SuiteEntry>,
    pub bounds: Vec<BoundMeasurement>,
}

impl SuiteOutput {
    pub fn all_as_expected(&self) -> bool {
        self.entries.iter().all(SuiteEntry::as_expected)
    }
}

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub groups: Vec<CheckGroup>,
    /// Restrict to these kinds; empty means all.
    pub kinds: Vec<SigmoidKind>,
    pub betas: Vec<f64>,
    pub trials: usize,
    pub grid_points: usize,
    pub seed: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            groups: CheckGroup::ALL.to_vec(),
            kinds: Vec::new(),
            betas: vec![0.5, 1.0, 4.0, 16.0],
            trials: 100,
            grid_points: 20_001,
            seed: 0,
        }
    }
}

type Job<'a> = Box<dyn Fn() -> Result<SuiteEntry> + Send + Sync + 'a>;

/// Plans used by the stochasticity and network-bound groups.
pub fn suite_plans() -> Vec<NetworkPlan> {
    let mut plans: Vec<NetworkPlan> = (2..=8)
        .map(|n| NetworkPlan::odd_even(n).expect("n >= 1"))
        .collect();
    plans.extend([4, 8, 16].map(|n| NetworkPlan::bitonic(n).expect("power of two")));
    plans
}

pub fn run_suite(opts: &SuiteOptions) -> Result<SuiteOutput> {
    let kinds: Vec<SigmoidKind> = if opts.kinds.is_empty() {
        SigmoidKind::ALL.to_vec()
    } else {
        opts.kinds.clone()
    };
    let mut out = SuiteOutput::default();
    let plans = suite_plans();
    let mut jobs: Vec<Job<'_>> = Vec::new();

    for &group in &opts.groups {
        match group {
            CheckGroup::Monotone => {
                for &kind in &kinds {
                    for &beta in &opts.betas {
                        jobs.push(Box::new(move || {
                            let cfg = SwapConfig::new(kind, beta)?;
                            let mut grid = Grid::for_beta(beta);
                            grid.points = opts.grid_points.max(10_000);
                            let report = check_swap_monotone(&cfg, &grid);
                            let expected_pass = kind.is_monotonic();
                            // an expected failure only counts with a clear witness
                            let report = if !expected_pass
                                && report
                                    .witness
                                    .as_ref()
                                    .is_some_and(|w| w.measured > WITNESS_SLOPE)
                            {
                                PropertyReport {
                                    witness: None,
                                    ..report
                                }
                            } else {
                                report
                            };
                            Ok(SuiteEntry {
                                report,
                                expected_pass,
                            })
                        }));
                    }
                }
            }
            CheckGroup::Bounds => {
                for &kind in &kinds {
                    let Some(reference) = reference_bound(kind) else {
                        continue;
                    };
                    let spec = SigmoidSpec::new(kind);
                    let beta = 1.0 / spec.lipschitz_constant()?;
                    let m = measure_error_bound(spec, beta)?;
                    out.bounds.push(m);
                    let normalized = m.normalized.unwrap_or(f64::NAN);
                    let tol = if kind == SigmoidKind::Logistic {
                        1e-3 * reference
                    } else {
                        1e-6
                    };
                    let name = format!("bounds/{kind}");
                    let report = if (normalized - reference).abs() <= tol {
                        PropertyReport::pass(name, 1)
                    } else {
                        PropertyReport::fail(
                            name,
                            1,
                            Witness {
                                input: vec![beta],
                                measured: normalized,
                                threshold: reference,
                            },
                        )
                    };
                    out.entries.push(SuiteEntry {
                        report,
                        expected_pass: true,
                    });
                }
            }
            CheckGroup::Stochastic => {
                for &kind in &kinds {
                    for &beta in &opts.betas {
                        let plans = &plans;
                        jobs.push(Box::new(move || {
                            let cfg = SwapConfig::new(kind, beta)?;
                            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ beta.to_bits());
                            let mut samples = 0;
                            for plan in plans {
                                for _ in 0..opts.trials {
                                    let x = random_input(&mut rng, plan.n(), beta);
                                    let r = forward(&x, plan, &cfg)?;
                                    let mut report = check_doubly_stochastic(r.p());
                                    samples += 1;
                                    if !report.passed {
                                        report.check_name =
                                            format!("stochastic/{kind}/beta={beta}");
                                        report.samples = samples;
                                        return Ok(SuiteEntry {
                                            report,
                                            expected_pass: true,
                                        });
                                    }
                                }
                            }
                            Ok(SuiteEntry {
                                report: PropertyReport::pass(
                                    format!("stochastic/{kind}/beta={beta}"),
                                    samples,
                                ),
                                expected_pass: true,
                            })
                        }));
                    }
                }
            }
            CheckGroup::NetworkBound => {
                let bound_plans: Vec<&NetworkPlan> = plans
                    .iter()
                    .filter(|p| {
                        let oe = p.layer_count() == p.n();
                        (oe && matches!(p.n(), 4 | 8)) || (!oe && matches!(p.n(), 4 | 8 | 16))
                    })
                    .collect();
                for &kind in kinds.iter().filter(|k| k.is_monotonic()) {
                    for &beta in &opts.betas {
                        for &plan in &bound_plans {
                            jobs.push(Box::new(move || {
                                let cfg = SwapConfig::new(kind, beta)?;
                                let report =
                                    check_network_error_bound(plan, &cfg, opts.trials, opts.seed)?;
                                Ok(SuiteEntry {
                                    report,
                                    expected_pass: true,
                                })
                            }));
                        }
                    }
                }
            }
            CheckGroup::Decay => {
                for &kind in &kinds {
                    let report = check_decay_class(SigmoidSpec::new(kind));
                    out.entries.push(SuiteEntry {
                        report,
                        expected_pass: kind.is_monotonic(),
                    });
                }
            }
        }
    }

    let results: Vec<Result<SuiteEntry>> = jobs.par_iter().map(|job| job()).collect();
    for r in results {
        out.entries.push(r?);
    }
    Ok(out)
}
