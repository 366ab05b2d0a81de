//! Sorting-network schedules.
//!
//! A [`NetworkPlan`] is a list of layers, each a set of disjoint comparators
//! `(i, j)` with `i < j`. Executing a comparator leaves the smaller value on
//! wire `i`, so every plan sorts ascending.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `n` for which [`NetworkPlan::validate`] enumerates all binary inputs.
pub const ZERO_ONE_LIMIT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlanFamily {
    OddEven,
    Bitonic,
}

impl PlanFamily {
    pub fn build(self, n: usize) -> Result<NetworkPlan> {
        match self {
            PlanFamily::OddEven => NetworkPlan::odd_even(n),
            PlanFamily::Bitonic => NetworkPlan::bitonic(n),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PlanFamily::OddEven => "odd-even",
            PlanFamily::Bitonic => "bitonic",
        }
    }
}

impl fmt::Display for PlanFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PlanFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "odd-even" | "oddeven" | "oe" => Ok(PlanFamily::OddEven),
            "bitonic" | "bi" => Ok(PlanFamily::Bitonic),
            other => Err(Error::Parse(format!("unknown plan family `{other}`"))),
        }
    }
}

pub type Comparator = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkPlan {
    n: usize,
    layers: Vec<Vec<Comparator>>,
}

impl NetworkPlan {
    /// Builds a plan from explicit layers without checking them; use
    /// [`NetworkPlan::validate`] to inspect the result.
    pub fn from_layers(n: usize, layers: Vec<Vec<Comparator>>) -> Self {
        NetworkPlan { n, layers }
    }

    /// Odd-even transposition network: `n` layers alternating between the
    /// pairs `(0,1),(2,3),…` and `(1,2),(3,4),…`.
    ///
    /// For `n = 1` the single layer is empty.
    pub fn odd_even(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("a sorting network needs at least one wire"));
        }
        let layers = (0..n)
            .map(|k| {
                (k % 2..n.saturating_sub(1))
                    .step_by(2)
                    .map(|i| (i, i + 1))
                    .collect()
            })
            .collect();
        Ok(NetworkPlan { n, layers })
    }

    /// Bitonic sorter in direction-normalized form: each merge stage opens
    /// with a mirrored comparator layer followed by half-cleaners, so no
    /// comparator is reversed. `(log₂ n)(1 + log₂ n)/2` layers.
    pub fn bitonic(n: usize) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::UnsupportedSize {
                n,
                reason: "bitonic networks need a power of two with n >= 2",
            });
        }
        let mut layers = Vec::new();
        let mut block = 2;
        while block <= n {
            layers.push(
                (0..n)
                    .filter(|i| i % block < block / 2)
                    .map(|i| {
                        let start = i - i % block;
                        (i, start + block - 1 - (i - start))
                    })
                    .collect(),
            );
            let mut stride = block / 4;
            while stride >= 1 {
                layers.push(
                    (0..n)
                        .filter(|i| i % (2 * stride) < stride)
                        .map(|i| (i, i + stride))
                        .collect(),
                );
                stride /= 2;
            }
            block *= 2;
        }
        Ok(NetworkPlan { n, layers })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn layers(&self) -> &[Vec<Comparator>] {
        &self.layers
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn comparator_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    /// Runs the plan with hard comparators.
    pub fn hard_execute<T: PartialOrd>(&self, values: &mut [T]) {
        for layer in &self.layers {
            for &(i, j) in layer {
                if values[i] > values[j] {
                    values.swap(i, j);
                }
            }
        }
    }

    /// Checks wire ranges, pair orientation and disjointness, then (for
    /// `n ≤ 16`) runs every binary input through the hard network.
    pub fn validate(&self) -> PlanDiagnostics {
        let fail = |violation| PlanDiagnostics {
            passed: false,
            violation: Some(violation),
            zero_one_inputs: 0,
        };
        if self.n == 0 {
            return fail(PlanViolation::NoWires);
        }
        for (layer_idx, layer) in self.layers.iter().enumerate() {
            let mut seen = vec![false; self.n];
            for &(i, j) in layer {
                if i >= self.n || j >= self.n {
                    return fail(PlanViolation::WireOutOfRange {
                        layer: layer_idx,
                        pair: (i, j),
                    });
                }
                if i >= j {
                    return fail(PlanViolation::UnorderedPair {
                        layer: layer_idx,
                        pair: (i, j),
                    });
                }
                for w in [i, j] {
                    if std::mem::replace(&mut seen[w], true) {
                        return fail(PlanViolation::WireReused {
                            layer: layer_idx,
                            wire: w,
                        });
                    }
                }
            }
        }
        if self.n > ZERO_ONE_LIMIT {
            return PlanDiagnostics {
                passed: true,
                violation: None,
                zero_one_inputs: 0,
            };
        }
        let total = 1u64 << self.n;
        let mut buf = vec![0u8; self.n];
        for mask in 0..total {
            for (w, slot) in buf.iter_mut().enumerate() {
                *slot = ((mask >> w) & 1) as u8;
            }
            let input = buf.clone();
            self.hard_execute(&mut buf);
            if buf.windows(2).any(|w| w[0] > w[1]) {
                return PlanDiagnostics {
                    passed: false,
                    violation: Some(PlanViolation::Unsorted { input }),
                    zero_one_inputs: mask + 1,
                };
            }
        }
        PlanDiagnostics {
            passed: true,
            violation: None,
            zero_one_inputs: total,
        }
    }

    /// Line format: `n <n>` followed by one line per layer of `i:j` pairs.
    pub fn to_text(&self) -> String {
        let mut out = format!("n {}\n", self.n);
        for layer in &self.layers {
            let line: Vec<String> = layer.iter().map(|(i, j)| format!("{i}:{j}")).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty plan text".into()))?;
        let n = header
            .strip_prefix("n ")
            .and_then(|s| s.trim().parse::<usize>().ok())
            .ok_or_else(|| Error::Parse(format!("bad plan header `{header}`")))?;
        let mut layers = Vec::new();
        for line in lines {
            let mut layer = Vec::new();
            for tok in line.split_whitespace() {
                let (i, j) = tok
                    .split_once(':')
                    .and_then(|(i, j)| Some((i.parse().ok()?, j.parse().ok()?)))
                    .ok_or_else(|| Error::Parse(format!("bad comparator `{tok}`")))?;
                layer.push((i, j));
            }
            layers.push(layer);
        }
        Ok(NetworkPlan { n, layers })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlanDiagnostics {
    pub passed: bool,
    pub violation: Option<PlanViolation>,
    /// Number of binary inputs pushed through the hard network.
    pub zero_one_inputs: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum PlanViolation {
    NoWires,
    WireOutOfRange {
        layer: usize,
        pair: Comparator,
    },
    UnorderedPair {
        layer: usize,
        pair: Comparator,
    },
    WireReused {
        layer: usize,
        wire: usize,
    },
    /// A binary input the hard network leaves unsorted.
    Unsorted {
        input: Vec<u8>,
    },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_even_small() {
        let p = NetworkPlan::odd_even(3).unwrap();
        assert_eq!(p.layers(), &[vec![(0, 1)], vec![(1, 2)], vec![(0, 1)]]);
        let p = NetworkPlan::odd_even(1).unwrap();
        assert_eq!(p.layer_count(), 1);
        assert!(p.layers()[0].is_empty());
        assert!(p.validate().passed);
        let p = NetworkPlan::odd_even(6).unwrap();
        assert_eq!(p.layer_count(), 6);
        assert_eq!(p.layers()[0], vec![(0, 1), (2, 3), (4, 5)]);
        assert_eq!(p.layers()[1], vec![(1, 2), (3, 4)]);
    }

    #[test]
    fn odd_even_rejects_zero() {
        assert!(matches!(NetworkPlan::odd_even(0), Err(Error::Domain(_))));
    }

    #[test]
    fn bitonic_layer_counts() {
        for (n, layers) in [(2, 1), (4, 3), (8, 6), (16, 10), (32, 15), (64, 21)] {
            assert_eq!(NetworkPlan::bitonic(n).unwrap().layer_count(), layers);
        }
        assert_eq!(NetworkPlan::bitonic(2).unwrap().layers(), &[vec![(0, 1)]]);
    }

    #[test]
    fn bitonic_rejects_non_powers_of_two() {
        for n in [0, 1, 3, 6, 12] {
            assert!(matches!(
                NetworkPlan::bitonic(n),
                Err(Error::UnsupportedSize { .. })
            ));
        }
    }

    #[test]
    fn zero_one_principle_small() {
        let d = NetworkPlan::odd_even(8).unwrap().validate();
        assert!(d.passed);
        assert_eq!(d.zero_one_inputs, 256);
        let p = NetworkPlan::bitonic(4).unwrap();
        assert_eq!(p.layer_count(), 3);
        assert!(p.validate().passed);
    }

    #[test]
    fn all_permutations_of_small_inputs_sort() {
        fn permutations(n: usize) -> Vec<Vec<u32>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for p in permutations(n - 1) {
                for pos in 0..=p.len() {
                    let mut q = p.clone();
                    q.insert(pos, n as u32);
                    out.push(q);
                }
            }
            out
        }
        for n in 1..=7 {
            let plan = NetworkPlan::odd_even(n).unwrap();
            for mut p in permutations(n) {
                plan.hard_execute(&mut p);
                assert!(p.windows(2).all(|w| w[0] < w[1]));
            }
        }
        let plan = NetworkPlan::bitonic(8).unwrap();
        for mut p in permutations(8) {
            plan.hard_execute(&mut p);
            assert!(p.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn detects_reused_wire() {
        let plan = NetworkPlan::from_layers(3, vec![vec![(0, 1), (1, 2)]]);
        let d = plan.validate();
        assert!(!d.passed);
        assert_eq!(
            d.violation,
            Some(PlanViolation::WireReused { layer: 0, wire: 1 })
        );
    }

    #[test]
    fn detects_other_violations() {
        let d = NetworkPlan::from_layers(2, vec![vec![(0, 2)]]).validate();
        assert!(matches!(
            d.violation,
            Some(PlanViolation::WireOutOfRange { .. })
        ));
        let d = NetworkPlan::from_layers(2, vec![vec![(1, 0)]]).validate();
        assert!(matches!(
            d.violation,
            Some(PlanViolation::UnorderedPair { .. })
        ));
        let d = NetworkPlan::from_layers(3, vec![vec![(0, 1)], vec![(1, 2)]]).validate();
        assert!(matches!(d.violation, Some(PlanViolation::Unsorted { .. })));
    }

    #[test]
    fn text_format() {
        let plan = NetworkPlan::odd_even(4).unwrap();
        let text = plan.to_text();
        assert_eq!(text, "n 4\n0:1 2:3\n1:2\n0:1 2:3\n1:2\n");
        assert_eq!(NetworkPlan::from_text(&text).unwrap(), plan);
        let one = NetworkPlan::odd_even(1).unwrap();
        assert_eq!(NetworkPlan::from_text(&one.to_text()).unwrap(), one);
        assert!(NetworkPlan::from_text("m 4\n").is_err());
        assert!(NetworkPlan::from_text("n 4\n0-1\n").is_err());
    }
}
