//! Empirical measures on the real line, distances to a normal reference,
//! running moments and the low-temperature magnetization `m+(beta)`.
//!
//! # Lévy distance on finitely many points
//!
//! For a step CDF `G` with atoms `a_1 < ... < a_m` and a continuous
//! nondecreasing `F`, the corridor condition
//! `F(t - e) - e <= G(t) <= F(t + e) + e` only has to be checked at the
//! atoms. On `[a_i, a_{i+1})` the value `G(a_i)` is constant while
//! `F(t + e)` is smallest at the left end and `F(t - e)` is largest towards
//! the right end, so the binding constraints are
//! `G(a_i) <= F(a_i + e) + e` and `G(a_i) >= F(a_{i+1} - e) - e`, together
//! with `F(a_1 - e) <= e` to the left of the first atom. The condition is
//! monotone in `e`, so the infimum is found by bisection.
//!
//! For two step CDFs the difference of the shifted functions is piecewise
//! constant and right-continuous, with breakpoints at the atoms of one
//! measure and the `e`-shifted atoms of the other; checking the value at
//! every breakpoint is exact.

use serde::{Deserialize, Serialize};
use libm::erfc;

use crate::error::{Error, Result};

const LEVY_TOL: f64 = 1e-7;

/// Neumaier summation.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Compensated prefix sums of the weights.
fn running_sums(atoms: &[(f64, f64)]) -> Vec<f64> {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    atoms
        .iter()
        .map(|&(_, w)| {
            let t = sum + w;
            if sum.abs() >= w.abs() {
                comp += (sum - t) + w;
            } else {
                comp += (w - t) + sum;
            }
            sum = t;
            sum + comp
        })
        .collect()
}

/// Atoms `(location, weight)` with strictly increasing locations and
/// weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    atoms: Vec<(f64, f64)>,
    #[serde(skip)]
    cumulative: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        for w in atoms.windows(2) {
            if !(w[0].0 < w[1].0) {
                return Err(Error::InvalidParameter(format!(
                    "atom locations must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        if atoms.iter().any(|&(x, w)| !x.is_finite() || !(w >= 0.0)) {
            return Err(Error::InvalidParameter(
                "atom locations must be finite and weights nonnegative".into(),
            ));
        }
        let total = compensated_sum(atoms.iter().map(|a| a.1));
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        let cumulative = running_sums(&atoms);
        Ok(EmpiricalMeasure { atoms, cumulative })
    }

    /// Builds a measure from unnormalized `(location, weight)` pairs in any
    /// order; equal locations are merged.
    pub fn from_weighted(mut pairs: Vec<(f64, f64)>) -> Result<Self> {
        pairs.retain(|&(_, w)| w > 0.0);
        if pairs.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total = compensated_sum(pairs.iter().map(|a| a.1));
        let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
        for (x, w) in pairs {
            match atoms.last_mut() {
                Some(last) if last.0 == x => last.1 += w / total,
                _ => atoms.push((x, w / total)),
            }
        }
        Self::new(atoms)
    }

    /// Equal-weight measure of a sample.
    pub fn from_samples(values: &[f64]) -> Result<Self> {
        Self::from_weighted(values.iter().map(|&x| (x, 1.0)).collect())
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    fn ensure_cumulative(&self) -> std::borrow::Cow<'_, [f64]> {
        if self.cumulative.len() == self.atoms.len() {
            std::borrow::Cow::Borrowed(&self.cumulative)
        } else {
            std::borrow::Cow::Owned(running_sums(&self.atoms))
        }
    }

    /// `mu((-inf, t])`.
    pub fn cdf(&self, t: f64) -> f64 {
        let idx = self.atoms.partition_point(|a| a.0 <= t);
        if idx == 0 {
            0.0
        } else {
            self.ensure_cumulative()[idx - 1].min(1.0)
        }
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|&(x, w)| x * w).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.atoms.iter().map(|&(x, w)| w * (x - m) * (x - m)).sum()
    }

    pub fn total_variation(&self, other: &EmpiricalMeasure) -> f64 {
        let mut locs: Vec<f64> = self
            .atoms
            .iter()
            .chain(other.atoms.iter())
            .map(|a| a.0)
            .collect();
        locs.sort_by(f64::total_cmp);
        locs.dedup();
        let weight = |m: &EmpiricalMeasure, x: f64| {
            m.atoms
                .binary_search_by(|a| a.0.total_cmp(&x))
                .map(|i| m.atoms[i].1)
                .unwrap_or(0.0)
        };
        0.5 * locs
            .iter()
            .map(|&x| (weight(self, x) - weight(other, x)).abs())
            .sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalRef {
    pub mean: f64,
    pub variance: f64,
}

impl NormalRef {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) || !mean.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "normal reference needs finite mean and positive variance, got ({mean}, {variance})"
            )));
        }
        Ok(NormalRef { mean, variance })
    }

    pub fn standard() -> Self {
        NormalRef {
            mean: 0.0,
            variance: 1.0,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        normal_cdf(x, self)
    }
}

pub fn normal_cdf(x: f64, r: &NormalRef) -> f64 {
    let z = (x - r.mean) / r.variance.sqrt();
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

fn bisect_monotone(ok: impl Fn(f64) -> bool) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if ok(0.0) {
        return 0.0;
    }
    while hi - lo > LEVY_TOL {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Lévy distance between `mu` and a normal law, to within `1e-6`.
pub fn levy_distance(mu: &EmpiricalMeasure, r: &NormalRef) -> f64 {
    let atoms = mu.atoms();
    let cum = mu.ensure_cumulative();
    let corridor = |eps: f64| {
        if r.cdf(atoms[0].0 - eps) - eps > 0.0 {
            return false;
        }
        atoms.iter().enumerate().all(|(i, &(a, _))| {
            let g = cum[i];
            let upper = g <= r.cdf(a + eps) + eps;
            let lower = match atoms.get(i + 1) {
                Some(&(next, _)) => g >= r.cdf(next - eps) - eps,
                None => true,
            };
            upper && lower
        })
    };
    bisect_monotone(corridor)
}

/// Lévy distance between two discrete measures, to within `1e-6`.
pub fn levy_distance_measures(mu1: &EmpiricalMeasure, mu2: &EmpiricalMeasure) -> f64 {
    let a = mu1.atoms();
    let b = mu2.atoms();
    let f1_at_atom = mu1.ensure_cumulative();
    let corridor = |eps: f64| {
        // mu1(-inf, t - eps] - eps <= mu2(-inf, t]
        let lower = b.iter().all(|&(bj, _)| mu1.cdf(bj - eps) - eps <= mu2.cdf(bj))
            && a.iter()
                .enumerate()
                .all(|(i, &(ai, _))| f1_at_atom[i] - eps <= mu2.cdf(ai + eps));
        // mu2(-inf, t] <= mu1(-inf, t + eps] + eps
        let upper = b.iter().all(|&(bj, _)| mu2.cdf(bj) <= mu1.cdf(bj + eps) + eps)
            && a.iter()
                .enumerate()
                .all(|(i, &(ai, _))| mu2.cdf(ai - eps) <= f1_at_atom[i] + eps);
        lower && upper
    };
    bisect_monotone(corridor)
}

/// `sup_t |G(t) - F(t)|`, using both one-sided limits of `G` at each atom.
pub fn ks_distance(mu: &EmpiricalMeasure, r: &NormalRef) -> f64 {
    let cum = mu.ensure_cumulative();
    let mut prev = 0.0;
    let mut worst = 0.0f64;
    for (i, &(a, _)) in mu.atoms().iter().enumerate() {
        let f = r.cdf(a);
        worst = worst.max((cum[i].min(1.0) - f).abs()).max((prev - f).abs());
        prev = cum[i].min(1.0);
    }
    worst
}

/// Largest solution of `z = tanh(beta z)`: zero for `beta <= 1`.
pub fn m_plus(beta: f64) -> f64 {
    if beta <= 1.0 {
        return 0.0;
    }
    let f = |z: f64| z - (beta * z).tanh();
    let (mut lo, mut hi) = (1e-12f64, 1.0f64);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub variance: f64,
    pub count: usize,
}

/// Single-pass mean and unbiased variance (Welford).
pub fn summarize(values: &[f64]) -> Result<Summary> {
    if values.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "variance undefined for {} value(s)",
            values.len()
        )));
    }
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &x) in values.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
    }
    Ok(Summary {
        mean,
        variance: m2 / (values.len() - 1) as f64,
        count: values.len(),
    })
}
