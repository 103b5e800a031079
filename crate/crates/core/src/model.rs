//! Domain types of the dilute Curie-Weiss model and the per-configuration
//! quantities derived from them.
//!
//! Spins and adjacency rows are bit-packed into `u64` words. A set bit in a
//! [`SpinConfig`] means `+1`. Row `i` of a [`DisorderGraph`] holds the
//! out-edges `eps(i, .)`; loops `eps(i, i)` are ordinary entries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(64)
}

/// Mask of the valid bits in the last word of an `n`-bit vector.
pub(crate) fn tail_mask(n: usize) -> u64 {
    match n % 64 {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

#[inline]
pub(crate) fn and_popcount(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum()
}

#[inline]
pub(crate) fn popcount(a: &[u64]) -> u32 {
    a.iter().map(|x| x.count_ones()).sum()
}

/// `(N, p, beta)` for one model instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub p: f64,
    pub beta: f64,
}

impl ModelParams {
    pub fn new(n: usize, p: f64, beta: f64) -> Result<Self> {
        let params = ModelParams { n, p, beta };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "p must lie in (0, 1], got {}",
                self.p
            )));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "beta must be finite and nonnegative, got {}",
                self.beta
            )));
        }
        Ok(())
    }

    /// Coupling scale `beta / (2 N p)`.
    pub fn gamma(&self) -> f64 {
        self.beta / (2.0 * self.n as f64 * self.p)
    }

    /// `1 / (2 N p)`, the prefactor of the Hamiltonian.
    pub fn coupling_scale(&self) -> f64 {
        1.0 / (2.0 * self.n as f64 * self.p)
    }
}

/// A configuration in `{-1, +1}^n`, packed one bit per site.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfig {
    n: usize,
    words: Vec<u64>,
}

impl SpinConfig {
    pub fn all_up(n: usize) -> Self {
        let mut words = vec![u64::MAX; words_for(n)];
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(n);
        }
        SpinConfig { n, words }
    }

    pub fn all_down(n: usize) -> Self {
        SpinConfig {
            n,
            words: vec![0; words_for(n)],
        }
    }

    pub fn from_spins(spins: &[i8]) -> Result<Self> {
        let mut cfg = SpinConfig::all_down(spins.len());
        for (i, &s) in spins.iter().enumerate() {
            match s {
                1 => cfg.words[i / 64] |= 1 << (i % 64),
                -1 => {}
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "spin {i} is {other}, expected -1 or +1"
                    )))
                }
            }
        }
        Ok(cfg)
    }

    /// Low `n` bits of `bits` as spins (bit set = `+1`). Requires `n <= 64`.
    pub fn from_u64(n: usize, bits: u64) -> Self {
        assert!(n <= 64 && n > 0);
        SpinConfig {
            n,
            words: vec![bits & tail_mask(n)],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, i: usize) -> i8 {
        if (self.words[i / 64] >> (i % 64)) & 1 == 1 {
            1
        } else {
            -1
        }
    }

    pub fn set(&mut self, i: usize, spin_up: bool) {
        let bit = 1u64 << (i % 64);
        if spin_up {
            self.words[i / 64] |= bit;
        } else {
            self.words[i / 64] &= !bit;
        }
    }

    pub fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1 << (i % 64);
    }

    /// The global flip `-sigma`.
    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        for w in &mut out.words {
            *w = !*w;
        }
        if let Some(last) = out.words.last_mut() {
            *last &= tail_mask(self.n);
        }
        out
    }

    pub fn up_count(&self) -> usize {
        popcount(&self.words) as usize
    }

    /// `|sigma| = sum_i sigma_i`.
    pub fn spin_sum(&self) -> i64 {
        2 * self.up_count() as i64 - self.n as i64
    }

    pub fn to_vec(&self) -> Vec<i8> {
        (0..self.n).map(|i| self.get(i)).collect()
    }
}

/// Adjacency of a directed graph with loops, stored as `n` packed rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisorderGraph {
    n: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl DisorderGraph {
    pub fn empty(n: usize) -> Self {
        let words_per_row = words_for(n);
        DisorderGraph {
            n,
            words_per_row,
            bits: vec![0; n * words_per_row],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut g = DisorderGraph::empty(n);
        let mask = tail_mask(n);
        for i in 0..n {
            let row = g.row_mut(i);
            row.fill(u64::MAX);
            if let Some(last) = row.last_mut() {
                *last &= mask;
            }
        }
        g
    }

    /// Builds a graph from packed rows; bits beyond column `n - 1` are cleared.
    pub fn from_rows(n: usize, rows: Vec<Vec<u64>>) -> Result<Self> {
        if rows.len() != n {
            return Err(Error::IncompatibleSizes(format!(
                "expected {n} rows, got {}",
                rows.len()
            )));
        }
        let mut g = DisorderGraph::empty(n);
        let mask = tail_mask(n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != g.words_per_row {
                return Err(Error::IncompatibleSizes(format!(
                    "row {i} has {} words, expected {}",
                    row.len(),
                    g.words_per_row
                )));
            }
            let dst = g.row_mut(i);
            dst.copy_from_slice(&row);
            if let Some(last) = dst.last_mut() {
                *last &= mask;
            }
        }
        Ok(g)
    }

    /// Builds a graph from an explicit 0-based edge list.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = DisorderGraph::empty(n);
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange {
                    index: i.max(j),
                    n,
                });
            }
            g.set(i, j, true);
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn words_per_row(&self) -> usize {
        self.words_per_row
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words_per_row..(i + 1) * self.words_per_row]
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.bits[i * self.words_per_row..(i + 1) * self.words_per_row]
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        (self.row(i)[j / 64] >> (j % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, present: bool) {
        let bit = 1u64 << (j % 64);
        let w = &mut self.row_mut(i)[j / 64];
        if present {
            *w |= bit;
        } else {
            *w &= !bit;
        }
    }

    pub fn edge_count(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Transposed adjacency: row `j` of the result holds the in-edges `eps(., j)`.
    pub fn transposed(&self) -> DisorderGraph {
        let mut t = DisorderGraph::empty(self.n);
        for i in 0..self.n {
            for (w, &word) in self.row(i).iter().enumerate() {
                let mut bits = word;
                while bits != 0 {
                    let j = w * 64 + bits.trailing_zeros() as usize;
                    t.set(j, i, true);
                    bits &= bits - 1;
                }
            }
        }
        t
    }
}

fn check_sizes(g: &DisorderGraph, sigma: &SpinConfig, params: &ModelParams) -> Result<()> {
    if g.n() != sigma.len() || g.n() != params.n {
        return Err(Error::IncompatibleSizes(format!(
            "graph n = {}, spins n = {}, params n = {}",
            g.n(),
            sigma.len(),
            params.n
        )));
    }
    Ok(())
}

/// Integer double sum `sum_{i,j} eps(i,j) sigma_i sigma_j`, loops included.
pub fn coupling_sum(g: &DisorderGraph, sigma: &SpinConfig) -> Result<i64> {
    if g.n() != sigma.len() {
        return Err(Error::IncompatibleSizes(format!(
            "graph n = {}, spins n = {}",
            g.n(),
            sigma.len()
        )));
    }
    let s = sigma.words();
    let total = (0..g.n())
        .map(|i| {
            let row = g.row(i);
            let aligned = 2 * and_popcount(row, s) as i64 - popcount(row) as i64;
            sigma.get(i) as i64 * aligned
        })
        .sum();
    Ok(total)
}

/// `H(sigma) = -(1 / 2Np) sum_{i,j} eps(i,j) sigma_i sigma_j`.
pub fn hamiltonian(g: &DisorderGraph, sigma: &SpinConfig, params: &ModelParams) -> Result<f64> {
    check_sizes(g, sigma, params)?;
    Ok(-(coupling_sum(g, sigma)? as f64) * params.coupling_scale())
}

/// `|sigma| / sqrt(N)`.
pub fn magnetization_scaled(sigma: &SpinConfig) -> f64 {
    sigma.spin_sum() as f64 / (sigma.len() as f64).sqrt()
}

/// `|sigma tau| = sum_i sigma_i tau_i`.
pub fn overlap(sigma: &SpinConfig, tau: &SpinConfig) -> Result<i64> {
    if sigma.len() != tau.len() {
        return Err(Error::IncompatibleSizes(format!(
            "overlap of configurations with n = {} and n = {}",
            sigma.len(),
            tau.len()
        )));
    }
    let disagree: u32 = sigma
        .words()
        .iter()
        .zip(tau.words())
        .map(|(a, b)| (a ^ b).count_ones())
        .sum();
    Ok(sigma.len() as i64 - 2 * disagree as i64)
}

/// `-beta H(sigma)`, the log of the unnormalized Gibbs weight.
pub fn gibbs_log_weight(g: &DisorderGraph, sigma: &SpinConfig, params: &ModelParams) -> Result<f64> {
    check_sizes(g, sigma, params)?;
    Ok(params.gamma() * coupling_sum(g, sigma)? as f64)
}
