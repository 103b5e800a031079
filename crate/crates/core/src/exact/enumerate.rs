//! Quenched partition function and magnetization law of one graph by visiting
//! all `2^N` configurations.
//!
//! The configurations are split into `2^b` blocks by the spins of the top `b`
//! sites; inside a block the low sites run through a reflected Gray code, so
//! each step flips one site `i` and changes the integer coupling sum by
//! `-2 sigma_i T_i`, `T_i = sum_{j != i} (eps(i,j) + eps(j,i)) sigma_j`.
//! Each block fills an exact histogram of `(#up spins, coupling sum)` and the
//! histograms are added as integers, so the result does not depend on the
//! number of threads. Logs are taken only once, per histogram cell.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logsum::LogSumExp;
use crate::model::{coupling_sum, DisorderGraph, ModelParams, SpinConfig};
use crate::stats::EmpiricalMeasure;

pub const DEFAULT_MAX_SITES: usize = 26;
/// Hard ceiling: one machine word per configuration.
const ABSOLUTE_MAX_SITES: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuenchedSummary {
    pub log_z: f64,
    /// `-log Z / (N beta)`; absent at `beta = 0`.
    pub free_energy_per_site: Option<f64>,
    /// Law of `|sigma| / sqrt(N)` under the Gibbs measure.
    pub law: EmpiricalMeasure,
}

pub fn enumerate_partition(g: &DisorderGraph, params: &ModelParams) -> Result<QuenchedSummary> {
    enumerate_partition_capped(g, params, DEFAULT_MAX_SITES)
}

pub fn enumerate_partition_capped(
    g: &DisorderGraph,
    params: &ModelParams,
    max_sites: usize,
) -> Result<QuenchedSummary> {
    params.validate()?;
    let n = params.n;
    if g.n() != n {
        return Err(Error::IncompatibleSizes(format!(
            "graph n = {}, params n = {n}",
            g.n()
        )));
    }
    let cap = max_sites.min(ABSOLUTE_MAX_SITES);
    if n > cap {
        let configs = 2f64.powi(n as i32);
        return Err(Error::ResourceCap(format!(
            "enumeration of N = {n} visits {configs:.3e} configurations \
             (about {:.0} s at 1e8 flips/s, histogram {} KiB); cap is N = {cap}",
            configs / 1e8,
            ((n + 1) * (2 * n * n + 1) * 8) / 1024
        )));
    }
    let hist = histogram(g)?;
    Ok(summarize_histogram(&hist, params))
}

/// Counts per `(up, S + N^2)` cell, `S` the coupling sum.
struct Histogram {
    n: usize,
    width: usize,
    counts: Vec<u64>,
}

fn histogram(g: &DisorderGraph) -> Result<Histogram> {
    let n = g.n();
    let width = 2 * n * n + 1;
    let offset = (n * n) as i64;
    let t = g.transposed();
    // symmetrized neighbourhood of each site, diagonal removed
    let rows: Vec<u64> = (0..n).map(|i| g.row(i)[0] & !(1u64 << i)).collect();
    let cols: Vec<u64> = (0..n).map(|i| t.row(i)[0] & !(1u64 << i)).collect();
    let row_deg: Vec<i64> = rows.iter().map(|r| r.count_ones() as i64).collect();
    let col_deg: Vec<i64> = cols.iter().map(|c| c.count_ones() as i64).collect();

    let top = n.min(6);
    let low = n - top;
    let blocks = 1u64 << top;

    let empty = || vec![0u64; (n + 1) * width];
    let counts = (0..blocks)
        .into_par_iter()
        .try_fold(empty, |mut counts, block| -> Result<Vec<u64>> {
            let mut s = block << low;
            let start = SpinConfig::from_u64(n, s);
            let mut sum = coupling_sum(g, &start)?;
            let mut up = s.count_ones() as usize;
            counts[up * width + (sum + offset) as usize] += 1;
            for step in 1..(1u64 << low) {
                let i = step.trailing_zeros() as usize;
                let field = 2 * (rows[i] & s).count_ones() as i64 - row_deg[i]
                    + 2 * (cols[i] & s).count_ones() as i64
                    - col_deg[i];
                if s >> i & 1 == 1 {
                    sum -= 2 * field;
                    up -= 1;
                } else {
                    sum += 2 * field;
                    up += 1;
                }
                s ^= 1 << i;
                counts[up * width + (sum + offset) as usize] += 1;
            }
            Ok(counts)
        })
        .try_reduce(empty, |mut a, b| {
            a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
            Ok(a)
        })?;
    Ok(Histogram { n, width, counts })
}

fn summarize_histogram(h: &Histogram, params: &ModelParams) -> QuenchedSummary {
    let n = h.n;
    let gamma = params.gamma();
    let offset = (n * n) as i64;
    let classes: Vec<LogSumExp> = (0..=n)
        .map(|up| {
            let mut acc = LogSumExp::new();
            for (cell, &count) in h.counts[up * h.width..(up + 1) * h.width].iter().enumerate() {
                if count > 0 {
                    acc.push_weighted(gamma * (cell as i64 - offset) as f64, count as f64);
                }
            }
            acc
        })
        .collect();
    let log_z = LogSumExp::tree_merge(&classes).value();
    let root = (n as f64).sqrt();
    let atoms = classes
        .iter()
        .enumerate()
        .map(|(up, c)| ((2 * up as i64 - n as i64) as f64 / root, (c.value() - log_z).exp()))
        .collect();
    let law = EmpiricalMeasure::from_weighted(atoms).expect("positive class weights");
    let free_energy_per_site = (params.beta > 0.0).then(|| -log_z / (n as f64 * params.beta));
    QuenchedSummary {
        log_z,
        free_energy_per_site,
        law,
    }
}

/// Writes the law as `atom,weight` rows in increasing atom order.
pub fn write_law_csv<W: Write>(law: &EmpiricalMeasure, mut out: W) -> Result<()> {
    writeln!(out, "atom,weight")?;
    for (x, w) in law.atoms() {
        writeln!(out, "{x},{w}")?;
    }
    Ok(())
}
