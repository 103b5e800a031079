//! Heat-bath (Glauber) dynamics for the quenched Gibbs measure, and the
//! many-graph experiment comparing the law of `|sigma| / sqrt(N)` with
//! `N(0, 1 / (1 - beta))`.
//!
//! A sweep visits sites `0..N` in order. Site `i` is flipped with probability
//! `1 / (1 + exp(beta dH))`, `dH = 2 sigma_i h_i`, one uniform per site.
//!
//! Seeds: chain `r` on graph `k` of an experiment runs ChaCha8 seeded with
//! `derive_seed(derive_seed(chain_seed, k), r)`; graph `k` is sampled with
//! `derive_seed(graph_seed, k)`. A single [`run_chain`] uses
//! `derive_seed(chain_seed, replica_id)`.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{derive_seed, sample_graph, GraphSeed};
use crate::model::{and_popcount, popcount, DisorderGraph, ModelParams, SpinConfig};
use crate::stats::{ks_distance, levy_distance, summarize, EmpiricalMeasure, NormalRef, Summary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub sweeps: u64,
    pub burn_in: u64,
    pub thin: u64,
    pub chain_seed: u64,
    pub replicas: u32,
}

impl ChainConfig {
    /// `ceil(10 sqrt(N))` sweeps.
    pub fn default_burn_in(n: usize) -> u64 {
        (10.0 * (n as f64).sqrt()).ceil() as u64
    }

    pub fn retained(&self) -> u64 {
        self.sweeps.saturating_sub(self.burn_in) / self.thin.max(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweeps == 0 || self.thin == 0 || self.replicas == 0 {
            return Err(Error::InvalidParameter(
                "sweeps, thin and replicas must be positive".into(),
            ));
        }
        if self.retained() == 0 {
            return Err(Error::InvalidParameter(format!(
                "no samples retained: sweeps = {}, burn_in = {}, thin = {}",
                self.sweeps, self.burn_in, self.thin
            )));
        }
        Ok(())
    }
}

/// Out- and in-neighbour masks of every site, diagonal removed.
#[derive(Debug, Clone)]
pub struct FieldCache {
    n: usize,
    out_rows: DisorderGraph,
    in_rows: DisorderGraph,
    degree: Vec<i64>,
}

impl FieldCache {
    pub fn new(g: &DisorderGraph) -> Self {
        let n = g.n();
        let mut out_rows = g.clone();
        let mut in_rows = g.transposed();
        for i in 0..n {
            out_rows.set(i, i, false);
            in_rows.set(i, i, false);
        }
        let degree = (0..n)
            .map(|i| (popcount(out_rows.row(i)) + popcount(in_rows.row(i))) as i64)
            .collect();
        FieldCache {
            n,
            out_rows,
            in_rows,
            degree,
        }
    }

    /// `T_i = sum_{j != i} (eps(i,j) + eps(j,i)) sigma_j`.
    #[inline]
    pub fn coupling_field(&self, sigma: &SpinConfig, i: usize) -> i64 {
        let s = sigma.words();
        let aligned = and_popcount(self.out_rows.row(i), s) + and_popcount(self.in_rows.row(i), s);
        2 * aligned as i64 - self.degree[i]
    }
}

/// `h_i = (1 / 2Np) sum_{j != i} (eps(i,j) + eps(j,i)) sigma_j`, so that
/// flipping site `i` changes `H` by `2 sigma_i h_i`.
pub fn local_field(g: &DisorderGraph, sigma: &SpinConfig, i: usize, params: &ModelParams) -> Result<f64> {
    let n = g.n();
    if sigma.len() != n || params.n != n {
        return Err(Error::IncompatibleSizes(format!(
            "graph n = {n}, spins n = {}, params n = {}",
            sigma.len(),
            params.n
        )));
    }
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    let t: i64 = (0..n)
        .filter(|&j| j != i)
        .map(|j| (g.get(i, j) as i64 + g.get(j, i) as i64) * sigma.get(j) as i64)
        .sum();
    Ok(t as f64 * params.coupling_scale())
}

/// One sequential heat-bath sweep; returns the change in `|sigma|`.
pub fn glauber_sweep<R: Rng>(
    sigma: &mut SpinConfig,
    cache: &FieldCache,
    params: &ModelParams,
    rng: &mut R,
) -> i64 {
    // beta dH = 2 gamma sigma_i T_i with gamma = beta / 2Np
    let two_gamma = 2.0 * params.gamma();
    let mut delta = 0i64;
    for i in 0..cache.n {
        let u: f64 = rng.random();
        let si = sigma.get(i) as i64;
        let x = two_gamma * (si * cache.coupling_field(sigma, i)) as f64;
        if u * (1.0 + x.exp()) < 1.0 {
            sigma.flip(i);
            delta -= 2 * si;
        }
    }
    delta
}

/// Recorded values of `|sigma| / sqrt(N)` for one chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagnetizationSample {
    pub graph_seed: u64,
    pub replica_id: u32,
    pub sweep_indices: Vec<u64>,
    /// `|sigma|` at each recorded sweep; `values[t] = spin_sums[t] / sqrt(N)`.
    pub spin_sums: Vec<i64>,
    pub values: Vec<f64>,
}

fn random_start(n: usize, rng: &mut ChaCha8Rng) -> SpinConfig {
    let mut s = SpinConfig::all_down(n);
    for i in 0..n {
        if rng.random::<bool>() {
            s.set(i, true);
        }
    }
    s
}

fn run_seeded(
    cache: &FieldCache,
    params: &ModelParams,
    cfg: &ChainConfig,
    seed: u64,
    graph_seed: u64,
    replica_id: u32,
) -> MagnetizationSample {
    let n = params.n;
    let root = (n as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sigma = random_start(n, &mut rng);
    let mut k = sigma.spin_sum();
    let cap = cfg.retained() as usize;
    let mut sweep_indices = Vec::with_capacity(cap);
    let mut spin_sums = Vec::with_capacity(cap);
    for s in 1..=cfg.sweeps {
        k += glauber_sweep(&mut sigma, cache, params, &mut rng);
        if s > cfg.burn_in && (s - cfg.burn_in).is_multiple_of(cfg.thin) {
            sweep_indices.push(s);
            spin_sums.push(k);
        }
    }
    debug_assert_eq!(k, sigma.spin_sum());
    let values = spin_sums.iter().map(|&k| k as f64 / root).collect();
    MagnetizationSample {
        graph_seed,
        replica_id,
        sweep_indices,
        spin_sums,
        values,
    }
}

fn check_graph(g: &DisorderGraph, params: &ModelParams) -> Result<()> {
    params.validate()?;
    if g.n() != params.n {
        return Err(Error::IncompatibleSizes(format!(
            "graph n = {}, params n = {}",
            g.n(),
            params.n
        )));
    }
    Ok(())
}

/// One chain from iid uniform spins, seeded by `(cfg.chain_seed, replica_id)`.
pub fn run_chain(
    g: &DisorderGraph,
    params: &ModelParams,
    cfg: &ChainConfig,
    graph_seed: u64,
    replica_id: u32,
) -> Result<MagnetizationSample> {
    check_graph(g, params)?;
    cfg.validate()?;
    let cache = FieldCache::new(g);
    let seed = derive_seed(cfg.chain_seed, replica_id as u64);
    Ok(run_seeded(&cache, params, cfg, seed, graph_seed, replica_id))
}

/// `cfg.replicas` chains on one graph, in replica order.
pub fn run_replicas(
    g: &DisorderGraph,
    params: &ModelParams,
    cfg: &ChainConfig,
    graph_seed: u64,
) -> Result<Vec<MagnetizationSample>> {
    check_graph(g, params)?;
    cfg.validate()?;
    let cache = FieldCache::new(g);
    Ok((0..cfg.replicas)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(cfg.chain_seed, r as u64);
            run_seeded(&cache, params, cfg, seed, graph_seed, r)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphReport {
    pub graph_index: u64,
    pub graph_seed: u64,
    pub sample_count: usize,
    pub sample_mean: f64,
    pub sample_variance: f64,
    /// Distances to `N(0, 1/(1 - beta))`; absent for `beta >= 1`.
    pub levy_distance: Option<f64>,
    pub ks_distance: Option<f64>,
    /// Time average of `|m_N| = ||sigma|| / N`, per replica.
    pub replica_mean_abs_m: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub params: ModelParams,
    pub chain: ChainConfig,
    pub n_graphs: u64,
    pub graph_seed: u64,
    pub epsilon: f64,
    pub reference_variance: Option<f64>,
    pub graphs: Vec<GraphReport>,
    /// Share of graphs with Lévy distance above `epsilon`.
    pub fraction_exceeding: Option<f64>,
    pub pooled: Summary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRun {
    pub summary: ExperimentSummary,
    pub samples: Vec<MagnetizationSample>,
}

/// Samples `n_graphs` graphs, runs `cfg.replicas` chains on each, and
/// compares each graph's pooled sample with `N(0, 1/(1 - beta))`.
pub fn quenched_experiment(
    params: &ModelParams,
    n_graphs: u64,
    cfg: &ChainConfig,
    epsilon: f64,
    graph_seed: u64,
) -> Result<ExperimentRun> {
    params.validate()?;
    cfg.validate()?;
    if n_graphs == 0 {
        return Err(Error::InvalidParameter("n_graphs must be positive".into()));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let reference = (params.beta < 1.0)
        .then(|| NormalRef::new(0.0, 1.0 / (1.0 - params.beta)))
        .transpose()?;

    let per_graph: Vec<(GraphReport, Vec<MagnetizationSample>)> = (0..n_graphs)
        .into_par_iter()
        .map(|k| -> Result<_> {
            let seed = derive_seed(graph_seed, k);
            let g = sample_graph(params, GraphSeed(seed))?;
            let chain = ChainConfig {
                chain_seed: derive_seed(cfg.chain_seed, k),
                ..*cfg
            };
            let samples = run_replicas(&g, params, &chain, seed)?;
            let report = graph_report(k, seed, params, &samples, reference.as_ref())?;
            Ok((report, samples))
        })
        .collect::<Result<_>>()?;

    let (graphs, samples): (Vec<_>, Vec<_>) = per_graph.into_iter().unzip();
    let samples: Vec<MagnetizationSample> = samples.into_iter().flatten().collect();
    let all: Vec<f64> = samples.iter().flat_map(|s| s.values.iter().copied()).collect();
    let pooled = summarize(&all)?;
    let fraction_exceeding = reference.map(|_| {
        graphs
            .iter()
            .filter(|r| r.levy_distance.is_some_and(|d| d > epsilon))
            .count() as f64
            / n_graphs as f64
    });
    Ok(ExperimentRun {
        summary: ExperimentSummary {
            params: *params,
            chain: *cfg,
            n_graphs,
            graph_seed,
            epsilon,
            reference_variance: reference.map(|r| r.variance),
            graphs,
            fraction_exceeding,
            pooled,
        },
        samples,
    })
}

fn graph_report(
    index: u64,
    seed: u64,
    params: &ModelParams,
    samples: &[MagnetizationSample],
    reference: Option<&NormalRef>,
) -> Result<GraphReport> {
    let values: Vec<f64> = samples.iter().flat_map(|s| s.values.iter().copied()).collect();
    let stats = summarize(&values)?;
    let (levy, ks) = match reference {
        Some(r) => {
            let mu = EmpiricalMeasure::from_samples(&values)?;
            (Some(levy_distance(&mu, r)), Some(ks_distance(&mu, r)))
        }
        None => (None, None),
    };
    let n = params.n as f64;
    let replica_mean_abs_m = samples
        .iter()
        .map(|s| s.spin_sums.iter().map(|k| k.unsigned_abs() as f64).sum::<f64>() / (n * s.spin_sums.len() as f64))
        .collect();
    Ok(GraphReport {
        graph_index: index,
        graph_seed: seed,
        sample_count: stats.count,
        sample_mean: stats.mean,
        sample_variance: stats.variance,
        levy_distance: levy,
        ks_distance: ks,
        replica_mean_abs_m,
    })
}

/// `graph_seed,replica_id,sweep_index,m_scaled` rows.
pub fn write_samples_csv<W: Write>(samples: &[MagnetizationSample], mut out: W) -> Result<()> {
    writeln!(out, "graph_seed,replica_id,sweep_index,m_scaled")?;
    for s in samples {
        for (sweep, v) in s.sweep_indices.iter().zip(&s.values) {
            writeln!(out, "{},{},{},{}", s.graph_seed, s.replica_id, sweep, v)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::hamiltonian;
    use proptest::prelude::*;

    fn cfg(sweeps: u64, burn_in: u64, thin: u64, seed: u64, replicas: u32) -> ChainConfig {
        ChainConfig {
            sweeps,
            burn_in,
            thin,
            chain_seed: seed,
            replicas,
        }
    }

    #[test]
    fn config_validation() {
        assert!(cfg(10, 10, 1, 0, 1).validate().is_err());
        assert!(cfg(10, 5, 6, 0, 1).validate().is_err());
        assert!(cfg(10, 5, 5, 0, 1).validate().is_ok());
        assert!(cfg(10, 0, 0, 0, 1).validate().is_err());
        assert!(cfg(10, 0, 1, 0, 0).validate().is_err());
        assert_eq!(cfg(100, 10, 7, 0, 1).retained(), 12);
        assert_eq!(ChainConfig::default_burn_in(4096), 640);
    }

    #[test]
    fn field_examples() {
        let m = ModelParams::new(4, 0.5, 1.0).unwrap();
        let up = SpinConfig::all_up(4);
        for i in 0..4 {
            assert_eq!(local_field(&DisorderGraph::empty(4), &up, i, &m).unwrap(), 0.0);
            assert_eq!(local_field(&DisorderGraph::full(4), &up, i, &m).unwrap(), 1.5);
        }
        assert!(matches!(
            local_field(&DisorderGraph::full(4), &up, 4, &m),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    proptest! {
        #[test]
        fn field_matches_energy_difference(seed in any::<u64>(), bits in 0u64..64, i in 0usize..6) {
            let m = ModelParams::new(6, 0.5, 1.0).unwrap();
            let g = sample_graph(&m, GraphSeed(seed)).unwrap();
            let sigma = SpinConfig::from_u64(6, bits);
            let mut flipped = sigma.clone();
            flipped.flip(i);
            let dh = hamiltonian(&g, &flipped, &m).unwrap() - hamiltonian(&g, &sigma, &m).unwrap();
            let h = local_field(&g, &sigma, i, &m).unwrap();
            prop_assert!((dh - 2.0 * sigma.get(i) as f64 * h).abs() < 1e-12);
            let cache = FieldCache::new(&g);
            prop_assert!((cache.coupling_field(&sigma, i) as f64 * m.coupling_scale() - h).abs() < 1e-15);
        }
    }

    #[test]
    fn deterministic_and_on_lattice() {
        let m = ModelParams::new(50, 0.4, 0.6).unwrap();
        let g = sample_graph(&m, GraphSeed(1)).unwrap();
        let c = cfg(300, 20, 3, 77, 1);
        let a = run_chain(&g, &m, &c, 1, 0).unwrap();
        let b = run_chain(&g, &m, &c, 1, 0).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.values.len(), 93);
        assert_eq!(a.sweep_indices[0], 23);
        let root = 50f64.sqrt();
        for (k, v) in a.spin_sums.iter().zip(&a.values) {
            assert!(k.abs() <= 50 && (k - 50).rem_euclid(2) == 0);
            assert_eq!(*v, *k as f64 / root);
        }
        let other = run_chain(&g, &m, &c, 1, 1).unwrap();
        assert_ne!(a.values, other.values);
    }

    #[test]
    fn infinite_temperature_flips_half_the_time() {
        let m = ModelParams::new(64, 1.0, 0.0).unwrap();
        let cache = FieldCache::new(&DisorderGraph::full(64));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut sigma = SpinConfig::all_up(64);
        let mut flips = 0u64;
        let sweeps = 2000;
        for _ in 0..sweeps {
            let before = sigma.clone();
            glauber_sweep(&mut sigma, &cache, &m, &mut rng);
            flips += overlap_flips(&before, &sigma);
        }
        let rate = flips as f64 / (64.0 * sweeps as f64);
        // 128000 Bernoulli(1/2) trials
        assert!((rate - 0.5).abs() < 0.006, "{rate}");
    }

    fn overlap_flips(a: &SpinConfig, b: &SpinConfig) -> u64 {
        a.words().iter().zip(b.words()).map(|(x, y)| (x ^ y).count_ones() as u64).sum()
    }

    #[test]
    fn uniform_measure_has_unit_variance() {
        let m = ModelParams::new(256, 1.0, 0.0).unwrap();
        let s = run_chain(&DisorderGraph::full(256), &m, &cfg(20_000, 10, 1, 3, 1), 0, 0).unwrap();
        let st = summarize(&s.values).unwrap();
        assert!((st.variance - 1.0).abs() < 0.05, "{}", st.variance);
    }

    #[test]
    fn replicas_do_not_depend_on_threads() {
        let m = ModelParams::new(30, 0.5, 0.8).unwrap();
        let g = sample_graph(&m, GraphSeed(2)).unwrap();
        let c = cfg(200, 10, 1, 9, 5);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_replicas(&g, &m, &c, 2).unwrap())
        };
        let a = run(1);
        assert_eq!(a, run(4));
        assert_eq!(a[3], run_chain(&g, &m, &c, 2, 3).unwrap());
    }

    #[test]
    fn small_experiment() {
        let m = ModelParams::new(64, 0.5, 0.3).unwrap();
        let run = quenched_experiment(&m, 3, &cfg(400, 50, 2, 11, 2), 0.1, 5).unwrap();
        let s = &run.summary;
        assert_eq!(s.graphs.len(), 3);
        assert_eq!(run.samples.len(), 6);
        assert_eq!(s.pooled.count, 6 * 175);
        for r in &s.graphs {
            assert_eq!(r.graph_seed, derive_seed(5, r.graph_index));
            let (l, k) = (r.levy_distance.unwrap(), r.ks_distance.unwrap());
            assert!(0.0 <= l && l <= k + 1e-6 && k <= 1.0);
        }
        assert!(s.fraction_exceeding.is_some());
        let again = quenched_experiment(&m, 3, &cfg(400, 50, 2, 11, 2), 0.1, 5).unwrap();
        assert_eq!(run, again);
        let json = serde_json::to_string(s).unwrap();
        let back: ExperimentSummary = serde_json::from_str(&json).unwrap();
        assert_eq!(&back, s);

        let cold = ModelParams::new(64, 0.5, 1.5).unwrap();
        let run = quenched_experiment(&cold, 1, &cfg(100, 50, 1, 1, 1), 0.1, 5).unwrap();
        assert!(run.summary.fraction_exceeding.is_none());
        assert!(run.summary.graphs[0].levy_distance.is_none());
    }

    #[test]
    fn csv_rows() {
        let m = ModelParams::new(4, 1.0, 0.0).unwrap();
        let s = run_chain(&DisorderGraph::full(4), &m, &cfg(3, 1, 1, 0, 1), 42, 0).unwrap();
        let mut buf = Vec::new();
        write_samples_csv(std::slice::from_ref(&s), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "graph_seed,replica_id,sweep_index,m_scaled");
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1], format!("42,0,2,{}", s.values[0]));
    }
}
