use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use dilute_cw::asymptotics::{
    predict_expected_partition_log, remainder_check, taylor_coefficients, Parity,
};
use dilute_cw::exact::{
    annealed_moments, disorder_oracle, enumerate_partition, expected_partition_log,
    second_moment_log, write_law_csv, Moment,
};
use dilute_cw::graph::{derive_seed, graph_to_string, read_graph, sample_graph, GraphSeed};
use dilute_cw::mcmc::{quenched_experiment, run_replicas, write_samples_csv, ChainConfig};
use dilute_cw::{DisorderGraph, Error, ModelParams, Result, VERSION};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Cli, Command};

/// Stream index used to derive the chain seed from the graph seed.
const CHAIN_STREAM: u64 = 1 << 63;

/// Retained samples per chain when `--sweeps` is absent.
const DEFAULT_RETAINED: u64 = 1000;

pub fn execute(cli: &Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::InvalidParameter("threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    }
    let start = Instant::now();
    let cmd = &cli.command;
    log(&format!("{} started", cmd.name()));
    let body = dispatch(cmd)?;
    let elapsed = start.elapsed().as_secs_f64();
    emit(cli.out.as_deref(), &body)?;
    log(&format!("{} finished in {elapsed:.3} s", cmd.name()));
    if let Some(out) = &cli.out {
        let meta = json!({
            "version": VERSION,
            "command": cmd.name(),
            "runtime_seconds": elapsed,
            "threads": rayon::current_num_threads(),
        });
        emit(Some(&sidecar(out)), &pretty(&meta))?;
    }
    Ok(())
}

fn log(msg: &str) {
    eprintln!("[dilute-cw] {msg}");
}

fn sidecar(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn emit(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, body)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(body.as_bytes())?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("results serialize")
}

fn envelope(cmd: &Command, result: Value) -> String {
    pretty(&json!({
        "version": VERSION,
        "command": cmd.name(),
        "config": to_value(cmd),
        "result": result,
    }))
}

/// `# {"config":...,"version":...}` as the first line of CSV artifacts.
fn csv_header(cmd: &Command) -> String {
    let echo = json!({ "version": VERSION, "config": to_value(cmd) });
    format!("# {}\n", serde_json::to_string(&echo).expect("json values serialize"))
}

fn load_graph(path: &Path) -> Result<DisorderGraph> {
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_graph(BufReader::new(file))
}

/// Graph from a file or from `seed`, with `n` checked against the file.
fn resolve_graph(
    n: Option<usize>,
    p: f64,
    beta: f64,
    graph: Option<&Path>,
    seed: u64,
) -> Result<(DisorderGraph, ModelParams)> {
    match graph {
        Some(path) => {
            let g = load_graph(path)?;
            if let Some(n) = n {
                if n != g.n() {
                    return Err(Error::IncompatibleSizes(format!(
                        "--n {n} but the graph file has N = {}",
                        g.n()
                    )));
                }
            }
            let params = ModelParams::new(g.n(), p, beta)?;
            Ok((g, params))
        }
        None => {
            let n = n.ok_or_else(|| {
                Error::InvalidParameter("either --n or --graph is required".into())
            })?;
            let params = ModelParams::new(n, p, beta)?;
            log("sampling graph");
            let g = sample_graph(&params, GraphSeed(seed))?;
            Ok((g, params))
        }
    }
}

fn chain_config(
    n: usize,
    seed: u64,
    chain_seed: Option<u64>,
    sweeps: Option<u64>,
    burnin: Option<u64>,
    thin: u64,
    replicas: u32,
) -> Result<ChainConfig> {
    let burn_in = burnin.unwrap_or_else(|| ChainConfig::default_burn_in(n));
    let sweeps = match sweeps {
        Some(s) => s,
        None => burn_in
            .checked_add(DEFAULT_RETAINED.saturating_mul(thin))
            .ok_or_else(|| Error::InvalidParameter("sweep count overflows".into()))?,
    };
    let cfg = ChainConfig {
        sweeps,
        burn_in,
        thin,
        chain_seed: chain_seed.unwrap_or_else(|| derive_seed(seed, CHAIN_STREAM)),
        replicas,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(cmd: &Command) -> Result<String> {
    match cmd {
        Command::GraphSample(a) => {
            let params = ModelParams::new(a.n, a.p, 0.0)?;
            let g = sample_graph(&params, GraphSeed(a.seed))?;
            let text = graph_to_string(&g);
            let (header, rows) = text.split_once('\n').unwrap_or((&text, ""));
            Ok(format!("{header}\n{}{rows}", csv_header(cmd)))
        }
        Command::ExactPartition(a) => {
            let (g, params) = resolve_graph(a.n, a.p, a.beta, a.graph.as_deref(), a.seed)?;
            log(&format!("enumerating 2^{} configurations", params.n));
            let summary = enumerate_partition(&g, &params)?;
            if a.csv {
                let mut buf = csv_header(cmd).into_bytes();
                write_law_csv(&summary.law, &mut buf)?;
                Ok(String::from_utf8(buf).expect("csv is utf-8"))
            } else {
                let mut result = to_value(&summary);
                result["edge_count"] = json!(g.edge_count());
                Ok(envelope(cmd, result))
            }
        }
        Command::ExactMoments(a) => {
            let params = ModelParams::new(a.n, a.p, a.beta)?;
            let m = annealed_moments(&params, &a.g, a.second)?;
            Ok(envelope(cmd, to_value(&m)))
        }
        Command::ExactOracle(a) => {
            let params = ModelParams::new(a.n, a.p, a.beta)?;
            let brute = disorder_oracle(&params, &a.g, a.moment)?;
            let closed = match a.moment {
                Moment::First => expected_partition_log(&params, &a.g)?,
                Moment::Second => second_moment_log(&params, &a.g)?,
            };
            Ok(envelope(
                cmd,
                json!({
                    "oracle_log_value": brute,
                    "closed_form_log_value": closed,
                    "difference": closed - brute,
                }),
            ))
        }
        Command::AsymPredict(a) if a.curve => {
            ModelParams::new(a.n, a.p, a.beta)?;
            let mut sizes: Vec<usize> = std::iter::successors(Some(2usize), |n| n.checked_mul(2))
                .take_while(|&n| n < a.n)
                .collect();
            sizes.push(a.n);
            let mut out = csv_header(cmd);
            out.push_str("n,exact,predicted,ratio_minus_one\n");
            for n in sizes {
                let params = ModelParams::new(n, a.p, a.beta)?;
                let pred = predict_expected_partition_log(&params, &a.g, a.variant)?.log_value;
                let exact = expected_partition_log(&params, &a.g)?;
                out.push_str(&format!("{n},{exact},{pred},{}\n", (exact - pred).exp_m1()));
            }
            Ok(out)
        }
        Command::AsymPredict(a) => {
            let params = ModelParams::new(a.n, a.p, a.beta)?;
            let pred = predict_expected_partition_log(&params, &a.g, a.variant)?;
            let exact = expected_partition_log(&params, &a.g)?;
            Ok(envelope(
                cmd,
                json!({
                    "prediction": to_value(&pred),
                    "exact_log_value": exact,
                    "ratio_minus_one": (exact - pred.log_value).exp_m1(),
                }),
            ))
        }
        Command::SeriesCheck(a) => {
            let coefficients = taylor_coefficients(a.p, a.order)?;
            let mut rows = Vec::new();
            let (mut even_max, mut odd_max) = (0.0f64, 0.0f64);
            for i in 1..=25 {
                let z = i as f64 / 100.0;
                let even = remainder_check(a.p, z, Parity::Even)?;
                let odd = remainder_check(a.p, z, Parity::Odd)?;
                even_max = even_max.max(even.abs());
                odd_max = odd_max.max(odd.abs());
                rows.push(json!({ "z": z, "even": even, "odd": odd }));
            }
            Ok(envelope(
                cmd,
                json!({
                    "coefficients": coefficients,
                    "remainders": rows,
                    "even_abs_max": even_max,
                    "odd_abs_max": odd_max,
                }),
            ))
        }
        Command::McmcRun(a) => {
            let (g, params) = resolve_graph(a.n, a.p, a.beta, a.graph.as_deref(), a.seed)?;
            let cfg = chain_config(
                params.n, a.seed, a.chain_seed, a.sweeps, a.burnin, a.thin, a.replicas,
            )?;
            log(&format!("{} chains of {} sweeps", cfg.replicas, cfg.sweeps));
            let samples = run_replicas(&g, &params, &cfg, a.seed)?;
            let mut buf = csv_header(cmd).into_bytes();
            write_samples_csv(&samples, &mut buf)?;
            Ok(String::from_utf8(buf).expect("csv is utf-8"))
        }
        Command::CltExperiment(a) => {
            let params = ModelParams::new(a.n, a.p, a.beta)?;
            let cfg = chain_config(
                a.n, a.seed, a.chain_seed, a.sweeps, a.burnin, a.thin, a.replicas,
            )?;
            log(&format!(
                "{} graphs x {} chains of {} sweeps",
                a.graphs, cfg.replicas, cfg.sweeps
            ));
            let run = quenched_experiment(&params, a.graphs, &cfg, a.epsilon, a.seed)?;
            if let Some(path) = &a.samples_out {
                let mut buf = csv_header(cmd).into_bytes();
                write_samples_csv(&run.samples, &mut buf)?;
                std::fs::write(path, buf)?;
            }
            Ok(envelope(cmd, to_value(&run.summary)))
        }
    }
}
