//! Seeded sampling of directed Erdős–Rényi graphs with loops, and the
//! plain-text graph format.
//!
//! Each of the `n^2` entries is an independent Bernoulli(p) draw. Entry
//! `(i, j)` is decided by word `j` of ChaCha8 stream `i` under the master
//! seed, so any row can be regenerated on its own and rows can be filled in
//! parallel without changing the result.
//!
//! File format (LF line endings):
//!
//! ```text
//! dilute-cw-graph v1 N=<n>
//! <n characters '0'/'1': row 1 = out-edges of vertex 1>
//! ...
//! <row n>
//! ```
//!
//! Lines starting with `#` after the header are comments.

use std::io::{BufRead, Write};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{words_for, DisorderGraph, ModelParams};

/// Default cap on the number of adjacency bits (`2^33` bits, 1 GiB).
pub const DEFAULT_MAX_BITS: u64 = 1 << 33;

pub const HEADER_PREFIX: &str = "dilute-cw-graph v1 N=";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GraphSeed(pub u64);

/// SplitMix64 finalizer; used to derive independent child seeds.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for index `index` under `parent`.
pub fn derive_seed(parent: u64, index: u64) -> u64 {
    mix64(parent ^ mix64(index.wrapping_add(0x632B_E59B_D9B4_E019)))
}

pub fn check_capacity(n: usize, max_bits: u64) -> Result<()> {
    let bits = (n as u128) * (n as u128);
    if bits > max_bits as u128 {
        return Err(Error::ResourceCap(format!(
            "n = {n} needs {bits} adjacency bits ({:.2} GiB), cap is {max_bits} bits",
            bits as f64 / 8.0 / (1u64 << 30) as f64
        )));
    }
    Ok(())
}

fn bernoulli_threshold(p: f64) -> Option<u64> {
    if p >= 1.0 {
        None
    } else {
        Some((p * 18_446_744_073_709_551_616.0) as u64)
    }
}

fn fill_row(row: &mut [u64], n: usize, seed: u64, i: usize, threshold: Option<u64>) {
    row.fill(0);
    match threshold {
        None => {
            for j in 0..n {
                row[j / 64] |= 1 << (j % 64);
            }
        }
        Some(t) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            for j in 0..n {
                if rng.next_u64() < t {
                    row[j / 64] |= 1 << (j % 64);
                }
            }
        }
    }
}

/// Samples the directed graph with loops for `params` under the default cap.
pub fn sample_graph(params: &ModelParams, seed: GraphSeed) -> Result<DisorderGraph> {
    sample_graph_capped(params, seed, DEFAULT_MAX_BITS)
}

pub fn sample_graph_capped(
    params: &ModelParams,
    seed: GraphSeed,
    max_bits: u64,
) -> Result<DisorderGraph> {
    params.validate()?;
    let n = params.n;
    check_capacity(n, max_bits)?;
    let wpr = words_for(n);
    let threshold = bernoulli_threshold(params.p);
    let mut bits = vec![0u64; n * wpr];
    bits.par_chunks_mut(wpr)
        .enumerate()
        .for_each(|(i, row)| fill_row(row, n, seed.0, i, threshold));
    let rows = bits.chunks(wpr).map(|r| r.to_vec()).collect();
    DisorderGraph::from_rows(n, rows)
}

pub fn write_graph<W: Write>(g: &DisorderGraph, mut out: W) -> Result<()> {
    let n = g.n();
    writeln!(out, "{HEADER_PREFIX}{n}")?;
    let mut line = Vec::with_capacity(n + 1);
    for i in 0..n {
        line.clear();
        line.extend((0..n).map(|j| if g.get(i, j) { b'1' } else { b'0' }));
        line.push(b'\n');
        out.write_all(&line)?;
    }
    out.flush()?;
    Ok(())
}

pub fn graph_to_string(g: &DisorderGraph) -> String {
    let mut buf = Vec::new();
    write_graph(g, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("graph text is ASCII")
}

pub fn read_graph<R: BufRead>(input: R) -> Result<DisorderGraph> {
    read_graph_capped(input, DEFAULT_MAX_BITS)
}

pub fn read_graph_capped<R: BufRead>(input: R, max_bits: u64) -> Result<DisorderGraph> {
    let mut lines = input.lines();
    let header = match lines.next() {
        Some(line) => line?,
        None => {
            return Err(Error::Parse {
                line: 1,
                msg: "missing header".into(),
            })
        }
    };
    let n: usize = header
        .strip_prefix(HEADER_PREFIX)
        .and_then(|rest| rest.trim_end_matches('\r').parse().ok())
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Parse {
            line: 1,
            msg: format!("malformed header {header:?}, expected \"{HEADER_PREFIX}<n>\""),
        })?;
    check_capacity(n, max_bits)?;

    // comment lines after the header are skipped but keep their line numbers
    let mut rows = lines
        .enumerate()
        .map(|(idx, line)| (idx + 2, line))
        .filter(|(_, line)| !matches!(line, Ok(text) if text.starts_with('#')));
    let mut next_line = 2;
    let mut g = DisorderGraph::empty(n);
    for i in 0..n {
        let (line_no, line) = match rows.next() {
            Some((no, line)) => (no, line?),
            None => {
                return Err(Error::Parse {
                    line: next_line,
                    msg: format!("header declares {n} rows, found {i}"),
                })
            }
        };
        next_line = line_no + 1;
        let bytes = line.as_bytes();
        if bytes.len() != n {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("row has length {}, expected {n}", bytes.len()),
            });
        }
        for (j, &b) in bytes.iter().enumerate() {
            match b {
                b'1' => g.set(i, j, true),
                b'0' => {}
                other => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("unexpected character {:?} in column {}", other as char, j + 1),
                    })
                }
            }
        }
    }
    for (line_no, line) in rows {
        if !line?.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("more than {n} rows"),
            });
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(n: usize, p: f64) -> ModelParams {
        ModelParams::new(n, p, 0.5).unwrap()
    }

    #[test]
    fn p_one_gives_full_graph() {
        let g = sample_graph(&params(37, 1.0), GraphSeed(3)).unwrap();
        assert_eq!(g.edge_count(), 37 * 37);
        assert_eq!(g, DisorderGraph::full(37));
    }

    #[test]
    fn same_seed_same_graph() {
        let a = sample_graph(&params(90, 0.3), GraphSeed(11)).unwrap();
        let b = sample_graph(&params(90, 0.3), GraphSeed(11)).unwrap();
        let c = sample_graph(&params(90, 0.3), GraphSeed(12)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn thread_count_does_not_change_graph() {
        let p = params(200, 0.4);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let a = one.install(|| sample_graph(&p, GraphSeed(99)).unwrap());
        let b = three.install(|| sample_graph(&p, GraphSeed(99)).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn edge_count_within_four_sigma() {
        // Binomial(10^4, 1/2): sd = 50
        for seed in 0..20 {
            let g = sample_graph(&params(100, 0.5), GraphSeed(seed)).unwrap();
            let e = g.edge_count() as i64;
            assert!((e - 5000).abs() <= 200, "seed {seed}: {e} edges");
        }
    }

    #[test]
    fn per_bit_frequency() {
        // 1000 graphs at n = 10, p = 0.3: sd of a frequency is sqrt(0.21 / 1000) ~ 0.0145
        let p = params(10, 0.3);
        let mut counts = [0u32; 100];
        for seed in 0..1000 {
            let g = sample_graph(&p, GraphSeed(derive_seed(7, seed))).unwrap();
            for (idx, c) in counts.iter_mut().enumerate() {
                *c += g.get(idx / 10, idx % 10) as u32;
            }
        }
        for (idx, &c) in counts.iter().enumerate() {
            let f = c as f64 / 1000.0;
            assert!((f - 0.3).abs() <= 0.06, "bit {idx}: {f}");
        }
    }

    #[test]
    fn capacity_is_enforced() {
        let err = sample_graph_capped(&params(100, 0.5), GraphSeed(1), 9_999).unwrap_err();
        assert!(err.is_resource());
        assert!(sample_graph_capped(&params(100, 0.5), GraphSeed(1), 10_000).is_ok());
    }

    #[test]
    fn format_example() {
        // 1-based edges (1,1) and (2,1)
        let g = DisorderGraph::from_edges(2, &[(0, 0), (1, 0)]).unwrap();
        assert_eq!(graph_to_string(&g), "dilute-cw-graph v1 N=2\n10\n10\n");
    }

    #[test]
    fn missing_row_is_an_error() {
        let text = "dilute-cw-graph v1 N=3\n101\n010\n";
        match read_graph(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn comment_lines_are_skipped() {
        let text = "dilute-cw-graph v1 N=2\n# {\"seed\":7}\n10\n# mid\n01\n";
        let g = read_graph(text.as_bytes()).unwrap();
        assert!(g.get(0, 0) && g.get(1, 1) && !g.get(0, 1));
    }

    #[test]
    fn malformed_inputs() {
        let cases = [
            ("", 1),
            ("graph N=2\n10\n10\n", 1),
            ("dilute-cw-graph v1 N=0\n", 1),
            ("dilute-cw-graph v1 N=2\n10\n1\n", 3),
            ("dilute-cw-graph v1 N=2\n1x\n10\n", 2),
            ("dilute-cw-graph v1 N=2\n10\n10\n11\n", 4),
            ("dilute-cw-graph v1 N=2\n# note\n10\n1\n", 4),
        ];
        for (text, expected_line) in cases {
            match read_graph(text.as_bytes()) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, expected_line, "{text:?}"),
                other => panic!("{text:?}: unexpected {other:?}"),
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn round_trip(n in 1usize..150, p in 0.01f64..=1.0, seed in any::<u64>()) {
            let g = sample_graph(&params(n, p), GraphSeed(seed)).unwrap();
            let text = graph_to_string(&g);
            let back = read_graph(text.as_bytes()).unwrap();
            prop_assert_eq!(back, g);
        }
    }
}
