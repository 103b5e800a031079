//! Brute-force disorder average over all `2^(N^2)` graphs, for checking the
//! closed-form moments at tiny `N`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::testfn::TestFunction;

/// Limit on `2^(N^2)` times the number of configurations (pairs) visited.
pub const ORACLE_MAX_LOG2_WORK: u32 = 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Moment {
    First,
    Second,
}

impl std::str::FromStr for Moment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first" => Ok(Moment::First),
            "second" => Ok(Moment::Second),
            _ => Err(Error::InvalidParameter(format!(
                "unknown moment {s:?}, expected first or second"
            ))),
        }
    }
}

/// `log E Z_N(beta, g)` or `log E Z_N(beta, g)^2`, summing every graph with
/// weight `p^edges (1 - p)^(N^2 - edges)`. The second moment uses
/// `Z(G)^2 = sum over pairs`, so the pair sum is never formed.
pub fn disorder_oracle(params: &ModelParams, g: &TestFunction, moment: Moment) -> Result<f64> {
    params.validate()?;
    let n = params.n;
    let slots = (n * n) as u32;
    let per_graph = match moment {
        Moment::First => n as u32,
        Moment::Second => 2 * n as u32,
    };
    if slots + per_graph > ORACLE_MAX_LOG2_WORK {
        return Err(Error::ResourceCap(format!(
            "disorder oracle at N = {n} needs 2^{} steps, cap is 2^{ORACLE_MAX_LOG2_WORK}",
            slots + per_graph
        )));
    }
    let (p, gamma) = (params.p, params.gamma());
    let root = (n as f64).sqrt();

    let spins: Vec<Vec<i64>> = (0..1u32 << n)
        .map(|bits| (0..n).map(|i| if bits >> i & 1 == 1 { 1 } else { -1 }).collect())
        .collect();
    let g_vals: Vec<f64> = spins
        .iter()
        .map(|s| g.eval(s.iter().sum::<i64>() as f64 / root))
        .collect();
    if g_vals.iter().any(|v| *v < 0.0) {
        return Err(Error::TestFunction(format!("g = {g} is negative at an atom")));
    }

    let mut total = 0.0f64;
    for graph in 0..1u64 << slots {
        let edges = graph.count_ones() as i32;
        let weight = p.powi(edges) * (1.0 - p).powi(slots as i32 - edges);
        if weight == 0.0 {
            continue;
        }
        let mut z = 0.0;
        for (s, gv) in spins.iter().zip(&g_vals) {
            let mut coupling = 0i64;
            for i in 0..n {
                for j in 0..n {
                    if graph >> (i * n + j) & 1 == 1 {
                        coupling += s[i] * s[j];
                    }
                }
            }
            z += gv * (gamma * coupling as f64).exp();
        }
        total += weight
            * match moment {
                Moment::First => z,
                Moment::Second => z * z,
            };
    }
    Ok(total.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::enumerate_partition;
    use crate::model::DisorderGraph;

    #[test]
    fn infinite_temperature() {
        for p in [0.2, 0.9] {
            let m = ModelParams::new(3, p, 0.0).unwrap();
            let v = disorder_oracle(&m, &TestFunction::One, Moment::First).unwrap();
            assert!((v - 3.0 * std::f64::consts::LN_2).abs() < 1e-14);
        }
    }

    #[test]
    fn full_graph_at_p_one() {
        for n in 1..=4usize {
            let m = ModelParams::new(n, 1.0, 0.8).unwrap();
            let v = disorder_oracle(&m, &TestFunction::One, Moment::First).unwrap();
            let q = enumerate_partition(&DisorderGraph::full(n), &m).unwrap();
            assert!((v - q.log_z).abs() < 1e-13);
        }
    }

    #[test]
    fn work_cap() {
        let m = ModelParams::new(5, 0.5, 0.5).unwrap();
        assert!(disorder_oracle(&m, &TestFunction::One, Moment::First).unwrap_err().is_resource());
        let m = ModelParams::new(4, 0.5, 0.5).unwrap();
        assert!(disorder_oracle(&m, &TestFunction::One, Moment::Second).is_ok());
    }
}
