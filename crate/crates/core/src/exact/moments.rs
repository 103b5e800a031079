//! Annealed moments `E Z_N(beta, g)` and `E Z_N(beta, g)^2` as finite sums over
//! magnetization classes, using the exact coefficients.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coefficients::{moment_coefficients, MomentCoefficients};
use super::counts::{pair_categories, LnFactorials};
use crate::error::{Error, Result};
use crate::logsum::LogSumExp;
use crate::model::ModelParams;
use crate::testfn::TestFunction;

/// Largest tolerated negative variance ratio that is still treated as rounding.
pub const CLAMP_TOLERANCE: f64 = 1e-9;

/// `ln g(k / sqrt(N))` for `k = -N, -N+2, ..., N`, indexed by the number of up spins.
fn log_g_table(params: &ModelParams, g: &TestFunction) -> Result<Vec<f64>> {
    let n = params.n;
    let root = (n as f64).sqrt();
    let table = (0..=n)
        .map(|up| g.log_eval((2 * up as i64 - n as i64) as f64 / root))
        .collect::<Result<Vec<_>>>()?;
    if table.iter().all(|v| *v == f64::NEG_INFINITY) {
        return Err(Error::TestFunction(format!(
            "g = {g} vanishes on every atom k/sqrt({n})"
        )));
    }
    Ok(table)
}

fn first_moment_with(params: &ModelParams, g: &TestFunction, c: &MomentCoefficients) -> Result<f64> {
    let n = params.n;
    let lg = log_g_table(params, g)?;
    let lf = LnFactorials::new(n);
    let mut acc = LogSumExp::new();
    for (up, log_g) in lg.iter().enumerate() {
        let k = (2 * up as i64 - n as i64) as f64;
        acc.push(lf.ln_binomial(n, up) + log_g + c.a1 * k * k);
    }
    let nf = n as f64;
    Ok(nf * nf * c.a0 + acc.value())
}

/// `log E Z_N(beta, g) = log sum_k nu_N(k) g(k / sqrt N) exp(N^2 a0 + a1 k^2)`.
pub fn expected_partition_log(params: &ModelParams, g: &TestFunction) -> Result<f64> {
    let c = moment_coefficients(params)?;
    first_moment_with(params, g, &c)
}

fn second_moment_with(params: &ModelParams, g: &TestFunction, c: &MomentCoefficients) -> Result<f64> {
    let n = params.n;
    let lg = log_g_table(params, g)?;
    let lf = LnFactorials::new(n);
    // One partial sum per n1 = #{(+,+)} sites, merged along a fixed tree.
    let parts: Vec<LogSumExp> = (0..=n)
        .into_par_iter()
        .map(|n1| {
            let mut acc = LogSumExp::new();
            for n2 in 0..=n - n1 {
                for n3 in 0..=n - n1 - n2 {
                    let n4 = n - n1 - n2 - n3;
                    let k = (n1 + n2) as i64 - (n3 + n4) as i64;
                    let l = (n1 + n3) as i64 - (n2 + n4) as i64;
                    let m = (n1 + n4) as i64 - (n2 + n3) as i64;
                    debug_assert_eq!(pair_categories(n, k, l, m), Some([n1, n2, n3, n4]));
                    let (kf, lf2, mf) = (k as f64, l as f64, m as f64);
                    acc.push(
                        lf.ln_multinomial(&[n1, n2, n3, n4])
                            + lg[n1 + n2]
                            + lg[n1 + n3]
                            + c.b1 * kf * kf
                            + c.b2 * lf2 * lf2
                            + c.b12 * mf * mf,
                    );
                }
            }
            acc
        })
        .collect();
    let nf = n as f64;
    Ok(nf * nf * c.b0 + LogSumExp::tree_merge(&parts).value())
}

/// `log E[Z_N(beta, g)^2]`, summed over the `O(N^3)` sign-category cells.
pub fn second_moment_log(params: &ModelParams, g: &TestFunction) -> Result<f64> {
    let c = moment_coefficients(params)?;
    second_moment_with(params, g, &c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceRatio {
    pub value: f64,
    /// Set when a slightly negative rounding artifact was replaced by 0.
    pub clamped: bool,
}

fn ratio_from_logs(first: f64, second: f64) -> Result<VarianceRatio> {
    let raw = (second - 2.0 * first).exp_m1();
    if raw >= 0.0 {
        Ok(VarianceRatio {
            value: raw,
            clamped: false,
        })
    } else if raw >= -CLAMP_TOLERANCE {
        Ok(VarianceRatio {
            value: 0.0,
            clamped: true,
        })
    } else {
        Err(Error::Numerical(format!(
            "negative variance ratio {raw} beyond rounding tolerance"
        )))
    }
}

/// `Var Z / (E Z)^2 = expm1(log E Z^2 - 2 log E Z)`.
pub fn variance_ratio(params: &ModelParams, g: &TestFunction) -> Result<VarianceRatio> {
    let c = moment_coefficients(params)?;
    ratio_from_logs(
        first_moment_with(params, g, &c)?,
        second_moment_with(params, g, &c)?,
    )
}

/// Output record of the annealed-moment computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealedMoments {
    pub params: ModelParams,
    pub g: TestFunction,
    pub coefficients: MomentCoefficients,
    pub log_expected_partition: f64,
    pub log_second_moment: Option<f64>,
    pub variance_ratio: Option<f64>,
    pub variance_clamped: Option<bool>,
}

pub fn annealed_moments(params: &ModelParams, g: &TestFunction, second: bool) -> Result<AnnealedMoments> {
    let c = moment_coefficients(params)?;
    let first = first_moment_with(params, g, &c)?;
    let (log_second_moment, variance_ratio, variance_clamped) = if second {
        let s = second_moment_with(params, g, &c)?;
        let r = ratio_from_logs(first, s)?;
        (Some(s), Some(r.value), Some(r.clamped))
    } else {
        (None, None, None)
    };
    Ok(AnnealedMoments {
        params: *params,
        g: *g,
        coefficients: c,
        log_expected_partition: first,
        log_second_moment,
        variance_ratio,
        variance_clamped,
    })
}
