use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Exact annealed coefficients for one `(N, p, beta)`.
///
/// For every `sigma` with `|sigma| = k` and every `tau` with `|tau| = l`,
/// `|sigma tau| = m`:
///
/// * `log E exp(-beta H(sigma)) = N^2 a0 + a1 k^2`
/// * `log E exp(-beta H(sigma) - beta H(tau)) = N^2 b0 + b1 k^2 + b2 l^2 + b12 m^2`
///
/// Both identities are exact because each edge term `f(x) = F(p, gamma x)`
/// only sees `x in {-1, +1}` (resp. `x1 + x2` with `x1, x2 in {-1, +1}`),
/// where it is affine (resp. bilinear).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentCoefficients {
    pub gamma: f64,
    pub a0: f64,
    pub a1: f64,
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub b12: f64,
}

/// `(F(p,z) + F(p,-z)) / 2 = log1p(4 p (1-p) sinh^2(z/2)) / 2`.
fn even_part(p: f64, z: f64) -> f64 {
    let s = (0.5 * z).sinh();
    0.5 * (4.0 * p * (1.0 - p) * s * s).ln_1p()
}

/// `(F(p,z) - F(p,-z)) / 2 = log1p(2 p sinh z / (1 - p + p e^-z)) / 2`.
fn odd_part(p: f64, z: f64) -> f64 {
    0.5 * (2.0 * p * z.sinh() / (1.0 - p + p * (-z).exp())).ln_1p()
}

pub fn moment_coefficients(params: &ModelParams) -> Result<MomentCoefficients> {
    if !(params.p > 0.0) {
        return Err(Error::InvalidParameter(
            "p = 0 leaves the coupling scale undefined".into(),
        ));
    }
    params.validate()?;
    let p = params.p;
    let gamma = params.gamma();
    let a0 = even_part(p, gamma);
    let a1 = odd_part(p, gamma);
    let b0 = 0.5 * even_part(p, 2.0 * gamma);
    let b1 = 0.5 * odd_part(p, 2.0 * gamma);
    Ok(MomentCoefficients {
        gamma,
        a0,
        a1,
        b0,
        b1,
        b2: b1,
        b12: b0,
    })
}

pub(crate) fn check_parity(n: usize, k: i64) -> Result<()> {
    if k.unsigned_abs() > n as u64 || (k - n as i64).rem_euclid(2) != 0 {
        return Err(Error::Parity { n, k });
    }
    Ok(())
}

/// `N^2 a0 + a1 k^2 = log E exp(-beta H(sigma))` for any `sigma` with `|sigma| = k`.
pub fn expected_weight_log(params: &ModelParams, coeffs: &MomentCoefficients, k: i64) -> Result<f64> {
    check_parity(params.n, k)?;
    let n = params.n as f64;
    let kf = k as f64;
    Ok(n * n * coeffs.a0 + coeffs.a1 * kf * kf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::eval_f;

    fn params(n: usize, p: f64, beta: f64) -> ModelParams {
        ModelParams::new(n, p, beta).unwrap()
    }

    #[test]
    fn p_one_is_deterministic() {
        let c = moment_coefficients(&params(7, 1.0, 0.8)).unwrap();
        assert!(c.a0.abs() < 1e-17);
        assert!((c.a1 - c.gamma).abs() < 1e-17);
        assert!(c.b0.abs() < 1e-17 && c.b12.abs() < 1e-17);
        assert!((c.b1 - c.gamma).abs() < 1e-17 && (c.b2 - c.gamma).abs() < 1e-17);
    }

    #[test]
    fn reference_values() {
        // high-precision references for F(0.5, +-0.05)
        let c = moment_coefficients(&params(10, 0.5, 0.5)).unwrap();
        assert_eq!(c.gamma, 0.05);
        assert!((c.a0 - 3.124_674_533_409_847_346_5e-4).abs() < 1e-19);
        assert!((c.a1 - 0.025).abs() < 1e-17);
    }

    #[test]
    fn matches_definition_in_f() {
        for &p in &[0.05, 0.3, 0.5, 0.7, 1.0] {
            for &beta in &[0.0, 0.3, 0.9, 2.0] {
                let m = params(5, p, beta);
                let c = moment_coefficients(&m).unwrap();
                let g = c.gamma;
                let a0 = (eval_f(p, g) + eval_f(p, -g)) / 2.0;
                let a1 = (eval_f(p, g) - eval_f(p, -g)) / 2.0;
                assert!((c.a0 - a0).abs() < 1e-16, "{p} {beta}");
                assert!((c.a1 - a1).abs() < 1e-16);
                let f2 = eval_f(p, 2.0 * g);
                let fm2 = eval_f(p, -2.0 * g);
                // ulp-scale relative to the size of the summands
                let scale = 8.0 * f64::EPSILON * (f2.abs() + fm2.abs());
                assert!((c.b0 + c.b1 + c.b2 + c.b12 - f2).abs() <= scale);
                assert!((c.b0 - c.b1 - c.b2 + c.b12 - fm2).abs() <= scale);
            }
        }
    }

    #[test]
    fn expected_weight_examples() {
        let m = params(6, 0.4, 0.0);
        let c = moment_coefficients(&m).unwrap();
        for k in (-6..=6).step_by(2) {
            assert_eq!(expected_weight_log(&m, &c, k).unwrap(), 0.0);
        }
        let m = params(6, 1.0, 0.7);
        let c = moment_coefficients(&m).unwrap();
        let v = expected_weight_log(&m, &c, 4).unwrap();
        assert!((v - 0.7 * 16.0 / 12.0).abs() < 1e-15);
        assert!(matches!(expected_weight_log(&m, &c, 3), Err(Error::Parity { .. })));
        assert!(expected_weight_log(&m, &c, 8).is_err());
    }
}
