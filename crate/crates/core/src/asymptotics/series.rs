//! `F(p, z) = log(1 - p + p e^z)`, its Taylor coefficients in `z`, and the
//! scaled remainders of its even and odd parts.
//!
//! Taylor coefficients are computed in exact rational arithmetic; the
//! remainders are evaluated with 256-bit binary floats because the
//! subtracted leading terms cancel most of the significant digits.

use dashu_float::FBig;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_TAYLOR_ORDER: usize = 16;

/// Working precision of [`remainder_check`], in bits.
const REMAINDER_BITS: usize = 256;

/// `log(1 - p + p e^z)`.
pub fn eval_f(p: f64, z: f64) -> f64 {
    if z > 30.0 {
        // factor out e^z before exp overflows
        z + (p + (1.0 - p) * (-z).exp()).ln()
    } else {
        (p * z.exp_m1()).ln_1p()
    }
}

/// Exact Taylor coefficients `c_1..c_K` of `z -> F(p, z)` at `z = 0`.
///
/// Composes `log(1 + u) = sum_m (-1)^(m+1) u^m / m` with
/// `u(z) = p (e^z - 1)`, truncating every product at order `K`.
pub fn taylor_coefficients_exact(p: &BigRational, max_order: usize) -> Result<Vec<BigRational>> {
    if max_order > MAX_TAYLOR_ORDER {
        return Err(Error::InvalidParameter(format!(
            "taylor order {max_order} exceeds cap {MAX_TAYLOR_ORDER}"
        )));
    }
    let k = max_order;
    // u[j] is the z^j coefficient, u[0] = 0
    let mut u = vec![BigRational::zero(); k + 1];
    let mut fact = BigInt::one();
    for (j, uj) in u.iter_mut().enumerate().skip(1) {
        fact *= BigInt::from(j);
        *uj = p / BigRational::from_integer(fact.clone());
    }
    let mut out = vec![BigRational::zero(); k + 1];
    let mut power = u.clone();
    for m in 1..=k {
        let coeff = BigRational::new(
            BigInt::from(if m % 2 == 1 { 1 } else { -1 }),
            BigInt::from(m),
        );
        for (o, pw) in out.iter_mut().zip(&power) {
            *o += &coeff * pw;
        }
        power = truncated_product(&power, &u, k);
    }
    out.remove(0);
    Ok(out)
}

fn truncated_product(a: &[BigRational], b: &[BigRational], k: usize) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); k + 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(k + 1 - i) {
            if !bj.is_zero() {
                out[i + j] += ai * bj;
            }
        }
    }
    out
}

/// Taylor coefficients `c_1..c_K` of `F(p, .)` as doubles; `p` is taken
/// exactly as the given binary value.
pub fn taylor_coefficients(p: f64, max_order: usize) -> Result<Vec<f64>> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!("p must lie in (0, 1], got {p}")));
    }
    let exact = BigRational::from_float(p).expect("finite p");
    Ok(taylor_coefficients_exact(&exact, max_order)?
        .iter()
        .map(|c| c.to_f64().expect("finite coefficient"))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

type Big = FBig;

fn big(x: f64) -> Big {
    Big::try_from(x)
        .expect("finite value")
        .with_precision(REMAINDER_BITS)
        .value()
}

fn big_f(p: &Big, z: &Big) -> Big {
    (Big::ONE - p + p * z.exp()).ln()
}

/// Scaled remainder of the even or odd part of `F(p, .)`:
///
/// * even: `[(F(p,z) + F(p,-z))/2 - p (cosh z - 1) + p^2 z^2 / 2] / (p^2 z^4)`
/// * odd:  `[(F(p,z) - F(p,-z))/2 - p z] / (p z^3)`
pub fn remainder_check(p: f64, z: f64, which: Parity) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!("p must lie in (0, 1], got {p}")));
    }
    if z == 0.0 {
        return Err(Error::InvalidParameter(
            "remainder ratio is indeterminate at z = 0".into(),
        ));
    }
    if !(z.abs() <= 0.25) {
        return Err(Error::InvalidParameter(format!("|z| must be at most 0.25, got {z}")));
    }
    let pb = big(p);
    let zb = big(z);
    let mz = -zb.clone();
    let fp = big_f(&pb, &zb);
    let fm = big_f(&pb, &mz);
    let two = big(2.0);
    let z2 = &zb * &zb;
    let value = match which {
        Parity::Even => {
            let cosh_m1 = (zb.exp() + mz.exp()) / &two - Big::ONE;
            let p2 = &pb * &pb;
            let num = (fp + fm) / &two - &pb * cosh_m1 + &p2 * &z2 / &two;
            num / (p2 * &z2 * &z2)
        }
        Parity::Odd => {
            let num = (fp - fm) / &two - &pb * &zb;
            num / (&pb * &z2 * &zb)
        }
    };
    Ok(value.to_f64().value())
}
