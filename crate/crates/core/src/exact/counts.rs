//! Counting configurations by magnetization, and pairs of configurations by
//! `(|sigma|, |tau|, |sigma tau|)`.
//!
//! A pair `(sigma, tau)` splits the sites into four sign categories
//! `(+,+), (+,-), (-,+), (-,-)` with counts `n1..n4`. Then
//!
//! ```text
//! n = n1 + n2 + n3 + n4      k = n1 + n2 - n3 - n4
//! l = n1 - n2 + n3 - n4      m = n1 - n2 - n3 + n4
//! ```
//!
//! This 4x4 system is invertible (`4 n1 = n + k + l + m`, and so on), so
//! `(k, l, m)` fixes the category counts and the number of pairs is the
//! single multinomial `n! / (n1! n2! n3! n4!)`, or zero when the inversion
//! does not give nonnegative integers.

use num_bigint::BigUint;
use num_integer::binomial;

use super::coefficients::check_parity;

/// `C(n, (n + k) / 2)`, or zero when `k` is unreachable.
pub fn spin_count(n: usize, k: i64) -> BigUint {
    if check_parity(n, k).is_err() {
        return BigUint::ZERO;
    }
    let up = ((n as i64 + k) / 2) as usize;
    binomial(BigUint::from(n), BigUint::from(up))
}

/// Category counts `(n1, n2, n3, n4)` for `(k, l, m)`, if they exist.
pub fn pair_categories(n: usize, k: i64, l: i64, m: i64) -> Option<[usize; 4]> {
    let n = n as i64;
    let sums = [n + k + l + m, n + k - l - m, n - k + l - m, n - k - l + m];
    let mut out = [0usize; 4];
    for (o, s) in out.iter_mut().zip(sums) {
        if s < 0 || s % 4 != 0 {
            return None;
        }
        *o = (s / 4) as usize;
    }
    Some(out)
}

pub fn multinomial(parts: &[usize]) -> BigUint {
    let mut remaining: usize = parts.iter().sum();
    let mut acc = BigUint::from(1u32);
    for &part in parts {
        acc *= binomial(BigUint::from(remaining), BigUint::from(part));
        remaining -= part;
    }
    acc
}

/// Number of pairs with `|sigma| = k`, `|tau| = l`, `|sigma tau| = m`.
pub fn pair_spin_count(n: usize, k: i64, l: i64, m: i64) -> BigUint {
    match pair_categories(n, k, l, m) {
        Some(parts) => multinomial(&parts),
        None => BigUint::ZERO,
    }
}

/// Natural log of a big integer; `-inf` for zero.
pub fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 1000 {
        return num_traits::ToPrimitive::to_f64(x).expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top: BigUint = x >> shift;
    num_traits::ToPrimitive::to_f64(&top).expect("64 bits").ln()
        + shift as f64 * std::f64::consts::LN_2
}

/// Table of `ln(i!)` for `i = 0..=n`, accumulated with compensation.
#[derive(Debug, Clone)]
pub struct LnFactorials(Vec<f64>);

impl LnFactorials {
    pub fn new(n: usize) -> Self {
        let mut table = Vec::with_capacity(n + 1);
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        table.push(0.0);
        for i in 1..=n {
            let v = (i as f64).ln();
            let t = sum + v;
            if sum.abs() >= v.abs() {
                comp += (sum - t) + v;
            } else {
                comp += (v - t) + sum;
            }
            sum = t;
            table.push(sum + comp);
        }
        LnFactorials(table)
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn ln_binomial(&self, n: usize, k: usize) -> f64 {
        self.0[n] - self.0[k] - self.0[n - k]
    }

    pub fn ln_multinomial(&self, parts: &[usize]) -> f64 {
        let n: usize = parts.iter().sum();
        parts.iter().fold(self.0[n], |acc, &p| acc - self.0[p])
    }
}
