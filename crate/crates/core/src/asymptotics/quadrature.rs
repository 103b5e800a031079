//! Fixed 128-node Gauss–Hermite rule for the weight `exp(-x^2)`.

use std::sync::OnceLock;

pub const NODES: usize = 128;

#[derive(Debug)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Nodes by Newton iteration on the orthonormal Hermite recurrence, which
/// stays in range for large orders.
fn build(n: usize) -> GaussHermite {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-0.166_67),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let (p1, p2) = hermite_pair(n, z);
            pp = (2.0 * nf).sqrt() * p2;
            let step = p1 / pp;
            z -= step;
            if step.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        let (_, p2) = hermite_pair(n, z);
        pp = if p2 != 0.0 { (2.0 * nf).sqrt() * p2 } else { pp };
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    GaussHermite {
        nodes: x,
        weights: w,
    }
}

/// Orthonormal Hermite functions `(h_n(z), h_{n-1}(z))`.
fn hermite_pair(n: usize, z: f64) -> (f64, f64) {
    const PIM4: f64 = 0.751_125_544_464_942_5; // pi^(-1/4)
    let mut p1 = PIM4;
    let mut p2 = 0.0;
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
    }
    (p1, p2)
}

pub fn rule() -> &'static GaussHermite {
    static RULE: OnceLock<GaussHermite> = OnceLock::new();
    RULE.get_or_init(|| build(NODES))
}

/// `E[f(Y)]` for standard normal `Y`.
pub fn standard_normal_expectation(f: impl Fn(f64) -> f64) -> f64 {
    let r = rule();
    let s: f64 = r
        .nodes
        .iter()
        .zip(&r.weights)
        .map(|(&x, &w)| w * f(std::f64::consts::SQRT_2 * x))
        .sum();
    s / std::f64::consts::PI.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_of_the_weight() {
        let r = rule();
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let m0: f64 = r.weights.iter().sum();
        let m2: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x * x).sum();
        let m4: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(4)).sum();
        assert!((m0 / sqrt_pi - 1.0).abs() < 1e-13);
        assert!((m2 / sqrt_pi - 0.5).abs() < 1e-13);
        assert!((m4 / sqrt_pi - 0.75).abs() < 1e-13);
    }

    #[test]
    fn nodes_are_sorted_and_symmetric() {
        let r = rule();
        assert_eq!(r.nodes.len(), NODES);
        for i in 0..NODES {
            assert!((r.nodes[i] + r.nodes[NODES - 1 - i]).abs() < 1e-12);
            assert!(r.weights[i] > 0.0);
        }
        for w in r.nodes.windows(2) {
            assert!(w[0] > w[1]);
        }
    }

    #[test]
    fn normal_moments() {
        let e = standard_normal_expectation(|y| y.powi(6));
        assert!((e - 15.0).abs() < 1e-11);
        let e = standard_normal_expectation(|y| (0.3 * y).cos());
        assert!((e - (-0.045f64).exp()).abs() < 1e-14);
    }
}
