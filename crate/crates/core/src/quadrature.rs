//! Gauss rules used throughout: Legendre on a finite interval and
//! probabilists' Hermite for Gaussian expectations.

use std::f64::consts::PI;

/// Nodes and weights of a Gauss rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// n-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n > 0, "need at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

/// Maps a [-1, 1] rule onto [a, b].
pub fn mapped(rule: &Rule, a: f64, b: f64) -> Rule {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    Rule {
        nodes: rule.nodes.iter().map(|z| mid + half * z).collect(),
        weights: rule.weights.iter().map(|w| w * half).collect(),
    }
}

/// Integrates `f` over [a, b] with the given [-1, 1] rule.
pub fn integrate<F: FnMut(f64) -> f64>(rule: &Rule, a: f64, b: f64, mut f: F) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(z, w)| w * f(mid + half * z))
        .sum::<f64>()
        * half
}

/// n-point rule for `E[f(Z)]`, `Z ~ N(0, 1)`: weights sum to one.
pub fn gauss_hermite_prob(n: usize) -> Rule {
    assert!(n > 0, "need at least one node");
    let pim4 = PI.powf(-0.25);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.16667),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..200 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 3e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    let sqrt2 = 2f64.sqrt();
    let norm = PI.sqrt();
    Rule {
        nodes: x.iter().rev().map(|v| v * sqrt2).collect(),
        weights: w.iter().rev().map(|v| v / norm).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let rule = gauss_legendre(8);
        // exact through degree 15
        let v = integrate(&rule, 0.0, 2.0, |s| s.powi(15));
        assert_abs_diff_eq!(v, 2f64.powi(16) / 16.0, epsilon = 1e-9);
        assert_abs_diff_eq!(rule.weights.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn legendre_large_order_sums_to_two() {
        for n in [1, 2, 5, 16, 64] {
            let rule = gauss_legendre(n);
            assert_abs_diff_eq!(rule.weights.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn hermite_moments() {
        for n in [8, 32, 64, 128] {
            let rule = gauss_hermite_prob(n);
            let m0: f64 = rule.weights.iter().sum();
            let m2: f64 = rule.nodes.iter().zip(&rule.weights).map(|(z, w)| w * z * z).sum();
            let m4: f64 = rule.nodes.iter().zip(&rule.weights).map(|(z, w)| w * z.powi(4)).sum();
            assert_abs_diff_eq!(m0, 1.0, epsilon = 1e-13);
            assert_abs_diff_eq!(m2, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(m4, 3.0, epsilon = 1e-11);
        }
    }

    #[test]
    fn hermite_exponential_moment() {
        let rule = gauss_hermite_prob(32);
        let v: f64 = rule.nodes.iter().zip(&rule.weights).map(|(z, w)| w * (-z).exp()).sum();
        assert_abs_diff_eq!(v, 0.5f64.exp(), epsilon = 1e-13);
    }
}
