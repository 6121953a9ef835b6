use crate::{Error, Result};

use super::legendre::legendre_with_derivative;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Highest polynomial degree integrated exactly.
    pub fn exact_degree(&self) -> usize {
        2 * self.len() - 1
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Newton iteration on `P_n` from the Chebyshev-like initial guesses.
pub fn gauss_legendre(n: usize) -> Result<QuadratureRule> {
    if !(1..=32).contains(&n) {
        return Err(Error::InvalidConfig(format!(
            "Gauss-Legendre point count {n} outside 1..=32"
        )));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            let dx = p[n] / d[n];
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let dp = legendre_with_derivative(n, x).1[n];
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(QuadratureRule { nodes, weights })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_low_order_rules() {
        let q1 = gauss_legendre(1).unwrap();
        assert_eq!(q1.nodes, vec![0.0]);
        assert!((q1.weights[0] - 2.0).abs() < 1e-15);
        let q2 = gauss_legendre(2).unwrap();
        let r = 1.0 / 3f64.sqrt();
        assert!((q2.nodes[0] + r).abs() < 1e-15 && (q2.nodes[1] - r).abs() < 1e-15);
        assert!((q2.weights[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn five_points_integrate_x8() {
        let q = gauss_legendre(5).unwrap();
        assert!((q.integrate(|x| x.powi(8)) - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn weights_sum_to_two_and_nodes_are_symmetric() {
        for n in 1..=32 {
            let q = gauss_legendre(n).unwrap();
            let s: f64 = q.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n}");
            for i in 0..n {
                assert!((q.nodes[i] + q.nodes[n - 1 - i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn out_of_range_counts_fail() {
        assert!(gauss_legendre(0).is_err());
        assert!(gauss_legendre(33).is_err());
    }
}
