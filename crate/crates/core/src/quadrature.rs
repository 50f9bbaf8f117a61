//! Gauss-Legendre quadrature rules.
//!
//! Nodes are the roots of the Legendre polynomial `P_n`, found by Newton
//! iteration from the Chebyshev-like initial guess; weights are
//! `2 / ((1 - x^2) P_n'(x)^2)`.  An n-point rule integrates polynomials up to
//! degree `2n - 1` exactly and converges spectrally for smooth integrands.

use crate::{Error, Result};

/// Nodes and weights of a quadrature rule on an interval.
#[derive(Debug, Clone)]
pub struct QuadRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Evaluate `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for j in 2..=n {
        let jf = j as f64;
        let p_next = ((2.0 * jf - 1.0) * x * p - (jf - 1.0) * p_prev) / jf;
        p_prev = p;
        p = p_next;
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Gauss-Legendre rule with `n` points on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Result<QuadRule> {
    if n < 2 {
        return Err(Error::Config(format!(
            "Gauss-Legendre rule needs at least 2 nodes, got {n}"
        )));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // Roots come in +/- pairs; compute the lower half and mirror.
    for i in 0..n.div_ceil(2) {
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                let (p2, d2) = legendre_and_derivative(n, x);
                dp = d2;
                x -= p2 / d2;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        weights[i] = w;
        nodes[n - 1 - i] = -x;
        weights[n - 1 - i] = w;
    }
    // The middle node of an odd rule is exactly zero.
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(QuadRule { nodes, weights })
}

/// Gauss-Legendre rule mapped affinely onto `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Result<QuadRule> {
    if !(a < b) {
        return Err(Error::Config(format!(
            "quadrature interval must satisfy a < b, got [{a}, {b}]"
        )));
    }
    let base = gauss_legendre(n)?;
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    Ok(QuadRule {
        nodes: base.nodes.iter().map(|x| mid + half * x).collect(),
        weights: base.weights.iter().map(|w| half * w).collect(),
    })
}

/// Integrate `f` over `[a, b]` with an n-point rule.
pub fn integrate<F: Fn(f64) -> f64>(n: usize, a: f64, b: f64, f: F) -> Result<f64> {
    let rule = gauss_legendre_on(n, a, b)?;
    Ok(rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(x, w)| w * f(*x))
        .sum())
}
