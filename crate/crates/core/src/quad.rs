//! Tensor-product Gauss-Legendre quadrature on the unit cube.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default convergence tolerance between successive refinements.
pub const TAU_QUAD: f64 = 1e-6;
/// Default node cap per axis.
pub const NODE_CAP: usize = 256;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Single application of the `nodes`-point tensor rule on `[0,1]^dim`.
pub fn tensor_rule(f: &dyn Fn(&[f64]) -> f64, dim: usize, nodes: usize) -> f64 {
    let (x, w) = gauss_legendre(nodes);
    let mut idx = vec![0usize; dim];
    let mut point = vec![0.0; dim];
    let mut total = 0.0;
    if dim == 0 {
        return f(&point);
    }
    loop {
        let mut weight = 1.0;
        for (k, &i) in idx.iter().enumerate() {
            point[k] = x[i];
            weight *= w[i];
        }
        total += weight * f(&point);
        let mut k = 0;
        loop {
            idx[k] += 1;
            if idx[k] < nodes {
                break;
            }
            idx[k] = 0;
            k += 1;
            if k == dim {
                return total;
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    /// Difference between the last two refinements.
    pub error: f64,
    pub nodes: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub tol: f64,
    pub node_cap: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { tol: TAU_QUAD, node_cap: NODE_CAP }
    }
}

/// Doubles the node count from `nodes` until two successive estimates differ
/// by less than `cfg.tol`, or fails past `cfg.node_cap`.
pub fn nquad(f: &dyn Fn(&[f64]) -> f64, dim: usize, nodes: usize, cfg: &QuadConfig) -> Result<QuadResult> {
    let mut n = nodes.max(2);
    let mut prev = tensor_rule(f, dim, n);
    loop {
        let next_n = 2 * n;
        if next_n > cfg.node_cap {
            return Err(Error::QuadratureNonConvergence { value: prev, error: f64::NAN });
        }
        let next = tensor_rule(f, dim, next_n);
        let err = (next - prev).abs();
        if err < cfg.tol {
            return Ok(QuadResult { value: next, error: err, nodes: next_n });
        }
        if !next.is_finite() {
            return Err(Error::QuadratureNonConvergence { value: next, error: err });
        }
        prev = next;
        n = next_n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_on_square() {
        let r = nquad(&|_| 1.0, 2, 2, &QuadConfig::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-14);
        assert!(r.error < 1e-14);
    }

    #[test]
    fn full_period_sine_vanishes() {
        let r = nquad(&|s| (2.0 * PI * s[0]).sin(), 1, 2, &QuadConfig::default()).unwrap();
        assert!(r.value.abs() < TAU_QUAD);
    }

    #[test]
    fn sphere_area_in_spherical_chart() {
        // theta = pi s1, phi = 2 pi s2, dA = sin(theta) dtheta dphi
        let f = |s: &[f64]| (PI * s[0]).sin() * PI * 2.0 * PI;
        let r = nquad(&f, 2, 2, &QuadConfig::default()).unwrap();
        assert!((r.value - 4.0 * PI).abs() < TAU_QUAD);
    }

    #[test]
    fn exact_on_polynomials_of_degree_2n_minus_1() {
        for n in 1..12 {
            let deg = 2 * n - 1;
            let v = tensor_rule(&|s| s[0].powi(deg as i32), 1, n);
            assert!((v - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "n={n}");
        }
    }

    #[test]
    fn non_convergence_is_reported() {
        let cfg = QuadConfig { tol: 1e-12, node_cap: 8 };
        let r = nquad(&|s| (1.0 / (s[0] + 1e-3)).sin(), 1, 2, &cfg);
        assert!(matches!(r, Err(Error::QuadratureNonConvergence { .. })));
    }
}
