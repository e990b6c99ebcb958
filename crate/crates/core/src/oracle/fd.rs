//! Finite-difference stencils and sections sampled on a uniform grid.

use crate::expr::MultiIndex;

/// Stencil half-width; central stencils use `2 * RADIUS + 1` points.
pub const RADIUS: usize = 4;

/// Fornberg's weights for derivatives `0..=max_order` at `z` on the nodes `x`.
/// `w[k][j]` multiplies `f(x_j)` in the `k`-th derivative.
pub fn fornberg(z: f64, x: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Field values on a uniform grid over a box, with finite-difference jets.
#[derive(Clone, Debug)]
pub struct SampledSection {
    lo: Vec<f64>,
    h: Vec<f64>,
    counts: Vec<usize>,
    values: Vec<Vec<f64>>,
    /// `weights[k][j]`: the `k`-th derivative stencil for unit spacing.
    weights: Vec<Vec<f64>>,
}

impl SampledSection {
    /// Samples `f` at the nodes `lo + i h`, `h = (hi - lo) / (count - 1)`.
    pub fn from_fn(lo: &[f64], hi: &[f64], counts: &[usize], m: usize, f: impl Fn(&[f64]) -> Vec<f64>) -> Self {
        let h: Vec<f64> = lo.iter().zip(hi).zip(counts).map(|((a, b), c)| (b - a) / (*c as f64 - 1.0)).collect();
        let total: usize = counts.iter().product();
        let mut values = vec![Vec::with_capacity(total); m];
        let mut idx = vec![0; counts.len()];
        for _ in 0..total {
            let x: Vec<f64> = idx.iter().zip(lo).zip(&h).map(|((i, a), s)| a + *i as f64 * s).collect();
            for (a, v) in f(&x).into_iter().enumerate() {
                values[a].push(v);
            }
            advance(&mut idx, counts);
        }
        let nodes: Vec<f64> = (-(RADIUS as i64)..=RADIUS as i64).map(|k| k as f64).collect();
        SampledSection { lo: lo.to_vec(), h, counts: counts.to_vec(), values, weights: fornberg(0.0, &nodes, 4) }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn spacing(&self) -> &[f64] {
        &self.h
    }

    pub fn point(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().zip(&self.lo).zip(&self.h).map(|((i, a), s)| a + *i as f64 * s).collect()
    }

    fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.counts).fold(0, |acc, (i, c)| acc * c + i)
    }

    /// Whether every stencil centred at `idx` stays on the grid.
    pub fn interior(&self, idx: &[usize]) -> bool {
        idx.iter().zip(&self.counts).all(|(i, c)| *i >= RADIUS && *i + RADIUS < *c)
    }

    pub fn value(&self, a: usize, idx: &[usize]) -> f64 {
        self.values[a][self.flat(idx)]
    }

    /// `∂_J u^a` at a grid node, by tensor-product central differences.
    pub fn derivative(&self, a: usize, multi: &MultiIndex, idx: &[usize]) -> f64 {
        let counts = multi.counts(self.counts.len());
        let axes: Vec<(usize, usize)> =
            counts.iter().enumerate().filter(|(_, c)| **c > 0).map(|(i, c)| (i, *c as usize)).collect();
        let mut acc = 0.0;
        let width = 2 * RADIUS + 1;
        let combos = width.pow(axes.len() as u32);
        let mut at = idx.to_vec();
        for mut code in 0..combos {
            let mut w = 1.0;
            for &(axis, k) in &axes {
                let j = code % width;
                code /= width;
                w *= self.weights[k][j];
                at[axis] = idx[axis] + j - RADIUS;
            }
            if w != 0.0 {
                acc += w * self.values[a][self.flat(&at)];
            }
        }
        let scale: f64 = axes.iter().map(|&(axis, k)| self.h[axis].powi(k as i32)).product();
        acc / scale
    }
}

/// Next multi-index in row-major order.
pub fn advance(idx: &mut [usize], counts: &[usize]) {
    for d in (0..idx.len()).rev() {
        idx[d] += 1;
        if idx[d] < counts[d] {
            return;
        }
        idx[d] = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fornberg_reproduces_classical_stencils() {
        let w = fornberg(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_eq!(w[1], vec![-0.5, 0.0, 0.5]);
        assert_eq!(w[2], vec![1.0, -2.0, 1.0]);
    }

    #[test]
    fn derivatives_of_a_smooth_function() {
        let s = SampledSection::from_fn(&[0.0, 0.0], &[1.0, 1.0], &[65, 65], 1, |x| vec![(x[0] * 2.0).sin() * x[1].exp()]);
        let idx = [30, 20];
        let p = s.point(&idx);
        let uxy = s.derivative(0, &MultiIndex::new(vec![0, 1]), &idx);
        assert!((uxy - 2.0 * (2.0 * p[0]).cos() * p[1].exp()).abs() < 1e-8);
        let uxx = s.derivative(0, &MultiIndex::new(vec![0, 0]), &idx);
        assert!((uxx + 4.0 * (2.0 * p[0]).sin() * p[1].exp()).abs() < 1e-7);
    }
}
