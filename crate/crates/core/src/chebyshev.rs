//! Chebyshev-Gauss-Lobatto collocation on `[-1, 1]`.

use std::f64::consts::PI;

use nalgebra::DMatrix;

/// Nodes `x_j = cos(j pi / n)`, `j = 0..=n` (descending).
pub fn nodes(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|j| {
            // sine form keeps the nodes exactly antisymmetric
            (PI * (n as f64 - 2.0 * j as f64) / (2.0 * n as f64)).sin()
        })
        .collect()
}

/// First-derivative matrix on [`nodes`], diagonal by the negative-sum trick.
pub fn differentiation_matrix(n: usize) -> DMatrix<f64> {
    let x = nodes(n);
    let c = |j: usize| {
        let base = if j == 0 || j == n { 2.0 } else { 1.0 };
        if j % 2 == 0 {
            base
        } else {
            -base
        }
    };
    let mut d = DMatrix::zeros(n + 1, n + 1);
    for i in 0..=n {
        let mut row_sum = 0.0;
        for j in 0..=n {
            if i != j {
                let v = c(i) / c(j) / (x[i] - x[j]);
                d[(i, j)] = v;
                row_sum += v;
            }
        }
        d[(i, i)] = -row_sum;
    }
    d
}

/// Barycentric interpolation through values on [`nodes`]`(n)`.
#[derive(Debug, Clone)]
pub struct Barycentric {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Barycentric {
    pub fn new(n: usize) -> Self {
        let weights = (0..=n)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == n {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        Barycentric {
            nodes: nodes(n),
            weights,
        }
    }

    pub fn eval(&self, values: &[f64], x: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((xj, wj), fj) in self.nodes.iter().zip(&self.weights).zip(values) {
            let d = x - xj;
            if d == 0.0 {
                return *fj;
            }
            let t = wj / d;
            num += t * fj;
            den += t;
        }
        num / den
    }
}
