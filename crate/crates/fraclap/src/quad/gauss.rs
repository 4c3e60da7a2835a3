//! Gauss–Legendre and Gauss–Jacobi primitives.
//!
//! Legendre nodes come from Newton iteration on the recurrence (standard,
//! machine-precision). Jacobi nodes and weights use the Golub–Welsch
//! eigenvalue method on the symmetrized companion matrix; weights are the
//! squared first eigenvector components scaled by the total weight-function
//! mass `2^{α+β+1} B(α+1, β+1)`.

use crate::special::gamma_unchecked;
use crate::{Error, Result};
use std::f64::consts::PI;

/// Gauss–Legendre rule on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(deg: usize) -> Self {
        assert!(deg >= 1);
        let mut nodes = vec![0.0; deg];
        let mut weights = vec![0.0; deg];
        let m = deg.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_deg
            let mut x = (PI * (i as f64 + 0.75) / (deg as f64 + 0.5)).cos();
            loop {
                let (p, dp) = legendre_and_derivative(deg, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre_and_derivative(deg, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[deg - 1 - i] = x;
            weights[i] = w;
            weights[deg - 1 - i] = w;
        }
        if deg % 2 == 1 {
            nodes[deg / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        half * acc
    }
}

fn legendre_and_derivative(deg: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=deg {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = deg as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Jacobi rule: integrates `(1−x)^α (1+x)^β f(x)` over [−1, 1] exactly
/// for polynomial `f` up to degree `2·deg − 1`.
#[derive(Debug, Clone)]
pub struct GaussJacobi {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
}

impl GaussJacobi {
    pub fn new(deg: usize, alpha: f64, beta: f64) -> Result<Self> {
        if deg < 2 {
            return Err(Error::Domain("Jacobi rule degree must be at least 2".into()));
        }
        if !(alpha.is_finite() && alpha > -1.0) || !(beta.is_finite() && beta > -1.0) {
            return Err(Error::Domain(format!(
                "Jacobi exponents must exceed -1, got alpha={alpha}, beta={beta}"
            )));
        }

        let mut m = nalgebra::DMatrix::<f64>::zeros(deg, deg);
        let mut diag = (beta - alpha) / (2.0 + beta + alpha);
        for idx in 0..deg - 1 {
            let k = idx as f64 + 1.0;
            let denom = 2.0 * k + alpha + beta;
            // the k = 1 coefficient uses the cancelled form: the general one
            // is 0/0 when alpha + beta = −1
            let off = if idx == 0 {
                (4.0 * (1.0 + alpha) * (1.0 + beta)
                    / ((2.0 + alpha + beta).powi(2) * (3.0 + alpha + beta)))
                    .sqrt()
            } else {
                2.0 / denom
                    * (k * (k + alpha) * (k + beta) * (k + alpha + beta)
                        / ((denom + 1.0) * (denom - 1.0)))
                        .sqrt()
            };
            m[(idx, idx)] = diag;
            m[(idx, idx + 1)] = off;
            m[(idx + 1, idx)] = off;
            diag = (beta * beta - alpha * alpha) / (denom * (denom + 2.0));
        }
        m[(deg - 1, deg - 1)] = diag;

        let eigen = m.symmetric_eigen();
        let scale = (2f64).powf(alpha + beta + 1.0) * gamma_unchecked(alpha + 1.0)
            * gamma_unchecked(beta + 1.0)
            / gamma_unchecked(alpha + beta + 2.0);

        let mut pairs: Vec<(f64, f64)> = eigen
            .eigenvalues
            .iter()
            .copied()
            .zip(eigen.eigenvectors.row(0).iter().map(|v| v * v * scale))
            .collect();
        pairs.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

        let (nodes, weights) = pairs.into_iter().unzip();
        Ok(Self {
            nodes,
            weights,
            alpha,
            beta,
        })
    }

    /// Total mass of the weight function, `∫ (1−x)^α (1+x)^β dx`.
    pub fn weight_mass(&self) -> f64 {
        (2f64).powf(self.alpha + self.beta + 1.0) * gamma_unchecked(self.alpha + 1.0)
            * gamma_unchecked(self.beta + 1.0)
            / gamma_unchecked(self.alpha + self.beta + 2.0)
    }
}
