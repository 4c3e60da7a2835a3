//! Quadrature on the unit sphere `S^{n−1}`, n ∈ {1,2,3}.
//!
//! - n = 1: the two-point "sphere" {−1, +1}, counting measure (ω₀ = 2);
//! - n = 2: the periodic trapezoid rule, spectrally accurate on the circle;
//! - n = 3: product of Gauss–Legendre in the polar cosine with a trapezoid
//!   in azimuth.
//!
//! Weights sum to the surface measure ω_{n−1}; construction cross-checks
//! exactness on all monomials of degree ≤ 4.

use crate::geom::Point;
use crate::special::omega_nm1;
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct SphereRule {
    dim: usize,
    pub directions: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    /// `resolution` scales the node count in the angular variables; the
    /// default (see [`SphereRule::standard`]) is enough for smooth
    /// integrands, near-boundary kernels need `resolution ~ 1/δ`.
    pub fn new(n: u32, resolution: usize) -> Self {
        let mut directions = Vec::new();
        let mut weights = Vec::new();
        match n {
            1 => {
                directions.push([1.0, 0.0, 0.0]);
                directions.push([-1.0, 0.0, 0.0]);
                weights.push(1.0);
                weights.push(1.0);
            }
            2 => {
                let m = resolution.max(8);
                let w = 2.0 * PI / m as f64;
                for k in 0..m {
                    let phi = 2.0 * PI * (k as f64 + 0.5) / m as f64;
                    directions.push([phi.cos(), phi.sin(), 0.0]);
                    weights.push(w);
                }
            }
            3 => {
                let k = (resolution / 2).max(8);
                let gl = super::gauss::GaussLegendre::new(k);
                let m = 2 * k;
                let wphi = 2.0 * PI / m as f64;
                for (mu, wmu) in gl.nodes.iter().zip(&gl.weights) {
                    let sin_t = (1.0 - mu * mu).sqrt();
                    for j in 0..m {
                        let phi = 2.0 * PI * (j as f64 + 0.5) / m as f64;
                        directions.push([sin_t * phi.cos(), sin_t * phi.sin(), *mu]);
                        weights.push(wmu * wphi);
                    }
                }
            }
            _ => unreachable!("dimension validated by FracParams"),
        }
        let rule = Self { dim: n as usize, directions, weights };
        debug_assert!(rule.check_low_degree_exactness() < 1e-10);
        rule
    }

    pub fn standard(n: u32) -> Self {
        match n {
            1 => Self::new(1, 1),
            2 => Self::new(2, 128),
            _ => Self::new(3, 64),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// `∫_{S^{n−1}} f(θ) dH(θ)`.
    pub fn integrate<F: FnMut(&Point) -> f64>(&self, mut f: F) -> f64 {
        let terms: Vec<f64> = self
            .directions
            .iter()
            .zip(&self.weights)
            .map(|(d, w)| {
                let p = Point::new(&d[..self.dim]).expect("unit direction");
                w * f(&p)
            })
            .collect();
        super::pairwise_sum(&terms)
    }

    /// Worst absolute error over monomials θ^α, |α| ≤ 4, against the closed
    /// forms ∫θ_i² = ω/n, ∫θ_i⁴ = 3ω/(n(n+2)), ∫θ_i²θ_j² = ω/(n(n+2)).
    pub fn check_low_degree_exactness(&self) -> f64 {
        let n = self.dim;
        let omega = omega_nm1(n as u32);
        let mut worst: f64 = 0.0;
        let moment = |f: &dyn Fn(&[f64; 3]) -> f64| -> f64 {
            self.directions
                .iter()
                .zip(&self.weights)
                .map(|(d, w)| w * f(d))
                .sum()
        };
        worst = worst.max((moment(&|_| 1.0) - omega).abs());
        for i in 0..n {
            // odd moments vanish
            worst = worst.max(moment(&|d| d[i]).abs());
            worst = worst.max(moment(&|d| d[i] * d[i] * d[i]).abs());
            worst = worst.max((moment(&|d| d[i] * d[i]) - omega / n as f64).abs());
            worst = worst
                .max((moment(&|d| d[i].powi(4)) - 3.0 * omega / (n as f64 * (n as f64 + 2.0))).abs());
            for j in 0..n {
                if i != j {
                    worst = worst.max(
                        (moment(&|d| d[i] * d[i] * d[j] * d[j])
                            - omega / (n as f64 * (n as f64 + 2.0)))
                        .abs(),
                    );
                    worst = worst.max(moment(&|d| d[i] * d[j]).abs());
                }
            }
        }
        worst
    }
}
