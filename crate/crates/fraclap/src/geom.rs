//! Points of `R^n` (n ≤ 3) with cached norm, and unit boundary directions.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// A point of `R^n`, `n ∈ {1,2,3}`. Coordinates beyond the dimension are zero
/// and the Euclidean norm is cached at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    coords: [f64; 3],
    dim: usize,
    norm: f64,
}

impl Point {
    pub fn new(coords: &[f64]) -> Result<Self> {
        if coords.is_empty() || coords.len() > 3 {
            return Err(Error::Domain(format!(
                "point dimension must be 1..=3, got {}",
                coords.len()
            )));
        }
        let mut c = [0.0; 3];
        c[..coords.len()].copy_from_slice(coords);
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("point coordinates must be finite".into()));
        }
        Ok(Self {
            coords: c,
            dim: coords.len(),
            norm: norm3(&c),
        })
    }

    /// `t·e₁` in dimension `dim`.
    pub fn on_axis(t: f64, dim: usize) -> Self {
        let mut c = [0.0; 3];
        c[0] = t;
        Self {
            coords: c,
            dim,
            norm: t.abs(),
        }
    }

    pub fn origin(dim: usize) -> Self {
        Self {
            coords: [0.0; 3],
            dim,
            norm: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim]
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Signed distance convention for the unit ball: `1 − |x|` (positive
    /// inside, negative outside). Callers wanting dist(x, ∂B) take `abs`.
    pub fn delta(&self) -> f64 {
        1.0 - self.norm
    }

    pub fn dist(&self, other: &Point) -> f64 {
        let mut acc = 0.0;
        for i in 0..3 {
            let d = self.coords[i] - other.coords[i];
            acc += d * d;
        }
        acc.sqrt()
    }

    pub fn add_scaled(&self, dir: &[f64; 3], t: f64) -> Point {
        let mut c = [0.0; 3];
        for i in 0..3 {
            c[i] = self.coords[i] + t * dir[i];
        }
        Point {
            coords: c,
            dim: self.dim,
            norm: norm3(&c),
        }
    }
}

fn norm3(c: &[f64; 3]) -> f64 {
    (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
}

/// A unit vector of `∂B`. Construction checks `|θ| = 1` to 1e−14 after an
/// explicit normalization step, so the invariant is exact up to rounding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    direction: [f64; 3],
    dim: usize,
}

impl BoundaryPoint {
    pub fn new(direction: &[f64]) -> Result<Self> {
        let p = Point::new(direction)?;
        if p.norm() == 0.0 {
            return Err(Error::Domain("boundary direction must be nonzero".into()));
        }
        let mut d = [0.0; 3];
        for i in 0..3 {
            d[i] = p.coords[i] / p.norm();
        }
        debug_assert!((norm3(&d) - 1.0).abs() < 1e-14);
        Ok(Self {
            direction: d,
            dim: p.dim(),
        })
    }

    pub fn axis(dim: usize) -> Self {
        let mut d = [0.0; 3];
        d[0] = 1.0;
        Self { direction: d, dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction[..self.dim]
    }

    pub fn as_point(&self) -> Point {
        Point {
            coords: self.direction,
            dim: self.dim,
            norm: 1.0,
        }
    }

    /// The interior point at distance `delta` from the boundary along the
    /// inward ray to this direction.
    pub fn inward(&self, delta: f64) -> Point {
        let t = 1.0 - delta;
        let mut c = [0.0; 3];
        for i in 0..3 {
            c[i] = t * self.direction[i];
        }
        Point {
            coords: c,
            dim: self.dim,
            norm: t.abs(),
        }
    }
}
