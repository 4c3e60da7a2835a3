//! Closed-form evaluators for the explicit kernels of the unit ball.
//!
//! With `c = c(n,s)`, `q = |x−y|` and `δ(x) = 1−|x|` the kernels are
//!
//! - exit kernel: `η_r(y) = c r^{2s} / (|y|^n (|y|²−r²)^s)` on `|y| > r`,
//!   a probability density;
//! - fundamental solution (only for `n > 2s`):
//!   `Γ_s(x) = Γ((n−2s)/2) / (2^{2s} π^{n/2} Γ(s)) · |x|^{2s−n}`, taken with
//!   the positive (Riesz) sign so that the Green function `Γ_s − H` is
//!   nonnegative;
//! - Poisson kernel: `P_B(x,y) = c/q^n · ((1−|x|²)/(|y|²−1))^s`, the density
//!   of the exit distribution of the 2s-stable process from `B`;
//! - Martin kernel: `M_B(x,θ) = (π c / 2) · (1−|x|²)^s / q^n`. The
//!   normalization is fixed by the weighted trace: with it, the Martin
//!   solution with datum `h` has trace `h`, and the singular s-harmonic
//!   function `u_{1−s}` has trace `c(n,1/2)`. The raw boundary limit of the
//!   Green function is a different multiple of the same kernel; see
//!   [`martin_green_limit_ratio`].
//! - torsion function: `φ(x) = gamma_coeff · (R²−|x|²)^s`, the solution of
//!   `(−Δ)^s φ = 1` in `B_R` vanishing outside;
//! - Green function (closed form, all regimes including `n ≤ 2s`):
//!   `G_B(x,y) = κ q^{2s−n} ∫_0^{r₀} t^{s−1}(1+t)^{−n/2} dt` with
//!   `r₀ = (1−|x|²)(1−|y|²)/q²` and `κ = Γ(n/2)/(4^s π^{n/2} Γ(s)²)`;
//!   for `n > 2s` it is also computed as `Γ_s − H` with `H` obtained by
//!   exterior quadrature of `Γ_s` against the Poisson kernel, and the two
//!   routes are cross-checked in the tests;
//! - the explosive s-harmonic family `u_σ`, `0 < σ ≤ 1−s`.

use crate::geom::{BoundaryPoint, Point};
use crate::quad::{
    self, exterior_radial_rule, frac_laplacian_pv, sphere_crossings, End, ExteriorProfile,
    KernelProfile, PvField, PvOptions, PvTail, QuadOpts, SphereRule,
};
use crate::special::{c_const, gamma_unchecked, FracParams};
use crate::{Error, Result};
use std::f64::consts::PI;

pub use crate::quad::pv::sphere_crossings as ray_sphere_crossings;

/// Exit kernel `η_r` of the ball `B_r`. Zero on `|y| ≤ r` (the closed ball),
/// integrable across the `(|y|²−r²)^{−s}` edge.
pub fn eta_r(p: &FracParams, r: f64, y: &Point) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("eta_r needs r > 0, got {r}")));
    }
    let rho = y.norm();
    if rho <= r {
        return Ok(0.0);
    }
    let c = p.kernel_const_c();
    Ok(c * r.powf(2.0 * p.s()) / (rho.powi(p.n() as i32) * (rho * rho - r * r).powf(p.s())))
}

/// Radial profile of `η_r` at radius `ρ` (used by the radial rules).
pub fn eta_r_radial(p: &FracParams, r: f64, rho: f64) -> f64 {
    if rho <= r {
        return 0.0;
    }
    p.kernel_const_c() * r.powf(2.0 * p.s())
        / (rho.powi(p.n() as i32) * (rho * rho - r * r).powf(p.s()))
}

/// Coefficient of the fundamental solution `Γ_s(x) = riesz_const · |x|^{2s−n}`.
pub fn riesz_const(p: &FracParams) -> Result<f64> {
    let n = p.n() as f64;
    let s = p.s();
    if n <= 2.0 * s {
        return Err(Error::UnsupportedRegime(format!(
            "fundamental solution requires n > 2s (n = {n}, s = {s}); \
             use ball_green, which does not factor through Γ_s"
        )));
    }
    Ok(gamma_unchecked((n - 2.0 * s) / 2.0)
        / ((2f64).powf(2.0 * s) * PI.powf(n / 2.0) * gamma_unchecked(s)))
}

/// `Γ_s(x)`, positive Riesz convention. Errors for `x = 0` or `n ≤ 2s`.
pub fn fundamental_solution(p: &FracParams, x: &Point) -> Result<f64> {
    if x.norm() == 0.0 {
        return Err(Error::Domain("fundamental solution is singular at 0".into()));
    }
    Ok(riesz_const(p)? * x.norm().powf(2.0 * p.s() - p.n() as f64))
}

/// Poisson kernel of the unit ball, `|x| < 1 < |y|`.
pub fn ball_poisson(p: &FracParams, x: &Point, y: &Point) -> Result<f64> {
    if x.norm() >= 1.0 {
        return Err(Error::Domain(format!("Poisson kernel needs |x| < 1, got {}", x.norm())));
    }
    if y.norm() <= 1.0 {
        return Err(Error::Domain(format!("Poisson kernel needs |y| > 1, got {}", y.norm())));
    }
    let q = x.dist(y);
    Ok(ball_poisson_chord(p, x.norm(), y.norm(), q))
}

/// Poisson kernel through the chord length `q = |x−y|`, for radial reduction.
pub fn ball_poisson_chord(p: &FracParams, xnorm: f64, ynorm: f64, q: f64) -> f64 {
    let s = p.s();
    p.kernel_const_c() / q.powi(p.n() as i32)
        * ((1.0 - xnorm * xnorm) / (ynorm * ynorm - 1.0)).powf(s)
}

/// Trace-consistent Martin normalization `(π/2)·c(n,s)`.
pub fn martin_normalization(p: &FracParams) -> f64 {
    0.5 * PI * p.kernel_const_c()
}

/// Ratio `lim_{y→θ} G_B(x,y)/δ(y)^s  ÷  M_B(x,θ) = 2^{1−s} Γ(1−s)/(π Γ(1+s))`,
/// independent of the dimension. The Green limit and the trace-normalized
/// Martin kernel are proportional, not equal.
pub fn martin_green_limit_ratio(p: &FracParams) -> f64 {
    let s = p.s();
    (2f64).powf(1.0 - s) * gamma_unchecked(1.0 - s) / (PI * gamma_unchecked(1.0 + s))
}

/// Martin kernel `M_B(x,θ)`, `|x| < 1`, `θ ∈ ∂B`.
pub fn ball_martin(p: &FracParams, x: &Point, th: &BoundaryPoint) -> Result<f64> {
    if x.norm() >= 1.0 {
        return Err(Error::Domain(format!("Martin kernel needs |x| < 1, got {}", x.norm())));
    }
    let q = x.dist(&th.as_point());
    Ok(ball_martin_chord(p, x.norm(), q))
}

pub fn ball_martin_chord(p: &FracParams, xnorm: f64, q: f64) -> f64 {
    martin_normalization(p) * (1.0 - xnorm * xnorm).powf(p.s()) / q.powi(p.n() as i32)
}

/// Torsion function of `B_R`: `gamma_coeff (R²−|x|²)^s` inside, 0 outside;
/// its fractional Laplacian is identically 1 in `B_R` for every `R`.
pub fn torsion(p: &FracParams, radius: f64, x: &Point) -> f64 {
    torsion_radial(p, radius, x.norm())
}

pub fn torsion_radial(p: &FracParams, radius: f64, rho: f64) -> f64 {
    if rho >= radius {
        0.0
    } else {
        p.gamma_coeff() * (radius * radius - rho * rho).powf(p.s())
    }
}

/// The explosive s-harmonic family. For `0 < σ < 1−s`:
/// `c(n,s)(1−|x|²)^{−σ}` inside, `c(n,s+σ)(|x|²−1)^{−σ}` outside; at the
/// endpoint `σ = 1−s` the exterior branch collapses to zero. On `∂B` the
/// value is the `+∞` sentinel, never an error.
pub fn explicit_usigma(p: &FracParams, sigma: f64, x: &Point) -> Result<f64> {
    let s = p.s();
    if !(sigma > 0.0 && sigma <= 1.0 - s) {
        return Err(Error::Domain(format!(
            "u_sigma requires 0 < σ ≤ 1−s, got σ = {sigma} with s = {s}"
        )));
    }
    Ok(usigma_radial(p, sigma, x.norm()))
}

pub fn usigma_radial(p: &FracParams, sigma: f64, rho: f64) -> f64 {
    let s = p.s();
    if rho < 1.0 {
        c_const(p.n(), s) / (1.0 - rho * rho).powf(sigma)
    } else if rho > 1.0 {
        if (1.0 - s - sigma).abs() < 1e-14 {
            0.0
        } else {
            c_const(p.n(), s + sigma) / (rho * rho - 1.0).powf(sigma)
        }
    } else {
        f64::INFINITY
    }
}

/// Green function of the unit ball, closed form
/// `κ |x−y|^{2s−n} ∫_0^{r₀} t^{s−1}(1+t)^{−n/2} dt`, valid in every regime
/// including `n ≤ 2s` where the Γ_s route is unavailable.
#[derive(Debug, Clone)]
pub struct GreenKernel {
    p: FracParams,
    kappa: f64,
    // cached F(3/2) for the large-argument split of the incomplete integral
    f_at_split: f64,
}

const GREEN_SPLIT: f64 = 1.5;

impl GreenKernel {
    pub fn new(p: &FracParams) -> Self {
        let n = p.n() as f64;
        let s = p.s();
        let kappa = gamma_unchecked(n / 2.0)
            / ((4f64).powf(s) * PI.powf(n / 2.0) * gamma_unchecked(s) * gamma_unchecked(s));
        let mut g = Self { p: *p, kappa, f_at_split: 0.0 };
        g.f_at_split = g.incomplete_small(GREEN_SPLIT);
        g
    }

    pub fn params(&self) -> &FracParams {
        &self.p
    }

    /// `G_B(x,y)`; zero if either point is outside the closed ball, an error
    /// on the diagonal.
    pub fn eval(&self, x: &Point, y: &Point) -> Result<f64> {
        if x.norm() >= 1.0 || y.norm() >= 1.0 {
            return Ok(0.0);
        }
        let q = x.dist(y);
        if q == 0.0 {
            return Err(Error::Domain("Green function is singular on the diagonal".into()));
        }
        Ok(self.eval_chord(x.norm(), y.norm(), q))
    }

    /// `G_B` through `(|x|, |y|, |x−y|)`; assumes both radii < 1 and q > 0.
    pub fn eval_chord(&self, xnorm: f64, ynorm: f64, q: f64) -> f64 {
        let s = self.p.s();
        let n = self.p.n() as f64;
        let r0 = (1.0 - xnorm * xnorm) * (1.0 - ynorm * ynorm) / (q * q);
        self.kappa * q.powf(2.0 * s - n) * self.incomplete(r0)
    }

    /// `∫_0^{r0} t^{s−1}(1+t)^{−n/2} dt`.
    pub fn incomplete(&self, r0: f64) -> f64 {
        if r0 <= 0.0 {
            return 0.0;
        }
        let n = self.p.n();
        let s = self.p.s();
        if n == 1 && (s - 0.5).abs() < 1e-13 {
            // ∫ t^{-1/2}(1+t)^{-1/2} dt = 2 asinh(√t)
            return 2.0 * r0.sqrt().asinh();
        }
        if r0 <= GREEN_SPLIT {
            self.incomplete_small(r0)
        } else {
            self.f_at_split + self.incomplete_tail(r0)
        }
    }

    /// Ascending series at 0 (plus a short Gauss–Legendre bridge for
    /// `r0 ∈ (3/4, 3/2]`): `Σ_k binom(−n/2, k) r0^{s+k}/(s+k)`.
    fn incomplete_small(&self, r0: f64) -> f64 {
        let n2 = 0.5 * self.p.n() as f64;
        let s = self.p.s();
        let cap = r0.min(0.75);
        let mut coeff = 1.0;
        let mut acc = 0.0;
        let mut power = cap.powf(s);
        for k in 0..200 {
            let kf = k as f64;
            let term = coeff * power / (s + kf);
            acc += term;
            if term.abs() < 1e-17 * acc.abs().max(1e-300) {
                break;
            }
            coeff *= -(n2 + kf) / (kf + 1.0);
            power *= cap;
        }
        if r0 > cap {
            let gl = quad::GaussLegendre::new(24);
            acc += gl.integrate(cap, r0, |t| t.powf(s - 1.0) * (1.0 + t).powf(-n2));
        }
        acc
    }

    /// `∫_{3/2}^{r0}` by the descending series `t^{s−1−n/2}(1+1/t)^{−n/2}`.
    fn incomplete_tail(&self, r0: f64) -> f64 {
        let n2 = 0.5 * self.p.n() as f64;
        let s = self.p.s();
        let mut coeff = 1.0;
        let mut acc = 0.0;
        for k in 0..200 {
            let kf = k as f64;
            let e = s - n2 - kf;
            // ∫_a^b t^{e−1} dt with a = 3/2, b = r0; e never hits 0 here
            // (n = 2s is special-cased upstream), but keep it stable anyway.
            let piece = if e.abs() > 1e-9 {
                (r0.powf(e) - GREEN_SPLIT.powf(e)) / e
            } else {
                (r0 / GREEN_SPLIT).ln()
            };
            let term = coeff * piece;
            acc += term;
            if term.abs() < 1e-17 * acc.abs().max(1e-300) && k > 2 {
                break;
            }
            coeff *= -(n2 + kf) / (kf + 1.0);
        }
        acc
    }
}

/// Convenience wrapper constructing the kernel per call.
pub fn ball_green(p: &FracParams, x: &Point, y: &Point) -> Result<f64> {
    GreenKernel::new(p).eval(x, y)
}

/// The Γ_s − H route (`n > 2s` only): `H(x,y)` is the s-harmonic extension
/// of `Γ_s(y−·)` from the exterior, computed by exterior quadrature of
/// `Γ_s` against the Poisson kernel.
pub fn ball_green_via_fundamental(
    p: &FracParams,
    x: &Point,
    y: &Point,
    opts: &QuadOpts,
) -> Result<f64> {
    let rc = riesz_const(p)?;
    if x.norm() >= 1.0 || y.norm() >= 1.0 {
        return Ok(0.0);
    }
    let q = x.dist(y);
    if q == 0.0 {
        return Err(Error::Domain("Green function is singular on the diagonal".into()));
    }
    let n = p.n();
    let s = p.s();
    let delta = (1.0 - x.norm()).min(1.0 - y.norm());
    let sphere = match n {
        1 => SphereRule::standard(1),
        2 => SphereRule::new(2, ((40.0 / delta) as usize).clamp(128, 4096)),
        _ => SphereRule::new(3, ((20.0 / delta) as usize).clamp(64, 512)),
    };
    let profile = ExteriorProfile::new(s, n as f64 + 2.0 * s).with_feature(delta);
    let rule = exterior_radial_rule(n, 1.0, &profile, opts)?;
    let h = sphere.integrate(|theta| {
        rule.integrate(|rho| {
            let z = Point::origin(p.dim()).add_scaled(
                &[
                    theta.coords()[0] * rho,
                    theta.coords().get(1).copied().unwrap_or(0.0) * rho,
                    theta.coords().get(2).copied().unwrap_or(0.0) * rho,
                ],
                1.0,
            );
            let pois = ball_poisson_chord(p, x.norm(), rho, x.dist(&z));
            let gamma_s = rc * y.dist(&z).powf(2.0 * s - n as f64);
            pois * gamma_s
        })
    });
    Ok(rc * q.powf(2.0 * s - n as f64) - h)
}

// ---------------------------------------------------------------------------
// PV-evaluable fields built from the kernels
// ---------------------------------------------------------------------------

/// Torsion function of `B_R` as a globally defined field.
pub struct TorsionField {
    pub p: FracParams,
    pub radius: f64,
}

impl PvField for TorsionField {
    fn eval(&self, x: &Point) -> f64 {
        torsion(&self.p, self.radius, x)
    }

    fn ray_breaks(&self, x: &Point, theta: &[f64; 3], t_max: f64) -> Vec<(f64, End, End)> {
        sphere_crossings(x, theta, self.radius)
            .into_iter()
            .filter(|t| *t <= t_max)
            .map(|t| (t, End::Power(self.p.s()), End::Power(self.p.s())))
            .collect()
    }

    fn tail(&self) -> PvTail {
        PvTail::Zero
    }
}

/// `u_σ` as a globally defined field (explodes on `∂B`).
pub struct USigmaField {
    pub p: FracParams,
    pub sigma: f64,
}

impl PvField for USigmaField {
    fn eval(&self, x: &Point) -> f64 {
        usigma_radial(&self.p, self.sigma, x.norm())
    }

    fn ray_breaks(&self, x: &Point, theta: &[f64; 3], t_max: f64) -> Vec<(f64, End, End)> {
        sphere_crossings(x, theta, 1.0)
            .into_iter()
            .filter(|t| *t <= t_max)
            .map(|t| (t, End::Power(-self.sigma), End::Power(-self.sigma)))
            .collect()
    }

    fn tail(&self) -> PvTail {
        PvTail::Algebraic
    }
}

/// Fixed C^∞ bump supported in `B_{1/2}`, used by the identity suite.
pub struct BumpField {
    pub dim: usize,
}

impl BumpField {
    pub fn value(&self, x: &Point) -> f64 {
        let u = 2.0 * x.norm();
        if u >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - u * u)).exp()
        }
    }
}

impl PvField for BumpField {
    fn eval(&self, x: &Point) -> f64 {
        self.value(x)
    }

    fn ray_breaks(&self, x: &Point, theta: &[f64; 3], t_max: f64) -> Vec<(f64, End, End)> {
        // C^∞ across the support edge: split cells there, no singular weight
        sphere_crossings(x, theta, 0.5)
            .into_iter()
            .filter(|t| *t <= t_max)
            .map(|t| (t, End::Sharp(0.05), End::Sharp(0.05)))
            .collect()
    }

    fn tail(&self) -> PvTail {
        PvTail::Zero
    }
}

/// `(−Δ)^s` of the torsion field by split PV quadrature; equals 1 inside
/// `B_R` up to quadrature error. Exposed for the identity suite.
pub fn frac_laplacian_of_torsion(p: &FracParams, radius: f64, x: &Point) -> Result<f64> {
    let field = TorsionField { p: *p, radius };
    frac_laplacian_pv(p, &field, x, &PvOptions::default())
}

/// Sphere-mean profile descriptor for the Green kernel (analytic in the
/// chord on (0, q_max]; the near-diagonal scale is handled by the rules).
pub fn green_profile() -> KernelProfile {
    KernelProfile::smooth()
}
