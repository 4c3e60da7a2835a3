//! The three-datum linear Dirichlet problem on the unit ball:
//!
//! `(−Δ)^s u = f` in `B`, `u = g` on `CB`, `Eu = h` on `∂B`,
//!
//! solved pointwise by the representation formula: a Green potential for the
//! interior datum, an exterior Poisson integral for `g`, and a Martin
//! integral for the singular boundary layer `h`. All built-in data are
//! radial (the explosive model data of the theory are), so every evaluation
//! reduces to nested 1-D quadratures through spherical means; boundary data
//! `h` may be non-radial and go through sphere rules directly.
//!
//! The weighted trace `Eu(θ) = lim_{x→θ} u(x) / ∫_{∂B} M(x,θ') dH(θ')`
//! (equivalently `δ^{1−s}u / L` with the bounded normalizer
//! `L = δ^{1−s}∫M dH`) is estimated from ray samples by Aitken
//! extrapolation of the geometric sequence of ratios.

use crate::geom::{BoundaryPoint, Point};
use crate::kernels::{self, GreenKernel};
use crate::quad::{
    exterior_radial_rule, sphere_mean_rule, End, ExteriorProfile, KernelProfile, LineRule, Piece,
    QuadOpts, SphereRule,
};
use crate::special::FracParams;
use crate::{DatumEnd, Error, Result};
use serde::{Deserialize, Serialize};

// ---------------------------------------------------------------------------
// Data
// ---------------------------------------------------------------------------

/// Interior right-hand side `f` on `B` (radial).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RhsDatum {
    Zero,
    Const { value: f64 },
    /// `f(y) = δ(y)^{−β}`, admissible for `β < 1+s`.
    DeltaPow { beta: f64 },
    /// Collar approximation of a constant boundary datum `h`:
    /// `f_r(y) = h·φ(δ(y)/r)/K_r` with a fixed C^∞ bump φ and
    /// `K_r = ∫_0^r φ(ρ/r) ρ^s dρ`.
    HApprox { level: f64, width: f64 },
}

impl RhsDatum {
    pub fn is_zero(&self) -> bool {
        matches!(self, RhsDatum::Zero)
    }

    /// Declared boundary exponent β (f ≍ δ^{−β}).
    pub fn boundary_exponent(&self) -> f64 {
        match self {
            RhsDatum::Zero | RhsDatum::Const { .. } | RhsDatum::HApprox { .. } => 0.0,
            RhsDatum::DeltaPow { beta } => *beta,
        }
    }

    pub fn validate(&self, p: &FracParams) -> Result<()> {
        if let RhsDatum::DeltaPow { beta } = self {
            if *beta >= 1.0 + p.s() {
                return Err(Error::NonIntegrable { beta: *beta, limit: 1.0 + p.s() });
            }
        }
        if let RhsDatum::HApprox { width, .. } = self {
            if !(*width > 0.0 && *width < 1.0) {
                return Err(Error::Domain(format!("collar width must be in (0,1), got {width}")));
            }
        }
        Ok(())
    }

    pub fn eval_radial(&self, p: &FracParams, rho: f64) -> f64 {
        match self {
            RhsDatum::Zero => 0.0,
            RhsDatum::Const { value } => *value,
            RhsDatum::DeltaPow { beta } => (1.0 - rho).powf(-beta),
            RhsDatum::HApprox { level, width } => {
                let delta = 1.0 - rho;
                if delta >= *width {
                    0.0
                } else {
                    level * smooth_bump(delta / width) / h_collar_mass(p, *width)
                }
            }
        }
    }
}

/// The fixed C^∞ bump: `exp(1 − 1/(1−z²))` on `[0,1)`, with `φ(0) = 1`.
pub fn smooth_bump(z: f64) -> f64 {
    if z.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - z * z)).exp()
    }
}

/// Collar normalization `K_r = ν(s)·∫_0^r φ(ρ/r) ρ^s dρ`, where
/// `ν(s) = lim G/δ^s ÷ M` converts the Green boundary density to the
/// trace-normalized Martin kernel — with it, the collar solutions converge
/// to the Martin solution of the same datum.
pub fn h_collar_mass(p: &FracParams, width: f64) -> f64 {
    let s = p.s();
    let rule = LineRule::from_pieces(
        &[Piece::new(0.0, width, End::Power(s), End::Smooth)],
        &QuadOpts::default(),
    )
    .expect("collar rule");
    kernels::martin_green_limit_ratio(p) * rule.integrate(|rho| smooth_bump(rho / width) * rho.powf(s))
}

/// Exterior datum `g` on `CB` (radial).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExteriorDatum {
    Zero,
    Const { value: f64 },
    /// `g_σ(y) = c(n, s+σ)(|y|²−1)^{−σ}`, the datum of the explicit family.
    SigmaKernel { sigma: f64 },
    /// `g(y) = δ(y)^{−σ} = (|y|−1)^{−σ}`.
    DeltaPow { sigma: f64 },
    /// Indicator of the annulus `inner < |y| < outer`.
    Annulus { inner: f64, outer: f64 },
    /// Pointwise truncation `min(g, cap)` of another datum.
    Truncated { inner: Box<ExteriorDatum>, cap: f64 },
}

impl ExteriorDatum {
    pub fn truncated(self, cap: f64) -> Self {
        ExteriorDatum::Truncated { inner: Box::new(self), cap }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ExteriorDatum::Zero)
    }

    /// Declared boundary explosion exponent σ (g ≍ δ^{−σ} near ∂B).
    pub fn boundary_exponent(&self) -> f64 {
        match self {
            ExteriorDatum::Zero | ExteriorDatum::Const { .. } | ExteriorDatum::Annulus { .. } => 0.0,
            ExteriorDatum::SigmaKernel { sigma } | ExteriorDatum::DeltaPow { sigma } => *sigma,
            ExteriorDatum::Truncated { .. } => 0.0,
        }
    }

    /// Declared decay exponent at infinity (g ≍ |y|^{−d}).
    pub fn decay_exponent(&self) -> f64 {
        match self {
            ExteriorDatum::Zero
            | ExteriorDatum::Const { .. }
            | ExteriorDatum::Annulus { .. }
            | ExteriorDatum::Truncated { .. } => 0.0,
            ExteriorDatum::SigmaKernel { sigma } => 2.0 * sigma,
            ExteriorDatum::DeltaPow { sigma } => *sigma,
        }
    }

    pub fn eval_radial(&self, p: &FracParams, rho: f64) -> f64 {
        match self {
            ExteriorDatum::Zero => 0.0,
            ExteriorDatum::Const { value } => *value,
            ExteriorDatum::SigmaKernel { sigma } => kernels::usigma_radial(p, *sigma, rho),
            ExteriorDatum::DeltaPow { sigma } => (rho - 1.0).powf(-sigma),
            ExteriorDatum::Annulus { inner, outer } => {
                if rho > *inner && rho < *outer {
                    1.0
                } else {
                    0.0
                }
            }
            ExteriorDatum::Truncated { inner, cap } => inner.eval_radial(p, rho).min(*cap),
        }
    }

    /// Radii at which the profile kinks (support edges, truncation radius).
    pub fn breaks(&self, p: &FracParams) -> Vec<(f64, End, End)> {
        match self {
            ExteriorDatum::Annulus { inner, outer } => vec![
                (*inner, End::Smooth, End::Smooth),
                (*outer, End::Smooth, End::Smooth),
            ],
            ExteriorDatum::Truncated { inner, cap } => {
                let mut b = inner.breaks(p);
                if let Some(r) = inner.truncation_radius(p, *cap) {
                    b.push((r, End::Integrable, End::Integrable));
                }
                b
            }
            _ => Vec::new(),
        }
    }

    /// Radius where an exploding datum crosses the cap.
    fn truncation_radius(&self, p: &FracParams, cap: f64) -> Option<f64> {
        match self {
            ExteriorDatum::SigmaKernel { sigma } => {
                let c = crate::special::c_const(p.n(), p.s() + sigma);
                if c <= 0.0 || cap <= 0.0 {
                    return None;
                }
                let t = (c / cap).powf(1.0 / sigma);
                Some((1.0 + t).sqrt())
            }
            ExteriorDatum::DeltaPow { sigma } => Some(1.0 + cap.powf(-1.0 / sigma)),
            _ => None,
        }
    }

    /// Admissibility per the Poisson-kernel weight: σ + s < 1 at the
    /// boundary, integrable `|g| δ^{−n−2s}` at infinity.
    pub fn validate(&self, p: &FracParams) -> Result<()> {
        let sigma = self.boundary_exponent();
        if sigma + p.s() >= 1.0 {
            return Err(Error::Inadmissible {
                at: DatumEnd::Boundary,
                detail: format!(
                    "declared boundary exponent σ = {sigma} with s = {} has σ + s ≥ 1",
                    p.s()
                ),
            });
        }
        if let ExteriorDatum::SigmaKernel { sigma } = self {
            if !(*sigma > 0.0 && *sigma <= 1.0 - p.s()) {
                return Err(Error::Domain(format!(
                    "sigma-kernel datum needs 0 < σ ≤ 1−s, got σ = {sigma}"
                )));
            }
        }
        if let ExteriorDatum::Annulus { inner, outer } = self {
            if !(1.0 <= *inner && inner < outer) {
                return Err(Error::Domain(format!(
                    "annulus needs 1 ≤ inner < outer, got [{inner}, {outer}]"
                )));
            }
        }
        Ok(())
    }
}

/// Continuous (or atomic) boundary datum `h` on `∂B`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BoundaryDatum {
    Zero,
    Const { value: f64 },
    /// `h(θ) = a0 + a1·θ₁`.
    AxisAffine { a0: f64, a1: f64 },
    /// Point masses `ν = Σ wᵢ δ_{θᵢ}`: the solution is a direct Martin sum.
    PointMasses { directions: Vec<Vec<f64>>, weights: Vec<f64> },
}

impl BoundaryDatum {
    pub fn is_zero(&self) -> bool {
        matches!(self, BoundaryDatum::Zero)
    }

    pub fn eval(&self, theta: &Point) -> f64 {
        match self {
            BoundaryDatum::Zero => 0.0,
            BoundaryDatum::Const { value } => *value,
            BoundaryDatum::AxisAffine { a0, a1 } => a0 + a1 * theta.coords()[0],
            BoundaryDatum::PointMasses { .. } => f64::NAN, // atomic, not a function
        }
    }
}

/// The `(f, g, h)` triple with validation.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DirichletData {
    pub f: RhsDatum,
    pub g: ExteriorDatum,
    pub h: BoundaryDatum,
}

impl DirichletData {
    pub fn new(f: RhsDatum, g: ExteriorDatum, h: BoundaryDatum) -> Self {
        Self { f, g, h }
    }

    pub fn validate(&self, p: &FracParams) -> Result<()> {
        self.f.validate(p)?;
        self.g.validate(p)
    }
}

/// Where a field's values came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Deterministic,
    MonteCarlo,
}

/// Evaluation points with boundary distances and computed values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionField {
    pub params: FracParams,
    pub description: String,
    pub points: Vec<Point>,
    pub deltas: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Option<Vec<f64>>,
    pub provenance: Provenance,
}

impl SolutionField {
    pub fn deterministic(p: &FracParams, description: &str, points: Vec<Point>, values: Vec<f64>) -> Self {
        let deltas = points.iter().map(|x| x.delta()).collect();
        Self {
            params: *p,
            description: description.to_string(),
            points,
            deltas,
            values,
            stderr: None,
            provenance: Provenance::Deterministic,
        }
    }
}

// ---------------------------------------------------------------------------
// Kernels reduced over the sphere
// ---------------------------------------------------------------------------

/// `∫_{S^{n−1}} |t·e₁ − ρθ|^{−n} dH(θ)`, the angular factor shared by the
/// Poisson and Martin kernels.
pub fn chord_inverse_power_mean(p: &FracParams, t: f64, rho: f64, opts: &QuadOpts) -> Result<f64> {
    let rule = sphere_mean_rule(p.n(), t, rho, &KernelProfile::smooth(), opts)?;
    Ok(rule.integrate(|q| q.powi(-(p.n() as i32))))
}

/// `∫_{S^{n−1}} P_B(x, ρθ) dH(θ)` for `|x| = t < 1 < ρ`.
pub fn poisson_sphere_mean(p: &FracParams, t: f64, rho: f64, opts: &QuadOpts) -> Result<f64> {
    let s = p.s();
    let factor = p.kernel_const_c() * ((1.0 - t * t) / (rho * rho - 1.0)).powf(s);
    Ok(factor * chord_inverse_power_mean(p, t, rho, opts)?)
}

/// `∫_{∂B} M_B(x, θ) dH(θ)`; rotation-invariant, so it only needs `|x|`.
pub fn martin_mass(p: &FracParams, t: f64, opts: &QuadOpts) -> Result<f64> {
    let factor = kernels::martin_normalization(p) * (1.0 - t * t).powf(p.s());
    Ok(factor * chord_inverse_power_mean(p, t, 1.0, opts)?)
}

/// Angular mean of the Green function, `∫_{S^{n−1}} G_B(t·e₁, rθ) dH(θ)`.
pub fn green_sphere_mean(g: &GreenKernel, t: f64, r: f64, opts: &QuadOpts) -> Result<f64> {
    let p = g.params();
    let rule = sphere_mean_rule(p.n(), t, r, &KernelProfile::smooth(), opts)?;
    Ok(rule.integrate(|q| g.eval_chord(t, r, q)))
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Weighted mass `∫_{CB} |g| · min(δ^{−s}, δ^{−n−2s})` when the declared
/// exponents make it finite; a structured error naming the failing end
/// otherwise.
pub fn check_admissible_g(p: &FracParams, g: &ExteriorDatum, opts: &QuadOpts) -> Result<f64> {
    g.validate(p)?;
    if g.is_zero() {
        return Ok(0.0);
    }
    let n = p.n();
    let s = p.s();
    // min switches from δ^{−s} to δ^{−n−2s} at δ = 1, i.e. |y| = 2
    let mut profile = ExteriorProfile::new(
        g.boundary_exponent() + s,
        n as f64 + 2.0 * s + g.decay_exponent(),
    )
    .with_break(2.0, End::Smooth, End::Smooth);
    for b in g.breaks(p) {
        profile = profile.with_break(b.0, b.1, b.2);
    }
    let rule = exterior_radial_rule(n, 1.0, &profile, opts)?;
    let radial = rule.integrate(|rho| {
        let delta = rho - 1.0;
        let weight = delta.powf(-s).min(delta.powf(-(n as f64) - 2.0 * s));
        g.eval_radial(p, rho).abs() * weight
    });
    Ok(radial * p.omega())
}

/// Exterior rule for `∫_{CB} g(|y|) · K(x, y) dy` with the Poisson-type edge.
fn exterior_rule_for(
    p: &FracParams,
    g: &ExteriorDatum,
    x_delta: f64,
    opts: &QuadOpts,
) -> Result<LineRule> {
    let n = p.n();
    let s = p.s();
    let mut profile = ExteriorProfile::new(
        g.boundary_exponent() + s,
        n as f64 + 2.0 * s + g.decay_exponent(),
    )
    .with_feature(x_delta.max(1e-12));
    for b in g.breaks(p) {
        profile = profile.with_break(b.0, b.1, b.2);
    }
    exterior_radial_rule(n, 1.0, &profile, opts)
}

/// `u(x) = ∫_{CB} P_B(x,y) g(y) dy` for `|x| < 1`; `g(x)` outside.
pub fn harmonic_extension(p: &FracParams, g: &ExteriorDatum, x: &Point, opts: &QuadOpts) -> Result<f64> {
    g.validate(p)?;
    let t = x.norm();
    if t >= 1.0 {
        return Ok(g.eval_radial(p, t));
    }
    if g.is_zero() {
        return Ok(0.0);
    }
    let s = p.s();
    let c = p.kernel_const_c();
    let rule = exterior_rule_for(p, g, 1.0 - t, opts)?;
    let mut failure = None;
    let value = rule.integrate(|rho| {
        let gval = g.eval_radial(p, rho);
        if gval == 0.0 {
            return 0.0;
        }
        let factor = c * ((1.0 - t * t) / (rho * rho - 1.0)).powf(s);
        match chord_inverse_power_mean(p, t, rho, opts) {
            Ok(mean) => gval * factor * mean,
            Err(e) => {
                failure = Some(e);
                0.0
            }
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

/// `u(x) = ∫_{∂B} M_B(x,θ) h(θ) dH(θ)` (or the atomic sum for point
/// masses). Radial and axis-affine data reduce to chord integrals at any
/// radius; other combinations go through a δ-adaptive sphere rule.
pub fn martin_solution(p: &FracParams, h: &BoundaryDatum, x: &Point, opts: &QuadOpts) -> Result<f64> {
    if x.norm() >= 1.0 {
        return Err(Error::Domain(format!(
            "Martin solution is defined inside the ball, got |x| = {}",
            x.norm()
        )));
    }
    let t = x.norm();
    match h {
        BoundaryDatum::Zero => Ok(0.0),
        BoundaryDatum::Const { value } => Ok(value * martin_mass(p, t, opts)?),
        BoundaryDatum::AxisAffine { a0, a1 } => {
            let on_axis = x.coords().iter().skip(1).all(|v| *v == 0.0);
            if on_axis {
                // θ₁ = (t² + 1 − q²)/(2t) is a chord function on the axis
                let factor = kernels::martin_normalization(p) * (1.0 - t * t).powf(p.s());
                if t == 0.0 {
                    // the odd part integrates to zero
                    return Ok(a0 * martin_mass(p, 0.0, opts)?);
                }
                let sign = if x.coords()[0] >= 0.0 { 1.0 } else { -1.0 };
                let rule = sphere_mean_rule(p.n(), t, 1.0, &KernelProfile::smooth(), opts)?;
                Ok(factor
                    * rule.integrate(|q| {
                        let theta1 = sign * (t * t + 1.0 - q * q) / (2.0 * t);
                        (a0 + a1 * theta1) * q.powi(-(p.n() as i32))
                    }))
            } else {
                let res = ((40.0 / (1.0 - t)) as usize).clamp(256, 400_000);
                let sphere = SphereRule::new(p.n(), res);
                Ok(sphere.integrate(|theta| {
                    kernels::ball_martin_chord(p, t, x.dist(theta)) * h.eval(theta)
                }))
            }
        }
        BoundaryDatum::PointMasses { directions, weights } => {
            let mut acc = 0.0;
            for (d, w) in directions.iter().zip(weights) {
                let th = BoundaryPoint::new(d)?;
                acc += w * kernels::ball_martin(p, x, &th)?;
            }
            Ok(acc)
        }
    }
}

/// `u(x) = ∫_B G_B(x,y) f(y) dy` for radial `f` with declared boundary
/// exponent; refuses non-integrable data.
pub fn green_solution(p: &FracParams, f: &RhsDatum, x: &Point, opts: &QuadOpts) -> Result<f64> {
    f.validate(p)?;
    if f.is_zero() {
        return Ok(0.0);
    }
    let green = GreenKernel::new(p);
    green_solution_with(&green, f, x.norm(), opts)
}

/// Same, reusing a Green kernel (solvers hold one across many points).
pub fn green_solution_with(green: &GreenKernel, f: &RhsDatum, t: f64, opts: &QuadOpts) -> Result<f64> {
    let p = *green.params();
    f.validate(&p)?;
    if f.is_zero() || t >= 1.0 {
        return Ok(0.0);
    }
    let s = p.s();
    let beta = f.boundary_exponent();
    let mut breaks = vec![(t, End::Integrable, End::Integrable)];
    if let RhsDatum::HApprox { width, .. } = f {
        breaks.push((1.0 - width, End::Smooth, End::Smooth));
    }
    let edge = End::PowerScaled(s - beta, (1.0 - t).max(1e-12));
    let all = crate::quad::pieces_with_breaks(0.0, 1.0, End::Smooth, edge, &breaks);
    let mut rule = LineRule::from_pieces(&all, opts)?;
    rule.scale_weights(|r| r.powi(p.n() as i32 - 1));
    let mut failure = None;
    let value = rule.integrate(|r| {
        let fv = f.eval_radial(&p, r);
        if fv == 0.0 {
            return 0.0;
        }
        match green_sphere_mean(green, t, r, opts) {
            Ok(mean) => fv * mean,
            Err(e) => {
                failure = Some(e);
                0.0
            }
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

/// Superposition of the three terms on a point grid.
pub fn full_linear_solve(
    p: &FracParams,
    data: &DirichletData,
    points: &[Point],
    opts: &QuadOpts,
) -> Result<SolutionField> {
    data.validate(p)?;
    let green = GreenKernel::new(p);
    let mut values = Vec::with_capacity(points.len());
    for x in points {
        if x.norm() >= 1.0 {
            values.push(data.g.eval_radial(p, x.norm()));
            continue;
        }
        let mut v = 0.0;
        if !data.f.is_zero() {
            v += green_solution_with(&green, &data.f, x.norm(), opts)
                .map_err(|e| Error::Accuracy(format!("green term: {e}")))?;
        }
        if !data.g.is_zero() {
            v += harmonic_extension(p, &data.g, x, opts)
                .map_err(|e| Error::Accuracy(format!("exterior term: {e}")))?;
        }
        if !data.h.is_zero() {
            v += martin_solution(p, &data.h, x, opts)
                .map_err(|e| Error::Accuracy(format!("martin term: {e}")))?;
        }
        values.push(v);
    }
    Ok(SolutionField::deterministic(p, "linear solve", points.to_vec(), values))
}

// ---------------------------------------------------------------------------
// Weighted trace
// ---------------------------------------------------------------------------

/// Result of the boundary-trace extrapolation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceEstimate {
    pub value: f64,
    pub error: f64,
    /// The normalized ratios `u(x_j)/∫M(x_j)dH` along the ray.
    pub ratios: Vec<f64>,
}

/// Weighted trace from samples `u(x_j)` at boundary distances `deltas`
/// (geometric, decreasing, reaching ~1e−4). The ratio `u/∫M dH` is
/// Aitken-extrapolated; disagreement between the last two extrapolants
/// beyond 10× the final increment is a no-trace error.
pub fn weighted_trace_e(
    p: &FracParams,
    deltas: &[f64],
    values: &[f64],
    opts: &QuadOpts,
) -> Result<TraceEstimate> {
    if deltas.len() != values.len() || deltas.len() < 4 {
        return Err(Error::Domain(
            "trace needs at least 4 samples along a geometric ray".into(),
        ));
    }
    let mut ratios = Vec::with_capacity(deltas.len());
    for (d, u) in deltas.iter().zip(values) {
        if !(*d > 0.0 && *d < 1.0) {
            return Err(Error::Domain(format!("trace samples must have δ ∈ (0,1), got {d}")));
        }
        let m = martin_mass(p, 1.0 - d, opts)?;
        ratios.push(u / m);
    }
    let aitken = |r: &[f64]| -> f64 {
        let k = r.len();
        let (a, b, c) = (r[k - 3], r[k - 2], r[k - 1]);
        let denom = c - 2.0 * b + a;
        if denom == 0.0 {
            c
        } else {
            c - (c - b) * (c - b) / denom
        }
    };
    let e1 = aitken(&ratios);
    let e0 = aitken(&ratios[..ratios.len() - 1]);
    let final_inc = (ratios[ratios.len() - 1] - ratios[ratios.len() - 2]).abs();
    let scatter = (e1 - e0).abs();
    if scatter > 10.0 * final_inc + 1e-12 * e1.abs().max(1.0) {
        return Err(Error::NoTrace(format!(
            "extrapolants disagree by {scatter:.3e} against a final increment of {final_inc:.3e}"
        )));
    }
    Ok(TraceEstimate {
        value: e1,
        error: scatter.max(final_inc * 0.1),
        ratios,
    })
}

/// Evaluate a closed-form radial field along the standard trace ray and
/// extrapolate. Convenience for the explicit families.
pub fn trace_of_radial<F: Fn(f64) -> f64>(
    p: &FracParams,
    u: F,
    opts: &QuadOpts,
) -> Result<TraceEstimate> {
    let deltas = trace_ray_deltas();
    let values: Vec<f64> = deltas.iter().map(|d| u(1.0 - d)).collect();
    weighted_trace_e(p, &deltas, &values, opts)
}

/// The default geometric ray: δ from 1e−2 down to 1e−4.
pub fn trace_ray_deltas() -> Vec<f64> {
    let q = (1e-4f64 / 1e-2).powf(1.0 / 11.0);
    (0..12).map(|j| 1e-2 * q.powi(j)).collect()
}

// ---------------------------------------------------------------------------
// Large s-harmonic functions by truncation
// ---------------------------------------------------------------------------

/// Solutions `u_N` for the truncations `g_N = min(g, N)` of an exploding
/// datum, all evaluated with one shared rule per point so that the pointwise
/// monotonicity in `N` is exact.
pub fn large_harmonic_truncation(
    p: &FracParams,
    g: &ExteriorDatum,
    caps: &[f64],
    points: &[Point],
    opts: &QuadOpts,
) -> Result<Vec<SolutionField>> {
    g.validate(p)?;
    let s = p.s();
    let c = p.kernel_const_c();
    // one rule per point: edge exponent s (the truncated datum is bounded),
    // breakpoints at every truncation radius
    let mut rules = Vec::with_capacity(points.len());
    for x in points {
        let t = x.norm();
        let mut profile = ExteriorProfile::new(s, p.n() as f64 + 2.0 * s)
            .with_feature((1.0 - t).abs().max(1e-12));
        for cap in caps {
            if let Some(r) = truncation_radius_of(p, g, *cap) {
                profile = profile.with_break(r, End::Integrable, End::Integrable);
            }
        }
        for b in g.breaks(p) {
            profile = profile.with_break(b.0, b.1, b.2);
        }
        rules.push(exterior_radial_rule(p.n(), 1.0, &profile, opts)?);
    }
    let mut fields = Vec::with_capacity(caps.len());
    for cap in caps {
        let mut values = Vec::with_capacity(points.len());
        for (x, rule) in points.iter().zip(&rules) {
            let t = x.norm();
            if t >= 1.0 {
                values.push(g.eval_radial(p, t).min(*cap));
                continue;
            }
            let v = rule.integrate(|rho| {
                let gval = g.eval_radial(p, rho).min(*cap);
                if gval == 0.0 {
                    return 0.0;
                }
                let factor = c * ((1.0 - t * t) / (rho * rho - 1.0)).powf(s);
                let mean = chord_inverse_power_mean(p, t, rho, opts).expect("chord mean");
                gval * factor * mean
            });
            values.push(v);
        }
        fields.push(SolutionField::deterministic(
            p,
            &format!("truncated extension, cap {cap}"),
            points.to_vec(),
            values,
        ));
    }
    Ok(fields)
}

fn truncation_radius_of(p: &FracParams, g: &ExteriorDatum, cap: f64) -> Option<f64> {
    match g {
        ExteriorDatum::SigmaKernel { sigma } => {
            let c = crate::special::c_const(p.n(), p.s() + sigma);
            let t = (c / cap).powf(1.0 / sigma);
            Some((1.0 + t).sqrt())
        }
        ExteriorDatum::DeltaPow { sigma } => Some(1.0 + cap.powf(-1.0 / sigma)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::usigma_radial;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn p(n: u32, s: f64) -> FracParams {
        FracParams::new(n, s).unwrap()
    }

    fn opts() -> QuadOpts {
        QuadOpts::default()
    }

    #[test]
    fn extension_of_constant_is_constant() {
        for &(n, s) in &[(1u32, 0.5), (2, 0.25), (3, 0.75)] {
            let pr = p(n, s);
            let g = ExteriorDatum::Const { value: 7.0 };
            for &t in &[0.0, 0.4, 0.85] {
                let x = Point::on_axis(t, n as usize);
                let u = harmonic_extension(&pr, &g, &x, &opts()).unwrap();
                assert_relative_eq!(u, 7.0, max_relative = 1e-8);
            }
            // exterior evaluation returns the datum itself
            let out = Point::on_axis(1.7, n as usize);
            assert_eq!(harmonic_extension(&pr, &g, &out, &opts()).unwrap(), 7.0);
        }
    }

    #[test]
    fn extension_reproduces_usigma() {
        let pr = p(1, 0.5);
        let g = ExteriorDatum::SigmaKernel { sigma: 0.25 };
        for &t in &[0.0, 0.3, 0.7, 0.9] {
            let x = Point::on_axis(t, 1);
            let u = harmonic_extension(&pr, &g, &x, &opts()).unwrap();
            assert_relative_eq!(u, usigma_radial(&pr, 0.25, t), max_relative = 1e-6);
        }
        let pr = p(2, 0.25);
        let g = ExteriorDatum::SigmaKernel { sigma: 0.5 };
        for &t in &[0.0, 0.5, 0.85] {
            let x = Point::on_axis(t, 2);
            let u = harmonic_extension(&pr, &g, &x, &opts()).unwrap();
            assert_relative_eq!(u, usigma_radial(&pr, 0.5, t), max_relative = 1e-6);
        }
    }

    #[test]
    fn inadmissible_datum_is_refused_at_the_boundary() {
        let pr = p(1, 0.5);
        let g = ExteriorDatum::DeltaPow { sigma: 0.6 };
        let err = check_admissible_g(&pr, &g, &opts()).unwrap_err();
        match err {
            Error::Inadmissible { at, .. } => assert_eq!(at, DatumEnd::Boundary),
            other => panic!("expected inadmissible, got {other}"),
        }
        let x = Point::origin(1);
        assert!(harmonic_extension(&pr, &g, &x, &opts()).is_err());
    }

    #[test]
    fn admissible_mass_is_finite_and_positive() {
        let pr = p(2, 0.5);
        let m = check_admissible_g(&pr, &ExteriorDatum::Const { value: 1.0 }, &opts()).unwrap();
        assert!(m.is_finite() && m > 0.0);
        let m2 = check_admissible_g(&pr, &ExteriorDatum::SigmaKernel { sigma: 0.25 }, &opts()).unwrap();
        assert!(m2.is_finite() && m2 > 0.0);
    }

    #[test]
    fn annulus_extension_at_center_is_eta_mass() {
        // u(0) = ∫_{annulus} η₁ (the Poisson kernel at the center is η₁);
        // oracle: radial Beta-weight quadrature of η over the annulus.
        let pr = p(1, 0.5);
        let g = ExteriorDatum::Annulus { inner: 1.0, outer: 2.0 };
        let u0 = harmonic_extension(&pr, &g, &Point::origin(1), &opts()).unwrap();
        let profile = ExteriorProfile::new(pr.s(), 1.0 + 2.0 * pr.s())
            .with_break(2.0, End::Smooth, End::Smooth);
        let oracle = exterior_radial_rule(1, 1.0, &profile, &opts())
            .unwrap()
            .integrate(|rho| {
                if rho < 2.0 {
                    crate::kernels::eta_r_radial(&pr, 1.0, rho)
                } else {
                    0.0
                }
            })
            * pr.omega();
        assert_relative_eq!(u0, oracle, max_relative = 1e-8);
    }

    #[test]
    fn martin_closed_value_at_center() {
        for &(n, s) in &[(1u32, 0.5), (2, 0.5), (2, 0.25)] {
            let pr = p(n, s);
            let u = martin_solution(
                &pr,
                &BoundaryDatum::Const { value: 1.0 },
                &Point::origin(n as usize),
                &opts(),
            )
            .unwrap();
            let expect = kernels::martin_normalization(&pr) * pr.omega();
            assert_relative_eq!(u, expect, max_relative = 1e-9);
        }
    }

    #[test]
    fn martin_affine_matches_direct_sphere_rule() {
        let pr = p(2, 0.5);
        let h = BoundaryDatum::AxisAffine { a0: 1.0, a1: 0.5 };
        let x = Point::on_axis(0.5, 2);
        let chord = martin_solution(&pr, &h, &x, &opts()).unwrap();
        let sphere = SphereRule::new(2, 2048);
        let direct = sphere.integrate(|theta| {
            kernels::ball_martin_chord(&pr, 0.5, x.dist(theta)) * h.eval(theta)
        });
        assert_relative_eq!(chord, direct, max_relative = 1e-8);
        // off-axis fallback agrees as well
        let y = Point::new(&[0.3, 0.4]).unwrap();
        let off = martin_solution(&pr, &h, &y, &opts()).unwrap();
        let direct_off = sphere.integrate(|theta| {
            kernels::ball_martin_chord(&pr, y.norm(), y.dist(theta)) * h.eval(theta)
        });
        assert_relative_eq!(off, direct_off, max_relative = 1e-6);
    }

    #[test]
    fn trace_of_explicit_singular_family() {
        // Eu_{1−s} = c(n, 1/2)
        for &(n, s) in &[(1u32, 0.5), (2, 0.25)] {
            let pr = p(n, s);
            let sigma = 1.0 - s;
            let est = trace_of_radial(&pr, |t| usigma_radial(&pr, sigma, t), &opts()).unwrap();
            let expect = crate::special::c_const(n, 0.5);
            assert_relative_eq!(est.value, expect, max_relative = 0.02);
        }
    }

    #[test]
    fn trace_vanishes_below_the_critical_exponent() {
        let pr = p(1, 0.5);
        let est = trace_of_radial(&pr, |t| usigma_radial(&pr, 0.25, t), &opts()).unwrap();
        assert_abs_diff_eq!(est.value, 0.0, epsilon = 1e-2);
    }

    #[test]
    fn trace_of_martin_solution_recovers_datum() {
        let pr = p(2, 0.5);
        let h = BoundaryDatum::AxisAffine { a0: 1.0, a1: 0.5 };
        let deltas = trace_ray_deltas();
        let values: Vec<f64> = deltas
            .iter()
            .map(|d| martin_solution(&pr, &h, &Point::on_axis(1.0 - d, 2), &opts()).unwrap())
            .collect();
        let est = weighted_trace_e(&pr, &deltas, &values, &opts()).unwrap();
        assert_relative_eq!(est.value, 1.5, max_relative = 0.02);
    }

    #[test]
    fn green_term_of_unit_rhs_is_the_torsion() {
        for &(n, s) in &[(1u32, 0.5), (2, 0.5), (1, 0.75)] {
            let pr = p(n, s);
            for &t in &[0.0, 0.35, 0.8] {
                let x = Point::on_axis(t, n as usize);
                let u = green_solution(&pr, &RhsDatum::Const { value: 1.0 }, &x, &opts()).unwrap();
                assert_relative_eq!(u, kernels::torsion(&pr, 1.0, &x), max_relative = 1e-3);
            }
        }
    }

    #[test]
    fn green_term_rejects_non_integrable_rhs() {
        let pr = p(1, 0.5);
        let err = green_solution(&pr, &RhsDatum::DeltaPow { beta: 1.6 }, &Point::origin(1), &opts());
        assert!(matches!(err, Err(Error::NonIntegrable { .. })));
    }

    #[test]
    fn linear_solve_is_additive() {
        let pr = p(1, 0.5);
        let points: Vec<Point> = [0.0, 0.3, 0.6].iter().map(|t| Point::on_axis(*t, 1)).collect();
        let d1 = DirichletData::new(RhsDatum::Const { value: 1.0 }, ExteriorDatum::Zero, BoundaryDatum::Zero);
        let d2 = DirichletData::new(RhsDatum::Zero, ExteriorDatum::Const { value: 2.0 }, BoundaryDatum::Zero);
        let d12 = DirichletData::new(
            RhsDatum::Const { value: 1.0 },
            ExteriorDatum::Const { value: 2.0 },
            BoundaryDatum::Zero,
        );
        let u1 = full_linear_solve(&pr, &d1, &points, &opts()).unwrap();
        let u2 = full_linear_solve(&pr, &d2, &points, &opts()).unwrap();
        let u12 = full_linear_solve(&pr, &d12, &points, &opts()).unwrap();
        for i in 0..points.len() {
            assert_relative_eq!(u1.values[i] + u2.values[i], u12.values[i], max_relative = 1e-8);
        }
        let z = full_linear_solve(
            &pr,
            &DirichletData::new(RhsDatum::Zero, ExteriorDatum::Zero, BoundaryDatum::Zero),
            &points,
            &opts(),
        )
        .unwrap();
        assert!(z.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn maximum_principle_orders_extensions() {
        let pr = p(2, 0.5);
        let g_small = ExteriorDatum::Annulus { inner: 1.2, outer: 1.8 };
        let g_big = ExteriorDatum::Const { value: 1.0 };
        for &t in &[0.0, 0.4, 0.8] {
            let x = Point::on_axis(t, 2);
            let a = harmonic_extension(&pr, &g_small, &x, &opts()).unwrap();
            let b = harmonic_extension(&pr, &g_big, &x, &opts()).unwrap();
            assert!(a <= b + 1e-12, "max principle violated: {a} > {b}");
        }
    }

    #[test]
    fn boundary_continuity_of_bounded_extension() {
        // Lipschitz bounded g: u(x) → g(θ) along the ray
        let pr = p(1, 0.5);
        let g = ExteriorDatum::Annulus { inner: 1.0, outer: 3.0 };
        // g ≡ 1 near the boundary, osc(g) = 1
        let x = Point::on_axis(1.0 - 1e-3, 1);
        let u = harmonic_extension(&pr, &g, &x, &opts()).unwrap();
        assert!((u - 1.0).abs() < 0.05, "u(δ=1e−3) = {u}");
    }

    #[test]
    fn truncated_extensions_increase_to_the_full_one() {
        let pr = p(1, 0.5);
        let g = ExteriorDatum::SigmaKernel { sigma: 0.25 };
        let caps = [1.0, 4.0, 16.0, 64.0, 256.0, 1024.0];
        let points: Vec<Point> = [0.0, 0.5, 1.0 - 1e-4]
            .iter()
            .map(|t| Point::on_axis(*t, 1))
            .collect();
        let fields = large_harmonic_truncation(&pr, &g, &caps, &points, &opts()).unwrap();
        for w in fields.windows(2) {
            for i in 0..points.len() {
                assert!(
                    w[1].values[i] >= w[0].values[i] - 1e-10,
                    "monotonicity violated at point {i}"
                );
            }
        }
        // interior limit reaches the untruncated extension
        let full = harmonic_extension(&pr, &g, &points[0], &opts()).unwrap();
        assert_abs_diff_eq!(fields.last().unwrap().values[0], full, epsilon = 1e-4);
    }

    #[test]
    fn truncated_extension_attains_the_cap_at_the_boundary() {
        // the δ^{−σ} datum truncated at N = 4 is constant N inside a collar
        // of thickness N^{−1/σ} ≈ 4e−3; well inside it, u_N ≈ N
        let pr = p(1, 0.5);
        let g = ExteriorDatum::DeltaPow { sigma: 0.25 };
        let caps = [4.0];
        let points = [Point::on_axis(1.0 - 1e-6, 1)];
        let fields = large_harmonic_truncation(&pr, &g, &caps, &points, &opts()).unwrap();
        assert_relative_eq!(fields[0].values[0], 4.0, max_relative = 0.05);
    }

    #[test]
    fn poisson_bound_shape_is_controlled() {
        // P(x,y)·δ(y)^s (1+δ(y))^s |x−y|^n / δ(x)^s bounded on a sample
        let pr = p(2, 0.5);
        let s = pr.s();
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        let mut state = 7u64;
        let mut rand01 = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64)
        };
        for _ in 0..300 {
            let t = rand01() * 0.95;
            let x = Point::on_axis(t, 2);
            let ang = rand01() * std::f64::consts::TAU;
            let rho = 1.0 + rand01() * 3.0 + 1e-3;
            let y = Point::new(&[rho * ang.cos(), rho * ang.sin()]).unwrap();
            let pk = kernels::ball_poisson(&pr, &x, &y).unwrap();
            let dy = y.norm() - 1.0;
            let shape = pk * dy.powf(s) * (1.0 + dy).powf(s) * x.dist(&y).powi(2) / (1.0 - t).powf(s);
            lo = lo.min(shape);
            hi = hi.max(shape);
        }
        assert!(hi / lo < 1e2, "poisson shape spread {}", hi / lo);
    }
}
