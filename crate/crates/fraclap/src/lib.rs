//! Explicit potential theory for the fractional Laplacian `(−Δ)^s` on the
//! unit ball `B ⊂ R^n`, `n ∈ {1,2,3}`, `s ∈ (0,1)`.
//!
//! The crate provides, as a library:
//!
//! - [`special`]: the Γ-function and every normalization constant, with
//!   self-consistency checks pinning the operator convention;
//! - [`kernels`]: closed-form evaluators for the exit kernel `η_r`, the
//!   fundamental solution, the Poisson, Martin and Green kernels of the
//!   ball, the torsion function and the explicit `u_σ` family of singular
//!   s-harmonic functions;
//! - [`quad`]: endpoint-singular Gauss–Jacobi and graded composite rules,
//!   sphere rules, exterior-domain integrals and a principal-value
//!   evaluator for `(−Δ)^s` itself;
//! - [`linear`]: the three-datum Dirichlet problem `(−Δ)^s u = f` in `B`,
//!   `u = g` outside, `Eu = h` on `∂B`, via the representation formula,
//!   including the weighted boundary trace operator `E`;
//! - [`semilinear`]: monotone / Picard iteration solvers for damped,
//!   sublinear and superlinear right-hand sides, λ-threshold bisection and
//!   a complete blow-up probe;
//! - [`rates`]: log–log fitting of boundary explosion and decay exponents
//!   against the three-branch rate law;
//! - [`wos`]: a walk-on-spheres Monte Carlo oracle built on the exact
//!   2s-stable exit law, for cross-validation of every deterministic
//!   harmonic extension;
//! - [`verify`]: the runnable identity suite (mean value, integration by
//!   parts, `s↑1` asymptotics, Liouville coupling, boundary-datum
//!   approximation).
//!
//! Every capability has a runnable program under `examples/`; a thin
//! `fraclap` binary exposes the same operations as batch subcommands.

pub mod config;
pub mod geom;
pub mod kernels;
pub mod linear;
pub mod quad;
pub mod rates;
pub mod runner;
pub mod semilinear;
pub mod special;
pub mod verify;
pub mod wos;

pub use geom::{BoundaryPoint, Point};
pub use special::{ConstantsTable, FracParams};

/// Crate-wide error type. Variants map onto the CLI exit codes: usage and
/// configuration problems → 1, numeric/accuracy failures → 2, analytic
/// nonexistence verdicts → 3, unreliable Monte Carlo estimates → 4.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("non-integrable datum: declared boundary exponent {beta} is not below {limit}")]
    NonIntegrable { beta: f64, limit: f64 },

    #[error("inadmissible exterior datum ({at}): {detail}")]
    Inadmissible { at: DatumEnd, detail: String },

    #[error("accuracy failure: {0}")]
    Accuracy(String),

    #[error("weighted trace did not converge: {0}")]
    NoTrace(String),

    #[error("nonexistence regime: {0}")]
    Nonexistence(String),

    #[error("unreliable Monte Carlo estimate: truncated fraction {truncated_fraction}")]
    UnreliableEstimate { truncated_fraction: f64 },

    #[error("no contraction threshold below the cap: {0}")]
    EnvelopeViolation(String),

    #[error("iteration left the [0, u0] bracket at grid index {index}")]
    BracketViolation { index: usize },

    #[error("config error at {pointer}: {message}")]
    Config { pointer: String, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Which end of the exterior domain made a datum inadmissible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatumEnd {
    Boundary,
    Infinity,
}

impl std::fmt::Display for DatumEnd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DatumEnd::Boundary => write!(f, "at the boundary"),
            DatumEnd::Infinity => write!(f, "at infinity"),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
