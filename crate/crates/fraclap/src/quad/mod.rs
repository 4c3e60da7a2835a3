//! Deterministic integration: endpoint-singular radial rules, sphere rules,
//! exterior-domain integrals, spherical means of radial kernels, and the
//! principal-value evaluation of `(−Δ)^s`.

pub mod ball;
pub mod exterior;
pub mod gauss;
pub mod line;
pub mod mean;
pub mod pv;
pub mod sphere;

pub use ball::{integrate_ball_radial, RadialBallSpec};
pub use exterior::{exterior_radial_rule, integrate_exterior_radial, ExteriorProfile, RadialRule};
pub use gauss::{GaussJacobi, GaussLegendre};
pub use line::{pieces_with_breaks, End, LineRule, Piece, QuadOpts};
pub use mean::{sphere_mean_rule, KernelProfile};
pub use pv::{frac_laplacian_pv, sphere_crossings, ClosureField, PvField, PvOptions, PvTail};
pub use sphere::SphereRule;

/// Pairwise (cascade) summation: fixed order, bit-stable regardless of how
/// the terms were produced, and with O(log n) rounding growth.
pub fn pairwise_sum(terms: &[f64]) -> f64 {
    match terms.len() {
        0 => 0.0,
        1 => terms[0],
        2 => terms[0] + terms[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&terms[..mid]) + pairwise_sum(&terms[mid..])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_sum_matches_exact_on_small_input() {
        assert_eq!(pairwise_sum(&[]), 0.0);
        assert_eq!(pairwise_sum(&[1.5]), 1.5);
        assert_eq!(pairwise_sum(&[1.0, 2.0, 3.0, 4.0]), 10.0);
    }

    #[test]
    fn pairwise_sum_is_order_stable() {
        let terms: Vec<f64> = (0..1000).map(|k| ((k * 2654435761u64 as usize) % 977) as f64 * 1e-7).collect();
        let a = pairwise_sum(&terms);
        let b = pairwise_sum(&terms);
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
