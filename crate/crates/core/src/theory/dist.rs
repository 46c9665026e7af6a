//! Distribution functions with explicit jump bookkeeping.
//!
//! Sup-norm comparisons need one-sided values at every discontinuity, so a
//! distribution here exposes its right-continuous value, its left limit,
//! and an enumeration of jump locations, plus a bound on the derivative of
//! its smooth part for smoothing-inequality reporting.

use crate::theory::{mertens_c1, phi, TheoryParams};

/// Snap tolerance for deciding that `T + y√T` sits on an integer. Jump
/// spacing in that variable is exactly 1, so anything this close is summed
/// as the jump itself rather than a point just beside it.
pub const JUMP_SNAP: f64 = 1e-9;

pub trait DistributionFn {
    /// Right-continuous value `F(y)`.
    fn value(&self, y: f64) -> f64;

    /// Left limit `F(y⁻)`; coincides with `value` at continuity points.
    fn left_value(&self, y: f64) -> f64 {
        self.value(y)
    }

    /// Discontinuity locations inside `[lo, hi]`, strictly increasing.
    fn jump_points(&self, _lo: f64, _hi: f64) -> Vec<f64> {
        Vec::new()
    }

    /// Bound on `|F'|` away from jumps.
    fn smooth_derivative_bound(&self) -> f64;

    fn limit_neg_inf(&self) -> f64 {
        0.0
    }

    fn limit_pos_inf(&self) -> f64 {
        1.0
    }
}

/// The standard normal distribution function Φ.
#[derive(Debug, Clone, Copy, Default)]
pub struct NormalCdf;

impl DistributionFn for NormalCdf {
    fn value(&self, y: f64) -> f64 {
        phi(y)
    }

    fn smooth_derivative_bound(&self) -> f64 {
        1.0 / (2.0 * std::f64::consts::PI).sqrt()
    }
}

/// The corrected limit law
/// `Φ_X(y) = Φ(y) + e^{-y²/2}/√(2πT) · (2/3 - c₁ - y²/6 - ⟨T + y√T⟩)`,
/// where `T = log log X` and `⟨t⟩ = t - ⌊t⌋`.
///
/// The fractional part makes Φ_X jump upward by `e^{-y²/2}/√(2πT)` at every
/// `y` with `T + y√T` an integer, matching the jump locations of the
/// empirical distribution of `(ω(n) - T)/√T`.
#[derive(Debug, Clone)]
pub struct CorrectedCdf {
    params: TheoryParams,
    c1: f64,
    deriv_bound: f64,
}

impl CorrectedCdf {
    pub fn new(params: TheoryParams) -> Self {
        let c1 = mertens_c1();
        let deriv_bound = smooth_deriv_bound(params.t(), c1);
        Self {
            params,
            c1,
            deriv_bound,
        }
    }

    pub fn params(&self) -> &TheoryParams {
        &self.params
    }

    fn gaussian_factor(&self, y: f64) -> f64 {
        (-0.5 * y * y).exp() / (2.0 * std::f64::consts::PI * self.params.t()).sqrt()
    }

    fn eval(&self, y: f64, from_left: bool) -> f64 {
        let t = self.params.t();
        let s = t + y * t.sqrt();
        let frac = if (s - s.round()).abs() <= JUMP_SNAP {
            // On a jump: the right value uses ⟨s⟩ = 0, the left limit 1.
            if from_left {
                1.0
            } else {
                0.0
            }
        } else {
            s - s.floor()
        };
        phi(y) + self.gaussian_factor(y) * (2.0 / 3.0 - self.c1 - y * y / 6.0 - frac)
    }

    /// Jump size at the discontinuity nearest `y`.
    pub fn jump_size(&self, y: f64) -> f64 {
        self.gaussian_factor(y)
    }

    /// `y`-location of the jump with `T + y√T = k`.
    pub fn jump_location(&self, k: i64) -> f64 {
        let t = self.params.t();
        (k as f64 - t) / t.sqrt()
    }
}

impl DistributionFn for CorrectedCdf {
    fn value(&self, y: f64) -> f64 {
        self.eval(y, false)
    }

    fn left_value(&self, y: f64) -> f64 {
        self.eval(y, true)
    }

    fn jump_points(&self, lo: f64, hi: f64) -> Vec<f64> {
        let t = self.params.t();
        let s_lo = t + lo * t.sqrt();
        let s_hi = t + hi * t.sqrt();
        let mut out = Vec::new();
        let mut k = s_lo.ceil() as i64;
        while (k as f64) <= s_hi {
            out.push(self.jump_location(k));
            k += 1;
        }
        out
    }

    fn smooth_derivative_bound(&self) -> f64 {
        self.deriv_bound
    }
}

/// Numeric bound on the derivative of the smooth part of Φ_X:
/// `Φ(y) + g(y)(2/3 - c₁ - y²/6 - ⟨·⟩)` differentiates, between jumps, to
/// `φ(y) + g'(y)(2/3 - c₁ - y²/6) - g(y)y/3 - g'(y)⟨·⟩ - g(y)√T`.
fn smooth_deriv_bound(t: f64, c1: f64) -> f64 {
    let root_2pi = (2.0 * std::f64::consts::PI).sqrt();
    let mut max = 0.0f64;
    let mut y = -10.0f64;
    while y <= 10.0 {
        let gauss = (-0.5 * y * y).exp();
        let g = gauss / (root_2pi * t.sqrt());
        let g_prime = y.abs() * g;
        let bound = gauss / root_2pi
            + g_prime * ((2.0 / 3.0 - c1).abs() + y * y / 6.0 + 1.0)
            + g * y.abs() / 3.0
            + g * t.sqrt();
        max = max.max(bound);
        y += 1e-3;
    }
    max
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_basics() {
        let n = NormalCdf;
        assert!((n.value(0.0) - 0.5).abs() < 1e-15);
        assert!(n.value(-40.0) < 1e-300);
        assert!((n.value(40.0) - 1.0).abs() < 1e-15);
        assert!(n.jump_points(-10.0, 10.0).is_empty());
    }

    #[test]
    fn corrected_cdf_tails() {
        let p = TheoryParams::new(1_000_000).unwrap();
        let c = CorrectedCdf::new(p);
        assert!(c.value(-12.0).abs() < 1e-12);
        assert!((c.value(12.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jump_size_matches_one_sided_values() {
        let p = TheoryParams::new(1_000_000).unwrap();
        let c = CorrectedCdf::new(p);
        for k in 0..8 {
            let y = c.jump_location(k);
            let jump = c.value(y) - c.left_value(y);
            assert!(
                (jump - c.jump_size(y)).abs() < 1e-12,
                "k = {k}: jump {jump} vs {}",
                c.jump_size(y)
            );
            assert!(jump > 0.0);
        }
    }

    #[test]
    fn jump_points_cover_range() {
        let p = TheoryParams::new(10_000).unwrap();
        let c = CorrectedCdf::new(p);
        let jumps = c.jump_points(-6.0, 6.0);
        assert!(!jumps.is_empty());
        for pair in jumps.windows(2) {
            assert!(pair[0] < pair[1]);
        }
        for &y in &jumps {
            assert!((-6.0..=6.0).contains(&y));
            let s = c.params().t() + y * c.params().t().sqrt();
            assert!((s - s.round()).abs() < 1e-9);
        }
    }

    #[test]
    fn stays_within_gaussian_envelope_of_phi() {
        // |Φ_X(y) - Φ(y)| <= (|2/3 - c₁| + y²/6 + 1) / √(2πT) for all y.
        for &x in &[100u64, 10_000, 100_000_000] {
            let p = TheoryParams::new(x).unwrap();
            let t = p.t();
            let c = CorrectedCdf::new(p);
            let c1 = mertens_c1();
            let scale = 1.0 / (2.0 * std::f64::consts::PI * t).sqrt();
            let mut y = -8.0;
            while y <= 8.0 {
                let envelope = scale * ((2.0f64 / 3.0 - c1).abs() + y * y / 6.0 + 1.0);
                assert!(
                    (c.value(y) - phi(y)).abs() <= envelope + 1e-15,
                    "X = {x}, y = {y}"
                );
                y += 0.0137;
            }
        }
    }
}
