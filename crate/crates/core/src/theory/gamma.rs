//! Reciprocal gamma function on the bounded complex domain |z| <= 2.

use num_complex::Complex64;

const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_7;

/// B_{2j} / (2j (2j-1)) for j = 1..=8.
const STIRLING_COEFFS: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// Recurrence depth; places the Stirling argument at Re(w) >= 10 for
/// every z with |z| <= 2, where the truncated series is good to ~1e-17.
const SHIFT: usize = 12;

/// log Γ(w), valid for Re(w) >= 10.
fn ln_gamma_stirling(w: Complex64) -> Complex64 {
    let mut series = Complex64::new(0.0, 0.0);
    let w2 = w * w;
    let mut power = w; // w^(2j-1)
    for (j, &c) in STIRLING_COEFFS.iter().enumerate() {
        series += c / power;
        if j + 1 < STIRLING_COEFFS.len() {
            power *= w2;
        }
    }
    (w - 0.5) * w.ln() - w + HALF_LN_TWO_PI + series
}

/// 1/Γ(z) for |z| <= 2, absolute error well below 1e-12.
///
/// Entire in z: the poles of Γ at 0 and -1 become exact zeros of the
/// leading product, so no reflection is needed.
pub fn recip_gamma(z: Complex64) -> Complex64 {
    let mut prod = Complex64::new(1.0, 0.0);
    for k in 0..SHIFT {
        prod *= z + k as f64;
    }
    let w = z + SHIFT as f64;
    prod * (-ln_gamma_stirling(w)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn known_real_values() {
        // 1/Γ at 1, 2, 3, 4: 1, 1, 1/2, 1/6.
        assert!((recip_gamma(c(1.0, 0.0)) - 1.0).norm() < 1e-14);
        assert!((recip_gamma(c(2.0, 0.0)) - 1.0).norm() < 1e-14);
        assert!((recip_gamma(c(0.5, 0.0)).re - 0.564_189_583_547_756_3).abs() < 1e-13);
        // Γ(-0.5) = -2√π.
        assert!((recip_gamma(c(-0.5, 0.0)).re - (-0.282_094_791_773_878_14)).abs() < 1e-13);
    }

    #[test]
    fn zeros_at_poles() {
        assert!(recip_gamma(c(0.0, 0.0)).norm() < 1e-15);
        assert!(recip_gamma(c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn recurrence_identity_on_domain_grid() {
        // z * (1/Γ(z+1)) = 1/Γ(z) exactly; check the numeric drift.
        for i in -20..=20 {
            for j in -20..=20 {
                let z = c(i as f64 / 10.0, j as f64 / 10.0);
                if z.norm() > 1.9 {
                    continue;
                }
                let lhs = z * recip_gamma(z + 1.0);
                let rhs = recip_gamma(z);
                assert!(
                    (lhs - rhs).norm() < 1e-13 * (1.0 + rhs.norm()),
                    "z = {z}"
                );
            }
        }
    }

    #[test]
    fn reflection_identity_on_unit_circle() {
        // 1/Γ(z) * 1/Γ(1-z) = sin(πz)/π.
        for k in 0..64 {
            let t = 2.0 * std::f64::consts::PI * k as f64 / 64.0;
            let z = c(t.cos(), t.sin());
            let lhs = recip_gamma(z) * recip_gamma(Complex64::new(1.0, 0.0) - z);
            let rhs = (std::f64::consts::PI * z).sin() / std::f64::consts::PI;
            assert!((lhs - rhs).norm() < 1e-12 * (1.0 + rhs.norm()), "z = {z}");
        }
    }
}
