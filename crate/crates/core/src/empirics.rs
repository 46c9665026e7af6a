//! Empirical distribution and characteristic functions built from ω-data.
//!
//! Everything is histogram-driven: ω(n) < 16 on the admissible range, so a
//! window collapses to at most 16 counts and each characteristic-function
//! evaluation costs O(1) regardless of window length.

use num_complex::Complex64;
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{param_err, Result};
use crate::sieve::{base_primes, isqrt, omega_single, window_histogram, OmegaSlice, Window};
use crate::theory::dist::DistributionFn;
use crate::theory::TheoryParams;

/// Where a sampled curve came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    WindowEmpirical,
    DyadicEmpirical,
    Theoretical,
}

/// A characteristic function sampled on a strictly increasing τ-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CharCurve {
    taus: Vec<f64>,
    values: Vec<Complex64>,
    provenance: Provenance,
}

impl CharCurve {
    pub fn new(taus: Vec<f64>, values: Vec<Complex64>, provenance: Provenance) -> Result<Self> {
        if taus.len() != values.len() {
            return param_err("τ-grid and values must have equal length");
        }
        if taus.windows(2).any(|w| w[0] >= w[1]) {
            return param_err("τ-grid must be strictly increasing");
        }
        Ok(Self {
            taus,
            values,
            provenance,
        })
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }
}

/// Empirical distribution function of `(ω(n) - T)/√T` over a window:
/// a right-continuous step function with jumps at `(k - T)/√T`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    ys: Vec<f64>,
    cum: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn from_histogram(hist: &[u64], total: u64, p: &TheoryParams) -> Self {
        let t = p.t();
        let sqrt_t = p.sqrt_t();
        let mut ys = Vec::new();
        let mut cum = Vec::new();
        let mut acc = 0u64;
        for (k, &c) in hist.iter().enumerate() {
            if c > 0 {
                acc += c;
                ys.push((k as f64 - t) / sqrt_t);
                cum.push(acc as f64 / total as f64);
            }
        }
        Self { ys, cum }
    }

    /// Jump locations (strictly increasing).
    pub fn jumps(&self) -> &[f64] {
        &self.ys
    }

    /// Mass of the jump at `ys[i]`.
    pub fn jump_mass(&self, i: usize) -> f64 {
        if i == 0 {
            self.cum[0]
        } else {
            self.cum[i] - self.cum[i - 1]
        }
    }
}

impl DistributionFn for EmpiricalCdf {
    fn value(&self, y: f64) -> f64 {
        let idx = self.ys.partition_point(|&j| j <= y);
        if idx == 0 {
            0.0
        } else {
            self.cum[idx - 1]
        }
    }

    fn left_value(&self, y: f64) -> f64 {
        let idx = self.ys.partition_point(|&j| j < y);
        if idx == 0 {
            0.0
        } else {
            self.cum[idx - 1]
        }
    }

    fn jump_points(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.ys
            .iter()
            .copied()
            .filter(|&y| y >= lo && y <= hi)
            .collect()
    }

    fn smooth_derivative_bound(&self) -> f64 {
        0.0
    }
}

/// `F(y) = (1/h) #{n in window : ω(n) <= T + y√T}`.
pub fn empirical_cdf(slice: &OmegaSlice, p: &TheoryParams) -> EmpiricalCdf {
    EmpiricalCdf::from_histogram(slice.histogram(), slice.len(), p)
}

/// Number of uniform grid points used for sup-norm evaluation, on [-6, 6].
const SUP_GRID_POINTS: usize = 10_000;
const SUP_GRID_LO: f64 = -6.0;
const SUP_GRID_HI: f64 = 6.0;

/// Sup-norm of `F - G` over the jump points of both (one-sided values on
/// both sides) plus a uniform grid of 10^4 points on [-6, 6].
pub fn sup_distance(f: &dyn DistributionFn, g: &dyn DistributionFn) -> f64 {
    let mut lo = SUP_GRID_LO;
    let mut hi = SUP_GRID_HI;
    let f_jumps = f.jump_points(-1e9, 1e9);
    let g_jumps = {
        // G's jumps can be enumerated over the span of interest only.
        if let (Some(&fl), Some(&fh)) = (f_jumps.first(), f_jumps.last()) {
            lo = lo.min(fl - 1.0);
            hi = hi.max(fh + 1.0);
        }
        g.jump_points(lo, hi)
    };
    let mut best = 0.0f64;
    let mut probe = |y: f64| {
        let right = (f.value(y) - g.value(y)).abs();
        let left = (f.left_value(y) - g.left_value(y)).abs();
        best = best.max(right).max(left);
    };
    for &y in f_jumps.iter().chain(g_jumps.iter()) {
        probe(y);
    }
    for i in 0..SUP_GRID_POINTS {
        let y = SUP_GRID_LO
            + (SUP_GRID_HI - SUP_GRID_LO) * i as f64 / (SUP_GRID_POINTS as f64 - 1.0);
        probe(y);
    }
    best
}

/// Sup-norm discrepancy between an empirical cdf and a reference law.
pub fn sup_discrepancy(f: &EmpiricalCdf, g: &dyn DistributionFn) -> f64 {
    sup_distance(f, g)
}

/// `f(τ) = (1/h) Σ e^{iτ(ω(n) - T)/√T}`, computed from the histogram.
pub fn charfn_from_histogram(
    hist: &[u64],
    total: u64,
    p: &TheoryParams,
    taus: &[f64],
    provenance: Provenance,
) -> Result<CharCurve> {
    let t = p.t();
    let sqrt_t = p.sqrt_t();
    let values = taus
        .iter()
        .map(|&tau| {
            let mut sum = Complex64::new(0.0, 0.0);
            for (k, &c) in hist.iter().enumerate() {
                if c > 0 {
                    sum += c as f64 * Complex64::from_polar(1.0, tau * (k as f64 - t) / sqrt_t);
                }
            }
            sum / total as f64
        })
        .collect();
    CharCurve::new(taus.to_vec(), values, provenance)
}

/// Characteristic function of a window slice on the given τ-grid.
pub fn empirical_charfn(slice: &OmegaSlice, p: &TheoryParams, taus: &[f64]) -> Result<CharCurve> {
    charfn_from_histogram(
        slice.histogram(),
        slice.len(),
        p,
        taus,
        Provenance::WindowEmpirical,
    )
}

/// Uncentered mean `(1/total) Σ_k count_k e^{iθk}` of `e^{iθω(n)}`.
pub fn mean_exp_theta_omega(hist: &[u64], total: u64, theta: f64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    for (k, &c) in hist.iter().enumerate() {
        if c > 0 {
            sum += c as f64 * Complex64::from_polar(1.0, theta * k as f64);
        }
    }
    sum / total as f64
}

/// Full enumeration vs. seeded sampling for dyadic-block statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    Full,
    Sampled { count: u64, seed: u64 },
}

/// Largest X for which dyadic blocks are fully enumerated.
pub const FULL_ENUMERATION_CAP: u64 = 100_000_000;

/// Histogram of ω over the dyadic block `(x, 2x]`, full enumeration.
pub fn dyadic_histogram(x: u64) -> Result<Vec<u64>> {
    if x > FULL_ENUMERATION_CAP {
        return param_err(format!(
            "full dyadic enumeration capped at X = 1e8, got {x}"
        ));
    }
    let w = Window::dyadic(x)?;
    let base = base_primes(isqrt(w.end()) + 1)?;
    window_histogram(&w, &base)
}

/// A complex mean with an attached standard-error estimate
/// (zero for exact full enumeration).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub value: Complex64,
    pub stderr: f64,
}

/// `(1/X) Σ_{X<n≤2X} e^{itω(n)}`: exact in full mode, otherwise an unbiased
/// uniform-with-replacement sample of `count` integers from `(X, 2X]`.
pub fn dyadic_charfn(x: u64, t: f64, mode: SampleMode) -> Result<MeanEstimate> {
    match mode {
        SampleMode::Full => {
            let hist = dyadic_histogram(x)?;
            Ok(MeanEstimate {
                value: mean_exp_theta_omega(&hist, x, t),
                stderr: 0.0,
            })
        }
        SampleMode::Sampled { count, seed } => {
            if count < 2 {
                return param_err("sampled mode requires count >= 2");
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dist = Uniform::new_inclusive(x + 1, 2 * x);
            let draws: Vec<Complex64> = (0..count)
                .map(|_| {
                    let n = dist.sample(&mut rng);
                    Complex64::from_polar(1.0, t * omega_single(n) as f64)
                })
                .collect();
            let mean = draws.iter().sum::<Complex64>() / count as f64;
            let var: f64 = draws.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>()
                / (count as f64 - 1.0);
            Ok(MeanEstimate {
                value: mean,
                stderr: (var / count as f64).sqrt(),
            })
        }
    }
}

/// `π_k` restricted to the window: the histogram count at `k`.
pub fn window_pik(slice: &OmegaSlice, k: usize) -> u64 {
    slice.histogram().get(k).copied().unwrap_or(0)
}

/// Cross-check of the window counts by contour extraction: means of
/// `z^{ω(n)}` on an `n_points`-point unit-circle grid, inverted by the
/// discrete Fourier transform. Exact (up to rounding) when `n_points`
/// exceeds every ω in the window.
pub fn pik_dft_counts(slice: &OmegaSlice, n_points: usize) -> Result<Vec<f64>> {
    let max_omega = slice.histogram().len() - 1;
    if n_points <= max_omega {
        return param_err(format!(
            "DFT grid of {n_points} points cannot resolve ω up to {max_omega}"
        ));
    }
    let h = slice.len() as f64;
    let two_pi = 2.0 * std::f64::consts::PI;
    // Means of z^{ω(n)} at the grid nodes.
    let means: Vec<Complex64> = (0..n_points)
        .map(|m| {
            let theta = two_pi * m as f64 / n_points as f64;
            mean_exp_theta_omega(slice.histogram(), slice.len(), theta)
        })
        .collect();
    // Inverse transform recovers histogram[k] / h.
    let counts = (0..n_points)
        .map(|k| {
            let mut sum = Complex64::new(0.0, 0.0);
            for (m, &z) in means.iter().enumerate() {
                let theta = -two_pi * (m * k) as f64 / n_points as f64;
                sum += z * Complex64::from_polar(1.0, theta);
            }
            (sum / n_points as f64 * h).re
        })
        .collect();
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sieve::omega_window;

    fn slice_1_to_10() -> OmegaSlice {
        let base = base_primes(10).unwrap();
        omega_window(&Window::new(1, 9).unwrap(), &base).unwrap()
    }

    #[test]
    fn empirical_cdf_limits_and_jumps() {
        let p = TheoryParams::new(1_000_000).unwrap();
        let slice = slice_1_to_10();
        let f = empirical_cdf(&slice, &p);
        assert_eq!(f.value(-10.0), 0.0);
        assert_eq!(f.value(10.0), 1.0);
        // Histogram {1:7, 2:2} over 9 integers: jump of 7/9 then 2/9.
        let t = p.t();
        let y1 = (1.0 - t) / t.sqrt();
        let y2 = (2.0 - t) / t.sqrt();
        assert!((f.value(y1) - 7.0 / 9.0).abs() < 1e-15);
        assert!((f.left_value(y1) - 0.0).abs() < 1e-15);
        assert!((f.value(y2) - 1.0).abs() < 1e-15);
        assert!((f.value(y2) - f.left_value(y2) - 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn empirical_cdf_monotone() {
        let p = TheoryParams::new(10_000).unwrap();
        let base = base_primes(200).unwrap();
        let slice = omega_window(&Window::new(10_000, 500).unwrap(), &base).unwrap();
        let f = empirical_cdf(&slice, &p);
        let mut prev = -1.0;
        let mut y = -8.0;
        while y <= 8.0 {
            let v = f.value(y);
            assert!(v >= prev);
            prev = v;
            y += 0.01;
        }
    }

    #[test]
    fn sup_discrepancy_identical_steps_is_zero() {
        let p = TheoryParams::new(1_000_000).unwrap();
        let slice = slice_1_to_10();
        let f = empirical_cdf(&slice, &p);
        let g = empirical_cdf(&slice, &p);
        assert_eq!(sup_discrepancy(&f, &g), 0.0);
    }

    #[test]
    fn sup_discrepancy_point_mass_vs_normal_is_half() {
        // One atom at y = 0 against Φ: the left limit at 0 gives 1/2.
        let p = TheoryParams::new(1_000_000).unwrap();
        let t = p.t();
        // A histogram with all mass at k = round(T) puts the jump at ~0;
        // build the atom directly instead.
        let atom = EmpiricalCdf {
            ys: vec![0.0],
            cum: vec![1.0],
        };
        let _ = t;
        let d = sup_discrepancy(&atom, &crate::theory::dist::NormalCdf);
        assert!((d - 0.5).abs() < 1e-12, "d = {d}");
    }

    #[test]
    fn step_step_symmetry() {
        let p = TheoryParams::new(10_000).unwrap();
        let base = base_primes(200).unwrap();
        let a = empirical_cdf(
            &omega_window(&Window::new(10_000, 400).unwrap(), &base).unwrap(),
            &p,
        );
        let b = empirical_cdf(
            &omega_window(&Window::new(20_000, 700).unwrap(), &base).unwrap(),
            &p,
        );
        let d_ab = sup_distance(&a, &b);
        let d_ba = sup_distance(&b, &a);
        assert!((d_ab - d_ba).abs() < 1e-15);
        assert!(d_ab > 0.0);
    }

    #[test]
    fn charfn_at_zero_is_one_and_bounded() {
        let p = TheoryParams::new(1_000_000).unwrap();
        let slice = slice_1_to_10();
        let taus: Vec<f64> = (-40..=40).map(|i| i as f64 / 8.0).collect();
        let f = empirical_charfn(&slice, &p, &taus).unwrap();
        for (i, &tau) in f.taus().iter().enumerate() {
            if tau == 0.0 {
                assert!((f.values()[i] - 1.0).norm() < 1e-14);
            }
            assert!(f.values()[i].norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn histogram_and_per_integer_paths_agree() {
        let p = TheoryParams::new(1_000_000).unwrap();
        let base = base_primes(1100).unwrap();
        let w = Window::new(1_000_000, 2_000).unwrap();
        let slice = omega_window(&w, &base).unwrap();
        let taus = [0.0, 0.5, 1.3, 4.0];
        let f = empirical_charfn(&slice, &p, &taus).unwrap();
        for (i, &tau) in taus.iter().enumerate() {
            // Direct per-integer summation.
            let mut direct = Complex64::new(0.0, 0.0);
            for &o in slice.omegas() {
                direct +=
                    Complex64::from_polar(1.0, tau * (o as f64 - p.t()) / p.sqrt_t());
            }
            direct /= w.len() as f64;
            assert!((f.values()[i] - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn dyadic_charfn_full_at_zero() {
        let est = dyadic_charfn(10_000, 0.0, SampleMode::Full).unwrap();
        assert_eq!(est.value, Complex64::new(1.0, 0.0));
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn dyadic_charfn_conjugate_in_t() {
        let a = dyadic_charfn(10_000, 0.7, SampleMode::Full).unwrap().value;
        let b = dyadic_charfn(10_000, -0.7, SampleMode::Full).unwrap().value;
        assert!((a.conj() - b).norm() < 1e-14);
    }

    #[test]
    fn dyadic_charfn_full_mode_cap() {
        assert!(dyadic_charfn(FULL_ENUMERATION_CAP + 1, 0.5, SampleMode::Full).is_err());
    }

    #[test]
    fn dyadic_charfn_sampled_is_reproducible_and_close() {
        let mode = SampleMode::Sampled {
            count: 20_000,
            seed: 7,
        };
        let a = dyadic_charfn(1_000_000, 0.5, mode).unwrap();
        let b = dyadic_charfn(1_000_000, 0.5, mode).unwrap();
        assert_eq!(a.value, b.value);
        let exact = dyadic_charfn(1_000_000, 0.5, SampleMode::Full).unwrap();
        assert!(
            (a.value - exact.value).norm() <= 4.0 * a.stderr,
            "sampled {} vs exact {} (stderr {})",
            a.value,
            exact.value,
            a.stderr
        );
    }

    #[test]
    fn window_pik_first_ten() {
        let base = base_primes(10).unwrap();
        let slice = omega_window(&Window::new(0, 10).unwrap(), &base).unwrap();
        assert_eq!(window_pik(&slice, 1), 7); // 2,3,4,5,7,8,9
        assert_eq!(window_pik(&slice, 0), 1); // n = 1
        assert_eq!(window_pik(&slice, 2), 2); // 6, 10
        assert_eq!(window_pik(&slice, 40), 0);
        let total: u64 = (0..20).map(|k| window_pik(&slice, k)).sum();
        assert_eq!(total, 10);
    }

    #[test]
    fn dft_counts_recover_histogram() {
        let base = base_primes(1100).unwrap();
        let slice = omega_window(&Window::new(1_000_000, 1_000).unwrap(), &base).unwrap();
        let counts = pik_dft_counts(&slice, 64).unwrap();
        for k in 0..64 {
            let expect = slice.histogram().get(k).copied().unwrap_or(0) as f64;
            assert!(
                (counts[k] - expect).abs() < 1e-9,
                "k = {k}: {} vs {expect}",
                counts[k]
            );
        }
        assert!(pik_dft_counts(&slice, slice.histogram().len() - 1).is_err());
    }
}
