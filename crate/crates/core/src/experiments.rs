//! Reproducible sampled-window experiments.
//!
//! Every experiment draws window starts with a counter-keyed generator
//! (one independent stream per window index), fans the windows out across
//! a thread pool, and aggregates in index order, so results depend only on
//! the configuration and seed, never on scheduling.

use std::path::PathBuf;

use num_complex::Complex64;
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::empirics::{
    mean_exp_theta_omega, sup_distance, EmpiricalCdf, SampleMode, FULL_ENUMERATION_CAP,
};
use crate::error::{param_err, Result};
use crate::ladder::{complement_density, default_ladder, DensityReport, Ladder};
use crate::sieve::{isqrt, window_histogram, PrimeTable, Window};
use crate::theory::dist::{CorrectedCdf, NormalCdf};
use crate::theory::{pik_prediction, sd_mean, TheoryParams};

/// Common experiment parameters.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub x: u64,
    pub h: u64,
    pub samples: u64,
    pub seed: u64,
    /// Directory for persisted prime tables, if any.
    pub prime_cache: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(x: u64, h: u64, samples: u64, seed: u64) -> Self {
        Self {
            x,
            h,
            samples,
            seed,
            prime_cache: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.x < 20 {
            return param_err(format!("X must be >= 20, got {}", self.x));
        }
        if self.h < 2 || self.h > self.x {
            return param_err(format!(
                "h must satisfy 2 <= h <= X, got h = {}, X = {}",
                self.h, self.x
            ));
        }
        if self.samples < 1 {
            return param_err("need at least one sample");
        }
        Ok(())
    }

    fn base_table(&self) -> Result<PrimeTable> {
        PrimeTable::load_or_build(isqrt(2 * self.x) + 1, self.prime_cache.as_deref())
    }
}

/// Window start for `(seed, index)`: uniform integer in `[X, 2X - h]`,
/// drawn from an index-keyed stream so workers never share generator state.
pub fn window_start(seed: u64, index: u64, x: u64, h: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    Uniform::new_inclusive(x, 2 * x - h).sample(&mut rng)
}

/// Exact order statistics of a batch of per-window scalars.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub q10: f64,
    pub q50: f64,
    pub q90: f64,
    /// Fraction of values strictly above the reporting threshold.
    pub exceptional_fraction: f64,
    pub threshold: f64,
}

impl Summary {
    pub fn from_values(values: &[f64], threshold: f64) -> Self {
        assert!(!values.is_empty());
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite summaries"));
        let n = sorted.len();
        let rank = |q: f64| -> f64 {
            let r = (q * n as f64).ceil() as usize;
            sorted[r.clamp(1, n) - 1]
        };
        Summary {
            mean: sorted.iter().sum::<f64>() / n as f64,
            q10: rank(0.10),
            q50: rank(0.50),
            q90: rank(0.90),
            exceptional_fraction: sorted.iter().filter(|&&v| v > threshold).count() as f64
                / n as f64,
            threshold,
        }
    }
}

// ---------------------------------------------------------------------------
// Distribution-law experiment: sup-discrepancy of sampled windows.

#[derive(Debug, Clone)]
pub struct Theorem1Config {
    pub base: ExperimentConfig,
    /// Reporting threshold for the exceptional fraction.
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem1Window {
    pub index: u64,
    pub x_start: u64,
    /// Sup-discrepancy against the corrected law Φ_X.
    pub disc_phi_x: f64,
    /// Sup-discrepancy against the plain normal law Φ, for reference.
    pub disc_phi: f64,
}

#[derive(Debug, Clone)]
pub struct Theorem1Run {
    pub windows: Vec<Theorem1Window>,
    pub corrected: Summary,
    pub uncorrected: Summary,
}

pub fn run_theorem1(cfg: &Theorem1Config) -> Result<Theorem1Run> {
    cfg.base.validate()?;
    let (x, h) = (cfg.base.x, cfg.base.h);
    let params = TheoryParams::new(x)?;
    let corrected = CorrectedCdf::new(params);
    let normal = NormalCdf;
    let base = cfg.base.base_table()?;

    let windows: Vec<Theorem1Window> = (0..cfg.base.samples)
        .into_par_iter()
        .map(|index| -> Result<Theorem1Window> {
            let x_start = window_start(cfg.base.seed, index, x, h);
            let w = Window::new(x_start, h)?;
            let hist = window_histogram(&w, &base)?;
            let f = EmpiricalCdf::from_histogram(&hist, h, &params);
            Ok(Theorem1Window {
                index,
                x_start,
                disc_phi_x: sup_distance(&f, &corrected),
                disc_phi: sup_distance(&f, &normal),
            })
        })
        .collect::<Result<_>>()?;

    let disc_x: Vec<f64> = windows.iter().map(|w| w.disc_phi_x).collect();
    let disc: Vec<f64> = windows.iter().map(|w| w.disc_phi).collect();
    Ok(Theorem1Run {
        corrected: Summary::from_values(&disc_x, cfg.threshold),
        uncorrected: Summary::from_values(&disc, cfg.threshold),
        windows,
    })
}

// ---------------------------------------------------------------------------
// Local-law experiment: window counts of ω(n) = k against the prediction.

#[derive(Debug, Clone)]
pub struct Theorem2Config {
    pub base: ExperimentConfig,
    pub k: u32,
    /// Ratio band `[lo, hi]` for the in-band fraction.
    pub band: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem2Window {
    pub index: u64,
    pub x_start: u64,
    pub count: u64,
    pub prediction: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct Theorem2Run {
    pub windows: Vec<Theorem2Window>,
    pub ratios: Summary,
    pub band_fraction: f64,
    /// Set when `|k - T|` exceeds `2√T`: the prediction is outside its
    /// comfortable range.
    pub warning: Option<String>,
}

pub fn run_theorem2(cfg: &Theorem2Config) -> Result<Theorem2Run> {
    cfg.base.validate()?;
    if cfg.k < 1 {
        return param_err("k must be >= 1");
    }
    let (x, h) = (cfg.base.x, cfg.base.h);
    let params = TheoryParams::new(x)?;
    let prediction = pik_prediction(x, h, cfg.k)?;
    let base = cfg.base.base_table()?;

    let warning = {
        let dev = (cfg.k as f64 - params.t()).abs();
        (dev > 2.0 * params.sqrt_t()).then(|| {
            format!(
                "|k - log log X| = {dev:.3} exceeds 2 sqrt(log log X) = {:.3}",
                2.0 * params.sqrt_t()
            )
        })
    };

    let k = cfg.k as usize;
    let windows: Vec<Theorem2Window> = (0..cfg.base.samples)
        .into_par_iter()
        .map(|index| -> Result<Theorem2Window> {
            let x_start = window_start(cfg.base.seed, index, x, h);
            let w = Window::new(x_start, h)?;
            let hist = window_histogram(&w, &base)?;
            let count = hist.get(k).copied().unwrap_or(0);
            Ok(Theorem2Window {
                index,
                x_start,
                count,
                prediction,
                ratio: count as f64 / prediction,
            })
        })
        .collect::<Result<_>>()?;

    let ratios: Vec<f64> = windows.iter().map(|w| w.ratio).collect();
    let in_band = ratios
        .iter()
        .filter(|&&r| r >= cfg.band.0 && r <= cfg.band.1)
        .count() as f64
        / ratios.len() as f64;
    Ok(Theorem2Run {
        ratios: Summary::from_values(&ratios, cfg.band.1),
        band_fraction: in_band,
        warning,
        windows,
    })
}

// ---------------------------------------------------------------------------
// Mean-comparison experiment: window vs dyadic means of e^{iθ(τ)ω(n)}.

/// The frequency map applied inside the integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaMap {
    /// θ(τ) = τ/√T: the scaling used by the distribution-law argument.
    TauOverSqrtT,
    /// θ(τ) = τ.
    Identity,
}

impl ThetaMap {
    pub fn apply(&self, tau: f64, params: &TheoryParams) -> f64 {
        match self {
            ThetaMap::TauOverSqrtT => tau / params.sqrt_t(),
            ThetaMap::Identity => tau,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ThetaMap::TauOverSqrtT => "tau-over-sqrt-t",
            ThetaMap::Identity => "identity",
        }
    }
}

/// Points per decade per side of the geometric τ-grid.
pub const TAU_POINTS_PER_DECADE: usize = 64;
/// Unit-circle grid order for the contour integral (> 4 · max ω).
pub const CIRCLE_POINTS: usize = 64;

#[derive(Debug, Clone)]
pub struct Prop1Config {
    pub base: ExperimentConfig,
    pub a: f64,
    pub b: f64,
    /// Reporting-only parameter of the bound shape; recorded, not used.
    pub delta: f64,
    pub theta_map: ThetaMap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prop1Window {
    pub index: u64,
    pub x_start: u64,
    /// ∫_{I_{A,B}} |window mean - dyadic mean| dτ/|τ|.
    pub frequency_integral: f64,
    /// ∮_{|z|=1} |window mean - dyadic mean| |dz|.
    pub circle_integral: f64,
}

#[derive(Debug, Clone)]
pub struct Prop1Run {
    pub windows: Vec<Prop1Window>,
    pub frequency: Summary,
    pub circle: Summary,
    /// Positive half of the τ-grid (the negative half mirrors it).
    pub tau_grid: Vec<f64>,
}

/// Geometric grid over `[1/B, A]`, 64 points per decade, endpoint pinned.
pub fn geometric_tau_grid(a: f64, b: f64) -> Vec<f64> {
    let lo = (1.0 / b).log10();
    let hi = a.log10();
    let steps = ((hi - lo) * TAU_POINTS_PER_DECADE as f64).ceil() as usize;
    let mut grid: Vec<f64> = (0..=steps)
        .map(|i| 10f64.powf(lo + i as f64 / TAU_POINTS_PER_DECADE as f64))
        .take_while(|&t| t < a * (1.0 - 1e-12))
        .collect();
    grid.push(a);
    grid
}

pub fn run_prop1(cfg: &Prop1Config) -> Result<Prop1Run> {
    cfg.base.validate()?;
    if cfg.a <= 1.0 || cfg.b <= 1.0 {
        return param_err("A and B must exceed 1");
    }
    let (x, h) = (cfg.base.x, cfg.base.h);
    if x > FULL_ENUMERATION_CAP {
        return param_err(format!(
            "the dyadic reference requires X <= 1e8, got {x}"
        ));
    }
    let params = TheoryParams::new(x)?;
    let base = cfg.base.base_table()?;
    let tau_grid = geometric_tau_grid(cfg.a, cfg.b);

    // Dyadic reference, computed once and shared read-only.
    let dyadic_hist = window_histogram(&Window::dyadic(x)?, &base)?;
    let thetas: Vec<f64> = tau_grid
        .iter()
        .map(|&tau| cfg.theta_map.apply(tau, &params))
        .collect();
    let dyadic_freq: Vec<Complex64> = thetas
        .iter()
        .map(|&th| mean_exp_theta_omega(&dyadic_hist, x, th))
        .collect();
    let circle_angles: Vec<f64> = (0..CIRCLE_POINTS)
        .map(|m| 2.0 * std::f64::consts::PI * m as f64 / CIRCLE_POINTS as f64)
        .collect();
    let dyadic_circle: Vec<Complex64> = circle_angles
        .iter()
        .map(|&th| mean_exp_theta_omega(&dyadic_hist, x, th))
        .collect();
    let log_steps: Vec<f64> = tau_grid.windows(2).map(|w| (w[1] / w[0]).ln()).collect();

    let windows: Vec<Prop1Window> = (0..cfg.base.samples)
        .into_par_iter()
        .map(|index| -> Result<Prop1Window> {
            let x_start = window_start(cfg.base.seed, index, x, h);
            let w = Window::new(x_start, h)?;
            let hist = window_histogram(&w, &base)?;

            // |window - dyadic| at the grid frequencies; the map is odd in
            // τ and the data real, so the two sides of I_{A,B} contribute
            // equal integrands: evaluate once, weight twice.
            let diffs: Vec<f64> = thetas
                .iter()
                .zip(&dyadic_freq)
                .map(|(&th, &dy)| (mean_exp_theta_omega(&hist, h, th) - dy).norm())
                .collect();
            let mut freq_integral = 0.0;
            for (i, &du) in log_steps.iter().enumerate() {
                freq_integral += 0.5 * (diffs[i] + diffs[i + 1]) * du;
            }
            freq_integral *= 2.0;

            let mut circle_integral = 0.0;
            for (m, &th) in circle_angles.iter().enumerate() {
                let diff = (mean_exp_theta_omega(&hist, h, th) - dyadic_circle[m]).norm();
                circle_integral += diff * 2.0 * std::f64::consts::PI / CIRCLE_POINTS as f64;
            }

            Ok(Prop1Window {
                index,
                x_start,
                frequency_integral: freq_integral,
                circle_integral,
            })
        })
        .collect::<Result<_>>()?;

    let freq: Vec<f64> = windows.iter().map(|w| w.frequency_integral).collect();
    let circ: Vec<f64> = windows.iter().map(|w| w.circle_integral).collect();
    Ok(Prop1Run {
        frequency: Summary::from_values(&freq, f64::INFINITY),
        circle: Summary::from_values(&circ, f64::INFINITY),
        tau_grid,
        windows,
    })
}

// ---------------------------------------------------------------------------
// Mean-value check against the Selberg–Delange prediction.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdCheckRow {
    pub t: f64,
    pub empirical: Complex64,
    pub theory: Complex64,
    pub rel_err: f64,
    /// The theoretical relative-error scale 1/log X.
    pub error_scale: f64,
}

/// Full-enumeration dyadic means of `e^{itω(n)}` against the prediction.
pub fn run_sd_check(x: u64, ts: &[f64], prime_cache: Option<&std::path::Path>) -> Result<Vec<SdCheckRow>> {
    if x > FULL_ENUMERATION_CAP {
        return param_err(format!("full enumeration requires X <= 1e8, got {x}"));
    }
    let params = TheoryParams::new(x)?;
    let base = PrimeTable::load_or_build(isqrt(2 * x) + 1, prime_cache)?;
    let hist = window_histogram(&Window::dyadic(x)?, &base)?;
    let scale = 1.0 / params.log_x();
    Ok(ts
        .iter()
        .map(|&t| {
            let empirical = mean_exp_theta_omega(&hist, x, t);
            let theory = sd_mean(t, &params).value;
            SdCheckRow {
                t,
                empirical,
                theory,
                rel_err: (empirical / theory - 1.0).norm(),
                error_scale: scale,
            }
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Ladder-density experiment.

#[derive(Debug, Clone)]
pub struct LadderDensityConfig {
    pub x: u64,
    pub h: u64,
    pub delta: f64,
    pub mode: SampleMode,
}

#[derive(Debug, Clone)]
pub struct LadderDensityRun {
    pub ladder: Ladder,
    pub report: DensityReport,
    /// The sieve bound shape log P₁ / log Q₁.
    pub bound_shape: f64,
}

pub fn run_ladder_density(cfg: &LadderDensityConfig) -> Result<LadderDensityRun> {
    let ladder = default_ladder(cfg.x, cfg.h, cfg.delta)?;
    let report = complement_density(cfg.x, &ladder, cfg.mode)?;
    let bound_shape = ladder
        .rungs()
        .first()
        .map_or(0.0, |r| r.log_p / r.log_q);
    Ok(LadderDensityRun {
        ladder,
        report,
        bound_shape,
    })
}

// ---------------------------------------------------------------------------
// Halász-style diagnostic used by the selftest.

/// Minimal twist distance of `e^{iθω(n)}`-type data over `|t₀| ≤ T₀`
/// together with the observed dyadic mean magnitude at X.
pub fn halasz_consistency(x: u64, theta: f64, t0: f64) -> Result<(f64, f64)> {
    let base = crate::sieve::base_primes(isqrt(2 * x).max(1_000) + 1)?;
    let (m, _arg) = crate::pretentious::halasz_m(theta, 0.0, x, t0, &base)?;
    let hist = window_histogram(&Window::dyadic(x)?, &base)?;
    let mean = mean_exp_theta_omega(&hist, x, theta);
    Ok((m, mean.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_start_is_reproducible_and_in_range() {
        for index in 0..50 {
            let a = window_start(42, index, 1_000_000, 1_000);
            let b = window_start(42, index, 1_000_000, 1_000);
            assert_eq!(a, b);
            assert!((1_000_000..=1_999_000).contains(&a));
        }
        // Different indices decorrelate.
        let starts: std::collections::HashSet<u64> =
            (0..50).map(|i| window_start(42, i, 1_000_000, 1_000)).collect();
        assert!(starts.len() > 40);
        // Degenerate range when h = X.
        assert_eq!(window_start(7, 3, 500, 500), 500);
    }

    #[test]
    fn summary_order_statistics() {
        let values: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let s = Summary::from_values(&values, 90.0);
        assert_eq!(s.q10, 10.0);
        assert_eq!(s.q50, 50.0);
        assert_eq!(s.q90, 90.0);
        assert!((s.mean - 50.5).abs() < 1e-12);
        assert!((s.exceptional_fraction - 0.10).abs() < 1e-12);
    }

    #[test]
    fn theorem1_rejects_bad_config() {
        let cfg = Theorem1Config {
            base: ExperimentConfig::new(1_000, 2_000, 4, 1),
            threshold: 0.1,
        };
        assert!(run_theorem1(&cfg).is_err());
    }

    #[test]
    fn theorem1_single_window_reproducible() {
        let cfg = Theorem1Config {
            base: ExperimentConfig::new(100_000, 500, 3, 12345),
            threshold: 0.1,
        };
        let a = run_theorem1(&cfg).unwrap();
        let b = run_theorem1(&cfg).unwrap();
        for (wa, wb) in a.windows.iter().zip(&b.windows) {
            assert_eq!(wa.x_start, wb.x_start);
            assert_eq!(wa.disc_phi_x.to_bits(), wb.disc_phi_x.to_bits());
            assert_eq!(wa.disc_phi.to_bits(), wb.disc_phi.to_bits());
        }
    }

    #[test]
    fn theorem2_k_one_counts_primes() {
        // With k = 1 the count is #(prime powers) ≈ #(primes) in the window.
        let cfg = Theorem2Config {
            base: ExperimentConfig::new(1_000_000, 10_000, 2, 9),
            k: 1,
            band: (0.5, 2.0),
        };
        let run = run_theorem2(&cfg).unwrap();
        for w in &run.windows {
            // ratio near 1: prediction h/log X.
            assert!(w.ratio > 0.5 && w.ratio < 2.0, "ratio {}", w.ratio);
        }
        // |1 - T| = 1.63 is inside 2√T ≈ 3.24 at X = 1e6: no warning.
        assert!(run.warning.is_none());
    }

    #[test]
    fn theorem2_warns_far_from_typical_k() {
        let cfg = Theorem2Config {
            base: ExperimentConfig::new(1_000_000, 1_000, 1, 9),
            k: 10,
            band: (0.5, 2.0),
        };
        assert!(run_theorem2(&cfg).unwrap().warning.is_some());
    }

    #[test]
    fn theorem2_rejects_k_zero() {
        let cfg = Theorem2Config {
            base: ExperimentConfig::new(1_000_000, 10_000, 2, 9),
            k: 0,
            band: (0.5, 2.0),
        };
        assert!(run_theorem2(&cfg).is_err());
    }

    #[test]
    fn prop1_self_comparison_vanishes() {
        // h = X: the only window is the dyadic block itself.
        let cfg = Prop1Config {
            base: ExperimentConfig::new(10_000, 10_000, 2, 5),
            a: 10.0,
            b: 10.0,
            delta: 0.05,
            theta_map: ThetaMap::TauOverSqrtT,
        };
        let run = run_prop1(&cfg).unwrap();
        for w in &run.windows {
            assert!(w.frequency_integral <= 1e-6);
            assert!(w.circle_integral <= 1e-6);
        }
    }

    #[test]
    fn prop1_rejects_bad_bounds() {
        let cfg = Prop1Config {
            base: ExperimentConfig::new(10_000, 100, 2, 5),
            a: 0.5,
            b: 10.0,
            delta: 0.05,
            theta_map: ThetaMap::TauOverSqrtT,
        };
        assert!(run_prop1(&cfg).is_err());
    }

    #[test]
    fn tau_grid_shape() {
        let grid = geometric_tau_grid(10.0, 10.0);
        assert!((grid[0] - 0.1).abs() < 1e-15);
        assert_eq!(*grid.last().unwrap(), 10.0);
        // Two decades at 64 points each.
        assert!(grid.len() >= 128 && grid.len() <= 131);
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn sd_check_zero_t_exact() {
        let rows = run_sd_check(10_000, &[0.0, 0.4, -0.4], None).unwrap();
        // Empirical mean at t = 0 is exactly 1; the prediction is A(1) = 1
        // up to the rounding drift of a 78k-factor product.
        assert!(rows[0].rel_err < 1e-12);
        // Symmetry under t -> -t.
        assert!((rows[1].rel_err - rows[2].rel_err).abs() < 1e-13);
    }

    #[test]
    fn ladder_density_modes_agree() {
        let full = run_ladder_density(&LadderDensityConfig {
            x: 1_000_000,
            h: 10_000,
            delta: 0.4,
            mode: SampleMode::Full,
        })
        .unwrap();
        let sampled = run_ladder_density(&LadderDensityConfig {
            x: 1_000_000,
            h: 10_000,
            delta: 0.4,
            mode: SampleMode::Sampled {
                count: 20_000,
                seed: 11,
            },
        })
        .unwrap();
        assert_eq!(full.report.predicted, sampled.report.predicted);
        assert!(
            (full.report.measured - sampled.report.measured).abs()
                <= 3.0 * sampled.report.stderr,
            "full {} vs sampled {} (stderr {})",
            full.report.measured,
            sampled.report.measured,
            sampled.report.stderr
        );
    }
}
