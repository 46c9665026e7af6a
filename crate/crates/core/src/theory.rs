//! Exact implementations of the limit-law side: the Mertens constant c₁,
//! the normal law Φ, the corrected law Φ_X and its characteristic function
//! φ_X = e^{-τ²/2}(1 + (iτc₁ - iτ³/6)/√T) + Δ_X(τ), the Euler-product
//! function A(z), the Selberg–Delange mean prediction, and the local-law
//! prediction for π_k counts.

pub mod dist;
pub mod gamma;

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::empirics::CharCurve;
use crate::error::{param_err, Result};
use crate::sieve::{base_primes, PrimeTable};
use dist::DistributionFn;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Default prime cutoff for the Euler products behind c₁ and A(z).
pub const DEFAULT_PRIME_CUTOFF: u64 = 1_000_000;

/// Scale parameters: `T = log log X`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryParams {
    x: u64,
    t: f64,
}

impl TheoryParams {
    pub fn new(x: u64) -> Result<Self> {
        if x < 20 {
            return param_err(format!("X must be >= 20, got {x}"));
        }
        let t = (x as f64).ln().ln();
        Ok(Self { x, t })
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    /// `T = log log X`.
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn sqrt_t(&self) -> f64 {
        self.t.sqrt()
    }

    /// `log X`.
    pub fn log_x(&self) -> f64 {
        (self.x as f64).ln()
    }
}

fn shared_cutoff_table() -> &'static PrimeTable {
    static TABLE: OnceLock<PrimeTable> = OnceLock::new();
    TABLE.get_or_init(|| base_primes(DEFAULT_PRIME_CUTOFF).expect("default cutoff is valid"))
}

/// An estimate together with a rigorous bound on the neglected tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEstimate {
    pub value: f64,
    pub tail_bound: f64,
}

/// The Mertens constant `c₁ = γ + Σ_p (log(1 - 1/p) + 1/p)`, with the sum
/// truncated at `prime_cutoff`. Every term is negative, so the truncated
/// value decreases toward c₁ as the cutoff grows; the reported tail bound
/// is `Σ_{p > cutoff} 1/(2p(p-1)) <= 1/(2 cutoff)`.
pub fn mertens_constant(prime_cutoff: u64) -> Result<TailEstimate> {
    if prime_cutoff < 10_000 {
        return param_err(format!("prime cutoff must be >= 1e4, got {prime_cutoff}"));
    }
    let table = base_primes(prime_cutoff)?;
    Ok(mertens_constant_with(&table))
}

/// Same sum evaluated against a caller-supplied table (cutoff = its limit).
pub fn mertens_constant_with(table: &PrimeTable) -> TailEstimate {
    // Kahan summation: the terms span ten orders of magnitude.
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &p in table.primes() {
        let inv = 1.0 / p as f64;
        let term = (-inv).ln_1p() + inv;
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    TailEstimate {
        value: EULER_GAMMA + sum,
        tail_bound: 0.5 / table.limit() as f64,
    }
}

/// c₁ at the default cutoff, computed once and shared.
pub fn mertens_c1() -> f64 {
    static C1: OnceLock<f64> = OnceLock::new();
    *C1.get_or_init(|| mertens_constant_with(shared_cutoff_table()).value)
}

/// Standard normal distribution function, absolute error <= 1e-12.
pub fn phi(y: f64) -> f64 {
    0.5 * libm::erfc(-y / std::f64::consts::SQRT_2)
}

/// Right-continuous value of the corrected law Φ_X at `y`.
/// Both one-sided values are available through [`dist::CorrectedCdf`].
pub fn phi_x(y: f64, p: &TheoryParams) -> f64 {
    dist::CorrectedCdf::new(*p).value(y)
}

/// Truncation order for Δ_X that pushes the omitted tail below 1e-15
/// for |τ| <= 10√T.
pub fn default_delta_trunc(tau: f64, p: &TheoryParams) -> u32 {
    (tau.abs() / (2.0 * std::f64::consts::PI * p.sqrt_t())).ceil() as u32 + 5
}

/// The oscillatory correction
/// `Δ_X(τ) = (-iτ / 2π√T) Σ_{ν != 0} e^{2iπνT}/(iν) · e^{-(τ + 2πν√T)²/2}`,
/// truncated to `|ν| <= trunc`.
pub fn delta_x(tau: f64, p: &TheoryParams, trunc: u32) -> Complex64 {
    let t = p.t();
    let sqrt_t = p.sqrt_t();
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut sum = Complex64::new(0.0, 0.0);
    for nu in 1..=trunc as i64 {
        let nu_f = nu as f64;
        // ν and -ν terms, each e^{±2iπνT}/(±iν) with its Gaussian weight.
        let phase = Complex64::from_polar(1.0, two_pi * nu_f * t);
        let g_plus = (-0.5 * (tau + two_pi * nu_f * sqrt_t).powi(2)).exp();
        let g_minus = (-0.5 * (tau - two_pi * nu_f * sqrt_t).powi(2)).exp();
        let i_nu = Complex64::new(0.0, nu_f);
        sum += phase / i_nu * g_plus - phase.conj() / i_nu * g_minus;
    }
    Complex64::new(0.0, -tau / (two_pi * sqrt_t)) * sum
}

/// Δ_X with the default truncation rule.
pub fn delta_x_auto(tau: f64, p: &TheoryParams) -> Complex64 {
    delta_x(tau, p, default_delta_trunc(tau, p))
}

/// Characteristic function of Φ_X:
/// `φ_X(τ) = e^{-τ²/2} (1 + (iτc₁ - iτ³/6)/√T) + Δ_X(τ)`.
pub fn char_phi_x(tau: f64, p: &TheoryParams) -> Complex64 {
    let c1 = mertens_c1();
    let gauss = (-0.5 * tau * tau).exp();
    let linear = Complex64::new(0.0, tau * c1 - tau.powi(3) / 6.0) / p.sqrt_t();
    gauss * (Complex64::new(1.0, 0.0) + linear) + delta_x_auto(tau, p)
}

/// A complex estimate with a rigorous truncation-tail bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexTailEstimate {
    pub value: Complex64,
    pub tail_bound: f64,
}

/// `A(z) = Γ(z)^{-1} ∏_p (1 + z/(p-1)) (1 - 1/p)^z` with the Euler product
/// truncated at `prime_cutoff`. Domain |z| <= 2.
pub fn a_of_z(z: Complex64, prime_cutoff: u64) -> Result<ComplexTailEstimate> {
    if prime_cutoff < 10_000 {
        return param_err(format!("prime cutoff must be >= 1e4, got {prime_cutoff}"));
    }
    if prime_cutoff == DEFAULT_PRIME_CUTOFF {
        return a_of_z_with(z, shared_cutoff_table());
    }
    let table = base_primes(prime_cutoff)?;
    a_of_z_with(z, &table)
}

/// `A(z)` against a caller-supplied prime table.
pub fn a_of_z_with(z: Complex64, table: &PrimeTable) -> Result<ComplexTailEstimate> {
    if z.norm() > 2.0 {
        return param_err(format!("A(z) requires |z| <= 2, got |z| = {}", z.norm()));
    }
    let mut prod = Complex64::new(1.0, 0.0);
    for &p in table.primes() {
        let pf = p as f64;
        let factor = (Complex64::new(1.0, 0.0) + z / (pf - 1.0)) * (z * (-1.0 / pf).ln_1p()).exp();
        prod *= factor;
    }
    let tail = z.norm() * (z.norm() + 1.0) / table.limit() as f64;
    Ok(ComplexTailEstimate {
        value: gamma::recip_gamma(z) * prod,
        tail_bound: tail,
    })
}

/// Selberg–Delange main term for the dyadic mean of `e^{itω(n)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdMean {
    pub value: Complex64,
    /// Relative size of the neglected remainder, `O(1/log X)`.
    pub rel_error_scale: f64,
}

/// `A(e^{it}) (log X)^{e^{it} - 1}`.
pub fn sd_mean(t: f64, p: &TheoryParams) -> SdMean {
    let z = Complex64::from_polar(1.0, t);
    let a = a_of_z_with(z, shared_cutoff_table()).expect("|e^{it}| = 1 is in the domain");
    // (log X)^{z-1} = exp((z - 1) log log X).
    let value = a.value * ((z - 1.0) * p.t()).exp();
    SdMean {
        value,
        rel_error_scale: 1.0 / p.log_x(),
    }
}

/// Expected count of `n` in a window of length `h` near `X` with
/// `ω(n) = k`: `h / log X · T^{k-1} / (k-1)!`, evaluated in log space.
pub fn pik_prediction(x: u64, h: u64, k: u32) -> Result<f64> {
    if k < 1 {
        return param_err("pi_k prediction requires k >= 1");
    }
    if x < 20 {
        return param_err(format!("X must be >= 20, got {x}"));
    }
    let t = (x as f64).ln().ln();
    let mut log_term = 0.0f64;
    for j in 1..k {
        log_term += t.ln() - (j as f64).ln();
    }
    Ok(h as f64 / (x as f64).ln() * log_term.exp())
}

/// Both sides of the smoothing inequality, reported without any claim
/// about the absolute constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingBound {
    /// `sup |F - G|` over the jump points of both plus a uniform grid.
    pub lhs: f64,
    /// `∫_{-T}^{T} |f(τ) - g(τ)| / |τ| dτ` by trapezoid on the grid.
    pub integral: f64,
    /// `‖G'‖_∞ / T`.
    pub derivative_term: f64,
}

/// Evaluate the smoothing inequality data for distribution pair `(F, G)`
/// with sampled characteristic functions `(f, g)` and parameter `T`.
pub fn smoothing_bound(
    f_dist: &dyn DistributionFn,
    g_dist: &dyn DistributionFn,
    f_curve: &CharCurve,
    g_curve: &CharCurve,
    t_param: f64,
) -> Result<SmoothingBound> {
    if t_param <= 0.0 {
        return param_err("smoothing bound requires T > 0");
    }
    if f_curve.taus() != g_curve.taus() {
        return param_err("characteristic curves must share one τ-grid");
    }
    let taus = f_curve.taus();
    if taus.first().map_or(true, |&lo| lo > -t_param)
        || taus.last().map_or(true, |&hi| hi < t_param)
    {
        return param_err("τ-grid must cover [-T, T]");
    }
    let lhs = crate::empirics::sup_distance(f_dist, g_dist);

    // Trapezoid of |f - g| / |τ| over grid points inside [-T, T];
    // the integrand is taken as 0 at τ = 0 (both transforms equal 1 there
    // for genuine distribution pairs).
    let integrand: Vec<(f64, f64)> = taus
        .iter()
        .zip(f_curve.values().iter().zip(g_curve.values()))
        .filter(|(tau, _)| tau.abs() <= t_param)
        .map(|(&tau, (&fv, &gv))| {
            let val = if tau == 0.0 {
                0.0
            } else {
                (fv - gv).norm() / tau.abs()
            };
            (tau, val)
        })
        .collect();
    let mut integral = 0.0;
    for pair in integrand.windows(2) {
        let (t0, v0) = pair[0];
        let (t1, v1) = pair[1];
        integral += 0.5 * (v0 + v1) * (t1 - t0);
    }

    Ok(SmoothingBound {
        lhs,
        integral,
        derivative_term: g_dist.smooth_derivative_bound() / t_param,
    })
}
