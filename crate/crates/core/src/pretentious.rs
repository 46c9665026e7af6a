//! Pretentious distances between twisted multiplicative functions, the
//! Halász-type mean bound, the bounded prime sum behind the zero-free
//! region, and the restricted Dirichlet sum R_{v,H}.

use num_complex::Complex64;

use crate::error::{param_err, Result};
use crate::ladder::{window_in_s, Ladder};
use crate::sieve::{base_primes, isqrt, omega_window, primes_in_range, PrimeTable, Window};

/// A comparison pair: the constant-on-primes function `p ↦ e^{iθ}` against
/// the archimedean twist `p ↦ p^{iα}`, optionally restricted to primes in
/// an interval `(a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwistSpec {
    pub theta: f64,
    pub alpha: f64,
    pub restriction: Option<(f64, f64)>,
}

impl TwistSpec {
    pub fn new(theta: f64, alpha: f64) -> Self {
        Self {
            theta,
            alpha,
            restriction: None,
        }
    }

    pub fn restricted(theta: f64, alpha: f64, a: f64, b: f64) -> Self {
        Self {
            theta,
            alpha,
            restriction: Some((a, b)),
        }
    }
}

fn sum_over_primes<F: FnMut(u64) -> f64>(
    lo_exclusive: u64,
    hi_inclusive: u64,
    base: &PrimeTable,
    mut term: F,
) -> Result<f64> {
    // Kahan summation; the terms decay like 1/p over up to ~5e7 primes.
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut add = |v: f64| {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    };
    if hi_inclusive <= base.limit() {
        for &p in base.range_inclusive(lo_exclusive + 1, hi_inclusive) {
            add(term(p));
        }
    } else {
        // Stream segments; needs base.limit^2 >= hi.
        for p in primes_in_range(lo_exclusive, hi_inclusive, base)? {
            add(term(p));
        }
    }
    Ok(sum)
}

/// Squared pretentious distance
/// `𝔻² = Σ_{p ≤ x, p in restriction} (1 - cos(θ - α log p)) / p`.
pub fn distance_sq(spec: &TwistSpec, x: u64, base: &PrimeTable) -> Result<f64> {
    if x > 1_000_000_000 {
        return param_err(format!("distance cutoff capped at 1e9, got {x}"));
    }
    let (lo, hi) = match spec.restriction {
        Some((a, b)) => {
            let lo = a.max(0.0).floor() as u64;
            let hi = b.min(x as f64).floor() as u64;
            (lo, hi)
        }
        None => (0, x),
    };
    if lo >= hi {
        return Ok(0.0);
    }
    let covered = base.limit() >= hi
        || base
            .limit()
            .checked_mul(base.limit())
            .map_or(true, |sq| sq >= hi);
    if !covered {
        return param_err(format!(
            "base table limit {} insufficient for primes up to {hi}",
            base.limit()
        ));
    }
    let (theta, alpha) = (spec.theta, spec.alpha);
    sum_over_primes(lo, hi, base, |p| {
        let pf = p as f64;
        (1.0 - (theta - alpha * pf.ln()).cos()) / pf
    })
}

/// Outcome of the restricted distance lower-bound evaluation: both sides
/// are reported, no inequality is asserted (the bounded error term of the
/// statement swallows everything at practical sizes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceBoundCheck {
    /// Distance restricted to `(exp((log x)^{2/3+ε}), exp((log x)^{1-1/48})]`.
    pub lhs: f64,
    /// `(1/3 - 1/48 - ε) log log x`.
    pub rhs: f64,
    /// The restriction interval actually used.
    pub interval: (f64, f64),
}

/// Fixed ε for the restricted lower-bound check.
pub const DISTANCE_EPSILON: f64 = 0.01;

pub fn distance_lower_bound_check(theta: f64, alpha: f64, x: u64) -> Result<DistanceBoundCheck> {
    let log_x = (x as f64).ln();
    if log_x <= 1.0 {
        return param_err("x too small for the exponent formulas");
    }
    let lo = (log_x.powf(2.0 / 3.0 + DISTANCE_EPSILON)).exp();
    let hi = (log_x.powf(1.0 - 1.0 / 48.0)).exp();
    if lo >= hi {
        return param_err(format!(
            "degenerate restricted interval ({lo}, {hi}] at x = {x}"
        ));
    }
    let base = base_primes((isqrt(hi as u64) + 2).max(3))?;
    let spec = TwistSpec::restricted(theta, alpha, lo, hi);
    let lhs = distance_sq(&spec, x.max(hi as u64 + 1), &base)?;
    let rhs = (1.0 / 3.0 - 1.0 / 48.0 - DISTANCE_EPSILON) * log_x.ln();
    Ok(DistanceBoundCheck {
        lhs,
        rhs,
        interval: (lo, hi),
    })
}

/// Diagnostic prime sum `Σ_{a < p ≤ b} p^{-1-iα}`.
pub fn korobov_sum(alpha: f64, a: u64, b: u64, base: &PrimeTable) -> Result<Complex64> {
    if b > 1_000_000_000 {
        return param_err(format!("korobov sum capped at 1e9, got {b}"));
    }
    if a >= b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut re = 0.0f64;
    let mut im = 0.0f64;
    let mut each = |p: u64| {
        let pf = p as f64;
        let phase = -alpha * pf.ln();
        re += phase.cos() / pf;
        im += phase.sin() / pf;
    };
    if b <= base.limit() {
        for &p in base.range_inclusive(a + 1, b) {
            each(p);
        }
    } else {
        for p in primes_in_range(a, b, base)? {
            each(p);
        }
    }
    Ok(Complex64::new(re, im))
}

/// `(1 + m) e^{-m} + 1/T₀`.
pub fn halasz_bound(m: f64, t0: f64) -> Result<f64> {
    if t0 < 1.0 {
        return param_err(format!("T0 must be >= 1, got {t0}"));
    }
    if m < 0.0 {
        return param_err(format!("m must be >= 0, got {m}"));
    }
    Ok((1.0 + m) * (-m).exp() + 1.0 / t0)
}

/// Minimal squared distance of `p ↦ e^{iθ}` to the twists `n^{i(t+t₀)}`
/// over a grid of `⌈4 T₀⌉` equally spaced points `t₀ ∈ [-T₀, T₀]`.
/// Returns `(m, argmin t₀)`.
pub fn halasz_m(theta: f64, t: f64, x: u64, t0: f64, base: &PrimeTable) -> Result<(f64, f64)> {
    if t0 < 1.0 {
        return param_err(format!("T0 must be >= 1, got {t0}"));
    }
    let points = (4.0 * t0).ceil() as usize;
    let points = points.max(2);
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..points {
        let t0_i = -t0 + 2.0 * t0 * i as f64 / (points as f64 - 1.0);
        let spec = TwistSpec::new(theta, t + t0_i);
        let d = distance_sq(&spec, x, base)?;
        if d < best.0 {
            best = (d, t0_i);
        }
    }
    Ok(best)
}

/// Parameters of the restricted Dirichlet sum
/// `R_{v,H}(1 + iu) = Σ_{n ∈ [Xe^{-v/H}, 2Xe^{-v/H}], n ∈ 𝒮}
///     e^{iθω(n)} n^{-1-iu} / (#{p ∈ [P,Q] : p | n} + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RvhParams {
    pub x: u64,
    pub u: f64,
    pub v: f64,
    /// The smoothing resolution H.
    pub h_resolution: f64,
    pub log_p: f64,
    pub log_q: f64,
    pub theta: f64,
    /// Treat `P > Q` as an empty prime interval (weight denominator 1)
    /// instead of rejecting it. The standard parameter shapes produce
    /// `P > Q` below astronomical X, so diagnostics need this escape.
    pub allow_empty_interval: bool,
}

impl RvhParams {
    /// The standard choices `P = exp((log X)^{1-1/48})`,
    /// `Q = exp(log X / log log X)`, `H = (log X)^{1/48}`.
    pub fn standard(x: u64, u: f64, v: f64, theta: f64) -> Self {
        let log_x = (x as f64).ln();
        Self {
            x,
            u,
            v,
            h_resolution: log_x.powf(1.0 / 48.0),
            log_p: log_x.powf(1.0 - 1.0 / 48.0),
            log_q: log_x / log_x.ln(),
            theta,
            allow_empty_interval: false,
        }
    }
}

pub fn r_vh(params: &RvhParams, ladder: &Ladder) -> Result<Complex64> {
    if params.h_resolution <= 0.0 {
        return param_err("H must be positive");
    }
    if params.log_p > params.log_q && !params.allow_empty_interval {
        return param_err(format!(
            "P > Q (log P = {}, log Q = {}); pass allow_empty_interval to treat as empty",
            params.log_p, params.log_q
        ));
    }
    let shrink = (-params.v / params.h_resolution).exp();
    let lo = (params.x as f64 * shrink).ceil() as u64;
    let hi = (2.0 * params.x as f64 * shrink).floor() as u64;
    if lo > hi || hi == 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let lo = lo.max(1);
    let w = Window::new(lo - 1, hi - lo + 1)?;

    let base_limit = (isqrt(hi) + 2)
        .max(ladder.max_q().ceil() as u64)
        .max(params.log_q.exp().ceil().min(1e18) as u64)
        .max(3);
    let base = base_primes(base_limit)?;

    let slice = omega_window(&w, &base)?;
    let members = window_in_s(&w, ladder, &base)?;

    // Count prime divisors in [P, Q] per n by striding the interval primes.
    let h = w.len() as usize;
    let mut pq_count = vec![0u32; h];
    if params.log_p <= params.log_q {
        let plo = params.log_p.exp().ceil().max(2.0) as u64;
        let phi = params.log_q.exp().floor() as u64;
        if plo <= phi {
            for &p in base.range_inclusive(plo, phi) {
                let mut m = (w.start() / p + 1) * p;
                while m <= w.end() {
                    pq_count[(m - w.start() - 1) as usize] += 1;
                    m += p;
                }
            }
        }
    }

    let mut sum = Complex64::new(0.0, 0.0);
    for i in 0..h {
        if !members[i] {
            continue;
        }
        let n = w.start() + 1 + i as u64;
        let nf = n as f64;
        let phase = params.theta * slice.omegas()[i] as f64 - params.u * nf.ln();
        sum += Complex64::from_polar(1.0 / nf, phase) / (pq_count[i] as f64 + 1.0);
    }
    Ok(sum)
}
