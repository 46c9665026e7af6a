//! The factor-interval system 𝒮: integers of a dyadic block carrying at
//! least one prime factor in each interval `[P_j, Q_j]` of a geometrically
//! growing ladder, together with sieve-density predictions and the exact
//! inclusion–exclusion identity that removes the membership condition.
//!
//! Rung recurrences: `log P_j = j^{4j} (log Q₁)^{j-1} log P₁` and
//! `log Q_j = j^{4j+2} (log Q₁)^j`, kept while `Q_j <= exp(√log X)`.

use num_complex::Complex64;
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::empirics::SampleMode;
use crate::error::{constraint_err, param_err, Result};
use crate::sieve::{base_primes, PrimeTable, Window, SEGMENT_CAP};

/// One factor interval `[P_j, Q_j]`, stored in log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rung {
    pub log_p: f64,
    pub log_q: f64,
}

impl Rung {
    pub fn p(&self) -> f64 {
        self.log_p.exp()
    }

    pub fn q(&self) -> f64 {
        self.log_q.exp()
    }
}

/// The interval system `{[P_j, Q_j]}_{j<=J}` for a dyadic block at `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ladder {
    eta: f64,
    log_x: f64,
    rungs: Vec<Rung>,
    floor_satisfied: bool,
}

impl Ladder {
    /// The empty system (J = 0): membership is vacuous, 𝒮 is everything.
    pub fn empty(log_x: f64, eta: f64) -> Result<Self> {
        check_eta(eta)?;
        check_log_x(log_x)?;
        Ok(Self {
            eta,
            log_x,
            rungs: Vec::new(),
            floor_satisfied: true,
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn log_x(&self) -> f64 {
        self.log_x
    }

    pub fn rungs(&self) -> &[Rung] {
        &self.rungs
    }

    /// Number of rungs J.
    pub fn j(&self) -> usize {
        self.rungs.len()
    }

    /// Whether `(log Q₁)^{40/η} <= P₁` holds. The floor is an asymptotic
    /// requirement; at practical sizes it essentially never holds, so it is
    /// reported rather than enforced.
    pub fn floor_satisfied(&self) -> bool {
        self.floor_satisfied
    }

    /// Largest prime any rung can contain, for sizing prime tables.
    pub fn max_q(&self) -> f64 {
        self.rungs.last().map_or(0.0, |r| r.q())
    }

    /// Flat text record: one `key value` pair per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("eta {:.17e}\n", self.eta));
        s.push_str(&format!("log_x {:.17e}\n", self.log_x));
        s.push_str(&format!("J {}\n", self.j()));
        for (i, r) in self.rungs.iter().enumerate() {
            s.push_str(&format!(
                "rung {} {:.17e} {:.17e}\n",
                i + 1,
                r.log_p,
                r.log_q
            ));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut eta = None;
        let mut log_x = None;
        let mut j = None;
        let mut rungs = Vec::new();
        for line in text.lines() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                ["eta", v] => eta = Some(parse_f64(v)?),
                ["log_x", v] => log_x = Some(parse_f64(v)?),
                ["J", v] => {
                    j = Some(
                        v.parse::<usize>()
                            .map_err(|e| crate::error::Error::Parameter(e.to_string()))?,
                    )
                }
                ["rung", _idx, p, q] => rungs.push(Rung {
                    log_p: parse_f64(p)?,
                    log_q: parse_f64(q)?,
                }),
                [] => {}
                _ => return param_err(format!("unrecognized ladder record line: {line}")),
            }
        }
        let (eta, log_x, j) = match (eta, log_x, j) {
            (Some(e), Some(l), Some(j)) => (e, l, j),
            _ => return param_err("ladder record missing eta, log_x, or J"),
        };
        if rungs.len() != j {
            return param_err("ladder record rung count does not match J");
        }
        check_eta(eta)?;
        check_log_x(log_x)?;
        let floor_satisfied = rungs
            .first()
            .map_or(true, |r| floor_holds(r.log_p, r.log_q, eta));
        Ok(Self {
            eta,
            log_x,
            rungs,
            floor_satisfied,
        })
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|e| crate::error::Error::Parameter(e.to_string()))
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta < 1.0 / 6.0) {
        return constraint_err(format!("eta must lie in (0, 1/6), got {eta}"));
    }
    Ok(())
}

fn check_log_x(log_x: f64) -> Result<()> {
    if !(log_x >= (20.0f64).ln()) {
        return constraint_err(format!("log X must be >= log 20, got {log_x}"));
    }
    Ok(())
}

/// `(log Q₁)^{40/η} <= P₁`, evaluated in log space.
fn floor_holds(log_p1: f64, log_q1: f64, eta: f64) -> bool {
    log_q1 > 0.0 && (40.0 / eta) * log_q1.ln() <= log_p1
}

fn extend_rungs(log_p1: f64, log_q1: f64, cap: f64) -> Vec<Rung> {
    let mut rungs = vec![Rung {
        log_p: log_p1,
        log_q: log_q1,
    }];
    loop {
        let j = (rungs.len() + 1) as f64;
        let log_q = j.powf(4.0 * j + 2.0) * log_q1.powf(j);
        if !(log_q <= cap) {
            break;
        }
        let log_p = j.powf(4.0 * j) * log_q1.powf(j - 1.0) * log_p1;
        rungs.push(Rung { log_p, log_q });
    }
    rungs
}

fn build_from_logs(log_x: f64, log_p1: f64, log_q1: f64, eta: f64, force_first: bool) -> Result<Ladder> {
    check_eta(eta)?;
    check_log_x(log_x)?;
    if !(log_p1 > 0.0) {
        return constraint_err(format!("log P1 must be positive, got {log_p1}"));
    }
    if log_p1 > log_q1 {
        return constraint_err(format!(
            "P1 must not exceed Q1 (log P1 = {log_p1}, log Q1 = {log_q1})"
        ));
    }
    let cap = log_x.sqrt();
    if !force_first && log_q1 > cap {
        return constraint_err(format!(
            "Q1 exceeds exp(sqrt(log X)): log Q1 = {log_q1} > {cap}"
        ));
    }
    Ok(Ladder {
        eta,
        log_x,
        rungs: extend_rungs(log_p1, log_q1, cap),
        floor_satisfied: floor_holds(log_p1, log_q1, eta),
    })
}

/// Maximal ladder from a first interval, enforcing `Q₁ <= exp(√log X)`.
pub fn build_ladder(x: u64, log_p1: f64, log_q1: f64, eta: f64) -> Result<Ladder> {
    build_from_logs((x as f64).ln(), log_p1, log_q1, eta, false)
}

/// As [`build_ladder`] but parameterized directly by `log X`, for scales
/// where X itself is not representable.
pub fn build_ladder_from_logs(log_x: f64, log_p1: f64, log_q1: f64, eta: f64) -> Result<Ladder> {
    build_from_logs(log_x, log_p1, log_q1, eta, false)
}

/// Desk-scale constructor: keeps the first rung even when `Q₁` exceeds the
/// `exp(√log X)` cap (asymptotically required, numerically legitimate).
pub fn explicit_ladder(x: u64, log_p1: f64, log_q1: f64, eta: f64) -> Result<Ladder> {
    build_from_logs((x as f64).ln(), log_p1, log_q1, eta, true)
}

/// Default eta, from the standard parameter choice.
pub const DEFAULT_ETA: f64 = 1.0 / 150.0;

/// The standard parameter choice for window length `h` and threshold `δ`:
/// `Q₁ = min(h, exp(√log X))`; below the cap
/// `P₁ = max(h^{δ/4}, (log h)^{40/η})`, otherwise `P₁ = Q₁^{δ/4}`.
pub fn default_ladder(x: u64, h: u64, delta: f64) -> Result<Ladder> {
    if h < 2 {
        return param_err(format!("h must be >= 2, got {h}"));
    }
    if !(delta > 0.0) {
        return param_err(format!("delta must be positive, got {delta}"));
    }
    let log_x = (x as f64).ln();
    check_log_x(log_x)?;
    let cap = log_x.sqrt();
    let log_h = (h as f64).ln();
    let (log_p1, log_q1) = if log_h <= cap {
        let log_q1 = log_h;
        let floor = (40.0 / DEFAULT_ETA) * log_h.ln();
        let log_p1 = (delta / 4.0 * log_h).max(floor);
        (log_p1, log_q1)
    } else {
        let log_q1 = cap;
        (delta / 4.0 * log_q1, log_q1)
    };
    if log_p1 > log_q1 {
        return constraint_err(format!(
            "infeasible parameters: log P1 = {log_p1} exceeds log Q1 = {log_q1}"
        ));
    }
    build_from_logs(log_x, log_p1, log_q1, DEFAULT_ETA, false)
}

/// Prime bounds of a rung as an inclusive integer interval, empty when no
/// integer lies inside.
fn rung_prime_bounds(r: &Rung) -> Option<(u64, u64)> {
    let lo = r.p().ceil();
    let hi = r.q().floor();
    if lo > hi || hi < 2.0 {
        return None;
    }
    Some((lo.max(2.0) as u64, hi as u64))
}

/// Membership test by direct divisibility: `n ∈ 𝒮` iff every rung contains
/// a prime divisor of `n`. Requires `base.limit >= Q_J`.
pub fn in_s(n: u64, ladder: &Ladder, base: &PrimeTable) -> Result<bool> {
    if (base.limit() as f64) < ladder.max_q() {
        return param_err(format!(
            "base table limit {} below ladder Q_J = {}",
            base.limit(),
            ladder.max_q()
        ));
    }
    for r in ladder.rungs() {
        let Some((lo, hi)) = rung_prime_bounds(r) else {
            return Ok(false); // empty prime interval: no n qualifies
        };
        let mut hit = false;
        for &p in base.range_inclusive(lo, hi) {
            if n % p == 0 {
                hit = true;
                break;
            }
        }
        if !hit {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Vectorized membership over a window: `out[i]` says whether `x + 1 + i`
/// has a prime factor in every rung. Marking is done per rung by striding
/// the rung's primes across the window.
pub fn window_in_s(w: &Window, ladder: &Ladder, base: &PrimeTable) -> Result<Vec<bool>> {
    if (base.limit() as f64) < ladder.max_q() {
        return param_err(format!(
            "base table limit {} below ladder Q_J = {}",
            base.limit(),
            ladder.max_q()
        ));
    }
    let h = w.len() as usize;
    let mut member = vec![true; h];
    let mut marked = vec![false; h.min(SEGMENT_CAP as usize)];
    for r in ladder.rungs() {
        let bounds = rung_prime_bounds(r);
        let mut lo = w.start();
        while lo < w.end() {
            let hi = (lo + SEGMENT_CAP).min(w.end());
            let len = (hi - lo) as usize;
            let off = (lo - w.start()) as usize;
            marked[..len].fill(false);
            if let Some((plo, phi)) = bounds {
                for &p in base.range_inclusive(plo, phi) {
                    let mut m = (lo / p + 1) * p;
                    while m <= hi {
                        marked[(m - lo - 1) as usize] = true;
                        m += p;
                    }
                }
            }
            for i in 0..len {
                member[off + i] &= marked[i];
            }
            lo = hi;
        }
    }
    Ok(member)
}

/// Density report for the complement of 𝒮 in the dyadic block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityReport {
    /// Fraction of `(X, 2X]` without a factor in some rung.
    pub measured: f64,
    /// Independence-style sieve prediction `1 - ∏_j (1 - ∏_p (1 - 1/p))`.
    pub predicted: f64,
    /// Standard error of `measured` (0 in full mode).
    pub stderr: f64,
}

/// Measured vs. predicted density of `(X, 2X] ∖ 𝒮`.
pub fn complement_density(x: u64, ladder: &Ladder, mode: SampleMode) -> Result<DensityReport> {
    // Membership marking only ever strides rung primes, so the table stops
    // at Q_J regardless of X.
    let need = (ladder.max_q().ceil() as u64).max(3);
    let base = base_primes(need)?;

    // Prediction from per-rung sieve densities, rungs treated as independent.
    let mut s_density = 1.0f64;
    for r in ladder.rungs() {
        let mut no_factor = 1.0f64;
        if let Some((lo, hi)) = rung_prime_bounds(r) {
            for &p in base.range_inclusive(lo, hi) {
                no_factor *= 1.0 - 1.0 / p as f64;
            }
        } else {
            no_factor = 1.0; // empty prime interval: nobody has a factor
        }
        s_density *= 1.0 - no_factor;
    }
    let predicted = 1.0 - s_density;

    match mode {
        SampleMode::Full => {
            if x > crate::empirics::FULL_ENUMERATION_CAP {
                return param_err(format!(
                    "full dyadic enumeration capped at X = 1e8, got {x}"
                ));
            }
            let w = Window::dyadic(x)?;
            let member = window_in_s(&w, ladder, &base)?;
            let outside = member.iter().filter(|&&m| !m).count();
            Ok(DensityReport {
                measured: outside as f64 / x as f64,
                predicted,
                stderr: 0.0,
            })
        }
        SampleMode::Sampled { count, seed } => {
            if count < 1_000 {
                return param_err(format!("sampled mode requires count >= 1e3, got {count}"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dist = Uniform::new_inclusive(x + 1, 2 * x);
            let mut outside = 0u64;
            for _ in 0..count {
                let n = dist.sample(&mut rng);
                if !in_s(n, ladder, &base)? {
                    outside += 1;
                }
            }
            let p_hat = outside as f64 / count as f64;
            let stderr = (p_hat * (1.0 - p_hat) / count as f64).sqrt();
            Ok(DensityReport {
                measured: p_hat,
                predicted,
                stderr,
            })
        }
    }
}

/// Both sides of the exact inclusion–exclusion identity
/// `Σ_{n∈𝒮} a_n = Σ_{𝒥 ⊆ {1..J}} (-1)^{#𝒥} Σ_n a_n g_𝒥(n)`, where the
/// totally multiplicative `g_𝒥` kills every n with a prime factor in
/// `∪_{j∈𝒥} [P_j, Q_j]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InclusionExclusion {
    pub lhs: Complex64,
    pub rhs: Complex64,
}

pub fn inclusion_exclusion_check(
    w: &Window,
    ladder: &Ladder,
    weights: &[Complex64],
) -> Result<InclusionExclusion> {
    if weights.len() as u64 != w.len() {
        return param_err(format!(
            "need one weight per window element: {} weights for h = {}",
            weights.len(),
            w.len()
        ));
    }
    let j = ladder.j();
    if j > 20 {
        return param_err(format!("2^J subsets with J = {j} is not tractable"));
    }
    let need = ladder.max_q().ceil().max(3.0) as u64;
    let base = base_primes(need)?;

    // Per-rung "has a factor" flags for each n in the window.
    let h = w.len() as usize;
    let mut has_factor = vec![vec![false; h]; j];
    for (ji, r) in ladder.rungs().iter().enumerate() {
        if let Some((lo, hi)) = rung_prime_bounds(r) {
            for &p in base.range_inclusive(lo, hi) {
                let mut m = (w.start() / p + 1) * p;
                while m <= w.end() {
                    has_factor[ji][(m - w.start() - 1) as usize] = true;
                    m += p;
                }
            }
        }
    }

    let mut lhs = Complex64::new(0.0, 0.0);
    for (i, &a) in weights.iter().enumerate() {
        if (0..j).all(|ji| has_factor[ji][i]) {
            lhs += a;
        }
    }

    let mut rhs = Complex64::new(0.0, 0.0);
    for subset in 0u32..(1u32 << j) {
        let sign = if subset.count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        let mut sub_sum = Complex64::new(0.0, 0.0);
        for (i, &a) in weights.iter().enumerate() {
            // g_𝒥(n) = 0 iff some selected rung divides n.
            let killed = (0..j).any(|ji| subset & (1 << ji) != 0 && has_factor[ji][i]);
            if !killed {
                sub_sum += a;
            }
        }
        rhs += sign * sub_sum;
    }
    Ok(InclusionExclusion { lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_identity_across_rungs() {
        // log P_j / log Q_j = (1/j²) log P₁ / log Q₁. A three-rung system
        // needs log Q₃ = 3^14 (log Q₁)³ below √log X, hence the huge log X.
        let ladder = build_ladder_from_logs(1e16, 1.2, 1.9, 0.1).unwrap();
        assert_eq!(ladder.j(), 3);
        let base_ratio = 1.2 / 1.9;
        for (i, r) in ladder.rungs().iter().enumerate() {
            let j = (i + 1) as f64;
            let expect = base_ratio / (j * j);
            let got = r.log_p / r.log_q;
            assert!(
                ((got - expect) / expect).abs() < 1e-12,
                "rung {}: {got} vs {expect}",
                i + 1
            );
        }
    }

    #[test]
    fn derived_example_j_is_one() {
        // log P₁ = 10, log Q₁ = 20, log X = 250000:
        // log Q₂ = 2^10 · 400 = 409600 > 500 = √log X, so J = 1.
        let ladder = build_ladder_from_logs(250_000.0, 10.0, 20.0, 0.1).unwrap();
        assert_eq!(ladder.j(), 1);
        // And the would-be second rung really does overshoot.
        let log_q2 = 2f64.powi(10) * 400.0;
        assert!(log_q2 > 250_000f64.sqrt());
    }

    #[test]
    fn eta_domain_enforced() {
        assert!(build_ladder(1_000_000, 2.0, 3.0, 1.0 / 6.0).is_err());
        assert!(build_ladder(1_000_000, 2.0, 3.0, 0.3).is_err());
        assert!(build_ladder(1_000_000, 2.0, 3.0, 0.0).is_err());
        assert!(build_ladder(1_000_000, 2.0, 3.0, 0.16).is_ok());
    }

    #[test]
    fn q1_cap_enforced_and_explicit_override() {
        // √log(1e7) ≈ 4.01 < 9.
        assert!(build_ladder(10_000_000, 3.0, 9.0, 0.1).is_err());
        let forced = explicit_ladder(10_000_000, 3.0, 9.0, 0.1).unwrap();
        assert_eq!(forced.j(), 1);
        assert!(!forced.floor_satisfied());
    }

    #[test]
    fn default_ladder_branches() {
        // h <= exp(√log X): Q₁ = h. The asymptotic floor makes all
        // practical h infeasible except h = 2 (log log 2 < 0).
        let small = default_ladder(10u64.pow(9), 2, 0.4).unwrap();
        assert!((small.rungs()[0].log_q - (2f64).ln()).abs() < 1e-15);
        assert!(default_ladder(10u64.pow(9), 50, 0.4).is_err());

        // h > exp(√log X): Q₁ at the cap and P₁ = Q₁^{δ/4}.
        let big = default_ladder(100_000_000, 10_000, 0.4).unwrap();
        let cap = (1e8f64).ln().sqrt();
        assert!((big.rungs()[0].log_q - cap).abs() < 1e-12);
        assert!((big.rungs()[0].log_p - 0.1 * cap).abs() < 1e-12);
        assert_eq!(big.j(), 1);
    }

    #[test]
    fn empty_ladder_everything_is_member() {
        let ladder = Ladder::empty((1e6f64).ln(), DEFAULT_ETA).unwrap();
        let base = base_primes(100).unwrap();
        for n in [1u64, 2, 97, 1_000_000] {
            assert!(in_s(n, &ladder, &base).unwrap());
        }
        let w = Window::new(1000, 50).unwrap();
        assert!(window_in_s(&w, &ladder, &base).unwrap().iter().all(|&m| m));
    }

    #[test]
    fn membership_basic_cases() {
        // J = 1 rung [e^2, e^4] ≈ [7.39, 54.6]: primes 11..53.
        let ladder = explicit_ladder(1_000_000, 2.0, 4.0, 0.1).unwrap();
        let base = base_primes(100).unwrap();
        // A prime above Q1 has no factor in the rung.
        assert!(!in_s(1_000_003, &ladder, &base).unwrap());
        // 11 * m has one.
        assert!(in_s(11 * 91, &ladder, &base).unwrap());
        assert!(in_s(53, &ladder, &base).unwrap());
        assert!(!in_s(2 * 3 * 5 * 7, &ladder, &base).unwrap());
    }

    #[test]
    fn vectorized_matches_per_integer() {
        let ladder = explicit_ladder(1_000_000, 1.5, 5.0, 0.05).unwrap();
        let base = base_primes(1000).unwrap();
        let w = Window::new(100_000, 3_000).unwrap();
        let flags = window_in_s(&w, &ladder, &base).unwrap();
        for i in 0..w.len() {
            let n = w.start() + 1 + i;
            assert_eq!(
                flags[i as usize],
                in_s(n, &ladder, &base).unwrap(),
                "n = {n}"
            );
        }
    }

    #[test]
    fn complement_density_empty_ladder_is_zero() {
        let ladder = Ladder::empty((1e5f64).ln(), DEFAULT_ETA).unwrap();
        let rep = complement_density(100_000, &ladder, SampleMode::Full).unwrap();
        assert_eq!(rep.measured, 0.0);
        assert_eq!(rep.predicted, 0.0);
    }

    #[test]
    fn complement_density_empty_prime_interval() {
        // A rung so narrow it contains no prime: nothing is a member.
        let lo = (24.5f64).ln();
        let hi = (25.5f64).ln();
        let ladder = explicit_ladder(100_000, lo, hi, 0.1).unwrap();
        let rep = complement_density(100_000, &ladder, SampleMode::Full).unwrap();
        assert_eq!(rep.measured, 1.0);
        assert_eq!(rep.predicted, 1.0);
    }

    #[test]
    fn sampled_density_requires_thousand() {
        let ladder = explicit_ladder(1_000_000, 2.0, 4.0, 0.1).unwrap();
        let mode = SampleMode::Sampled {
            count: 999,
            seed: 1,
        };
        assert!(complement_density(1_000_000, &ladder, mode).is_err());
    }

    #[test]
    fn inclusion_exclusion_j0_and_unit_weights() {
        let w = Window::new(1_000, 200).unwrap();
        let ones = vec![Complex64::new(1.0, 0.0); 200];
        let empty = Ladder::empty((1e6f64).ln(), DEFAULT_ETA).unwrap();
        let r = inclusion_exclusion_check(&w, &empty, &ones).unwrap();
        assert!((r.lhs - 200.0).norm() < 1e-12);
        assert!((r.rhs - 200.0).norm() < 1e-12);

        // J = 1: lhs counts members, rhs = h - #(no factor in rung).
        let ladder = explicit_ladder(1_000_000, 2.0, 4.0, 0.1).unwrap();
        let base = base_primes(100).unwrap();
        let members = window_in_s(&w, &ladder, &base).unwrap();
        let count = members.iter().filter(|&&m| m).count() as f64;
        let r = inclusion_exclusion_check(&w, &ladder, &ones).unwrap();
        assert!((r.lhs - count).norm() < 1e-12);
        assert!((r.rhs - count).norm() < 1e-12);
    }

    #[test]
    fn ladder_text_roundtrip() {
        let ladder = build_ladder_from_logs(250_000.0, 1.2, 1.9, 0.1).unwrap();
        let text = ladder.to_text();
        let back = Ladder::from_text(&text).unwrap();
        assert_eq!(ladder, back);
        assert!(Ladder::from_text("eta 0.1\n").is_err());
    }
}
