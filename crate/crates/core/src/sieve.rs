//! Prime generation and exact computation of ω(n), the number of distinct
//! prime factors, over windows of consecutive integers.
//!
//! The workhorse is a segmented sieve: for a window `(x, x+h]` and a base
//! table of primes up to `√(x+h)`, every base prime marks its multiples in
//! the window and is divided out of a residual buffer; a residual `> 1`
//! after all base primes is itself prime and contributes exactly one factor.
//! `omega_single` is a deliberately independent trial-division oracle used
//! to cross-check the sieve path in tests.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{param_err, Result};

/// Maximum number of integers sieved per segment. Larger windows are
/// processed in chunks so the marking buffers stay cache-resident.
pub const SEGMENT_CAP: u64 = 1 << 22;

/// Largest admissible window end: ω fits the exact-integer range.
pub const MAX_WINDOW_END: u64 = i64::MAX as u64;

/// ω(n) ≤ 15 for every n < 2^63 (the product of the first 16 primes
/// overflows), so counts fit in a byte and histograms in 16 bins.
pub const MAX_OMEGA: usize = 15;

/// A half-open integer interval `(x, x+h]` of length `h ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Window {
    x: u64,
    h: u64,
}

impl Window {
    /// The window `(x, x+h]`. `x = 0` is allowed so that `n = 1` is reachable.
    pub fn new(x: u64, h: u64) -> Result<Self> {
        if h < 1 {
            return param_err(format!("window length must be >= 1, got {h}"));
        }
        match x.checked_add(h) {
            Some(end) if end <= MAX_WINDOW_END => Ok(Self { x, h }),
            _ => param_err(format!(
                "window end {x} + {h} exceeds the exact-integer range (2^63 - 1)"
            )),
        }
    }

    /// The dyadic block `(x, 2x]`.
    pub fn dyadic(x: u64) -> Result<Self> {
        Self::new(x, x)
    }

    pub fn start(&self) -> u64 {
        self.x
    }

    pub fn len(&self) -> u64 {
        self.h
    }

    pub fn is_empty(&self) -> bool {
        false // h >= 1 by construction
    }

    /// Last integer of the window, `x + h`.
    pub fn end(&self) -> u64 {
        self.x + self.h
    }
}

/// All primes up to `limit`, strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Primes `p` with `a ≤ p ≤ b` as a subslice of the table.
    /// Requires `b ≤ limit`.
    pub fn range_inclusive(&self, a: u64, b: u64) -> &[u64] {
        debug_assert!(b <= self.limit);
        let lo = self.primes.partition_point(|&p| p < a);
        let hi = self.primes.partition_point(|&p| p <= b);
        &self.primes[lo..hi]
    }

    /// Serialize as: little-endian u64 limit, u64 count, then successive
    /// prime deltas as u16 (the first delta is from 0). Prime gaps fit in
    /// 16 bits far beyond any limit this tool supports.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&self.limit.to_le_bytes())?;
        w.write_all(&(self.primes.len() as u64).to_le_bytes())?;
        let mut prev = 0u64;
        for &p in &self.primes {
            let delta = p - prev;
            debug_assert!(delta <= u16::MAX as u64);
            w.write_all(&(delta as u16).to_le_bytes())?;
            prev = p;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut buf8 = [0u8; 8];
        r.read_exact(&mut buf8)?;
        let limit = u64::from_le_bytes(buf8);
        r.read_exact(&mut buf8)?;
        let count = u64::from_le_bytes(buf8) as usize;
        let mut deltas = vec![0u8; count * 2];
        r.read_exact(&mut deltas)?;
        let mut primes = Vec::with_capacity(count);
        let mut prev = 0u64;
        for chunk in deltas.chunks_exact(2) {
            let delta = u16::from_le_bytes([chunk[0], chunk[1]]) as u64;
            if delta == 0 {
                return param_err("corrupt prime table: zero delta");
            }
            prev += delta;
            primes.push(prev);
        }
        if primes.last().copied().unwrap_or(0) > limit {
            return param_err("corrupt prime table: prime exceeds limit");
        }
        Ok(Self { limit, primes })
    }

    fn cache_path(dir: &Path, limit: u64) -> PathBuf {
        dir.join(format!("primes_{limit}.bin"))
    }

    /// Build the table, consulting `cache_dir` first when given. An
    /// unreadable or malformed cache file is treated as a miss.
    pub fn load_or_build(limit: u64, cache_dir: Option<&Path>) -> Result<Self> {
        if let Some(dir) = cache_dir {
            let path = Self::cache_path(dir, limit);
            if let Ok(f) = fs::File::open(&path) {
                if let Ok(table) = Self::read_binary(std::io::BufReader::new(f)) {
                    if table.limit == limit {
                        return Ok(table);
                    }
                }
            }
            let table = base_primes(limit)?;
            fs::create_dir_all(dir)?;
            let f = fs::File::create(&path)?;
            table.write_binary(std::io::BufWriter::new(f))?;
            return Ok(table);
        }
        base_primes(limit)
    }
}

/// All primes `≤ limit` by an odds-only sieve of Eratosthenes.
pub fn base_primes(limit: u64) -> Result<PrimeTable> {
    if !(2..=1_000_000_000).contains(&limit) {
        return param_err(format!("base prime limit {limit} outside [2, 1e9]"));
    }
    let n = limit as usize;
    // composite[i] refers to the odd number 2i + 1.
    let half = n / 2 + 1;
    let mut composite = vec![false; half];
    composite[0] = true; // 1
    let mut i = 1usize;
    while (2 * i + 1) * (2 * i + 1) <= n {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut j = (p * p) / 2;
            while j < half {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    let mut primes = Vec::with_capacity(prime_count_upper(limit));
    primes.push(2);
    for (i, &c) in composite.iter().enumerate().skip(1) {
        let v = 2 * i + 1;
        if v > n {
            break;
        }
        if !c {
            primes.push(v as u64);
        }
    }
    Ok(PrimeTable { limit, primes })
}

fn prime_count_upper(n: u64) -> usize {
    if n < 17 {
        return 8;
    }
    let nf = n as f64;
    (nf / nf.ln() * 1.3) as usize + 8
}

/// Primes `p` with `a < p ≤ b`, found by segmented sieving against `base`.
/// Requires `base.limit² ≥ b`.
pub fn primes_in_range(a: u64, b: u64, base: &PrimeTable) -> Result<Vec<u64>> {
    if a >= b {
        return Ok(Vec::new());
    }
    let covered = base
        .limit
        .checked_mul(base.limit)
        .map_or(true, |sq| sq >= b);
    if !covered {
        return param_err(format!(
            "base table limit {} too small for range up to {b} (need limit^2 >= b)",
            base.limit
        ));
    }
    let mut out = Vec::new();
    let mut lo = a;
    while lo < b {
        let hi = (lo + SEGMENT_CAP).min(b);
        // flag[i] marks lo + 1 + i composite.
        let len = (hi - lo) as usize;
        let mut flag = vec![false; len];
        for &p in base.primes() {
            if p.saturating_mul(p) > hi {
                break;
            }
            let mut m = (lo / p + 1) * p;
            if m <= p {
                m = p * 2; // never strike p itself
            }
            while m <= hi {
                flag[(m - lo - 1) as usize] = true;
                m += p;
            }
        }
        for (i, &f) in flag.iter().enumerate() {
            let n = lo + 1 + i as u64;
            if !f && n >= 2 {
                out.push(n);
            }
        }
        lo = hi;
    }
    Ok(out)
}

/// ω-values together with their histogram over a window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OmegaSlice {
    window: Window,
    omegas: Vec<u8>,
    histogram: Vec<u64>,
}

impl OmegaSlice {
    pub fn window(&self) -> Window {
        self.window
    }

    /// `omegas[i] = ω(x + 1 + i)`.
    pub fn omegas(&self) -> &[u8] {
        &self.omegas
    }

    /// `histogram[k] = #{n in window : ω(n) = k}`.
    pub fn histogram(&self) -> &[u64] {
        &self.histogram
    }

    pub fn len(&self) -> u64 {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

fn histogram_from_omegas(omegas: &[u8]) -> Vec<u64> {
    let mut hist = vec![0u64; MAX_OMEGA + 1];
    for &w in omegas {
        hist[w as usize] += 1;
    }
    while hist.len() > 1 && *hist.last().unwrap() == 0 {
        hist.pop();
    }
    hist
}

fn require_base_for(end: u64, base: &PrimeTable) -> Result<()> {
    let need = isqrt(end);
    if base.limit < need {
        return param_err(format!(
            "base table limit {} too small for window end {end} (need >= {need})",
            base.limit
        ));
    }
    Ok(())
}

/// Sieve one segment `(lo, hi]`, writing ω into `omegas` (length `hi - lo`).
/// `residual` is scratch space of the same length.
fn omega_segment(lo: u64, hi: u64, base: &PrimeTable, omegas: &mut [u8], residual: &mut [u64]) {
    let len = (hi - lo) as usize;
    debug_assert_eq!(omegas.len(), len);
    debug_assert_eq!(residual.len(), len);
    for (i, r) in residual.iter_mut().enumerate() {
        *r = lo + 1 + i as u64;
    }
    omegas.fill(0);
    for &p in base.primes() {
        if p.saturating_mul(p) > hi {
            break;
        }
        let mut m = (lo / p + 1) * p;
        while m <= hi {
            let idx = (m - lo - 1) as usize;
            omegas[idx] += 1;
            let r = &mut residual[idx];
            while *r % p == 0 {
                *r /= p;
            }
            m += p;
        }
    }
    for (i, &r) in residual.iter().enumerate() {
        if r > 1 {
            omegas[i] += 1;
        }
    }
}

/// Exact ω over a window via the segmented sieve.
/// Requires `base.limit ≥ ⌈√(x+h)⌉`.
pub fn omega_window(w: &Window, base: &PrimeTable) -> Result<OmegaSlice> {
    require_base_for(w.end(), base)?;
    let h = w.len() as usize;
    let mut omegas = vec![0u8; h];
    let mut residual = vec![0u64; (w.len().min(SEGMENT_CAP)) as usize];
    let mut lo = w.start();
    while lo < w.end() {
        let hi = (lo + SEGMENT_CAP).min(w.end());
        let off = (lo - w.start()) as usize;
        let len = (hi - lo) as usize;
        omega_segment(lo, hi, base, &mut omegas[off..off + len], &mut residual[..len]);
        lo = hi;
    }
    let histogram = histogram_from_omegas(&omegas);
    Ok(OmegaSlice {
        window: *w,
        omegas,
        histogram,
    })
}

/// Histogram of ω over a window without retaining per-integer values.
/// Same sieve as `omega_window`, chunked; suitable for dyadic blocks.
pub fn window_histogram(w: &Window, base: &PrimeTable) -> Result<Vec<u64>> {
    require_base_for(w.end(), base)?;
    let seg = w.len().min(SEGMENT_CAP) as usize;
    let mut omegas = vec![0u8; seg];
    let mut residual = vec![0u64; seg];
    let mut hist = vec![0u64; MAX_OMEGA + 1];
    let mut lo = w.start();
    while lo < w.end() {
        let hi = (lo + SEGMENT_CAP).min(w.end());
        let len = (hi - lo) as usize;
        omega_segment(lo, hi, base, &mut omegas[..len], &mut residual[..len]);
        for &v in &omegas[..len] {
            hist[v as usize] += 1;
        }
        lo = hi;
    }
    while hist.len() > 1 && *hist.last().unwrap() == 0 {
        hist.pop();
    }
    Ok(hist)
}

/// Floor of the integer square root.
pub fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x.checked_mul(x).map_or(true, |sq| sq > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).map_or(false, |sq| sq <= n) {
        x += 1;
    }
    x
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, m);
        }
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin primality test, valid for all `n < 2^64`
/// with the first twelve prime witnesses.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// ω(n) by trial division up to the cube root of the shrinking cofactor,
/// then a primality/square test on what remains. Independent of the
/// segmented sieve; this is the oracle the sieve path is tested against.
pub fn omega_single(n: u64) -> u32 {
    assert!(n >= 1, "omega_single requires n >= 1");
    let mut c = n;
    let mut count = 0u32;
    if c % 2 == 0 {
        count += 1;
        while c % 2 == 0 {
            c /= 2;
        }
    }
    let mut d = 3u64;
    while d
        .checked_mul(d)
        .and_then(|dd| dd.checked_mul(d))
        .map_or(false, |cube| cube <= c)
    {
        if c % d == 0 {
            count += 1;
            while c % d == 0 {
                c /= d;
            }
        }
        d += 2;
    }
    // The cofactor now has at most two prime factors, each above its
    // cube root: it is 1, p, p^2, or a product of two distinct primes.
    if c > 1 {
        if is_prime(c) {
            count += 1;
        } else {
            let s = isqrt(c);
            if s * s == c {
                count += 1;
            } else {
                count += 2;
            }
        }
    }
    count
}

/// Mean absolute deviation of ω from log₂X over the window:
/// `(1/h) Σ |ω(n) − log log X|`.
pub fn turan_kubilius_stat(slice: &OmegaSlice, x: u64) -> f64 {
    let t = (x as f64).ln().ln();
    let h = slice.len() as f64;
    let mut sum = 0.0;
    for (k, &c) in slice.histogram().iter().enumerate() {
        if c > 0 {
            sum += c as f64 * (k as f64 - t).abs();
        }
    }
    sum / h
}
