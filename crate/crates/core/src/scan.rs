//! Exhaustive scans of `1..=x`: joint `(s_a, s_b)` histograms built from two
//! incremental digit counters, exact single-base digit-sum counts by digit
//! dynamic programming, predicate counts and power-law fits.
//!
//! # Checkpoint format
//!
//! All integers little-endian.
//!
//! | offset | size | field |
//! |---|---|---|
//! | 0 | 8 | magic `DSUMSCAN` |
//! | 8 | 4 | version, currently 1 (u32) |
//! | 12 | 4 | base `a` (u32) |
//! | 16 | 4 | base `b` (u32) |
//! | 20 | 8 | `limit`, the largest `x` the matrix is sized for (u64) |
//! | 28 | 8 | `position`, every `n` in `1..=position` is counted (u64) |
//! | 36 | 4 | `rows` (u32) |
//! | 40 | 4 | `cols` (u32) |
//! | 44 | 8·rows·cols | counts, row-major by `s_a` then `s_b` (u64 each) |
//! | end | 4 | CRC-32 (IEEE) of every preceding byte (u32) |

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::digits::{check_base, digit_sum_u64, to_digits, Natural};
use crate::error::{invalid, Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"DSUMSCAN";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Base-`base` representation of a running value with its digit sum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RadixCounter {
    base: u8,
    digits: Vec<u8>,
    digit_sum: u64,
}

impl RadixCounter {
    pub fn new(base: u32) -> Result<Self> {
        Ok(Self {
            base: check_base(base)?,
            digits: Vec::with_capacity(64),
            digit_sum: 0,
        })
    }

    pub fn from_value(n: u64, base: u32) -> Result<Self> {
        let d = to_digits(&Natural::from(n), base)?;
        let digit_sum = d.digit_sum();
        Ok(Self {
            base: base as u8,
            digits: d.into_digits(),
            digit_sum,
        })
    }

    pub fn base(&self) -> u32 {
        u32::from(self.base)
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn digit_sum(&self) -> u64 {
        self.digit_sum
    }

    pub fn value(&self) -> Natural {
        self.digits
            .iter()
            .rev()
            .fold(Natural::from(0u32), |acc, &d| {
                acc * u32::from(self.base) + u32::from(d)
            })
    }

    #[inline]
    pub fn increment(&mut self) {
        let top = self.base - 1;
        for d in self.digits.iter_mut() {
            if *d < top {
                *d += 1;
                self.digit_sum += 1;
                return;
            }
            *d = 0;
            self.digit_sum -= u64::from(top);
        }
        self.digits.push(1);
        self.digit_sum += 1;
    }
}

/// Largest digit sum of any `n <= x` in `base` is at most `(base-1)(floor(log_base x)+1)`.
fn max_digit_sum(x: u64, base: u32) -> usize {
    let mut len = 0usize;
    let mut v = x;
    while v > 0 {
        v /= u64::from(base);
        len += 1;
    }
    (base as usize - 1) * len.max(1)
}

/// Counts of `n` by `(s_a(n), s_b(n))`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JointHistogram {
    pub a: u32,
    pub b: u32,
    /// The counted range is `1..=x`.
    pub x: u64,
    pub rows: usize,
    pub cols: usize,
    /// Row-major, `counts[s_a * cols + s_b]`.
    pub counts: Vec<u64>,
}

fn alloc_counts(len: usize) -> Result<Vec<u64>> {
    let mut v = Vec::new();
    v.try_reserve_exact(len)
        .map_err(|_| Error::Resource(format!("cannot allocate histogram with {len} cells")))?;
    v.resize(len, 0);
    Ok(v)
}

impl JointHistogram {
    /// Empty histogram sized for every `n <= limit`.
    pub fn empty(a: u32, b: u32, limit: u64) -> Result<Self> {
        check_base(a)?;
        check_base(b)?;
        let rows = max_digit_sum(limit, a) + 1;
        let cols = max_digit_sum(limit, b) + 1;
        Ok(Self {
            a,
            b,
            x: 0,
            rows,
            cols,
            counts: alloc_counts(rows * cols)?,
        })
    }

    pub fn get(&self, s_a: usize, s_b: usize) -> u64 {
        if s_a < self.rows && s_b < self.cols {
            self.counts[s_a * self.cols + s_b]
        } else {
            0
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn marginal_a(&self) -> Vec<u64> {
        self.counts
            .chunks(self.cols)
            .map(|r| r.iter().sum())
            .collect()
    }

    pub fn marginal_b(&self) -> Vec<u64> {
        let mut out = vec![0; self.cols];
        for row in self.counts.chunks(self.cols) {
            for (o, c) in out.iter_mut().zip(row) {
                *o += c;
            }
        }
        out
    }

    /// Adds the counts of a histogram over the adjacent range `x+1..=other.x`.
    pub fn merge(&mut self, other: &JointHistogram) -> Result<()> {
        if (self.a, self.b, self.rows, self.cols) != (other.a, other.b, other.rows, other.cols) {
            return Err(invalid(
                "histograms with different bases or shapes cannot be merged",
            ));
        }
        for (c, o) in self.counts.iter_mut().zip(&other.counts) {
            *c += o;
        }
        self.x = self.x.max(other.x);
        Ok(())
    }

    /// Entries (with their `(s_a, s_b)`) that are nonzero.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (i / self.cols, i % self.cols, c))
    }
}

/// Counts of `n` in `lo..=hi` into a `rows x cols` matrix.
fn scan_range(a: u32, b: u32, lo: u64, hi: u64, cols: usize, counts: &mut [u64]) -> Result<()> {
    if lo > hi {
        return Ok(());
    }
    let mut ca = RadixCounter::from_value(lo, a)?;
    let mut cb = RadixCounter::from_value(lo, b)?;
    let mut n = lo;
    loop {
        counts[ca.digit_sum as usize * cols + cb.digit_sum as usize] += 1;
        if n == hi {
            break;
        }
        n += 1;
        ca.increment();
        cb.increment();
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChunkPolicy {
    /// Number of contiguous chunks; each is scanned independently.
    pub chunks: usize,
    /// Worker threads, 0 for the global pool.
    pub threads: usize,
}

impl Default for ChunkPolicy {
    fn default() -> Self {
        Self {
            chunks: 64,
            threads: 0,
        }
    }
}

fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Resource(format!("cannot start {threads} worker threads: {e}")))?;
    Ok(pool.install(f))
}

/// Scan state: a histogram of `1..=position`, sized for `limit`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanState {
    pub limit: u64,
    pub hist: JointHistogram,
}

impl ScanState {
    pub fn new(a: u32, b: u32, limit: u64) -> Result<Self> {
        Ok(Self {
            limit,
            hist: JointHistogram::empty(a, b, limit)?,
        })
    }

    pub fn position(&self) -> u64 {
        self.hist.x
    }

    /// Counts `position+1..=x`.
    pub fn advance_to(&mut self, x: u64, policy: ChunkPolicy) -> Result<()> {
        if x > self.limit {
            return Err(Error::TooLarge {
                what: "scan bound",
                value: x,
                limit: self.limit,
            });
        }
        let start = self.hist.x + 1;
        if x < start {
            return Ok(());
        }
        let len = x - start + 1;
        let chunks = (policy.chunks.max(1) as u64).min(len);
        let bounds: Vec<(u64, u64)> = (0..chunks)
            .map(|i| (start + len * i / chunks, start + len * (i + 1) / chunks - 1))
            .collect();
        let (a, b, rows, cols) = (self.hist.a, self.hist.b, self.hist.rows, self.hist.cols);
        let partials: Vec<Result<Vec<u64>>> = with_pool(policy.threads, || {
            bounds
                .par_iter()
                .map(|&(lo, hi)| {
                    let mut counts = alloc_counts(rows * cols)?;
                    scan_range(a, b, lo, hi, cols, &mut counts)?;
                    Ok(counts)
                })
                .collect()
        })?;
        for part in partials {
            for (c, p) in self.hist.counts.iter_mut().zip(part?) {
                *c += p;
            }
        }
        self.hist.x = x;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let h = &self.hist;
        let mut out = Vec::with_capacity(48 + 8 * h.counts.len());
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.extend_from_slice(&h.a.to_le_bytes());
        out.extend_from_slice(&h.b.to_le_bytes());
        out.extend_from_slice(&self.limit.to_le_bytes());
        out.extend_from_slice(&h.x.to_le_bytes());
        out.extend_from_slice(&(h.rows as u32).to_le_bytes());
        out.extend_from_slice(&(h.cols as u32).to_le_bytes());
        for c in &h.counts {
            out.extend_from_slice(&c.to_le_bytes());
        }
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::Format(format!("checkpoint: {m}"));
        if bytes.len() < 48 {
            return Err(bad("truncated header"));
        }
        let (body, tail) = bytes.split_at(bytes.len() - 4);
        if crc32fast::hash(body) != u32::from_le_bytes(tail.try_into().expect("4 bytes")) {
            return Err(bad("checksum mismatch"));
        }
        if &body[..8] != CHECKPOINT_MAGIC {
            return Err(bad("bad magic"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(body[o..o + 4].try_into().expect("4 bytes"));
        let u64_at = |o: usize| u64::from_le_bytes(body[o..o + 8].try_into().expect("8 bytes"));
        if u32_at(8) != CHECKPOINT_VERSION {
            return Err(bad("unsupported version"));
        }
        let (a, b, limit, position) = (u32_at(12), u32_at(16), u64_at(20), u64_at(28));
        let (rows, cols) = (u32_at(36) as usize, u32_at(40) as usize);
        let expected = JointHistogram::empty(a, b, limit).map_err(|e| bad(&e.to_string()))?;
        if (expected.rows, expected.cols) != (rows, cols) || position > limit {
            return Err(bad("inconsistent dimensions"));
        }
        if body.len() != 44 + 8 * rows * cols {
            return Err(bad("wrong length"));
        }
        let counts = body[44..]
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Ok(Self {
            limit,
            hist: JointHistogram {
                a,
                b,
                x: position,
                rows,
                cols,
                counts,
            },
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(&self.to_bytes())?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }
}

/// Exact histogram of `(s_a(n), s_b(n))` over `1..=x`.
pub fn joint_histogram(a: u32, b: u32, x: u64, policy: ChunkPolicy) -> Result<JointHistogram> {
    if x == 0 {
        return Err(invalid("scan bound x must be at least 1"));
    }
    let mut state = ScanState::new(a, b, x)?;
    state.advance_to(x, policy)?;
    Ok(state.hist)
}

/// `#{1 <= n <= x : s_base(n) = s}` for every `s`, by digit dynamic programming.
pub fn digit_sum_counts(x: u64, base: u32) -> Result<Vec<u64>> {
    check_base(base)?;
    if x == 0 {
        return Err(invalid("x must be at least 1"));
    }
    let digits = to_digits(&Natural::from(x), base)?.into_digits();
    let len = digits.len();
    let top = base as usize - 1;
    // free[r][s]: strings of r digits with sum s
    let mut free: Vec<Vec<u64>> = vec![vec![1]];
    for r in 1..len {
        let prev = &free[r - 1];
        let mut next = vec![0u64; prev.len() + top];
        for (s, &c) in prev.iter().enumerate() {
            for d in 0..=top {
                next[s + d] += c;
            }
        }
        free.push(next);
    }
    let mut out = vec![0u64; top * len + 1];
    let mut prefix = 0usize;
    for pos in (0..len).rev() {
        let xd = digits[pos] as usize;
        for d in 0..xd {
            for (s, &c) in free[pos].iter().enumerate() {
                out[prefix + d + s] += c;
            }
        }
        prefix += xd;
    }
    out[prefix] += 1;
    out[0] -= 1;
    Ok(out)
}

/// `#{n : |s_b(n) - tau s_a(n)| <= eps s_a(n)}` over the histogram.
pub fn predicate_counts(h: &JointHistogram, tau: f64, eps: f64) -> Result<u64> {
    if !(eps >= 0.0) || !tau.is_finite() {
        return Err(invalid(format!(
            "need tau finite and eps >= 0, got tau = {tau}, eps = {eps}"
        )));
    }
    Ok(h.nonzero()
        .filter(|&(sa, sb, _)| (sb as f64 - tau * sa as f64).abs() <= eps * sa as f64)
        .map(|(_, _, c)| c)
        .sum())
}

/// Least-squares slope of `ln count` against `ln x`.
pub fn exponent_fit(series: &[(u64, u64)]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = series.iter().map(|&(x, c)| (x as f64, c as f64)).collect();
    exponent_fit_real(&pts)
}

/// [`exponent_fit`] for real-valued points.
pub fn exponent_fit_real(series: &[(f64, f64)]) -> Result<f64> {
    if series.len() < 2 {
        return Err(invalid("a fit needs at least two points"));
    }
    if let Some(&(x, c)) = series.iter().find(|&&(x, c)| !(c > 0.0 && x > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "nonpositive point (x = {x}, count = {c})"
        )));
    }
    let pts: Vec<(f64, f64)> = series.iter().map(|&(x, c)| (x.ln(), c.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("all x values coincide".into()));
    }
    Ok(sxy / sxx)
}

/// Powers of ten up to `max`, followed by `max` itself if it is not one.
pub fn decade_checkpoints(max: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 1u64;
    while p <= max {
        out.push(p);
        match p.checked_mul(10) {
            Some(next) => p = next,
            None => break,
        }
    }
    if out.last() != Some(&max) {
        out.push(max);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanSeries {
    pub checkpoints: Vec<u64>,
    pub histograms: Vec<JointHistogram>,
}

/// Snapshots of one scan at each checkpoint (increasing).
pub fn scan_series(a: u32, b: u32, checkpoints: &[u64], policy: ChunkPolicy) -> Result<ScanSeries> {
    if checkpoints.is_empty() || checkpoints[0] == 0 || checkpoints.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(invalid(
            "checkpoints must be positive and strictly increasing",
        ));
    }
    let mut state = ScanState::new(a, b, *checkpoints.last().expect("nonempty"))?;
    let mut histograms = Vec::with_capacity(checkpoints.len());
    for &x in checkpoints {
        state.advance_to(x, policy)?;
        histograms.push(state.hist.clone());
    }
    Ok(ScanSeries {
        checkpoints: checkpoints.to_vec(),
        histograms,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub x: u64,
    /// Count with `eps = 0`.
    pub count_eq: u64,
    /// Counts for each requested `eps`, in order.
    pub count_eps: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub a: u32,
    pub b: u32,
    pub tau: f64,
    pub eps: Vec<f64>,
    pub rows: Vec<ScanRow>,
    /// Slope of `ln count_eq` against `ln x`, over rows with `x >= 1000` and a positive count.
    pub fitted_slope: Option<f64>,
}

pub fn scan_report(series: &ScanSeries, tau: f64, eps: &[f64]) -> Result<ScanReport> {
    let mut rows = Vec::with_capacity(series.histograms.len());
    for h in &series.histograms {
        rows.push(ScanRow {
            x: h.x,
            count_eq: predicate_counts(h, tau, 0.0)?,
            count_eps: eps
                .iter()
                .map(|&e| predicate_counts(h, tau, e))
                .collect::<Result<_>>()?,
        });
    }
    let pts: Vec<(u64, u64)> = rows
        .iter()
        .filter(|r| r.x >= 1000 && r.count_eq > 0)
        .map(|r| (r.x, r.count_eq))
        .collect();
    let fitted_slope = if pts.len() >= 2 {
        Some(exponent_fit(&pts)?)
    } else {
        None
    };
    let first = series.histograms.first().expect("nonempty series");
    Ok(ScanReport {
        a: first.a,
        b: first.b,
        tau,
        eps: eps.to_vec(),
        rows,
        fitted_slope,
    })
}

/// `#{n <= x : s_a(n) = s_b(n)}` by recomputing both digit sums for every `n`.
pub fn naive_coincidences(a: u32, b: u32, x: u64) -> Result<u64> {
    check_base(a)?;
    check_base(b)?;
    let mut count = 0;
    for n in 1..=x {
        if digit_sum_u64(n, a)? == digit_sum_u64(n, b)? {
            count += 1;
        }
    }
    Ok(count)
}
