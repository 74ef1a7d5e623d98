//! Continued fractions of `log a / log b`, Dirichlet approximations and the
//! discrepancy of the sequence of fractional parts of its multiples.
//!
//! Partial quotients are certified: the expansion is run on both endpoints
//! of an enclosing interval and only the common prefix is emitted, so every
//! real number in the interval (in particular the true ratio) shares it.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::hp::{self, next_down, next_up, CertifiedReal};

/// Default working precision for continued-fraction extraction.
pub const DEFAULT_PRECISION_BITS: u32 = 4096;
/// Precision doubling stops above this many bits.
pub const MAX_PRECISION_BITS: u32 = 1 << 17;
/// Admissible irrationality exponent of `log 2 / log 3`.
pub const GAMMA_2_3: f64 = 5.117;
/// Default constant in the convergent discrepancy bound `C_D (1/q + q/n)`.
pub const C_D: f64 = 2.0;

/// Smallest `r` with `n = r^e` for some `e >= 1`, together with that `e`.
pub fn perfect_power_root(n: u64) -> (u64, u32) {
    if n < 4 {
        return (n, 1);
    }
    for e in (2..=63u32).rev() {
        let guess = (n as f64).powf(1.0 / f64::from(e)).round() as u64;
        for r in guess.saturating_sub(1).max(2)..=guess + 1 {
            if r.checked_pow(e) == Some(n) {
                return (r, e);
            }
        }
    }
    (n, 1)
}

/// True when `a` and `b` are both powers of a common integer.
pub fn multiplicatively_dependent(a: u64, b: u64) -> bool {
    perfect_power_root(a).0 == perfect_power_root(b).0
}

/// Enclosure of `log a / log b` of width at most `2^(1 - precision_bits)`.
///
/// Multiplicatively dependent pairs give the exact rational ratio of exponents.
pub fn theta_interval(a: u64, b: u64, precision_bits: u32) -> Result<CertifiedReal> {
    if a < 2 || b < 2 {
        return Err(invalid("bases must be at least 2"));
    }
    if precision_bits < 64 {
        return Err(invalid("precision must be at least 64 bits"));
    }
    let (ra, ea) = perfect_power_root(a);
    let (rb, eb) = perfect_power_root(b);
    if ra == rb {
        return CertifiedReal::from_rational(&BigInt::from(ea), &BigInt::from(eb), precision_bits);
    }
    let work = precision_bits + 16;
    let la = hp::ln_integer(a, work)?;
    let lb = hp::ln_integer(b, work)?;
    Ok(la.div(&lb)?.round_to(precision_bits))
}

/// Euclid on `num/den`, recording whether each quotient is the last one.
fn rational_cf(num: &BigInt, den: &BigInt, max_terms: usize) -> Vec<(BigInt, bool)> {
    let mut out = Vec::new();
    let (mut n, mut d) = (num.clone(), den.clone());
    while !d.is_zero() && out.len() <= max_terms {
        let (q, r) = n.div_mod_floor(&d);
        n = d;
        d = r;
        out.push((q, n.is_zero() || d.is_zero()));
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergentRow {
    pub index: usize,
    #[serde(serialize_with = "as_string")]
    pub partial_quotient: BigInt,
    #[serde(serialize_with = "as_string")]
    pub p: BigInt,
    #[serde(serialize_with = "as_string")]
    pub q: BigInt,
    /// Enclosure of `|theta - p/q|`, outward rounded; `err_lo` may be 0 once
    /// the convergent is closer to theta than the working precision resolves.
    pub err_lo: f64,
    pub err_hi: f64,
    /// Natural logarithms of the bounds above, finite where the f64 values underflow.
    pub ln_err_lo: f64,
    pub ln_err_hi: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergentTable {
    pub rows: Vec<ConvergentRow>,
    pub precision_bits: u32,
    /// True when fewer than the requested terms could be certified.
    pub truncated: bool,
    pub rational: bool,
}

/// Big integers are emitted as decimal strings.
pub(crate) fn as_string<T: std::fmt::Display, S: serde::Serializer>(
    x: &T,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(x)
}

fn ln_abs_ratio(num: &BigInt, den: &BigInt) -> f64 {
    hp::ln_ratio(&num.abs(), den)
}

impl ConvergentTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn partial_quotients(&self) -> Vec<BigInt> {
        self.rows
            .iter()
            .map(|r| r.partial_quotient.clone())
            .collect()
    }

    pub fn denominators_u64(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .map_while(|(i, r)| r.q.to_u64().map(|q| (i, q)))
    }
}

/// Certified continued fraction of the interval `x`.
pub fn continued_fraction(x: &CertifiedReal, max_terms: usize) -> Result<ConvergentTable> {
    let partials: Vec<BigInt> = if let Some((num, den)) = x.exact() {
        rational_cf(num, den, max_terms)
            .into_iter()
            .map(|(q, _)| q)
            .take(max_terms)
            .collect()
    } else {
        let den = BigInt::one() << x.precision_bits();
        let lo = rational_cf(x.lo_scaled(), &den, max_terms + 1);
        let hi = rational_cf(x.hi_scaled(), &den, max_terms + 1);
        lo.iter()
            .zip(hi.iter())
            .take_while(|((ql, last_l), (qh, last_h))| ql == qh && !last_l && !last_h)
            .map(|((q, _), _)| q.clone())
            .take(max_terms)
            .collect()
    };
    let truncated = !x.is_rational() && partials.len() < max_terms;
    let rows = convergent_rows(x, &partials);
    Ok(ConvergentTable {
        rows,
        precision_bits: x.precision_bits(),
        truncated,
        rational: x.is_rational(),
    })
}

fn convergent_rows(x: &CertifiedReal, partials: &[BigInt]) -> Vec<ConvergentRow> {
    let scale = BigInt::one() << x.precision_bits();
    let (mut p_prev, mut p) = (BigInt::zero(), BigInt::one());
    let (mut q_prev, mut q) = (BigInt::one(), BigInt::zero());
    let mut rows = Vec::with_capacity(partials.len());
    for (index, a) in partials.iter().enumerate() {
        let p_next = a * &p + &p_prev;
        let q_next = a * &q + &q_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);

        let (lo_e, hi_e, den) = match x.exact() {
            Some((n, d)) => {
                let e = n * &q - &p * d;
                (e.clone(), e, d * &q)
            }
            None => (
                x.lo_scaled() * &q - &p * &scale,
                x.hi_scaled() * &q - &p * &scale,
                &scale * &q,
            ),
        };
        let (small, large) = if lo_e.sign() == hi_e.sign() && !lo_e.is_zero() {
            if lo_e.abs() <= hi_e.abs() {
                (lo_e.abs(), hi_e.abs())
            } else {
                (hi_e.abs(), lo_e.abs())
            }
        } else {
            (BigInt::zero(), lo_e.abs().max(hi_e.abs()))
        };
        let ln_lo = ln_abs_ratio(&small, &den);
        let ln_hi = ln_abs_ratio(&large, &den);
        // one part in 1e-12 covers the leading-bit logarithm and the exp below
        let ln_err_lo = if ln_lo.is_finite() {
            ln_lo - 1e-12 * ln_lo.abs().max(1.0)
        } else {
            ln_lo
        };
        let ln_err_hi = if ln_hi.is_finite() {
            ln_hi + 1e-12 * ln_hi.abs().max(1.0)
        } else {
            ln_hi
        };
        rows.push(ConvergentRow {
            index,
            partial_quotient: a.clone(),
            p: p.clone(),
            q: q.clone(),
            err_lo: enclose(&small, &den, ln_err_lo, next_down).max(0.0),
            err_hi: enclose(&large, &den, ln_err_hi, next_up),
            ln_err_lo,
            ln_err_hi,
        });
    }
    rows
}

/// One side of an f64 enclosure of `num/den`: two ulps out from the direct
/// quotient in the normal range, the padded logarithm elsewhere.
fn enclose(num: &BigInt, den: &BigInt, ln_padded: f64, step: fn(f64) -> f64) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let q = crate::hp::ratio_to_f64(num, den);
    if q >= f64::MIN_POSITIVE * 4.0 && q.is_finite() {
        step(step(q))
    } else {
        step(ln_padded.exp())
    }
}

/// Continued fraction of `log a / log b`, doubling the precision until
/// `max_terms` quotients are certified or [`MAX_PRECISION_BITS`] is reached.
pub fn log_ratio_continued_fraction(
    a: u64,
    b: u64,
    max_terms: usize,
    start_bits: u32,
) -> Result<ConvergentTable> {
    let mut bits = start_bits.max(64);
    loop {
        let theta = theta_interval(a, b, bits)?;
        let table = continued_fraction(&theta, max_terms)?;
        if !table.truncated || bits >= MAX_PRECISION_BITS {
            return Ok(table);
        }
        bits *= 2;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirichletApprox {
    pub index: usize,
    #[serde(serialize_with = "as_string")]
    pub r: BigInt,
    #[serde(serialize_with = "as_string")]
    pub q: BigInt,
    pub err_hi: f64,
}

/// Coprime `(r, q)` with `q <= n/R` and `|theta - r/q| <= R/(q n)`.
pub fn dirichlet_approx(table: &ConvergentTable, n: u64, big_r: f64) -> Result<DirichletApprox> {
    if n == 0 || !(1.0..=n as f64).contains(&big_r) {
        return Err(invalid("Dirichlet approximation needs 1 <= R <= n"));
    }
    let limit = (n as f64 / big_r).floor();
    let satisfies = |row: &ConvergentRow| {
        let q = row.q.to_f64().unwrap_or(f64::INFINITY);
        q >= 1.0 && q <= limit && row.ln_err_hi <= big_r.ln() - q.ln() - (n as f64).ln()
    };
    let best = table
        .rows
        .iter()
        .rfind(|row| row.q.to_f64().is_some_and(|q| q >= 1.0 && q <= limit));
    let chosen = match best {
        Some(row) if satisfies(row) => Some(row),
        _ => table.rows.iter().find(|row| satisfies(row)),
    };
    chosen
        .map(|row| DirichletApprox {
            index: row.index,
            r: row.p.clone(),
            q: row.q.clone(),
            err_hi: row.err_hi,
        })
        .ok_or_else(|| Error::NotFound(format!("no convergent with q <= {limit} meets R/(qn)")))
}

/// Exact star discrepancy `sup_t |#{x_i < t}/n - t|` of points in `[0, 1)`.
pub fn star_discrepancy(points: &[f64]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::InvalidInput("empty point set".into()));
    }
    if let Some(bad) = points.iter().find(|x| !(0.0..1.0).contains(*x)) {
        return Err(Error::InvalidInput(format!("point {bad} outside [0, 1)")));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let i = i as f64;
            ((i + 1.0) / n - x).max(x - i / n)
        })
        .fold(0.0, f64::max))
}

/// Fractional parts `<nu theta>` for `nu = 1..=n`, from a 128-bit fixed-point
/// image of theta so the error stays below `n * 2^-120`.
pub fn fractional_multiples(theta: &CertifiedReal, n: usize) -> Vec<f64> {
    let scaled = theta.round_to(128);
    let mid: BigInt = (scaled.lo_scaled() + scaled.hi_scaled()) >> 1u32;
    let modulus = BigInt::one() << 128u32;
    let frac = mid.mod_floor(&modulus);
    let frac = frac.to_u128().expect("reduced below 2^128");
    (1..=n as u128)
        .map(|nu| {
            let x = nu.wrapping_mul(frac);
            // top 53 bits give an exact f64 in [0, 1)
            (x >> 75) as f64 / (1u64 << 53) as f64
        })
        .collect()
}

/// `min over convergents q of C_D (1/q + q/n)`.
pub fn discrepancy_bound_cf(table: &ConvergentTable, n: u64, c_d: f64) -> Result<f64> {
    if table.is_empty() {
        return Err(invalid("empty convergent table"));
    }
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    let n = n as f64;
    Ok(table
        .rows
        .iter()
        .filter_map(|row| row.q.to_f64())
        .filter(|&q| q >= 1.0)
        .map(|q| c_d * (1.0 / q + q / n))
        .fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, Serialize)]
pub struct EffectiveExponent {
    pub index: usize,
    pub q: u64,
    /// Certified enclosure of `-ln|theta - p/q| / ln q`.
    pub lambda_lo: f64,
    pub lambda_hi: f64,
}

impl EffectiveExponent {
    pub fn lambda(&self) -> f64 {
        0.5 * (self.lambda_lo + self.lambda_hi)
    }
}

/// Effective irrationality exponents of the convergents with `2 <= q <= q_max`.
pub fn effective_irrationality(
    table: &ConvergentTable,
    q_max: u64,
) -> Result<Vec<EffectiveExponent>> {
    if table.is_empty() {
        return Err(invalid("empty convergent table"));
    }
    Ok(table
        .denominators_u64()
        .filter(|&(_, q)| (2..=q_max).contains(&q))
        .map(|(i, q)| {
            let row = &table.rows[i];
            let lnq = (q as f64).ln();
            EffectiveExponent {
                index: i,
                q,
                lambda_lo: next_down(-row.ln_err_hi / lnq),
                lambda_hi: next_up(-row.ln_err_lo / lnq),
            }
        })
        .collect())
}
