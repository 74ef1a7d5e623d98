//! Weyl sums of construction members in the other base, the Erdős–Turán
//! majorant, the pair products `V_h(mu, nu)` and the binomial tail inequality.
//!
//! Every fractional part is obtained by exact integer reduction; floating
//! point enters only once per term.

use num_bigint::{BigInt, Sign};
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::construction::ConstructionLaw;
use crate::digits::{check_base, Natural, RadixConverter};
use crate::error::{invalid, Result};
use crate::hp::ln_biguint;

/// Default Erdős–Turán constant for the monitored deviation check.
pub const C_ET: f64 = 4.0;

const TWO_64: f64 = 18_446_744_073_709_551_616.0;

fn e(frac: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * frac)
}

/// `r / d` for `0 <= r < d`, accurate to `2^-64` before the final rounding.
fn unit_fraction(r: &Natural, d: &Natural) -> f64 {
    let scaled: Natural = (r << 64u32) / d;
    scaled.to_u64().unwrap_or(u64::MAX) as f64 / TWO_64
}

/// Distance to the nearest integer of `num / den`, `den > 0`.
fn nearest_distance(num: &BigInt, den: &Natural) -> f64 {
    let den_i = BigInt::from_biguint(Sign::Plus, den.clone());
    let r = num.mod_floor(&den_i).magnitude().clone();
    let other = den - &r;
    unit_fraction(if r <= other { &r } else { &other }, den)
}

fn fractional_part(num: &BigInt, den: &Natural) -> f64 {
    let den_i = BigInt::from_biguint(Sign::Plus, den.clone());
    unit_fraction(num.mod_floor(&den_i).magnitude(), den)
}

/// Digits per 64-bit window in base `a`.
fn window(a: u32) -> usize {
    let mut len = 0;
    let mut p: u64 = 1;
    while let Some(next) = p.checked_mul(u64::from(a)) {
        if next > 1 << 63 {
            break;
        }
        p = next;
        len += 1;
    }
    len
}

/// `<value / a^nu>` for `nu = 1..=n`, read off the base-`a` digits of `value`.
pub fn fractional_parts(
    value: &Natural,
    a: u32,
    n: usize,
    conv: &mut RadixConverter,
) -> Result<Vec<f64>> {
    check_base(a)?;
    let digits = conv.to_digits(value);
    let d = digits.digits();
    let len = window(a);
    let scale = (u64::from(a)).pow(len as u32) as f64;
    Ok((1..=n)
        .map(|nu| {
            let mut r: u64 = 0;
            for i in 1..=len {
                let digit = nu
                    .checked_sub(i)
                    .and_then(|p| d.get(p))
                    .copied()
                    .unwrap_or(0);
                r = r * u64::from(a) + u64::from(digit);
            }
            r as f64 / scale
        })
        .collect())
}

fn check_weyl(a: u32, n: usize) -> Result<()> {
    check_base(a)?;
    if n == 0 {
        return Err(invalid("number of shifts n must be at least 1"));
    }
    Ok(())
}

/// `sigma_h(m, n) = (1/n) sum_{1<=nu<=n} e(h m / a^nu)`.
pub fn weyl_sum(m: &Natural, a: u32, n: usize, h: u64) -> Result<Complex64> {
    check_weyl(a, n)?;
    if h == 0 {
        return Err(invalid("harmonic h must be at least 1"));
    }
    let mut conv = RadixConverter::new(a)?;
    weyl_sum_with(m, a, n, h, &mut conv)
}

fn weyl_sum_with(
    m: &Natural,
    a: u32,
    n: usize,
    h: u64,
    conv: &mut RadixConverter,
) -> Result<Complex64> {
    let hm = m * Natural::from(h);
    let sum: Complex64 = fractional_parts(&hm, a, n, conv)?.into_iter().map(e).sum();
    Ok(sum / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeylRow {
    pub h: u64,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeylTable {
    pub a: u32,
    pub n: usize,
    #[serde(rename = "H")]
    pub big_h: u64,
    pub rows: Vec<WeylRow>,
    pub delta: f64,
}

/// All `sigma_h` for `h <= H` and the resulting `Delta_n(m)`.
pub fn weyl_table(m: &Natural, a: u32, n: usize, big_h: u64) -> Result<WeylTable> {
    check_weyl(a, n)?;
    if big_h == 0 {
        return Err(invalid("harmonic cutoff H must be at least 1"));
    }
    let mut conv = RadixConverter::new(a)?;
    let mut rows = Vec::with_capacity(big_h as usize);
    let mut delta = 1.0 / (big_h as f64 + 1.0);
    for h in 1..=big_h {
        let s = weyl_sum_with(m, a, n, h, &mut conv)?;
        delta += s.norm() / h as f64;
        rows.push(WeylRow {
            h,
            re: s.re,
            im: s.im,
            abs: s.norm(),
        });
    }
    Ok(WeylTable {
        a,
        n,
        big_h,
        rows,
        delta,
    })
}

/// `Delta_n(m) = 1/(H+1) + sum_{h<=H} |sigma_h(m, n)| / h`.
pub fn delta_n(m: &Natural, a: u32, n: usize, big_h: u64) -> Result<f64> {
    Ok(weyl_table(m, a, n, big_h)?.delta)
}

/// Exact dyadic form `x = num / 2^shift` of a finite non-negative float.
fn dyadic(x: f64) -> (Natural, u32) {
    if x == 0.0 {
        return (Natural::zero(), 0);
    }
    let bits = x.to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, exp) = if exp_bits == 0 {
        (frac, -1074)
    } else {
        (frac | 1 << 52, exp_bits - 1075)
    };
    if exp >= 0 {
        (Natural::from(mant) << exp as u32, 0)
    } else {
        (Natural::from(mant), (-exp) as u32)
    }
}

/// `|#{nu <= n : <m/a^nu> in [alpha, beta)} / n - (beta - alpha)|`, counted exactly.
pub fn digit_frequency_deviation(
    m: &Natural,
    a: u32,
    n: usize,
    alpha: f64,
    beta: f64,
) -> Result<f64> {
    check_weyl(a, n)?;
    if !(alpha.is_finite() && beta.is_finite() && 0.0 <= alpha && alpha < beta && beta <= 1.0) {
        return Err(invalid(format!(
            "interval [{alpha}, {beta}) is not a subinterval of [0, 1]"
        )));
    }
    let (lo_num, lo_shift) = dyadic(alpha);
    let (hi_num, hi_shift) = dyadic(beta);
    let digits = RadixConverter::new(a)?.to_digits(m);
    let mut residue = Natural::zero();
    let mut power = Natural::one();
    let mut count = 0usize;
    for nu in 1..=n {
        if let Some(&d) = digits.digits().get(nu - 1) {
            residue += &power * Natural::from(d);
        }
        power *= Natural::from(a);
        // residue / power >= lo_num / 2^lo_shift  and  residue / power < hi_num / 2^hi_shift
        let above = (&residue << lo_shift) >= &lo_num * &power;
        let below = (&residue << hi_shift) < &hi_num * &power;
        if above && below {
            count += 1;
        }
    }
    Ok((count as f64 / n as f64 - (beta - alpha)).abs())
}

fn check_pair(h: u64, mu: usize, nu: usize) -> Result<()> {
    if h == 0 || mu == 0 || nu == 0 {
        return Err(invalid("h, mu and nu must be at least 1"));
    }
    Ok(())
}

/// Phase numerators `h (b-1) b^j (a^mu - a^nu)` reduced mod `a^(mu+nu)`, for `j = 0..=last`.
fn pair_phases(
    h: u64,
    mu: usize,
    nu: usize,
    a: u32,
    b: u32,
    last: usize,
) -> (Vec<BigInt>, Natural) {
    let base_a = Natural::from(a);
    let den = base_a.pow((mu + nu) as u32);
    let den_i = BigInt::from_biguint(Sign::Plus, den.clone());
    let diff = BigInt::from(base_a.pow(mu as u32)) - BigInt::from(base_a.pow(nu as u32));
    let mut cur = (BigInt::from(h) * BigInt::from(b - 1) * diff).mod_floor(&den_i);
    let bb = BigInt::from(b);
    let mut out = Vec::with_capacity(last + 1);
    for _ in 0..=last {
        out.push(cur.clone());
        cur = (cur * &bb).mod_floor(&den_i);
    }
    (out, den)
}

/// `S_h(mu, nu) = sum_{0<=j<=k} || h (b-1) b^j (1/a^nu - 1/a^mu) ||^2`.
pub fn s_quadratic(h: u64, mu: usize, nu: usize, a: u32, b: u32, k: usize) -> Result<f64> {
    check_pair(h, mu, nu)?;
    check_base(a)?;
    check_base(b)?;
    if mu == nu {
        return Ok(0.0);
    }
    let (phases, den) = pair_phases(h, mu, nu, a, b, k);
    Ok(phases
        .iter()
        .map(|p| {
            let d = nearest_distance(p, &den);
            d * d
        })
        .sum())
}

/// `V_h(mu, nu) = prod_j (1 - rho + rho e(h (b-1) b^j (1/a^nu - 1/a^mu)))` over the
/// `k` digit positions of the law.
pub fn v_product(h: u64, mu: usize, nu: usize, law: &ConstructionLaw, a: u32) -> Result<Complex64> {
    check_pair(h, mu, nu)?;
    check_base(a)?;
    if mu == nu {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let rho = law.rho();
    let (phases, den) = pair_phases(h, mu, nu, a, law.host_base(), law.k() - 1);
    Ok(phases
        .iter()
        .map(|p| Complex64::new(1.0 - rho, 0.0) + e(fractional_part(p, &den)) * rho)
        .product())
}

/// `exp(-8 rho (1-rho) S_h(mu, nu))` with `S_h` over the law's digit positions.
pub fn v_bound(h: u64, mu: usize, nu: usize, law: &ConstructionLaw, a: u32) -> Result<f64> {
    let rho = law.rho();
    let s = s_quadratic(h, mu, nu, a, law.host_base(), law.k() - 1)?;
    Ok((-8.0 * rho * (1.0 - rho) * s).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpectedWeylSq {
    /// `E|sigma_h(., n)|^2`.
    pub value: f64,
    /// Imaginary part of the pair sum, zero up to rounding.
    pub imag_residue: f64,
    /// `M_h(n)^2 = (1/n^2) sum exp(-8 rho (1-rho) S_h(mu, nu))`.
    pub bound: f64,
}

/// `E|sigma_h(., n)|^2 = (1/n^2) sum_{mu, nu <= n} V_h(mu, nu)`, with its majorant.
pub fn expected_weyl_sq(law: &ConstructionLaw, a: u32, n: usize, h: u64) -> Result<ExpectedWeylSq> {
    check_weyl(a, n)?;
    if h == 0 {
        return Err(invalid("harmonic h must be at least 1"));
    }
    let rows: Vec<Result<(Complex64, f64)>> = (1..=n)
        .into_par_iter()
        .map(|mu| {
            let mut v = Complex64::new(0.0, 0.0);
            let mut bound = 0.0;
            for nu in 1..=n {
                v += v_product(h, mu, nu, law, a)?;
                bound += v_bound(h, mu, nu, law, a)?;
            }
            Ok((v, bound))
        })
        .collect();
    let mut v = Complex64::new(0.0, 0.0);
    let mut bound = 0.0;
    for row in rows {
        let (rv, rb) = row?;
        v += rv;
        bound += rb;
    }
    let n2 = (n * n) as f64;
    Ok(ExpectedWeylSq {
        value: v.re / n2,
        imag_residue: v.im / n2,
        bound: bound / n2,
    })
}

/// Number of shifts used for a law: `n = floor(log N_k / log a)`.
pub fn shift_count(law: &ConstructionLaw, a: u32) -> Result<usize> {
    check_base(a)?;
    let n_k = law.n_k();
    let base = Natural::from(a);
    let mut n = (ln_biguint(&n_k) / f64::from(a).ln()).floor().max(0.0) as usize;
    while n > 0 && base.pow(n as u32) > n_k {
        n -= 1;
    }
    while base.pow(n as u32 + 1) <= n_k {
        n += 1;
    }
    Ok(n)
}

/// `kappa = 2 floor(log n / (2 gamma log b))`.
pub fn kappa_choice(n: usize, gamma: f64, b: u32) -> usize {
    let k = (n as f64).ln() / (2.0 * gamma * f64::from(b).ln());
    2 * k.floor().max(0.0) as usize
}

/// `H = k^(sigma1 / gamma)`, at least 1.
pub fn harmonic_cutoff(k: usize, sigma1: f64, gamma: f64) -> u64 {
    ((k as f64).powf(sigma1 / gamma).floor() as u64).max(1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailBound {
    pub kappa: u64,
    pub s: u64,
    pub v: f64,
    pub b: u32,
    /// `sum_{j<=s} C(kappa, j) (b-1)^(kappa-j)`.
    #[serde(serialize_with = "crate::diophantine::as_string")]
    pub lhs: Natural,
    pub ln_lhs: f64,
    /// `ln((b-1+v)^kappa v^-s)`.
    pub ln_rhs: f64,
    /// Exact comparison, using the dyadic value of `v`.
    pub holds: bool,
}

fn binomial_sum(kappa: u64, s: u64, weight: u32) -> Natural {
    let w = Natural::from(weight);
    let mut c = Natural::one();
    let mut total = Natural::zero();
    for j in 0..=s {
        total += &c * w.pow((kappa - j) as u32);
        c = c * Natural::from(kappa - j) / Natural::from(j + 1);
    }
    total
}

/// Both sides of `sum_{j<=s} C(kappa,j)(b-1)^(kappa-j) <= (b-1+v)^kappa v^-s`.
pub fn binomial_tail_bound(kappa: u64, s: u64, v: f64, b: u32) -> Result<TailBound> {
    check_base(b)?;
    if s > kappa {
        return Err(invalid(format!("s = {s} exceeds kappa = {kappa}")));
    }
    if !(v > 0.0 && v <= 1.0) {
        return Err(invalid(format!("v must lie in (0, 1], got {v}")));
    }
    let lhs = binomial_sum(kappa, s, b - 1);
    let (vn, ve) = dyadic(v);
    // lhs * vn^s * 2^(ve kappa) <= ((b-1) 2^ve + vn)^kappa * 2^(ve s)
    let left = (&lhs * vn.pow(s as u32)) << (u64::from(ve) * kappa) as usize;
    let base = (Natural::from(b - 1) << ve as usize) + &vn;
    let right = base.pow(kappa as u32) << (u64::from(ve) * s) as usize;
    Ok(TailBound {
        kappa,
        s,
        v,
        b,
        ln_lhs: ln_biguint(&lhs),
        ln_rhs: kappa as f64 * (f64::from(b - 1) + v).ln() - s as f64 * v.ln(),
        holds: left <= right,
        lhs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChoiceCheck {
    pub kappa: u64,
    pub b: u32,
    pub s: f64,
    pub v: f64,
    pub ln_rhs: f64,
    /// `ln(b^kappa e^(-kappa/7b))`.
    pub ln_target: f64,
    pub holds: bool,
}

/// The choice `s = kappa/2b`, `v = (b-1)/(2b-1)` against `b^kappa e^(-kappa/7b)`.
pub fn tail_choice_check(kappa: u64, b: u32) -> Result<ChoiceCheck> {
    check_base(b)?;
    let bf = f64::from(b);
    let kf = kappa as f64;
    let s = kf / (2.0 * bf);
    let v = (bf - 1.0) / (2.0 * bf - 1.0);
    let ln_rhs = kf * (bf - 1.0 + v).ln() - s * v.ln();
    let ln_target = kf * bf.ln() - kf / (7.0 * bf);
    Ok(ChoiceCheck {
        kappa,
        b,
        s,
        v,
        ln_rhs,
        ln_target,
        holds: ln_rhs <= ln_target,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinaryTail {
    pub kappa: u64,
    /// `Z = 2^(kappa/2) sum_{j <= kappa/8} C(kappa/2, j)`.
    #[serde(serialize_with = "crate::diophantine::as_string")]
    pub z: Natural,
    pub log2_z: f64,
    /// `Z <= 2^(11 kappa / 12)`, decided exactly as `Z^12 <= 2^(11 kappa)`.
    pub holds: bool,
}

/// The paired-digit variant of the tail count used for base 2; `kappa` even.
pub fn binary_tail(kappa: u64) -> Result<BinaryTail> {
    if kappa == 0 || kappa % 2 == 1 {
        return Err(invalid(format!(
            "kappa must be a positive even integer, got {kappa}"
        )));
    }
    let half = kappa / 2;
    let z = binomial_sum(half, kappa / 8, 1) << half as usize;
    let holds = z.pow(12) <= Natural::one() << (11 * kappa) as usize;
    Ok(BinaryTail {
        kappa,
        log2_z: ln_biguint(&z) / std::f64::consts::LN_2,
        z,
        holds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaSample {
    pub k: usize,
    pub n: usize,
    pub deltas: Vec<f64>,
    pub median: f64,
}

/// `Delta_n` of members sampled from `law`, measured in base `a` with `n = shift_count`.
pub fn sampled_deltas(
    law: &ConstructionLaw,
    a: u32,
    big_h: u64,
    samples: usize,
    seed: u64,
) -> Result<DeltaSample> {
    if samples == 0 {
        return Err(invalid("sample count must be at least 1"));
    }
    let n = shift_count(law, a)?.max(1);
    let mut sampler = crate::construction::Sampler::new(law, seed);
    let mut host = RadixConverter::new(law.host_base())?;
    let mut deltas = Vec::with_capacity(samples);
    for _ in 0..samples {
        let m = host.from_digits(&sampler.next_member())?;
        deltas.push(delta_n(&m, a, n, big_h)?);
    }
    let mut sorted = deltas.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(DeltaSample {
        k: law.k(),
        n,
        median: sorted[sorted.len() / 2],
        deltas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{enumerate, make_law};
    use proptest::prelude::*;

    fn direct_weyl(m: u64, a: u32, n: usize, h: u64) -> Complex64 {
        let hm = u128::from(m) * u128::from(h);
        let mut sum = Complex64::new(0.0, 0.0);
        let mut p: u128 = 1;
        for _ in 0..n {
            p *= u128::from(a);
            sum += e((hm % p) as f64 / p as f64);
        }
        sum / n as f64
    }

    struct Lcg(u64);
    impl Lcg {
        fn next(&mut self) -> u64 {
            self.0 = self
                .0
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            self.0 ^ (self.0 >> 29)
        }
        fn below(&mut self, n: u64) -> u64 {
            self.next() % n
        }
    }

    #[test]
    fn weyl_examples() {
        let z = weyl_sum(&Natural::zero(), 3, 7, 5).unwrap();
        assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let s = weyl_sum(&Natural::one(), 2, 2, 1).unwrap();
        assert!((s - Complex64::new(-0.5, 0.5)).norm() < 1e-15);
        assert!(weyl_sum(&Natural::one(), 2, 0, 1).is_err());
        assert!(weyl_sum(&Natural::one(), 2, 2, 0).is_err());
    }

    #[test]
    fn weyl_matches_direct_summation() {
        let mut rng = Lcg(11);
        for _ in 0..100 {
            let m = rng.next();
            let a = 2 + rng.below(4) as u32;
            let n = 1 + rng.below(40) as usize;
            let h = 1 + rng.below(20);
            let got = weyl_sum(&Natural::from(m), a, n, h).unwrap();
            let want = direct_weyl(m, a, n, h);
            assert!((got - want).norm() < 1e-12, "m={m} a={a} n={n} h={h}");
            assert!(got.norm() <= 1.0 + 1e-15);
        }
    }

    #[test]
    fn weyl_is_one_when_divisible() {
        let m = Natural::from(3u32).pow(30) * Natural::from(17u32);
        assert!((weyl_sum(&m, 3, 30, 2).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn delta_examples() {
        let d = delta_n(&Natural::zero(), 2, 5, 4).unwrap();
        assert!((d - (0.2 + 1.0 + 0.5 + 1.0 / 3.0 + 0.25)).abs() < 1e-14);
        let s1 = weyl_sum(&Natural::one(), 2, 4, 1).unwrap().norm();
        let s2 = weyl_sum(&Natural::one(), 2, 4, 2).unwrap().norm();
        let d = delta_n(&Natural::one(), 2, 4, 2).unwrap();
        assert!((d - (1.0 / 3.0 + s1 + s2 / 2.0)).abs() < 1e-15);
        assert!(d >= 1.0 / 3.0);
    }

    #[test]
    fn frequency_examples() {
        let m = Natural::from(123_456_789u64);
        assert!(digit_frequency_deviation(&m, 3, 10, 0.0, 1.0).unwrap() < 1e-15);
        assert!(
            (digit_frequency_deviation(&Natural::zero(), 3, 10, 0.0, 0.5).unwrap() - 0.5).abs()
                < 1e-15
        );
        assert!(digit_frequency_deviation(&m, 3, 10, 0.5, 0.5).is_err());
        assert!(digit_frequency_deviation(&m, 3, 10, -0.1, 0.5).is_err());
    }

    #[test]
    fn frequency_counts_digits() {
        // <m/a^nu> in [j/a, (j+1)/a) iff the digit at position nu-1 equals j.
        let m = Natural::from(0b1011_0010_1110u64);
        let digits = RadixConverter::new(2).unwrap().to_digits(&m);
        let n = 12;
        let ones = (0..n)
            .filter(|&i| digits.digits().get(i) == Some(&1))
            .count();
        let dev = digit_frequency_deviation(&m, 2, n, 0.5, 1.0).unwrap();
        assert!((dev - (ones as f64 / n as f64 - 0.5).abs()).abs() < 1e-15);
    }

    #[test]
    fn erdos_turan_monitor() {
        let mut rng = Lcg(5);
        for _ in 0..100 {
            let a = 2 + rng.below(4) as u32;
            let n = 1 + rng.below(64) as usize;
            let digits: Vec<u8> = (0..n).map(|_| rng.below(u64::from(a)) as u8).collect();
            let m =
                crate::digits::from_digits(&crate::digits::DigitString::new(a, digits).unwrap())
                    .unwrap();
            let x = rng.below(1 << 20) as f64 / (1 << 20) as f64;
            let y = rng.below(1 << 20) as f64 / (1 << 20) as f64;
            let (alpha, beta) = if x < y {
                (x, y)
            } else if y < x {
                (y, x)
            } else {
                continue;
            };
            let dev = digit_frequency_deviation(&m, a, n, alpha, beta).unwrap();
            let delta = delta_n(&m, a, n, 16).unwrap();
            assert!(dev <= C_ET * delta, "dev {dev} delta {delta}");
        }
    }

    /// `S_h` by 200-decimal fixed point.
    fn s_decimal(h: u64, mu: usize, nu: usize, a: u32, b: u32, k: usize) -> f64 {
        let scale = BigInt::from(10u32).pow(200);
        let den = BigInt::from(a).pow((mu + nu) as u32);
        let diff = BigInt::from(a).pow(mu as u32) - BigInt::from(a).pow(nu as u32);
        let mut total = 0.0;
        for j in 0..=k {
            let num = BigInt::from(h) * BigInt::from(b - 1) * BigInt::from(b).pow(j as u32) * &diff;
            let x = (num * &scale).div_floor(&den);
            let frac = x.mod_floor(&scale);
            let dist = std::cmp::min(frac.clone(), &scale - &frac);
            let d = (dist / BigInt::from(10u32).pow(180)).to_f64().unwrap() / 1e20;
            total += d * d;
        }
        total
    }

    #[test]
    fn s_quadratic_examples() {
        assert_eq!(s_quadratic(3, 4, 4, 2, 3, 10).unwrap(), 0.0);
        // argument 2 * (1/4 - 1/2) = -1/2
        assert!((s_quadratic(1, 1, 2, 2, 3, 0).unwrap() - 0.25).abs() < 1e-15);
        let mut rng = Lcg(9);
        for _ in 0..50 {
            let h = 1 + rng.below(50);
            let mu = 1 + rng.below(30) as usize;
            let nu = 1 + rng.below(30) as usize;
            let a = 2 + rng.below(5) as u32;
            let b = 2 + rng.below(5) as u32;
            let k = rng.below(60) as usize;
            let got = s_quadratic(h, mu, nu, a, b, k).unwrap();
            let want = s_decimal(h, mu, nu, a, b, k);
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    fn v_enumerated(h: u64, mu: usize, nu: usize, law: &ConstructionLaw, a: u32) -> Complex64 {
        let den = Natural::from(a).pow((mu + nu) as u32);
        let diff = BigInt::from(a).pow(mu as u32) - BigInt::from(a).pow(nu as u32);
        enumerate(law)
            .unwrap()
            .iter()
            .map(|m| {
                let num = BigInt::from(m.value.clone()) * BigInt::from(h) * &diff;
                e(fractional_part(&num, &den)) * m.mass
            })
            .sum()
    }

    #[test]
    fn v_product_examples() {
        let law = make_law(3, 10, 0.5).unwrap();
        assert_eq!(
            v_product(2, 3, 3, &law, 2).unwrap(),
            Complex64::new(1.0, 0.0)
        );
        let got = v_product(1, 1, 2, &law, 2).unwrap();
        assert!((got - v_enumerated(1, 1, 2, &law, 2)).norm() < 1e-10);
    }

    #[test]
    fn v_product_matches_enumeration() {
        let mut rng = Lcg(3);
        for _ in 0..20 {
            let b = 2 + rng.below(4) as u32;
            let k = 1 + rng.below(12) as usize;
            let law = make_law(b, k, 0.1 + 0.8 * rng.below(1000) as f64 / 1000.0).unwrap();
            let a = 2 + rng.below(4) as u32;
            let (h, mu, nu) = (
                1 + rng.below(6),
                1 + rng.below(8) as usize,
                1 + rng.below(8) as usize,
            );
            let got = v_product(h, mu, nu, &law, a).unwrap();
            assert!((got - v_enumerated(h, mu, nu, &law, a)).norm() < 1e-10);
        }
    }

    #[test]
    fn v_product_below_gaussian_bound() {
        let mut rng = Lcg(21);
        for _ in 0..100 {
            let b = 2 + rng.below(5) as u32;
            let k = 1 + rng.below(80) as usize;
            let law = make_law(b, k, 0.05 + 0.9 * rng.below(1000) as f64 / 1000.0).unwrap();
            let a = 2 + rng.below(5) as u32;
            let (h, mu, nu) = (
                1 + rng.below(20),
                1 + rng.below(25) as usize,
                1 + rng.below(25) as usize,
            );
            let v = v_product(h, mu, nu, &law, a).unwrap().norm();
            assert!(v <= 1.0 + 1e-12);
            assert!(v <= v_bound(h, mu, nu, &law, a).unwrap() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn expected_weyl_sq_examples() {
        let law = make_law(3, 10, 0.5).unwrap();
        let one = expected_weyl_sq(&law, 2, 1, 7).unwrap();
        assert!((one.value - 1.0).abs() < 1e-15);

        let got = expected_weyl_sq(&law, 2, 6, 1).unwrap();
        let want: f64 = enumerate(&law)
            .unwrap()
            .iter()
            .map(|m| m.mass * weyl_sum(&m.value, 2, 6, 1).unwrap().norm_sqr())
            .sum();
        assert!((got.value - want).abs() < 1e-10);
        assert!(got.imag_residue.abs() < 1e-12);
        assert!(got.value <= got.bound + 1e-12);
        assert!((0.0..=1.0).contains(&got.value));
    }

    #[test]
    fn expected_weyl_sq_matches_enumeration() {
        for (b, k, rho, a, n, h) in [
            (2u32, 12usize, 0.3, 3u32, 5usize, 2u64),
            (5, 8, 0.7, 2, 7, 3),
            (3, 12, 0.2, 5, 4, 1),
        ] {
            let law = make_law(b, k, rho).unwrap();
            let got = expected_weyl_sq(&law, a, n, h).unwrap();
            let want: f64 = enumerate(&law)
                .unwrap()
                .iter()
                .map(|m| m.mass * weyl_sum(&m.value, a, n, h).unwrap().norm_sqr())
                .sum();
            assert!((got.value - want).abs() < 1e-10);
        }
    }

    #[test]
    fn tail_examples() {
        let t = binomial_tail_bound(12, 12, 1.0, 3).unwrap();
        assert_eq!(t.lhs, Natural::from(3u32).pow(12));
        assert!(t.holds);
        assert!((t.ln_rhs - 12.0 * 3f64.ln()).abs() < 1e-12);

        let t = binomial_tail_bound(20, 3, 0.4, 3).unwrap();
        let direct: u64 = (0..=3u64)
            .map(|j| {
                let c = (0..j).fold(1u64, |c, i| c * (20 - i) / (i + 1));
                c * 2u64.pow((20 - j) as u32)
            })
            .sum();
        assert_eq!(t.lhs, Natural::from(direct));
        assert!(t.holds);
        assert!(t.ln_lhs <= t.ln_rhs);

        for kappa in (30..=300).step_by(30) {
            assert!(
                tail_choice_check(kappa, 3).unwrap().holds,
                "kappa = {kappa}"
            );
        }
        assert!(binomial_tail_bound(5, 6, 0.5, 3).is_err());
        assert!(binomial_tail_bound(5, 2, 0.0, 3).is_err());
    }

    #[test]
    fn binary_variant() {
        for kappa in (8..=400).step_by(8) {
            let t = binary_tail(kappa).unwrap();
            assert!(t.holds, "kappa = {kappa}");
            assert!(t.log2_z <= 11.0 * kappa as f64 / 12.0 + 1e-9);
        }
        assert!(binary_tail(7).is_err());
    }

    #[test]
    fn parameter_choices() {
        let law = make_law(3, 10, 0.5).unwrap();
        // N_10 = 59048, 2^15 = 32768 <= 59048 < 65536.
        assert_eq!(shift_count(&law, 2).unwrap(), 15);
        assert_eq!(kappa_choice(1, 2.0, 3), 0);
        assert_eq!(kappa_choice(100_000, 1.0, 2), 16);
        assert_eq!(harmonic_cutoff(10, 0.0, 2.0), 1);
    }

    #[test]
    fn sampled_delta_decreases_with_k() {
        let rho = crate::exponents::rhos(2, 3, 1.0).unwrap().rho2;
        let medians: Vec<f64> = [100, 1000, 10_000]
            .iter()
            .map(|&k| {
                sampled_deltas(&make_law(2, k, rho).unwrap(), 3, 32, 9, 1)
                    .unwrap()
                    .median
            })
            .collect();
        assert!(
            medians[0] > medians[1] && medians[1] > medians[2],
            "{medians:?}"
        );
    }

    proptest! {
        #[test]
        fn tail_holds(kappa in 1u64..120, s_frac in 0.0f64..=1.0, v in 0.01f64..=1.0, b in 2u32..8) {
            let s = (s_frac * kappa as f64) as u64;
            let t = binomial_tail_bound(kappa, s, v, b).unwrap();
            prop_assert!(t.holds);
        }

        #[test]
        fn factor_modulus_identity(rho in 0.0f64..1.0, x in -10.0f64..10.0) {
            let f = Complex64::new(1.0 - rho, 0.0) + Complex64::from_polar(rho, 2.0 * PI * x);
            let s = (PI * x).sin();
            prop_assert!((f.norm_sqr() - (1.0 - 4.0 * rho * (1.0 - rho) * s * s)).abs() < 1e-12);
        }
    }
}
