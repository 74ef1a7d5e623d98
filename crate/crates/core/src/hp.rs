//! Outward-rounded dyadic interval arithmetic on big integers.
//!
//! A [`CertifiedReal`] is a closed interval `[lo, hi] / 2^bits`. Every
//! operation rounds the lower end down and the upper end up, so the true
//! value of any expression stays enclosed.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Result};

/// Extra bits carried through series evaluation and dropped at the end.
const GUARD_BITS: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertifiedReal {
    lo: BigInt,
    hi: BigInt,
    bits: u32,
    /// Exact rational value `(num, den)` when the quantity is known to be rational.
    exact: Option<(BigInt, BigInt)>,
}

fn shr_floor(x: &BigInt, k: u32) -> BigInt {
    x >> k
}

fn shr_ceil(x: &BigInt, k: u32) -> BigInt {
    -((-x) >> k)
}

/// Natural logarithm of `x` in `[2^-1074, 2^1024)` from its 64 leading bits.
pub(crate) fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let drop = bits - 64;
    let top = (x >> drop).to_u64().expect("64 leading bits") as f64;
    top.ln() + drop as f64 * std::f64::consts::LN_2
}

/// `ln(num/den)` for positive rationals, rounded to nearest f64.
pub(crate) fn ln_ratio(num: &BigInt, den: &BigInt) -> f64 {
    if num.is_zero() {
        return f64::NEG_INFINITY;
    }
    ln_biguint(num.magnitude()) - ln_biguint(den.magnitude())
}

impl CertifiedReal {
    /// Degenerate interval holding an integer.
    pub fn from_integer(n: i64, bits: u32) -> Self {
        let v = BigInt::from(n) << bits;
        Self {
            lo: v.clone(),
            hi: v,
            bits,
            exact: Some((BigInt::from(n), BigInt::one())),
        }
    }

    /// Tightest dyadic enclosure of `num/den` at `bits` fractional bits.
    pub fn from_rational(num: &BigInt, den: &BigInt, bits: u32) -> Result<Self> {
        if den.is_zero() {
            return Err(invalid("zero denominator"));
        }
        let (num, den) = if den.is_negative() {
            (-num, -den)
        } else {
            (num.clone(), den.clone())
        };
        let scaled = &num << bits;
        let g = num.gcd(&den);
        Ok(Self {
            lo: scaled.div_floor(&den),
            hi: num_integer::Integer::div_ceil(&scaled, &den),
            bits,
            exact: Some((&num / &g, &den / &g)),
        })
    }

    /// Interval from raw scaled endpoints.
    pub fn from_bounds(lo: BigInt, hi: BigInt, bits: u32) -> Result<Self> {
        if lo > hi {
            return Err(invalid("interval lower bound exceeds upper bound"));
        }
        Ok(Self {
            lo,
            hi,
            bits,
            exact: None,
        })
    }

    pub fn precision_bits(&self) -> u32 {
        self.bits
    }

    pub fn lo_scaled(&self) -> &BigInt {
        &self.lo
    }

    pub fn hi_scaled(&self) -> &BigInt {
        &self.hi
    }

    pub fn exact(&self) -> Option<&(BigInt, BigInt)> {
        self.exact.as_ref()
    }

    pub fn is_rational(&self) -> bool {
        self.exact.is_some()
    }

    pub fn center(&self) -> f64 {
        if let Some((n, d)) = &self.exact {
            return ratio_to_f64(n, d);
        }
        let sum = &self.lo + &self.hi;
        ratio_to_f64(&sum, &(BigInt::one() << (self.bits + 1)))
    }

    /// Half-width, rounded up.
    pub fn radius(&self) -> f64 {
        let width = &self.hi - &self.lo;
        let r = ratio_to_f64(&width, &(BigInt::one() << (self.bits + 1)));
        if r == 0.0 {
            0.0
        } else {
            next_up(r)
        }
    }

    /// `log2` of the half-width, usable when the width underflows f64.
    pub fn log2_radius(&self) -> f64 {
        let width = &self.hi - &self.lo;
        if width.is_zero() {
            return f64::NEG_INFINITY;
        }
        ln_biguint(width.magnitude()) / std::f64::consts::LN_2 - f64::from(self.bits) - 1.0
    }

    pub fn contains(&self, other: &CertifiedReal) -> bool {
        let k = self.bits.max(other.bits);
        let (a_lo, a_hi) = (&self.lo << (k - self.bits), &self.hi << (k - self.bits));
        let (b_lo, b_hi) = (&other.lo << (k - other.bits), &other.hi << (k - other.bits));
        a_lo <= b_lo && b_hi <= a_hi
    }

    pub fn add(&self, other: &CertifiedReal) -> CertifiedReal {
        let k = self.bits.max(other.bits);
        let lo = (&self.lo << (k - self.bits)) + (&other.lo << (k - other.bits));
        let hi = (&self.hi << (k - self.bits)) + (&other.hi << (k - other.bits));
        CertifiedReal {
            lo,
            hi,
            bits: k,
            exact: None,
        }
    }

    pub fn neg(&self) -> CertifiedReal {
        CertifiedReal {
            lo: -&self.hi,
            hi: -&self.lo,
            bits: self.bits,
            exact: self.exact.as_ref().map(|(n, d)| (-n, d.clone())),
        }
    }

    pub fn sub(&self, other: &CertifiedReal) -> CertifiedReal {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &CertifiedReal) -> CertifiedReal {
        let k = self.bits.max(other.bits);
        let a = [&self.lo << (k - self.bits), &self.hi << (k - self.bits)];
        let b = [&other.lo << (k - other.bits), &other.hi << (k - other.bits)];
        let products = [&a[0] * &b[0], &a[0] * &b[1], &a[1] * &b[0], &a[1] * &b[1]];
        let min = products.iter().min().expect("four products");
        let max = products.iter().max().expect("four products");
        CertifiedReal {
            lo: shr_floor(min, k),
            hi: shr_ceil(max, k),
            bits: k,
            exact: None,
        }
    }

    /// Division by an interval that excludes zero.
    pub fn div(&self, other: &CertifiedReal) -> Result<CertifiedReal> {
        if other.lo.sign() != other.hi.sign() || other.lo.is_zero() {
            return Err(invalid("division by an interval containing zero"));
        }
        let k = self.bits.max(other.bits);
        let a = [
            &self.lo << (2 * k - self.bits),
            &self.hi << (2 * k - self.bits),
        ];
        let b = [&other.lo << (k - other.bits), &other.hi << (k - other.bits)];
        let mut lo: Option<BigInt> = None;
        let mut hi: Option<BigInt> = None;
        for num in &a {
            for den in &b {
                let f = num.div_floor(den);
                let c = num_integer::Integer::div_ceil(num, den);
                lo = Some(lo.map_or(f.clone(), |l| l.min(f)));
                hi = Some(hi.map_or(c.clone(), |h| h.max(c)));
            }
        }
        Ok(CertifiedReal {
            lo: lo.expect("nonempty"),
            hi: hi.expect("nonempty"),
            bits: k,
            exact: None,
        })
    }

    /// Drops fractional bits, rounding outward.
    pub fn round_to(&self, bits: u32) -> CertifiedReal {
        if bits >= self.bits {
            return CertifiedReal {
                lo: &self.lo << (bits - self.bits),
                hi: &self.hi << (bits - self.bits),
                bits,
                exact: self.exact.clone(),
            };
        }
        let d = self.bits - bits;
        CertifiedReal {
            lo: shr_floor(&self.lo, d),
            hi: shr_ceil(&self.hi, d),
            bits,
            exact: self.exact.clone(),
        }
    }
}

/// Nearest f64 to `num/den`.
pub(crate) fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let sign = if (num.sign() == Sign::Minus) ^ (den.sign() == Sign::Minus) {
        -1.0
    } else {
        1.0
    };
    let (n, d) = (num.magnitude(), den.magnitude());
    // scale so the integer quotient carries 64+ significant bits
    let shift = 64i64 + d.bits() as i64 - n.bits() as i64;
    let q = if shift >= 0 {
        (n << shift as u64) / d
    } else {
        (n >> (-shift) as u64) / d
    };
    let q = q.to_f64().expect("quotient fits");
    sign * ldexp(q, -shift)
}

/// `x * 2^e` without intermediate overflow.
pub(crate) fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

pub(crate) fn next_up(x: f64) -> f64 {
    if x.is_nan() || x == f64::INFINITY {
        return x;
    }
    if x == 0.0 {
        return f64::from_bits(1);
    }
    let bits = x.to_bits();
    if x > 0.0 {
        f64::from_bits(bits + 1)
    } else {
        f64::from_bits(bits - 1)
    }
}

pub(crate) fn next_down(x: f64) -> f64 {
    -next_up(-x)
}

/// `sum_{i>=0} t^(2i+1)/(2i+1)` for `t = num/den` in `[0, 1/3]`, as a
/// scaled lower value and an error bound in ulps at `w` bits.
fn atanh_series(num: &BigUint, den: &BigUint, w: u32) -> (BigUint, BigUint) {
    let num2 = num * num;
    let den2 = den * den;
    let mut power = (num << w) / den;
    let mut sum = BigUint::zero();
    let mut i: u64 = 0;
    while !power.is_zero() {
        sum += &power / (2 * i + 1);
        power = power * &num2 / &den2;
        i += 1;
    }
    // each truncation loses < 1 ulp and the losses do not grow under
    // multiplication by t^2 < 1; the remaining tail is below 2 ulps per term
    let err = BigUint::from(4 * (i + 2) * (i + 2));
    (sum, err)
}

/// Enclosure of `ln(num/den)` for a positive rational, `bits` fractional bits.
pub fn ln_rational(num: &BigUint, den: &BigUint, bits: u32) -> Result<CertifiedReal> {
    if num.is_zero() || den.is_zero() {
        return Err(invalid("logarithm of a non-positive value"));
    }
    if num == den {
        return Ok(CertifiedReal::from_integer(0, bits));
    }
    let w = bits + GUARD_BITS;
    // num/den = 2^e * m with m in [1, 2)
    let mut e = num.bits() as i64 - den.bits() as i64;
    let (mut m_num, m_den) = if e >= 0 {
        (num.clone(), den << e as u64)
    } else {
        (num << (-e) as u64, den.clone())
    };
    if m_num < m_den {
        m_num <<= 1u32;
        e -= 1;
    }
    // ln m = 2 atanh((m - 1)/(m + 1)), argument in [0, 1/3)
    let t_num = &m_num - &m_den;
    let t_den = &m_num + &m_den;
    let (s, s_err) = atanh_series(&t_num, &t_den, w);
    let ln_m_lo = BigInt::from(&s << 1u32);
    let ln_m_hi = BigInt::from((&s + &s_err) << 1u32);

    let mut lo = ln_m_lo;
    let mut hi = ln_m_hi;
    if e != 0 {
        let (l2, l2_err) = atanh_series(&BigUint::one(), &BigUint::from(3u32), w);
        let l2_lo = BigInt::from(&l2 << 1u32);
        let l2_hi = BigInt::from((&l2 + &l2_err) << 1u32);
        let e_big = BigInt::from(e);
        if e > 0 {
            lo += &e_big * &l2_lo;
            hi += &e_big * &l2_hi;
        } else {
            lo += &e_big * &l2_hi;
            hi += &e_big * &l2_lo;
        }
    }
    Ok(CertifiedReal {
        lo: shr_floor(&lo, GUARD_BITS),
        hi: shr_ceil(&hi, GUARD_BITS),
        bits,
        exact: None,
    })
}

/// Enclosure of `ln n` for a positive integer.
pub fn ln_integer(n: u64, bits: u32) -> Result<CertifiedReal> {
    ln_rational(&BigUint::from(n), &BigUint::one(), bits)
}

/// Enclosure of `ln x` for a positive interval.
pub fn ln_interval(x: &CertifiedReal) -> Result<CertifiedReal> {
    if x.lo.sign() != Sign::Plus {
        return Err(invalid("logarithm of an interval reaching zero"));
    }
    let den = BigUint::one() << x.bits;
    let lo = ln_rational(x.lo.magnitude(), &den, x.bits)?;
    let hi = ln_rational(x.hi.magnitude(), &den, x.bits)?;
    CertifiedReal::from_bounds(lo.lo, hi.hi, x.bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln2_and_ln3_enclose_known_digits() {
        let l2 = ln_integer(2, 200).unwrap();
        let l3 = ln_integer(3, 200).unwrap();
        assert!((l2.center() - std::f64::consts::LN_2).abs() < 1e-16);
        assert!((l3.center() - 3f64.ln()).abs() < 4e-16);
        assert!(l2.radius() < 1e-55);
        // ln 4 = 2 ln 2 must be consistent with the product enclosure
        let l4 = ln_integer(4, 200).unwrap();
        let two = CertifiedReal::from_integer(2, 200);
        let prod = two.mul(&l2);
        let overlap = l4.lo <= prod.hi && prod.lo <= l4.hi;
        assert!(overlap);
    }

    #[test]
    fn precision_doubling_nests() {
        let coarse = ln_integer(7, 128).unwrap();
        let fine = ln_integer(7, 256).unwrap();
        assert!(coarse.contains(&fine));
    }

    #[test]
    fn ln_of_fraction() {
        let x = ln_rational(&BigUint::from(1u32), &BigUint::from(10u32), 100).unwrap();
        assert!((x.center() - 0.1f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn division_encloses() {
        let a = ln_integer(2, 300).unwrap();
        let b = ln_integer(3, 300).unwrap();
        let q = a.div(&b).unwrap();
        assert!((q.center() - 0.630_929_753_571_457_4).abs() < 1e-16);
        assert!(q.log2_radius() < -290.0);
    }

    #[test]
    fn ratio_to_f64_is_accurate() {
        let n = BigInt::from(1) << 2000u32;
        let d = (BigInt::from(3) << 2000u32) + 1;
        assert!((ratio_to_f64(&n, &d) - 1.0 / 3.0).abs() < 1e-17);
        assert_eq!(ratio_to_f64(&BigInt::from(-5), &BigInt::from(2)), -2.5);
    }
}
