//! Exact digit arithmetic in bases 2 through 64.
//!
//! Digits are stored least-significant first, so `digits[i]` is the
//! coefficient of `base^i`. Zero is the empty digit sequence.
//!
//! Radix conversion switches from limb-wise repeated division to a
//! divide-and-conquer scheme once the number has more than
//! [`DEFAULT_THRESHOLD`] digits. The divide-and-conquer path splits at
//! cached powers `base^(t * 2^i)` and divides with precomputed Newton
//! reciprocals, so its cost follows big-integer multiplication rather than
//! schoolbook division.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision non-negative integer.
pub type Natural = BigUint;

pub const MIN_BASE: u32 = 2;
pub const MAX_BASE: u32 = 64;

/// Digit count above which conversion uses divide-and-conquer.
pub const DEFAULT_THRESHOLD: usize = 512;

/// Reciprocals of powers below this many bits are computed by plain division.
const NEWTON_CUTOFF_BITS: u64 = 4096;

pub(crate) fn check_base(base: u32) -> Result<u8> {
    if (MIN_BASE..=MAX_BASE).contains(&base) {
        Ok(base as u8)
    } else {
        Err(Error::InvalidBase(base))
    }
}

/// A base together with a canonical little-endian digit sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DigitString {
    base: u8,
    digits: Vec<u8>,
}

impl DigitString {
    /// Validates the digits and strips trailing (most significant) zeros.
    pub fn new(base: u32, mut digits: Vec<u8>) -> Result<Self> {
        let base = check_base(base)?;
        if let Some((position, &digit)) = digits.iter().enumerate().find(|(_, &d)| d >= base) {
            return Err(Error::InvalidDigit {
                digit,
                position,
                base,
            });
        }
        while digits.last() == Some(&0) {
            digits.pop();
        }
        Ok(Self { base, digits })
    }

    pub(crate) fn from_raw(base: u8, mut digits: Vec<u8>) -> Self {
        debug_assert!(digits.iter().all(|&d| d < base));
        while digits.last() == Some(&0) {
            digits.pop();
        }
        Self { base, digits }
    }

    pub fn zero(base: u32) -> Result<Self> {
        Ok(Self {
            base: check_base(base)?,
            digits: Vec::new(),
        })
    }

    pub fn base(&self) -> u32 {
        u32::from(self.base)
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn into_digits(self) -> Vec<u8> {
        self.digits
    }

    /// Number of significant digits (zero has none).
    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_zero(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    pub fn digit_sum(&self) -> u64 {
        self.digits.iter().map(|&d| u64::from(d)).sum()
    }
}

/// Largest `c` with `base^c <= u64::MAX`, and `base^c`.
fn word_chunk(base: u8) -> (usize, u64) {
    let base = u64::from(base);
    let mut count = 1;
    let mut power = base;
    while let Some(next) = power.checked_mul(base) {
        power = next;
        count += 1;
    }
    (count, power)
}

struct Level {
    power: BigUint,
    reciprocal: BigUint,
    /// `reciprocal = floor(2^shift / power)`
    shift: u64,
    digits: usize,
}

impl Level {
    fn new(power: BigUint, digits: usize) -> Self {
        let shift = 2 * power.bits();
        let reciprocal = reciprocal(&power, shift);
        Self {
            power,
            reciprocal,
            shift,
            digits,
        }
    }

    /// Division of `n < 2^shift` by `power` through the cached reciprocal.
    fn div_rem(&self, n: &BigUint) -> (BigUint, BigUint) {
        let mut q: BigUint = (n * &self.reciprocal) >> self.shift;
        let qp = &q * &self.power;
        // q underestimates the true quotient by at most two
        let mut r = n - qp;
        while r >= self.power {
            r -= &self.power;
            q += 1u32;
        }
        (q, r)
    }
}

/// `floor(2^shift / p)` via one Newton step seeded from the reciprocal of the top half of `p`.
fn reciprocal(p: &BigUint, shift: u64) -> BigUint {
    let bits = p.bits();
    if bits <= NEWTON_CUTOFF_BITS {
        return (BigUint::one() << shift) / p;
    }
    let top = bits / 2 + 32;
    let drop = bits - top;
    let p_hi = p >> drop;
    let r_hi = reciprocal(&p_hi, 2 * top);
    // r_hi ~ 2^(2 top)/p_hi, so r_hi << (shift - 2 top - drop) ~ 2^shift/p
    let scale = shift - 2 * top - drop;
    let x = BigInt::from(r_hi << scale);
    let p = BigInt::from(p.clone());
    let target = BigInt::one() << shift;
    let err = &target - &p * &x;
    let mut x = &x + ((&x * &err) >> shift);
    let rem = &target - &p * &x;
    x += rem.div_floor(&p);
    debug_assert!(x.sign() != Sign::Minus);
    x.to_biguint().expect("reciprocal is non-negative")
}

/// Radix converter for one base with cached split powers.
///
/// Reuse one converter when converting many numbers of similar size; the
/// power table and reciprocals are built once and extended on demand.
pub struct RadixConverter {
    base: u8,
    threshold: usize,
    chunk_digits: usize,
    chunk_power: u64,
    levels: Vec<Level>,
}

impl RadixConverter {
    pub fn new(base: u32) -> Result<Self> {
        Self::with_threshold(base, DEFAULT_THRESHOLD)
    }

    /// `threshold` is the digit count above which divide-and-conquer is used.
    pub fn with_threshold(base: u32, threshold: usize) -> Result<Self> {
        let base = check_base(base)?;
        if threshold < 2 {
            return Err(crate::error::invalid(
                "conversion threshold must be at least 2",
            ));
        }
        let (chunk_digits, chunk_power) = word_chunk(base);
        Ok(Self {
            base,
            threshold,
            chunk_digits,
            chunk_power,
            levels: Vec::new(),
        })
    }

    pub fn base(&self) -> u32 {
        u32::from(self.base)
    }

    fn level(&mut self, i: usize) -> &Level {
        while self.levels.len() <= i {
            let next = match self.levels.last() {
                None => Level::new(
                    BigUint::from(self.base).pow(self.threshold as u32),
                    self.threshold,
                ),
                Some(prev) => Level::new(&prev.power * &prev.power, prev.digits * 2),
            };
            self.levels.push(next);
        }
        &self.levels[i]
    }

    /// Repeated division by the largest word-sized power of the base.
    /// Appends exactly `width` digits when given, otherwise the canonical digits.
    fn schoolbook_digits(&self, n: &BigUint, width: Option<usize>, out: &mut Vec<u8>) {
        let start = out.len();
        let mut limbs = n.to_u64_digits();
        let base = u64::from(self.base);
        while !limbs.is_empty() {
            let mut rem: u128 = 0;
            for limb in limbs.iter_mut().rev() {
                let cur = (rem << 64) | u128::from(*limb);
                *limb = (cur / u128::from(self.chunk_power)) as u64;
                rem = cur % u128::from(self.chunk_power);
            }
            while limbs.last() == Some(&0) {
                limbs.pop();
            }
            let mut rem = rem as u64;
            if limbs.is_empty() {
                while rem > 0 {
                    out.push((rem % base) as u8);
                    rem /= base;
                }
            } else {
                for _ in 0..self.chunk_digits {
                    out.push((rem % base) as u8);
                    rem /= base;
                }
            }
        }
        if let Some(width) = width {
            debug_assert!(out.len() - start <= width);
            out.resize(start + width, 0);
        }
    }

    fn split_digits(&mut self, n: &BigUint, level: usize, out: &mut Vec<u8>) {
        if level == 0 {
            let width = self.threshold;
            self.schoolbook_digits(n, Some(width), out);
            return;
        }
        let lower = self.level(level - 1);
        let (hi, lo) = lower.div_rem(n);
        self.split_digits(&lo, level - 1, out);
        self.split_digits(&hi, level - 1, out);
    }

    pub fn to_digits(&mut self, n: &Natural) -> DigitString {
        let mut out = Vec::new();
        if n.is_zero() {
            return DigitString::from_raw(self.base, out);
        }
        let approx_digits = n.bits() as f64 / f64::from(self.base).log2();
        if approx_digits + 1.0 < self.threshold as f64 || *n < self.level(0).power {
            self.schoolbook_digits(n, None, &mut out);
            return DigitString::from_raw(self.base, out);
        }
        let mut top = 1;
        while *n >= self.level(top).power {
            top += 1;
        }
        // n < power(top) = power(top - 1)^2
        let (hi, lo) = self.level(top - 1).div_rem(n);
        self.split_digits(&lo, top - 1, &mut out);
        let mut high = self.to_digits(&hi).into_digits();
        out.append(&mut high);
        DigitString::from_raw(self.base, out)
    }

    fn horner(&self, digits: &[u8]) -> BigUint {
        let base = u64::from(self.base);
        let mut n = BigUint::zero();
        // chunks are full from the low end, so only the most significant one can be short
        for chunk in digits.chunks(self.chunk_digits).rev() {
            let value = chunk
                .iter()
                .rev()
                .fold(0u64, |acc, &d| acc * base + u64::from(d));
            n *= self.chunk_power;
            n += value;
        }
        n
    }

    fn join_digits(&mut self, digits: &[u8]) -> BigUint {
        if digits.len() <= self.threshold {
            return self.horner(digits);
        }
        let mut i = 0;
        while self.level(i + 1).digits < digits.len() {
            i += 1;
        }
        let width = self.level(i).digits;
        let (lo, hi) = digits.split_at(width);
        let high = self.join_digits(hi);
        let low = self.join_digits(lo);
        high * &self.level(i).power + low
    }

    /// Value of a digit string written in this converter's base.
    pub fn from_digits(&mut self, d: &DigitString) -> Result<Natural> {
        if d.base != self.base {
            return Err(crate::error::invalid(format!(
                "converter for base {} given digits in base {}",
                self.base, d.base
            )));
        }
        Ok(self.join_digits(&d.digits))
    }
}

/// Canonical digits of `n` in `base`.
pub fn to_digits(n: &Natural, base: u32) -> Result<DigitString> {
    Ok(RadixConverter::new(base)?.to_digits(n))
}

/// Inverse of [`to_digits`].
pub fn from_digits(d: &DigitString) -> Result<Natural> {
    RadixConverter::new(d.base())?.from_digits(d)
}

/// Value-preserving change of base.
pub fn convert_base(d: &DigitString, new_base: u32) -> Result<DigitString> {
    check_base(new_base)?;
    if d.base() == new_base {
        return Ok(d.clone());
    }
    to_digits(&from_digits(d)?, new_base)
}

/// Machine-word digit sum.
pub fn digit_sum_u64(mut n: u64, base: u32) -> Result<u64> {
    let base = check_base(base)?;
    if base == 2 {
        return Ok(u64::from(n.count_ones()));
    }
    let base = u64::from(base);
    if base.is_power_of_two() {
        let width = base.trailing_zeros();
        let mask = base - 1;
        let mut sum = 0;
        while n != 0 {
            sum += n & mask;
            n >>= width;
        }
        return Ok(sum);
    }
    let mut sum = 0;
    while n != 0 {
        sum += n % base;
        n /= base;
    }
    Ok(sum)
}

/// `s_base(n)`, dispatching to the word path for `n < 2^64` and per-limb
/// popcounts for base 2.
pub fn digit_sum(n: &Natural, base: u32) -> Result<u64> {
    check_base(base)?;
    if let Some(word) = n.to_u64() {
        return digit_sum_u64(word, base);
    }
    if base == 2 {
        return Ok(n
            .iter_u64_digits()
            .map(|limb| u64::from(limb.count_ones()))
            .sum());
    }
    digit_sum_big(n, base)
}

/// Digit sum through full radix conversion; the oracle for the fast paths.
pub fn digit_sum_big(n: &Natural, base: u32) -> Result<u64> {
    Ok(to_digits(n, base)?.digit_sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn nat(n: u64) -> Natural {
        Natural::from(n)
    }

    #[test]
    fn small_examples() {
        assert_eq!(to_digits(&nat(5), 2).unwrap().digits(), &[1, 0, 1]);
        assert_eq!(to_digits(&nat(26), 3).unwrap().digits(), &[2, 2, 2]);
        assert!(to_digits(&nat(0), 7).unwrap().is_zero());
        let d = DigitString::new(2, vec![1, 0, 1]).unwrap();
        assert_eq!(from_digits(&d).unwrap(), nat(5));
        assert_eq!(from_digits(&DigitString::zero(9).unwrap()).unwrap(), nat(0));
    }

    #[test]
    fn digit_sum_examples() {
        assert_eq!(digit_sum(&nat(5), 2).unwrap(), 2);
        assert_eq!(digit_sum(&nat(26), 3).unwrap(), 6);
        assert_eq!(digit_sum(&(Natural::one() << 100u32), 2).unwrap(), 1);
    }

    #[test]
    fn convert_examples() {
        let d = DigitString::new(3, vec![2, 2]).unwrap();
        assert_eq!(convert_base(&d, 2).unwrap().digits(), &[0, 0, 0, 1]);
        assert_eq!(convert_base(&d, 3).unwrap(), d);
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(to_digits(&nat(3), 1), Err(Error::InvalidBase(1))));
        assert!(matches!(
            to_digits(&nat(3), 65),
            Err(Error::InvalidBase(65))
        ));
        assert!(matches!(
            DigitString::new(3, vec![0, 3]),
            Err(Error::InvalidDigit {
                digit: 3,
                position: 1,
                base: 3
            })
        ));
        assert!(digit_sum_u64(7, 0).is_err());
    }

    #[test]
    fn trailing_zeros_are_stripped() {
        let d = DigitString::new(10, vec![4, 0, 0]).unwrap();
        assert_eq!(d.digits(), &[4]);
        assert!(DigitString::new(10, vec![0, 0]).unwrap().is_zero());
    }

    #[test]
    fn divide_and_conquer_matches_schoolbook() {
        // 3^20000 - 1 has 20000 digits all equal to 2 in base 3
        let n = BigUint::from(3u32).pow(20000) - 1u32;
        for threshold in [4, 17, 64, 512] {
            let mut conv = RadixConverter::with_threshold(3, threshold).unwrap();
            let d = conv.to_digits(&n);
            assert_eq!(d.len(), 20000);
            assert!(d.digits().iter().all(|&x| x == 2));
            assert_eq!(conv.from_digits(&d).unwrap(), n);
        }
        let big = (BigUint::one() << 300_000u32) - 12345u32;
        let mut small = RadixConverter::with_threshold(7, 1_000_000).unwrap();
        let mut fast = RadixConverter::with_threshold(7, 64).unwrap();
        assert_eq!(small.to_digits(&big), fast.to_digits(&big));
    }

    #[test]
    fn newton_reciprocal_is_exact() {
        let p = BigUint::from(5u32).pow(9000) + 77u32;
        let shift = 2 * p.bits();
        assert_eq!(reciprocal(&p, shift), (BigUint::one() << shift) / &p);
    }

    fn arb_nat() -> impl Strategy<Value = Natural> {
        proptest::collection::vec(any::<u64>(), 0..5).prop_map(|limbs| {
            let mut n = Natural::zero();
            for limb in limbs {
                n = (n << 64u32) + limb;
            }
            n
        })
    }

    proptest! {
        #[test]
        fn round_trip(n in arb_nat(), base in 2u32..=10) {
            let d = to_digits(&n, base).unwrap();
            prop_assert!(d.digits().last() != Some(&0));
            prop_assert_eq!(from_digits(&d).unwrap(), n);
        }

        #[test]
        fn congruence_mod_base_minus_one(n in arb_nat(), base in 3u32..=64) {
            let s = digit_sum(&n, base).unwrap();
            let m = u64::from(base - 1);
            prop_assert_eq!(s % m, (&n % m).to_u64().unwrap());
        }

        #[test]
        fn shift_invariance(n in arb_nat(), base in 2u32..=64, j in 0u32..=64) {
            let shifted = &n * BigUint::from(base).pow(j);
            prop_assert_eq!(digit_sum(&shifted, base).unwrap(), digit_sum(&n, base).unwrap());
        }

        #[test]
        fn subadditivity(m in arb_nat(), n in arb_nat(), base in 2u32..=64) {
            let lhs = digit_sum(&(&m + &n), base).unwrap();
            prop_assert!(lhs <= digit_sum(&m, base).unwrap() + digit_sum(&n, base).unwrap());
        }

        #[test]
        fn word_path_matches_big_path(n in any::<u64>(), base in 2u32..=64) {
            prop_assert_eq!(digit_sum_u64(n, base).unwrap(), digit_sum_big(&nat(n), base).unwrap());
        }
    }
}
