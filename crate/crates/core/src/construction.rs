//! The product-law construction on integers with two-valued digits.
//!
//! For a host base `b` and length `k`, the support is the set of integers
//! below `b^k` whose base-`b` digits all lie in `{0, b-1}`. Each digit is
//! `b-1` independently with probability `rho`, so `s_b` is `(b-1)` times a
//! binomial variable. Choosing `rho` moves the mean of `s_b` while the
//! expansion in the other base stays close to simply normal, which pins
//! the ratio `s_b/s_a`.

use num_traits::{ToPrimitive, Zero};
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::Serialize;

use crate::digits::{check_base, DigitString, Natural, RadixConverter};
use crate::diophantine::multiplicatively_dependent;
use crate::error::{invalid, Error, Result};
use crate::exponents::{lower_exponents, rhos, tau0};

/// Largest `k` accepted by [`enumerate`].
pub const ENUMERATION_LIMIT: usize = 24;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstructionLaw {
    host_base: u32,
    k: usize,
    rho: f64,
}

pub fn make_law(b: u32, k: usize, rho: f64) -> Result<ConstructionLaw> {
    check_base(b)?;
    if k == 0 {
        return Err(invalid("construction length k must be at least 1"));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(invalid(format!("rho must lie in (0, 1), got {rho}")));
    }
    Ok(ConstructionLaw {
        host_base: b,
        k,
        rho,
    })
}

impl ConstructionLaw {
    pub fn host_base(&self) -> u32 {
        self.host_base
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `N_k = b^k - 1`, the largest member.
    pub fn n_k(&self) -> Natural {
        Natural::from(self.host_base).pow(self.k as u32) - 1u32
    }

    pub fn mean_sb(&self) -> f64 {
        self.rho * f64::from(self.host_base - 1) * self.k as f64
    }

    pub fn var_sb(&self) -> f64 {
        let d = f64::from(self.host_base - 1);
        self.rho * (1.0 - self.rho) * self.k as f64 * d * d
    }

    /// Probability of one particular member with `j` digits equal to `b-1`.
    pub fn mass_of_count(&self, j: usize) -> f64 {
        self.rho.powi(j as i32) * (1.0 - self.rho).powi((self.k - j) as i32)
    }
}

/// Mass of `m` under the law; errors when `m` is outside the support.
pub fn mass(law: &ConstructionLaw, m: &Natural) -> Result<f64> {
    let digits = RadixConverter::new(law.host_base)?.to_digits(m);
    let top = (law.host_base - 1) as u8;
    if digits.len() > law.k {
        return Err(Error::NotInSupport(format!(
            "{m} has {} base-{} digits, more than k = {}",
            digits.len(),
            law.host_base,
            law.k
        )));
    }
    if let Some(d) = digits.digits().iter().find(|&&d| d != 0 && d != top) {
        return Err(Error::NotInSupport(format!(
            "{m} has base-{} digit {d} outside {{0, {top}}}",
            law.host_base
        )));
    }
    let j = digits.digits().iter().filter(|&&d| d == top).count();
    Ok(law.mass_of_count(j))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub value: Natural,
    /// Number of digits equal to `b-1`.
    pub ones: usize,
    pub mass: f64,
}

/// Every member of the support with its mass, in increasing order.
pub fn enumerate(law: &ConstructionLaw) -> Result<Vec<Member>> {
    if law.k > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            what: "enumeration length k",
            value: law.k as u64,
            limit: ENUMERATION_LIMIT as u64,
        });
    }
    let top = Natural::from(law.host_base - 1);
    let weights: Vec<Natural> = (0..law.k)
        .map(|j| &top * Natural::from(law.host_base).pow(j as u32))
        .collect();
    let masses: Vec<f64> = (0..=law.k).map(|j| law.mass_of_count(j)).collect();
    let mut out = Vec::with_capacity(1 << law.k);
    for mask in 0u32..(1u32 << law.k) {
        let mut value = Natural::zero();
        for (j, w) in weights.iter().enumerate() {
            if mask >> j & 1 == 1 {
                value += w;
            }
        }
        let ones = mask.count_ones() as usize;
        out.push(Member {
            value,
            ones,
            mass: masses[ones],
        });
    }
    Ok(out)
}

/// Reproducible sampler for one law.
///
/// The generator is xoshiro256** seeded through splitmix64; a digit is
/// `b-1` when the next 64-bit output is below `floor(rho * 2^64)`.
pub struct Sampler {
    law: ConstructionLaw,
    rng: Xoshiro256StarStar,
    threshold: u64,
}

impl Sampler {
    pub fn new(law: &ConstructionLaw, seed: u64) -> Self {
        Self {
            law: law.clone(),
            rng: Xoshiro256StarStar::seed_from_u64(seed),
            threshold: (law.rho * 18_446_744_073_709_551_616.0) as u64,
        }
    }

    /// Next member as `k` host-base digits (canonical, so high zeros are dropped).
    pub fn next_member(&mut self) -> DigitString {
        let top = (self.law.host_base - 1) as u8;
        let digits = (0..self.law.k)
            .map(|_| {
                if self.rng.next_u64() < self.threshold {
                    top
                } else {
                    0
                }
            })
            .collect();
        DigitString::new(self.law.host_base, digits).expect("digits in range")
    }
}

pub fn sample(law: &ConstructionLaw, seed: u64, count: usize) -> Result<Vec<DigitString>> {
    if count == 0 {
        return Err(invalid("sample count must be at least 1"));
    }
    let mut sampler = Sampler::new(law, seed);
    Ok((0..count).map(|_| sampler.next_member()).collect())
}

/// Chebyshev bound on `P(|s_b - E s_b| > T sqrt(k))`.
pub fn chebyshev_tail(law: &ConstructionLaw, t: f64) -> Result<f64> {
    if !(t >= 1.0) {
        return Err(invalid(format!(
            "tail parameter T must be at least 1, got {t}"
        )));
    }
    let d = f64::from(law.host_base - 1);
    Ok(law.rho * (1.0 - law.rho) * d * d / (t * t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Host {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyChoice {
    pub host: Host,
    pub host_base: u32,
    pub other_base: u32,
    pub rho: f64,
    /// Predicted counting exponent of the chosen construction.
    pub c: f64,
    #[serde(rename = "Lambda")]
    pub lambda: f64,
    /// Set when `a` and `b` are powers of a common integer.
    pub dependent_warning: bool,
}

/// Picks the construction for ratio `tau`: base `b` with `rho1` for small
/// `tau`, base `a` with `rho2` for large `tau`, the larger exponent in between.
pub fn choose_strategy(a: u32, b: u32, tau: f64) -> Result<StrategyChoice> {
    let r = rhos(a, b, tau)?;
    let report = lower_exponents(a, b, tau)?;
    let t0 = tau0(a, b);
    let use_a = if tau <= 0.5 * t0 {
        false
    } else if tau >= 2.0 * t0 {
        true
    } else {
        report.c2.unwrap_or(0.0) >= report.c1.unwrap_or(0.0)
    };
    let choice = if use_a {
        StrategyChoice {
            host: Host::A,
            host_base: a,
            other_base: b,
            rho: r.rho2,
            c: report.c2.expect("rho2 valid on this branch"),
            lambda: report.lambda,
            dependent_warning: false,
        }
    } else {
        StrategyChoice {
            host: Host::B,
            host_base: b,
            other_base: a,
            rho: r.rho1,
            c: report.c1.expect("rho1 valid on this branch"),
            lambda: report.lambda,
            dependent_warning: false,
        }
    };
    Ok(StrategyChoice {
        dependent_warning: multiplicatively_dependent(u64::from(a), u64::from(b)),
        ..choice
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleDigitSums {
    pub s_a: u64,
    pub s_b: u64,
}

impl SampleDigitSums {
    pub fn ratio(&self) -> f64 {
        self.s_b as f64 / self.s_a as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioSummary {
    pub a: u32,
    pub b: u32,
    pub tau: f64,
    pub k: usize,
    pub seed: u64,
    pub strategy: StrategyChoice,
    pub sums: Vec<SampleDigitSums>,
    pub mean_ratio: f64,
    pub median_ratio: f64,
    /// Deciles 10%..90% of `|s_b - tau s_a| / s_a`.
    pub rel_dev_deciles: Vec<f64>,
    pub median_rel_dev: f64,
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * p).round() as usize;
    sorted[idx]
}

/// Digit sums of a host-base member in both bases.
pub fn member_digit_sums(
    member: &DigitString,
    strategy: &StrategyChoice,
    host: &mut RadixConverter,
    other: &mut RadixConverter,
) -> Result<SampleDigitSums> {
    let s_host = member.digit_sum();
    let value = host.from_digits(member)?;
    let s_other = other.to_digits(&value).digit_sum();
    Ok(match strategy.host {
        Host::A => SampleDigitSums {
            s_a: s_host,
            s_b: s_other,
        },
        Host::B => SampleDigitSums {
            s_a: s_other,
            s_b: s_host,
        },
    })
}

/// Samples the construction selected for `(a, b, tau)` and summarizes `s_b/s_a`.
pub fn ratio_experiment(
    a: u32,
    b: u32,
    tau: f64,
    k: usize,
    samples: usize,
    seed: u64,
) -> Result<RatioSummary> {
    let strategy = choose_strategy(a, b, tau)?;
    ratio_experiment_with(a, b, tau, &strategy, k, samples, seed)
}

/// As [`ratio_experiment`] with an explicit construction.
pub fn ratio_experiment_with(
    a: u32,
    b: u32,
    tau: f64,
    strategy: &StrategyChoice,
    k: usize,
    samples: usize,
    seed: u64,
) -> Result<RatioSummary> {
    let law = make_law(strategy.host_base, k, strategy.rho)?;
    if samples == 0 {
        return Err(invalid("sample count must be at least 1"));
    }
    let mut sampler = Sampler::new(&law, seed);
    let mut host = RadixConverter::new(strategy.host_base)?;
    let mut other = RadixConverter::new(strategy.other_base)?;
    let mut sums = Vec::with_capacity(samples);
    for _ in 0..samples {
        let member = sampler.next_member();
        sums.push(member_digit_sums(&member, strategy, &mut host, &mut other)?);
    }
    let ratios: Vec<f64> = sums.iter().map(SampleDigitSums::ratio).collect();
    let mut sorted_ratios = ratios.clone();
    sorted_ratios.sort_by(f64::total_cmp);
    let mut devs: Vec<f64> = sums
        .iter()
        .map(|s| (s.s_b as f64 - tau * s.s_a as f64).abs() / s.s_a as f64)
        .collect();
    devs.sort_by(f64::total_cmp);
    let mean_ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;
    Ok(RatioSummary {
        a,
        b,
        tau,
        k,
        seed,
        strategy: strategy.clone(),
        sums,
        mean_ratio,
        median_ratio: quantile(&sorted_ratios, 0.5),
        rel_dev_deciles: (1..10).map(|i| quantile(&devs, i as f64 / 10.0)).collect(),
        median_rel_dev: quantile(&devs, 0.5),
    })
}

/// Value of a member as a float, for diagnostics on small laws.
pub fn member_value_f64(m: &Natural) -> f64 {
    m.to_f64().unwrap_or(f64::INFINITY)
}
