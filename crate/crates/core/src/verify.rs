//! Self-test suite: every fast algorithm in the crate against a slow,
//! independent second path.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::Serialize;

use crate::construction::{enumerate, make_law};
use crate::digits::{DigitString, Natural, RadixConverter};
use crate::diophantine::{
    fractional_multiples, log_ratio_continued_fraction, star_discrepancy, theta_interval,
};
use crate::error::Result;
use crate::scan::{
    digit_sum_counts, joint_histogram, naive_coincidences, predicate_counts, ChunkPolicy,
};
use crate::weyl::{
    binary_tail, binomial_tail_bound, expected_weyl_sq, v_bound, v_product, weyl_sum,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    match f() {
        Ok((passed, detail)) => CheckResult {
            name,
            passed,
            detail,
        },
        Err(e) => CheckResult {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

/// Runs every suite; `fast` shrinks the sizes so the whole run takes seconds.
pub fn run(fast: bool) -> Vec<CheckResult> {
    let scale = |small: u64, large: u64| if fast { small } else { large };
    vec![
        check("radix-divide-and-conquer", || {
            radix(scale(3000, 30_000) as usize)
        }),
        check("enumeration-moments", || {
            enumeration_moments(scale(10, 14) as usize)
        }),
        check("pair-products-vs-enumeration", || {
            pair_products(scale(8, 12) as usize)
        }),
        check(
            "weyl-sum-vs-direct",
            || weyl_direct(scale(50, 500) as usize),
        ),
        check("gaussian-bound-on-pair-products", || {
            gaussian_bound(scale(100, 1000) as usize)
        }),
        check("binomial-tail-exact", || {
            binomial_tail(scale(100, 1000) as usize)
        }),
        check("star-discrepancy-vs-brute-force", || {
            discrepancy(scale(200, 500) as usize)
        }),
        check("convergent-determinants", || {
            determinants(scale(30, 60) as usize)
        }),
        check("histogram-marginals-vs-digit-dp", || {
            marginals(scale(100_000, 10_000_000))
        }),
        check("coincidences-vs-naive", || {
            coincidences(scale(100_000, 1_000_000))
        }),
    ]
}

fn radix(digits: usize) -> Result<(bool, String)> {
    let mut rng = Xoshiro256StarStar::seed_from_u64(1);
    for base in [2u32, 3, 10, 37, 64] {
        let d: Vec<u8> = (0..digits)
            .map(|_| (rng.next_u64() % u64::from(base)) as u8)
            .collect();
        let ds = DigitString::new(base, d)?;
        let mut fast = RadixConverter::new(base)?;
        let mut slow = RadixConverter::with_threshold(base, usize::MAX)?;
        let n = fast.from_digits(&ds)?;
        if slow.from_digits(&ds)? != n || fast.to_digits(&n) != ds || slow.to_digits(&n) != ds {
            return Ok((false, format!("base {base} disagrees")));
        }
    }
    Ok((true, format!("{digits}-digit values, 5 bases")))
}

fn enumeration_moments(k: usize) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for (b, rho) in [(2u32, 0.2), (3, 0.5), (5, 0.63)] {
        let law = make_law(b, k, rho)?;
        let mut conv = RadixConverter::new(b)?;
        let sums: Vec<(f64, f64)> = enumerate(&law)?
            .into_iter()
            .map(|m| (m.mass, conv.to_digits(&m.value).digit_sum() as f64))
            .collect();
        let total: f64 = sums.iter().map(|(p, _)| p).sum();
        let mean: f64 = sums.iter().map(|(p, s)| p * s).sum();
        let var: f64 = sums.iter().map(|(p, s)| p * (s - mean).powi(2)).sum();
        worst = worst
            .max((total - 1.0).abs())
            .max((mean - law.mean_sb()).abs())
            .max((var - law.var_sb()).abs());
    }
    Ok((worst < 1e-10, format!("k = {k}, max deviation {worst:.3e}")))
}

fn pair_products(k: usize) -> Result<(bool, String)> {
    let law = make_law(3, k, 0.37)?;
    let (a, n, h) = (2u32, 5usize, 2u64);
    let members = enumerate(&law)?;
    let mut worst: f64 = 0.0;
    for mu in 1..=n {
        for nu in 1..=n {
            // direct sum over the support of e(h m (1/a^nu - 1/a^mu)), 128-bit exact phases
            let den = u128::from(a).pow((mu + nu) as u32);
            let diff = i128::from(a).pow(mu as u32) - i128::from(a).pow(nu as u32);
            let direct: Complex64 = members
                .iter()
                .map(|m| {
                    let mv = i128::from(u64::try_from(&m.value).expect("small member"));
                    let num = (mv * i128::from(h)).rem_euclid(den as i128) * diff;
                    let frac = num.rem_euclid(den as i128) as f64 / den as f64;
                    Complex64::from_polar(m.mass, 2.0 * std::f64::consts::PI * frac)
                })
                .sum();
            worst = worst.max((v_product(h, mu, nu, &law, a)? - direct).norm());
        }
    }
    let e = expected_weyl_sq(&law, a, n, h)?;
    let direct: f64 = members
        .iter()
        .map(|m| Ok(m.mass * weyl_sum(&m.value, a, n, h)?.norm_sqr()))
        .sum::<Result<f64>>()?;
    worst = worst.max((e.value - direct).abs());
    Ok((worst < 1e-10, format!("k = {k}, max deviation {worst:.3e}")))
}

fn weyl_direct(cases: usize) -> Result<(bool, String)> {
    let mut rng = Xoshiro256StarStar::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let m = rng.next_u64();
        let a = 2 + (rng.next_u64() % 4) as u32;
        let n = 1 + (rng.next_u64() % 40) as usize;
        let h = 1 + rng.next_u64() % 20;
        let hm = u128::from(m) * u128::from(h);
        let mut p = 1u128;
        let mut direct = Complex64::zero();
        for _ in 0..n {
            p *= u128::from(a);
            direct += Complex64::from_polar(
                1.0,
                2.0 * std::f64::consts::PI * ((hm % p) as f64 / p as f64),
            );
        }
        direct /= n as f64;
        worst = worst.max((weyl_sum(&Natural::from(m), a, n, h)? - direct).norm());
    }
    Ok((
        worst < 1e-12,
        format!("{cases} cases, max deviation {worst:.3e}"),
    ))
}

fn gaussian_bound(cases: usize) -> Result<(bool, String)> {
    let mut rng = Xoshiro256StarStar::seed_from_u64(3);
    let mut failures = 0;
    for _ in 0..cases {
        let b = 2 + (rng.next_u64() % 5) as u32;
        let k = 1 + (rng.next_u64() % 60) as usize;
        let rho = 0.05 + 0.9 * (rng.next_u64() % 1000) as f64 / 1000.0;
        let law = make_law(b, k, rho)?;
        let a = 2 + (rng.next_u64() % 5) as u32;
        let h = 1 + rng.next_u64() % 20;
        let mu = 1 + (rng.next_u64() % 20) as usize;
        let nu = 1 + (rng.next_u64() % 20) as usize;
        if v_product(h, mu, nu, &law, a)?.norm() > v_bound(h, mu, nu, &law, a)? * (1.0 + 1e-12) {
            failures += 1;
        }
    }
    Ok((
        failures == 0,
        format!("{cases} cases, {failures} violations"),
    ))
}

fn binomial_tail(cases: usize) -> Result<(bool, String)> {
    let mut rng = Xoshiro256StarStar::seed_from_u64(4);
    let mut failures = 0;
    for _ in 0..cases {
        let kappa = 1 + rng.next_u64() % 300;
        let s = rng.next_u64() % (kappa + 1);
        let v = (1 + rng.next_u64() % 1000) as f64 / 1000.0;
        let b = 2 + (rng.next_u64() % 9) as u32;
        if !binomial_tail_bound(kappa, s, v, b)?.holds {
            failures += 1;
        }
    }
    for kappa in (8..=296).step_by(8) {
        if !binary_tail(kappa)?.holds {
            failures += 1;
        }
    }
    Ok((
        failures == 0,
        format!("{cases} random cases plus base-2 variant, {failures} violations"),
    ))
}

/// `sup_t |#{x < t}/n - t|` evaluated at every point from both sides, O(n^2).
fn brute_discrepancy(points: &[f64]) -> f64 {
    let n = points.len() as f64;
    let mut worst: f64 = 0.0;
    for &t in points {
        let below = points.iter().filter(|&&x| x < t).count() as f64;
        let upto = points.iter().filter(|&&x| x <= t).count() as f64;
        worst = worst.max((below / n - t).abs()).max((upto / n - t).abs());
    }
    worst
}

fn discrepancy(n: usize) -> Result<(bool, String)> {
    let theta = theta_interval(2, 3, 256)?;
    let mut worst: f64 = 0.0;
    for len in [1, 2, 17, n / 2, n] {
        let pts = fractional_multiples(&theta, len);
        worst = worst.max((star_discrepancy(&pts)? - brute_discrepancy(&pts)).abs());
    }
    Ok((
        worst <= 1e-14,
        format!("n <= {n}, max deviation {worst:.3e}"),
    ))
}

fn determinants(terms: usize) -> Result<(bool, String)> {
    let table = log_ratio_continued_fraction(2, 3, terms, 1024)?;
    // p_{i+1} q_i - p_i q_{i+1} = (-1)^i
    let ok = table.rows.windows(2).enumerate().all(|(i, w)| {
        let det = &w[1].p * &w[0].q - &w[0].p * &w[1].q;
        det == if i % 2 == 0 {
            BigInt::one()
        } else {
            -BigInt::one()
        }
    });
    Ok((
        ok && !table.truncated,
        format!("{} convergents", table.len()),
    ))
}

fn marginals(x: u64) -> Result<(bool, String)> {
    let h = joint_histogram(2, 3, x, ChunkPolicy::default())?;
    let mut ma = digit_sum_counts(x, 2)?;
    let mut mb = digit_sum_counts(x, 3)?;
    ma.resize(h.rows, 0);
    mb.resize(h.cols, 0);
    Ok((
        h.marginal_a() == ma && h.marginal_b() == mb,
        format!("x = {x}"),
    ))
}

fn coincidences(x: u64) -> Result<(bool, String)> {
    let h = joint_histogram(2, 3, x, ChunkPolicy::default())?;
    let fast = predicate_counts(&h, 1.0, 0.0)?;
    let naive = naive_coincidences(2, 3, x)?;
    Ok((fast == naive, format!("x = {x}: {fast} vs {naive}")))
}
