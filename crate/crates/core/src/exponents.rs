//! Exponents of the lower and upper counting bounds.
//!
//! The lower-bound side is closed form: `tau0`, the Bernoulli parameters of
//! the two constructions, their entropy exponents `c1`, `c2`, `c0`, and the
//! error-term exponents. The upper-bound side optimizes two Chernoff
//! exponents `g` and `h` over their tilts, then balances them in the
//! threshold parameter `lambda`.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::optimize::{bisect, first_crossing, golden_max};

const ROOT_TOL: f64 = 1e-15;
const LAMBDA_TOL: f64 = 1e-12;
/// Below this value of `base * x` the tilt equations use their Taylor series.
const SERIES_CUTOFF: f64 = 1e-3;

fn check_bases(a: u32, b: u32) -> Result<()> {
    if a < 2 || b < 2 {
        return Err(invalid(format!("bases must be at least 2, got ({a}, {b})")));
    }
    Ok(())
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(invalid(format!("tau must be a positive real, got {tau}")));
    }
    Ok(())
}

/// `(b-1) log a / ((a-1) log b)`: the ratio `s_b/s_a` of a typical integer.
pub fn tau0(a: u32, b: u32) -> f64 {
    let (a, b) = (f64::from(a), f64::from(b));
    (b - 1.0) * a.ln() / ((a - 1.0) * b.ln())
}

/// `(a-1)/(2 log a)`: mean digit sum per unit of `log n` in base `a`.
pub fn tau_base(a: u32) -> f64 {
    0.5 * (f64::from(a) - 1.0) / f64::from(a).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rhos {
    pub rho1: f64,
    pub rho2: f64,
    /// `tau < 2 tau0`, so `rho1 < 1` and the base-`b` construction applies.
    pub rho1_valid: bool,
    /// `tau > tau0 / 2`, so `rho2 < 1` and the base-`a` construction applies.
    pub rho2_valid: bool,
}

pub fn rhos(a: u32, b: u32, tau: f64) -> Result<Rhos> {
    check_bases(a, b)?;
    check_tau(tau)?;
    let t0 = tau0(a, b);
    Ok(Rhos {
        rho1: tau / (2.0 * t0),
        rho2: t0 / (2.0 * tau),
        rho1_valid: tau < 2.0 * t0,
        rho2_valid: tau > 0.5 * t0,
    })
}

/// Binary entropy in nats.
fn entropy(p: f64) -> f64 {
    -p * p.ln() - (1.0 - p) * (1.0 - p).ln()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentReport {
    pub a: u32,
    pub b: u32,
    pub tau: f64,
    pub tau0: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c0: f64,
    #[serde(rename = "Lambda")]
    pub lambda: f64,
    #[serde(rename = "M")]
    pub m: u32,
    pub sigma_max: f64,
    pub sigma1_b: Option<f64>,
    pub sigma1_a: Option<f64>,
}

pub fn lower_exponents(a: u32, b: u32, tau: f64) -> Result<ExponentReport> {
    let r = rhos(a, b, tau)?;
    let t0 = tau0(a, b);
    let (la, lb) = (f64::from(a).ln(), f64::from(b).ln());
    let c1 = r.rho1_valid.then(|| entropy(r.rho1) / lb);
    let c2 = r.rho2_valid.then(|| entropy(r.rho2) / la);
    let c0 = if tau <= 0.5 * t0 {
        c1
    } else if tau >= 2.0 * t0 {
        c2
    } else {
        Some(c1.unwrap_or(0.0).max(c2.unwrap_or(0.0)))
    }
    .expect("branch conditions define the selected exponent");
    let lambda = if tau <= t0 {
        r.rho1 * (1.0 - r.rho1)
    } else {
        r.rho2 * (1.0 - r.rho2)
    };
    let m = a.max(b);
    let mf = f64::from(m);
    let sigma1 = |rho: f64, base: f64| rho * (1.0 - rho) / (6.0 * base.powi(3) * base.ln());
    Ok(ExponentReport {
        a,
        b,
        tau,
        tau0: t0,
        rho1: r.rho1,
        rho2: r.rho2,
        c1,
        c2,
        c0,
        lambda,
        m,
        sigma_max: lambda / (6.0 * mf.powi(3) * mf.ln()),
        sigma1_b: r.rho1_valid.then(|| sigma1(r.rho1, f64::from(b))),
        sigma1_a: r.rho2_valid.then(|| sigma1(r.rho2, f64::from(a))),
    })
}

/// `ln((e^{a x} - 1)/(e^x - 1))` for `x > 0`.
fn ln_growth_ratio(a: f64, x: f64) -> f64 {
    if x < 1.0 {
        (f64::exp_m1(a * x) / f64::exp_m1(x)).ln()
    } else {
        (a - 1.0) * x + (-(-a * x).exp()).ln_1p() - (-(-x).exp()).ln_1p()
    }
}

/// Chernoff exponent of the upper tail of `s_a`:
/// `g(v) = -lambda (a-1) v / 2 + ln(e^{av} - 1) - ln(e^v - 1)`.
pub fn g_exponent(v: f64, a: u32, lambda: f64) -> Result<f64> {
    if !(v > 0.0) {
        return Err(invalid(format!("g needs v > 0, got {v}")));
    }
    let af = f64::from(a);
    Ok(-0.5 * lambda * (af - 1.0) * v + ln_growth_ratio(af, v))
}

/// Chernoff exponent of the lower tail of `s_b`:
/// `h(w) = w mu (b-1) / 2 + ln(1 - e^{-wb}) - ln(1 - e^{-w})`.
pub fn h_exponent(w: f64, b: u32, mu: f64) -> Result<f64> {
    if !(w > 0.0) {
        return Err(invalid(format!("h needs w > 0, got {w}")));
    }
    let bf = f64::from(b);
    Ok(0.5 * w * mu * (bf - 1.0) + (f64::exp_m1(-bf * w) / f64::exp_m1(-w)).ln())
}

/// `a e^{av}/(e^{av}-1) - e^v/(e^v-1)`, increasing from `(a-1)/2` to `a-1`.
pub(crate) fn tilt_mean_upper(a: f64, v: f64) -> f64 {
    if a * v < SERIES_CUTOFF {
        let v2 = v * v;
        return 0.5 * (a - 1.0) + (a * a - 1.0) * v / 12.0 - (a.powi(4) - 1.0) * v * v2 / 720.0
            + (a.powi(6) - 1.0) * v * v2 * v2 / 30240.0;
    }
    a / -f64::exp_m1(-a * v) - 1.0 / -f64::exp_m1(-v)
}

/// `1/(e^w-1) - b/(e^{bw}-1)`, decreasing from `(b-1)/2` to 0.
pub(crate) fn tilt_mean_lower(b: f64, w: f64) -> f64 {
    if b * w < SERIES_CUTOFF {
        let w2 = w * w;
        return 0.5 * (b - 1.0) - (b * b - 1.0) * w / 12.0 + (b.powi(4) - 1.0) * w * w2 / 720.0
            - (b.powi(6) - 1.0) * w * w2 * w2 / 30240.0;
    }
    1.0 / f64::exp_m1(w) - b / f64::exp_m1(b * w)
}

/// Expands `[0, hi]` until `f(hi)` has the sign opposite to `f(0)`.
fn bracket_from_zero<F: Fn(f64) -> f64>(f: &F) -> Result<f64> {
    let mut hi = 1.0;
    let s0 = f(0.0).signum();
    for _ in 0..60 {
        if f(hi).signum() != s0 {
            return Ok(hi);
        }
        hi *= 2.0;
    }
    Err(Error::NoSolution("root bracket did not close".into()))
}

/// Optimal tilt `v_lambda` of the upper-tail bound, for `1 < lambda < 2`.
pub fn solve_v(lambda: f64, a: u32) -> Result<f64> {
    if !(lambda > 1.0 && lambda < 2.0) {
        return Err(Error::NoSolution(format!(
            "the upper-tail tilt equation needs 1 < lambda < 2, got {lambda}"
        )));
    }
    let af = f64::from(a);
    let target = 0.5 * lambda * (af - 1.0);
    let f = |v: f64| tilt_mean_upper(af, v) - target;
    let hi = bracket_from_zero(&f)?;
    bisect(f, 0.0, hi, ROOT_TOL)
}

/// Optimal tilt `w` of the lower-tail bound, for `0 < mu < 1`.
pub fn solve_w(mu: f64, b: u32) -> Result<f64> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::NoSolution(format!(
            "the lower-tail tilt equation needs 0 < mu < 1, got {mu}"
        )));
    }
    let bf = f64::from(b);
    let target = 0.5 * mu * (bf - 1.0);
    let f = |w: f64| tilt_mean_lower(bf, w) - target;
    let hi = bracket_from_zero(&f)?;
    bisect(f, 0.0, hi, ROOT_TOL)
}

/// `g(v_lambda)/ln a`, the exponent of the count with a large base-`a` digit sum.
pub fn upper_tail_exponent(lambda: f64, a: u32) -> Result<f64> {
    let v = solve_v(lambda, a)?;
    Ok(g_exponent(v, a, lambda)? / f64::from(a).ln())
}

/// `h(w_mu)/ln b`, the exponent of the count with a small base-`b` digit sum.
pub fn lower_tail_exponent(mu: f64, b: u32) -> Result<f64> {
    let w = solve_w(mu, b)?;
    Ok(h_exponent(w, b, mu)? / f64::from(b).ln())
}

/// The balancing point of the `(2, 3)` closed forms as printed, kept for comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrintedComparison {
    pub lambda: f64,
    pub d1: f64,
    pub d2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpperBoundReport {
    pub a: u32,
    pub b: u32,
    pub tau: f64,
    /// True when `tau > tau0` and the bound was computed for `(b, a, 1/tau)`.
    pub swapped: bool,
    pub tau_a: f64,
    pub tau_b: f64,
    pub domain: (f64, f64),
    pub lambda_star: f64,
    pub mu_star: f64,
    pub v_star: f64,
    pub w_star: f64,
    pub d1: f64,
    pub d2: f64,
    pub d0: f64,
    /// False when `d1 - d2` keeps its sign and the infimum sits at a domain end.
    pub balanced: bool,
    pub printed: Option<PrintedComparison>,
}

/// Admissible exponent `d0(tau) < 1` for the count of `n <= x` with `s_b(n) ~ tau s_a(n)`.
pub fn upper_exponent(a: u32, b: u32, tau: f64) -> Result<UpperBoundReport> {
    check_bases(a, b)?;
    check_tau(tau)?;
    let t0 = tau0(a, b);
    if (tau - t0).abs() <= 4.0 * f64::EPSILON * t0 {
        return Err(Error::ExcludedParameter(format!(
            "tau = tau0 = {t0} has density-one solutions and no upper exponent below 1"
        )));
    }
    let (ea, eb, et, swapped) = if tau < t0 {
        (a, b, tau, false)
    } else {
        (b, a, 1.0 / tau, true)
    };
    let t0e = tau0(ea, eb);
    let hi = (t0e / et).min(2.0);
    let mu_of = |lambda: f64| lambda * et / t0e;
    let d1 = |lambda: f64| upper_tail_exponent(lambda, ea).unwrap_or(f64::NAN);
    let d2 = |lambda: f64| lower_tail_exponent(mu_of(lambda), eb).unwrap_or(f64::NAN);

    let eps = 1e-12;
    let (lo_in, hi_in) = (1.0 + eps, hi * (1.0 - eps));
    let diff = |lambda: f64| d1(lambda) - d2(lambda);
    let (lambda_star, balanced) = match first_crossing(diff, lo_in, hi_in, 256, LAMBDA_TOL) {
        Some(l) => (l, true),
        // d1 decreases and d2 increases, so without a crossing the smaller
        // maximum sits at the upper end of the domain
        None => (hi_in, false),
    };
    let mu_star = mu_of(lambda_star);
    let v_star = solve_v(lambda_star, ea)?;
    let w_star = solve_w(mu_star, eb)?;
    let (d1s, d2s) = (d1(lambda_star), d2(lambda_star));
    let printed = ((ea, eb) == (2, 3))
        .then(|| printed_balance_23(et))
        .flatten();
    Ok(UpperBoundReport {
        a,
        b,
        tau,
        swapped,
        tau_a: tau_base(ea),
        tau_b: tau_base(eb),
        domain: (1.0, hi),
        lambda_star,
        mu_star,
        v_star,
        w_star,
        d1: d1s,
        d2: d2s,
        d0: d1s.max(d2s),
        balanced,
        printed,
    })
}

/// Closed forms for `(a, b) = (2, 3)` at `tau = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedForms23 {
    pub lambda: f64,
    pub mu: f64,
    pub v: f64,
    /// `e^w` as the positive root of `mu y^2 + (mu - 1) y + (mu - 2) = 0`.
    pub y_quadratic: f64,
    pub w: f64,
    pub d1: f64,
    pub d2: f64,
}

fn check_domain_23(lambda: f64, tau: f64) -> Result<f64> {
    let t0 = tau0(2, 3);
    let hi = (t0 / tau).min(2.0);
    if !(lambda > 1.0 && lambda < hi) {
        return Err(invalid(format!(
            "lambda must lie in (1, {hi}), got {lambda}"
        )));
    }
    Ok(lambda * tau / t0)
}

pub fn closed_forms_23(lambda: f64) -> Result<ClosedForms23> {
    let mu = check_domain_23(lambda, 1.0)?;
    let v = (1.0 / (2.0 / lambda - 1.0)).ln();
    let disc = 1.0 + 6.0 * mu - 3.0 * mu * mu;
    let y = (1.0 - mu + disc.sqrt()) / (2.0 * mu);
    let w = y.ln();
    let d1 = -lambda / 4f64.ln() * v + (2.0 / (2.0 - lambda)).ln() / 2f64.ln();
    let d2 = h_exponent(w, 3, mu)? / 3f64.ln();
    Ok(ClosedForms23 {
        lambda,
        mu,
        v,
        y_quadratic: y,
        w,
        d1,
        d2,
    })
}

/// `d2` for `(2, 3)` evaluated with the printed forms
/// `w = ln((sqrt(D) + mu - 1)/6)` and `ln(1 - e^{-w} + e^{-2w})`.
pub fn printed_d2_23(lambda: f64, tau: f64) -> Result<f64> {
    let mu = check_domain_23(lambda, tau)?;
    let disc = 1.0 + 6.0 * mu - 3.0 * mu * mu;
    let w = ((disc.sqrt() + mu - 1.0) / 6.0).ln();
    Ok(lambda * w / 4f64.ln() + (1.0 - (-w).exp() + (-2.0 * w).exp()).ln() / 3f64.ln())
}

fn printed_balance_23(tau: f64) -> Option<PrintedComparison> {
    let hi = (tau0(2, 3) / tau).min(2.0);
    let d1 = |l: f64| upper_tail_exponent(l, 2).unwrap_or(f64::NAN);
    let diff = |l: f64| d1(l) - printed_d2_23(l, tau).unwrap_or(f64::NAN);
    let lambda = first_crossing(diff, 1.0 + 1e-9, hi * (1.0 - 1e-9), 256, LAMBDA_TOL)?;
    Some(PrintedComparison {
        lambda,
        d1: d1(lambda),
        d2: printed_d2_23(lambda, tau).ok()?,
    })
}

/// `ln E[e^{s D}]` for `D` uniform on `{0, ..., c-1}`.
fn digit_cumulant(c: u32, s: f64) -> f64 {
    let top = if s > 0.0 { s * f64::from(c - 1) } else { 0.0 };
    let sum: f64 = (0..c).map(|d| (s * f64::from(d) - top).exp()).sum();
    top + (sum / f64::from(c)).ln()
}

/// Mean of the tilted digit law, increasing in `s` from 0 to `c - 1`.
fn digit_tilted_mean(c: u32, s: f64) -> f64 {
    let top = if s > 0.0 { s * f64::from(c - 1) } else { 0.0 };
    let (num, den) = (0..c).fold((0.0, 0.0), |(n, d), k| {
        let w = (s * f64::from(k) - top).exp();
        (n + f64::from(k) * w, d + w)
    });
    num / den
}

/// Cramér rate function of a uniform base-`c` digit at mean `m` in `(0, c - 1)`.
pub fn digit_rate_function(c: u32, m: f64) -> Result<f64> {
    let hi_mean = f64::from(c - 1);
    if !(m > 0.0 && m < hi_mean) {
        return Err(invalid(format!("mean must lie in (0, {hi_mean}), got {m}")));
    }
    if (m - 0.5 * hi_mean).abs() < 1e-300 {
        return Ok(0.0);
    }
    let f = |s: f64| digit_tilted_mean(c, s) - m;
    let mut span = 1.0;
    while f(-span) > 0.0 || f(span) < 0.0 {
        span *= 2.0;
        if span > 1e6 {
            return Err(Error::NoSolution("tilt bracket did not close".into()));
        }
    }
    let s = bisect(f, -span, span, ROOT_TOL)?;
    Ok((s * m - digit_cumulant(c, s)).max(0.0))
}

/// `1 - I_c(theta ln c)/ln c`: exponent of `#{n <= x : s_c(n) = theta ln x}` per `ln x`.
pub fn digit_sum_level_exponent(c: u32, theta: f64) -> Result<f64> {
    let lc = f64::from(c).ln();
    Ok(1.0 - digit_rate_function(c, theta * lc)? / lc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeuristicExponent {
    pub t: f64,
    pub theta_star: f64,
}

/// Exponent `t` of `#{n <= x : s_a(n) = s_b(n)}` if the two digit sums were independent.
pub fn independence_heuristic(a: u32, b: u32) -> Result<HeuristicExponent> {
    check_bases(a, b)?;
    let limit = |c: u32| f64::from(c - 1) / f64::from(c).ln();
    let hi = limit(a).min(limit(b));
    let objective = |theta: f64| match (
        digit_sum_level_exponent(a, theta),
        digit_sum_level_exponent(b, theta),
    ) {
        (Ok(fa), Ok(fb)) => fa + fb - 1.0,
        _ => f64::NEG_INFINITY,
    };
    let (theta_star, t) = golden_max(objective, hi * 1e-9, hi * (1.0 - 1e-9), 1e-10);
    Ok(HeuristicExponent { t, theta_star })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau0_examples() {
        assert!((tau0(2, 3) - 1.26186).abs() < 1e-5);
        assert!((tau0(3, 2) - 0.792_481_3).abs() < 1e-7);
        for (a, b) in [(2, 3), (5, 7), (10, 3)] {
            assert!((tau0(a, b) * tau0(b, a) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rho_examples() {
        let r = rhos(2, 3, 1.0).unwrap();
        assert!((r.rho2 - 0.630_929_8).abs() < 1e-7);
        assert!((r.rho1 - 0.396_240_6).abs() < 1e-7);
        let t0 = tau0(2, 3);
        let r = rhos(2, 3, t0).unwrap();
        assert!((r.rho1 - 0.5).abs() < 1e-15 && (r.rho2 - 0.5).abs() < 1e-15);
        assert!(rhos(2, 3, 0.0).is_err());
        let r = rhos(2, 3, 3.0).unwrap();
        assert!(!r.rho1_valid && r.rho2_valid);
    }

    #[test]
    fn lower_exponents_23() {
        let r = lower_exponents(2, 3, 1.0).unwrap();
        assert!((r.c2.unwrap() - 0.94996).abs() < 5e-5);
        assert_eq!(r.c0, r.c2.unwrap());
        assert!((r.c1.unwrap() - 0.61119).abs() < 1e-4);
        assert!((r.lambda - 0.239_233_9).abs() < 1e-6);
        assert!((r.sigma_max - 0.001_344_2).abs() < 1e-6);
        assert_eq!(r.m, 3);
    }

    #[test]
    fn undefined_branches_are_absent() {
        let t0 = tau0(2, 3);
        let low = lower_exponents(2, 3, 0.4 * t0).unwrap();
        assert!(low.c2.is_none() && low.sigma1_a.is_none());
        assert_eq!(low.c0, low.c1.unwrap());
        let high = lower_exponents(2, 3, 2.5 * t0).unwrap();
        assert!(high.c1.is_none());
        assert_eq!(high.c0, high.c2.unwrap());
        for tau in [0.3, 0.7, 1.0, 1.5, 2.0, 5.0] {
            let r = lower_exponents(2, 3, tau).unwrap();
            assert!(r.c0 > 0.0 && r.c0 <= 1.0);
            assert!(r.lambda > 0.0 && r.lambda <= 0.25);
        }
    }

    #[test]
    fn g_and_h_limits() {
        assert!((g_exponent(1e-14, 2, 1.3).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert!((h_exponent(1e-14, 3, 0.7).unwrap() - 3f64.ln()).abs() < 1e-12);
        let v: f64 = 0.405465;
        let expect = -0.6 * v + (v.exp() + 1.0).ln();
        assert!((g_exponent(v, 2, 1.2).unwrap() - expect).abs() < 1e-14);
        assert!((expect - 0.673012).abs() < 1e-6);
        assert!(g_exponent(0.0, 2, 1.2).is_err());
        assert!(h_exponent(-1.0, 2, 0.5).is_err());
        // large arguments stay finite
        assert!(g_exponent(800.0, 5, 1.5).unwrap().is_finite());
    }

    #[test]
    fn solve_v_examples() {
        assert!(solve_v(1.0 + 1e-12, 2).unwrap() < 1e-10);
        assert!((solve_v(1.2, 2).unwrap() - 1.5f64.ln()).abs() < 1e-9);
        assert!(solve_v(2.0, 2).is_err());
        assert!(solve_v(1.0, 2).is_err());
    }

    #[test]
    fn solve_w_example_b3() {
        let mu: f64 = 0.866_474_9;
        let y = (1.0 - mu + (1.0 + 6.0 * mu - 3.0 * mu * mu).sqrt()) / (2.0 * mu);
        let w = solve_w(mu, 3).unwrap();
        assert!((w - y.ln()).abs() < 1e-12);
        assert!((w - 0.201_642_2).abs() < 1e-6);
        assert!(solve_w(1.0, 3).is_err());
    }

    #[test]
    fn residuals_and_monotonicity() {
        let mut prev = 0.0;
        for i in 1..200 {
            let lambda = 1.0 + i as f64 / 200.0;
            let v = solve_v(lambda, 3).unwrap();
            assert!((tilt_mean_upper(3.0, v) - lambda).abs() < 1e-12);
            assert!(v > prev);
            prev = v;
        }
        let mut prev = f64::INFINITY;
        for i in 1..200 {
            let mu = i as f64 / 200.0;
            let w = solve_w(mu, 5).unwrap();
            assert!((tilt_mean_lower(5.0, w) - 2.0 * mu).abs() < 1e-12);
            assert!(w < prev);
            prev = w;
        }
    }

    #[test]
    fn series_and_closed_forms_agree_at_cutoff() {
        for a in [2.0, 3.0, 7.0] {
            let x = SERIES_CUTOFF / a;
            let direct = a / -f64::exp_m1(-a * x) - 1.0 / -f64::exp_m1(-x);
            assert!((tilt_mean_upper(a, x * 0.999_999) - direct).abs() < 1e-9);
            let direct = 1.0 / f64::exp_m1(x) - a / f64::exp_m1(a * x);
            assert!((tilt_mean_lower(a, x * 0.999_999) - direct).abs() < 1e-9);
        }
    }

    #[test]
    fn envelope_derivatives() {
        for (a, b) in [(2u32, 3u32), (3, 5)] {
            let (af, bf) = (f64::from(a), f64::from(b));
            for i in 1..10 {
                let lambda = 1.0 + i as f64 / 10.0;
                let step = 1e-6;
                let gv = |l: f64| g_exponent(solve_v(l, a).unwrap(), a, l).unwrap();
                let fd = (gv(lambda + step) - gv(lambda - step)) / (2.0 * step);
                let expect = -0.5 * (af - 1.0) * solve_v(lambda, a).unwrap();
                assert!((fd - expect).abs() < 1e-5, "{fd} vs {expect}");

                let mu = i as f64 / 10.0;
                let hw = |m: f64| h_exponent(solve_w(m, b).unwrap(), b, m).unwrap();
                let fd = (hw(mu + step) - hw(mu - step)) / (2.0 * step);
                let expect = 0.5 * (bf - 1.0) * solve_w(mu, b).unwrap();
                assert!((fd - expect).abs() < 1e-5, "{fd} vs {expect}");
            }
        }
    }

    #[test]
    fn upper_exponent_23() {
        let r = upper_exponent(2, 3, 1.0).unwrap();
        assert!(r.balanced);
        assert!(r.d0 <= 0.99381);
        assert!((r.d1 - r.d2).abs() < 1e-9);
        let printed = r.printed.unwrap();
        assert!((printed.lambda - 1.093_369_4).abs() < 1e-6);
        assert!((printed.d1 - 0.993_702).abs() < 1e-4);
        assert!(upper_exponent(2, 3, tau0(2, 3)).is_err());
    }

    #[test]
    fn d1_tends_to_one() {
        let d1 = upper_tail_exponent(1.0 + 1e-9, 2).unwrap();
        assert!((d1 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn d0_below_one_everywhere() {
        for (a, b) in [(2, 3), (2, 5), (3, 5)] {
            for tau in [0.3, 0.7, 1.0, 1.5, 2.0, 5.0] {
                let r = upper_exponent(a, b, tau).unwrap();
                assert!(r.d0 < 1.0 && r.d0 > 0.0, "({a},{b},{tau}) -> {}", r.d0);
            }
        }
    }

    #[test]
    fn swapped_branch_matches_direct_computation() {
        let r = upper_exponent(2, 3, 2.0).unwrap();
        assert!(r.swapped);
        let direct = upper_exponent(3, 2, 0.5).unwrap();
        assert!((r.d0 - direct.d0).abs() < 1e-12);
    }

    #[test]
    fn closed_forms_match_solvers() {
        let c = closed_forms_23(1.2).unwrap();
        assert!((c.v - 1.5f64.ln()).abs() < 1e-15);
        let c = closed_forms_23(1.093_369_4).unwrap();
        assert!((c.d1 - 0.993_702).abs() < 1e-4);
        for i in 1..60 {
            let lambda = 1.0 + i as f64 * (tau0(2, 3) - 1.0) / 60.0;
            let c = closed_forms_23(lambda).unwrap();
            assert!((c.w - solve_w(c.mu, 3).unwrap()).abs() < 1e-10);
            assert!((c.v - solve_v(lambda, 2).unwrap()).abs() < 1e-10);
            assert!((c.d1 - upper_tail_exponent(lambda, 2).unwrap()).abs() < 1e-10);
        }
        assert!(closed_forms_23(1.3).is_err());
    }

    #[test]
    fn heuristic_exponent() {
        let h = independence_heuristic(2, 3).unwrap();
        assert!((h.t - 0.981_513).abs() < 1e-3);
        assert!((h.t - 0.981_512_763).abs() < 1e-8);
        let h2 = independence_heuristic(3, 2).unwrap();
        assert!((h.t - h2.t).abs() < 1e-12);
        let theta = 1.0 / (2.0 * 2f64.ln());
        assert!((digit_sum_level_exponent(2, theta).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rate_function_binary_closed_form() {
        // base 2: the digit is Bernoulli(1/2), I(m) = ln 2 + m ln m + (1-m) ln(1-m)
        for m in [0.1, 0.3, 0.5, 0.77] {
            let expect = 2f64.ln() + m * f64::ln(m) + (1.0 - m) * f64::ln(1.0 - m);
            assert!((digit_rate_function(2, m).unwrap() - expect).abs() < 1e-12);
        }
    }
}
