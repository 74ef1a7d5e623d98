//! The exponential-moment bound on integers with a large binary digit sum,
//! checked against exact counts from the digit DP.

use digitsum::exponents::{g_exponent, solve_v, tau_base, upper_tail_exponent};
use digitsum::scan::digit_sum_counts;

fn main() -> digitsum::Result<()> {
    println!(
        "{:>9}  {:>6}  {:>10}  {:>12}  {:>8}",
        "x", "lambda", "count", "bound", "d1"
    );
    for x in [1u64 << 16, 1_000_000, 1 << 30] {
        let counts = digit_sum_counts(x, 2)?;
        let ln_x = (x as f64).ln();
        for lambda in [1.1, 1.2, 1.5] {
            let cut = lambda * tau_base(2) * ln_x;
            let count: u64 = counts
                .iter()
                .enumerate()
                .filter(|&(s, _)| s as f64 > cut)
                .map(|(_, c)| c)
                .sum();
            let v = solve_v(lambda, 2)?;
            let bound = (ln_x / 2f64.ln() * g_exponent(v, 2, lambda)?).exp();
            let d1 = upper_tail_exponent(lambda, 2)?;
            println!("{x:>9}  {lambda:>6}  {count:>10}  {bound:>12.1}  {d1:>8.5}");
        }
    }
    Ok(())
}
