//! Star discrepancy of {n log 2 / log 3} against the continued-fraction
//! bound and the power bound n^(-1/gamma).

use digitsum::diophantine::{
    discrepancy_bound_cf, fractional_multiples, log_ratio_continued_fraction, star_discrepancy,
    theta_interval, C_D, GAMMA_2_3,
};

fn main() -> digitsum::Result<()> {
    let theta = theta_interval(2, 3, 512)?;
    let table = log_ratio_continued_fraction(2, 3, 40, 512)?;
    let points = fractional_multiples(&theta, 1_000_000);
    println!(
        "{:>8}  {:>10}  {:>10}  {:>10}",
        "n", "D*_n", "cf bound", "power"
    );
    for n in [10u64, 100, 1000, 10_000, 100_000, 1_000_000] {
        let d = star_discrepancy(&points[..n as usize])?;
        let cf = discrepancy_bound_cf(&table, n, C_D)?;
        let power = (n as f64).powf(-1.0 / GAMMA_2_3);
        println!("{n:>8}  {d:>10.3e}  {cf:>10.3e}  {power:>10.3e}");
    }
    Ok(())
}
