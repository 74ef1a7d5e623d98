//! Exhaustive count of n <= x with s_2(n) = s_3(n), with a log-log slope.
//!
//! ```text
//! cargo run --release --example coincidence_scan -- 1e8
//! ```

use digitsum::cli::parse_exact_count;
use digitsum::scan::{decade_checkpoints, scan_report, scan_series, ChunkPolicy};

fn main() -> digitsum::Result<()> {
    let max = std::env::args()
        .nth(1)
        .map_or(Ok(10_000_000), |s| parse_exact_count(&s))
        .expect("max");
    let series = scan_series(2, 3, &decade_checkpoints(max), ChunkPolicy::default())?;
    let report = scan_report(&series, 1.0, &[0.05])?;
    println!(
        "{:>12}  {:>10}  {:>10}  {:>8}",
        "x", "s2 = s3", "within 5%", "share"
    );
    for row in &report.rows {
        println!(
            "{:>12}  {:>10}  {:>10}  {:>8.4}",
            row.x,
            row.count_eq,
            row.count_eps[0],
            row.count_eq as f64 / row.x as f64
        );
    }
    if let Some(slope) = report.fitted_slope {
        println!("count ~ x^{slope:.4} over x >= 1000");
    }
    Ok(())
}
