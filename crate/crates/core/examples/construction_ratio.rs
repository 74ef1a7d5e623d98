//! Sample the random construction and watch s_b/s_a settle on tau.
//!
//! ```text
//! cargo run --release --example construction_ratio -- 1.0
//! ```

use digitsum::construction::{choose_strategy, ratio_experiment};

fn main() -> digitsum::Result<()> {
    let tau: f64 = std::env::args()
        .nth(1)
        .map_or(1.0, |s| s.parse().expect("tau"));
    let (a, b) = (2, 3);
    let strategy = choose_strategy(a, b, tau)?;
    println!(
        "tau = {tau}: digits in base {} drawn from {{0, {}}} with rho = {:.5}",
        strategy.host_base,
        strategy.host_base - 1,
        strategy.rho
    );
    println!("{:>6}  {:>10}  {:>12}", "k", "mean s_b/s_a", "median |dev|");
    for k in [100, 300, 1000, 3000, 10_000] {
        let r = ratio_experiment(a, b, tau, k, 200, 7)?;
        println!("{k:>6}  {:>12.5}  {:>12.5}", r.mean_ratio, r.median_rel_dev);
    }
    Ok(())
}
