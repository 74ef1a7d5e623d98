//! Lower and upper counting exponents for a pair of bases.
//!
//! ```text
//! cargo run --example exponent_report -- 2 3 1.0
//! ```

use digitsum::exponents::{independence_heuristic, lower_exponents, upper_exponent};

fn main() -> digitsum::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let a = args.first().map_or(2, |s| s.parse().expect("base a"));
    let b = args.get(1).map_or(3, |s| s.parse().expect("base b"));
    let tau = args.get(2).map_or(1.0, |s| s.parse().expect("tau"));

    let lower = lower_exponents(a, b, tau)?;
    println!("bases ({a}, {b}), tau = {tau}");
    println!("  tau0        {:.6}", lower.tau0);
    println!("  rho1, rho2  {:.6}, {:.6}", lower.rho1, lower.rho2);
    println!("  c0          {:.6}   (count >> x^c0)", lower.c0);
    println!("  sigma max   {:.3e}", lower.sigma_max);

    match upper_exponent(a, b, tau) {
        Ok(u) => {
            println!(
                "  d0          {:.6}   (count << x^d0) at lambda* = {:.6}",
                u.d0, u.lambda_star
            );
            if let Some(p) = u.printed {
                println!(
                    "  printed closed forms balance at lambda = {:.6}, d = {:.6}",
                    p.lambda,
                    p.d1.max(p.d2)
                );
            }
        }
        Err(e) => println!("  upper bound unavailable: {e}"),
    }

    let h = independence_heuristic(a, b)?;
    println!(
        "  heuristic t {:.6}   (if s_a and s_b were independent)",
        h.t
    );
    Ok(())
}
