//! Weyl sums of a sampled member read in the other base, with the
//! Erdős–Turán majorant and the worst digit-frequency deviation.

use digitsum::construction::{choose_strategy, make_law, Sampler};
use digitsum::digits::RadixConverter;
use digitsum::weyl::{digit_frequency_deviation, sampled_deltas, shift_count, weyl_table};

fn main() -> digitsum::Result<()> {
    let strategy = choose_strategy(2, 3, 1.0)?;
    let base = strategy.other_base;
    for k in [200, 2000, 20_000] {
        let law = make_law(strategy.host_base, k, strategy.rho)?;
        let member = Sampler::new(&law, 11).next_member();
        let m = RadixConverter::new(strategy.host_base)?.from_digits(&member)?;
        let n = shift_count(&law, base)?;
        let table = weyl_table(&m, base, n, 16)?;
        let worst = (0..base)
            .map(|j| {
                let lo = f64::from(j) / f64::from(base);
                digit_frequency_deviation(&m, base, n, lo, lo + 1.0 / f64::from(base))
            })
            .collect::<digitsum::Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        println!(
            "k = {k:>6}: n = {n:>6}, max |sigma_h| = {:.4}, Delta_n = {:.4}, digit deviation = {worst:.4}",
            table.rows.iter().map(|r| r.abs).fold(0.0, f64::max),
            table.delta
        );
    }

    let law = make_law(strategy.host_base, 1000, strategy.rho)?;
    let d = sampled_deltas(&law, base, 16, 25, 3)?;
    println!(
        "median Delta_n over {} members at k = 1000: {:.4}",
        d.deltas.len(),
        d.median
    );
    Ok(())
}
