//! Certified continued fraction of log 2 / log 3 and the effective
//! irrationality exponents it implies.

use digitsum::diophantine::{effective_irrationality, log_ratio_continued_fraction};

fn main() -> digitsum::Result<()> {
    let table = log_ratio_continued_fraction(2, 3, 30, 1024)?;
    println!(
        "{} partial quotients certified at {} bits",
        table.len(),
        table.precision_bits
    );
    println!(
        "{:>3} {:>6} {:>22} {:>10}",
        "i", "a_i", "q_i", "|theta - p/q|"
    );
    for row in table.rows.iter().take(20) {
        println!(
            "{:>3} {:>6} {:>22} {:>10.3e}",
            row.index, row.partial_quotient, row.q, row.err_hi
        );
    }
    let exps = effective_irrationality(&table, 1_000_000_000)?;
    let worst = exps
        .iter()
        .max_by(|x, y| x.lambda_hi.total_cmp(&y.lambda_hi))
        .expect("nonempty");
    println!(
        "largest exponent for q <= 1e9: {:.4} at q = {}",
        worst.lambda_hi, worst.q
    );
    Ok(())
}
