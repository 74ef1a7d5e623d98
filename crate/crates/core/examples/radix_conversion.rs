//! Divide-and-conquer radix conversion of a large integer between bases,
//! and the two digit sums the crate is about.

use std::time::Instant;

use digitsum::digits::{convert_base, digit_sum, RadixConverter};
use num_bigint::BigUint;

fn main() -> digitsum::Result<()> {
    let n = BigUint::from(3u32).pow(200_000) - 1u32;
    let started = Instant::now();
    let mut to3 = RadixConverter::new(3)?;
    let ternary = to3.to_digits(&n);
    println!(
        "3^200000 - 1 has {} ternary digits, s_3 = {}",
        ternary.len(),
        ternary.digit_sum()
    );
    println!("s_2 = {}", digit_sum(&n, 2)?);
    let binary = convert_base(&ternary, 2)?;
    println!(
        "{} binary digits after base change, {:.2?}",
        binary.len(),
        started.elapsed()
    );
    Ok(())
}
