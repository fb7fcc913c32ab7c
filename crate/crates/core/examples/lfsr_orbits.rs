// SPDX-License-Identifier: Apache-2.0

// Orbit lengths of the shipped primitive polynomials, and what a
// non-primitive feedback does instead.

use std::error::Error;

use hybist::registers::table_entries;
use hybist::{next_lfsr, Polynomial, RegisterState};

fn period(p: &Polynomial) -> Result<u64, Box<dyn Error>> {
    let start = RegisterState::ones(p.degree());
    let mut s = next_lfsr(&start, p)?;
    let mut n = 1;
    while s != start {
        s = next_lfsr(&s, p)?;
        n += 1;
    }
    Ok(n)
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    for n in [4, 7, 10, 12] {
        for p in table_entries(n) {
            println!(
                "{:<28} period {:>5} (2^{n}-1 = {})",
                p.to_string(),
                period(&p)?,
                (1u64 << n) - 1
            );
        }
    }
    // x^4 + x^2 + 1 = (x^2 + x + 1)^2
    let reducible = Polynomial::from_exponents(&[4, 2, 0])?;
    println!(
        "{:<28} period {:>5} primitive={:?}",
        reducible.to_string(),
        period(&reducible)?,
        reducible.is_primitive()
    );

    let p = Polynomial::parse("[8, 4, 3, 2, 0]")?;
    let mut s = RegisterState::from_hex(8, "01").ok_or("bad hex")?;
    print!("first states under {p}:");
    for _ in 0..8 {
        s = next_lfsr(&s, &p)?;
        print!(" {}", s.to_hex());
    }
    println!();
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
