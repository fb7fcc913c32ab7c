// SPDX-License-Identifier: Apache-2.0

// Recompute the reference table from its inputs.

use std::error::Error;

use hybist::report::{format_table1_checks, mean_imp_pw, reference_rows, verify_table1};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let checks = verify_table1();
    print!("{}", format_table1_checks(&checks));
    let reports: Vec<_> = reference_rows()
        .iter()
        .filter_map(|r| r.recompute())
        .collect();
    if let Some(m) = mean_imp_pw(&reports) {
        println!("recomputed mean imp_pw {m:.2}");
    }
    if checks.iter().all(|c| c.passed()) {
        Ok(())
    } else {
        Err("reference table mismatch".into())
    }
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
