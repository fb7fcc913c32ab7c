// SPDX-License-Identifier: Apache-2.0

// Fault universe, collapsing and bit-parallel fault simulation on c17.

use std::error::Error;

use hybist::{bench, collapse_faults, enumerate_faults, fault_simulate, PatternBatch};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let net = bench::load_scanned("c17")?;
    let universe = enumerate_faults(&net);
    let mut fs = collapse_faults(&universe, &net);
    println!(
        "c17: {} faults, {} after collapsing",
        universe.len(),
        fs.len()
    );

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let patterns: Vec<Vec<bool>> = (0..8)
        .map(|_| (0..net.scan_length()).map(|_| rng.random()).collect())
        .collect();
    let per_lane = fault_simulate(
        &net,
        &PatternBatch::from_patterns(&patterns)?,
        &mut fs,
        true,
        0,
    )?;
    for (p, d) in patterns.iter().zip(&per_lane) {
        let bits: String = p.iter().map(|&b| if b { '1' } else { '0' }).collect();
        println!("{bits}  +{d}");
    }
    println!("coverage {:.1}%", 100.0 * fs.coverage());
    for i in fs.undetected() {
        println!("  undetected {}", fs.fault(i).describe(&net));
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
