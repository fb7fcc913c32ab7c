// SPDX-License-Identifier: Apache-2.0

// PODEM on single faults, then a compacted deterministic pool for s27.

use std::error::Error;

use hybist::{
    bench, build_deterministic_pool, collapse_faults, enumerate_faults, podem, AtpgBudget,
    PodemOutcome,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let net = bench::load_scanned("s27")?;
    let fs = collapse_faults(&enumerate_faults(&net), &net);
    let budget = AtpgBudget::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for &f in fs.faults().iter().take(5) {
        match podem(&net, f, &budget, &mut rng)? {
            PodemOutcome::Test(v) => println!("{:<16} {}", f.describe(&net), v.to_bit_string()),
            PodemOutcome::Untestable => println!("{:<16} untestable", f.describe(&net)),
        }
    }
    let build = build_deterministic_pool(&net, &fs, &budget, &mut rng);
    println!(
        "pool: {} vectors ({} generated), {} untestable, {} aborted",
        build.pool.len(),
        build.generated,
        build.untestable.len(),
        build.aborted.len()
    );
    print!("{}", build.pool.export());
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
