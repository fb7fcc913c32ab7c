// SPDX-License-Identifier: Apache-2.0

// Signature-based observation: how many faulty responses survive
// compaction into an n-bit register, against the 2^-n expectation.

use std::error::Error;

use hybist::registers::{default_schedule, measure_aliasing};
use hybist::{bench, collapse_faults, enumerate_faults, BilboMode, IpBilboConfig, RegisterState};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let net = bench::load_scanned("s27")?;
    let n = net.scan_length();
    let faults = collapse_faults(&enumerate_faults(&net), &net)
        .faults()
        .to_vec();
    for interval in [1, 4, 16, 64] {
        let cfg = IpBilboConfig::new(default_schedule(n)?, interval)?;
        let r = measure_aliasing(
            &net,
            &faults,
            &cfg,
            BilboMode::DIRECT,
            &RegisterState::ones(n),
            64,
        )?;
        println!(
            "unload every {interval:>2}: {}/{} erroneous faults aliased ({:.3}; 2^-{n} = {:.3})",
            r.aliased,
            r.erroneous,
            r.aliasing_rate(),
            1.0 / (1u64 << n) as f64
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
