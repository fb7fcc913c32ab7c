// SPDX-License-Identifier: Apache-2.0

// Drive the IP-BILBO generator with s27's responses in both modes and
// print the state trace, cycle cost and unloaded signatures.

use std::error::Error;

use hybist::registers::default_schedule;
use hybist::{bench, simulate_serial, BilboMode, IpBilbo, IpBilboConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let net = bench::load_scanned("s27")?;
    let n = net.scan_length();
    let schedule = default_schedule(n)?;
    println!(
        "schedule: {}",
        schedule
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(" | ")
    );
    for (label, mode) in [
        ("phase 1 (indirect)", BilboMode::INDIRECT),
        ("phase 2 (direct)", BilboMode::DIRECT),
    ] {
        let mut gen = IpBilbo::new(IpBilboConfig::new(schedule.clone(), 4)?, None)?;
        let mut cycles = 0;
        print!("{label}:");
        for _ in 0..12 {
            let pattern = gen.state().to_bits();
            let response = simulate_serial(&net, &pattern)?;
            cycles += gen.next_pattern(mode, &response)?;
            print!(" {}", gen.state().to_hex());
        }
        println!(
            "\n  {cycles} cycles, signatures {}",
            gen.signature_trace()
                .split_whitespace()
                .collect::<Vec<_>>()
                .join(" ")
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
