// SPDX-License-Identifier: Apache-2.0

// Parse s27, apply the full-scan transform and simulate a few scan patterns.

use std::error::Error;

use hybist::netlist::parse_bench_named;
use hybist::{bench, full_scan_transform, simulate_serial};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let seq = parse_bench_named("s27", bench::S27)?;
    let net = full_scan_transform(&seq);
    let p = net.profile();
    println!(
        "{}: {} PIs, {} POs, {} flip-flops -> scan_length {}",
        net.name(),
        p.pis,
        p.pos,
        p.ppis,
        p.scan_length
    );
    let inputs: Vec<&str> = net.scan_inputs().map(|n| net.net_name(n)).collect();
    let outputs: Vec<&str> = net.scan_outputs().map(|n| net.net_name(n)).collect();
    println!("scan in  {}", inputs.join(" "));
    println!("scan out {}", outputs.join(" "));
    for k in [0u32, 0b1010101, 0b1111111] {
        let pattern: Vec<bool> = (0..p.scan_length).map(|i| (k >> i) & 1 == 1).collect();
        let resp = simulate_serial(&net, &pattern)?;
        let bits = |v: &[bool]| {
            v.iter()
                .map(|&b| if b { '1' } else { '0' })
                .collect::<String>()
        };
        println!("{} -> {}", bits(&pattern), bits(&resp));
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
