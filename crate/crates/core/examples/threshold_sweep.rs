// SPDX-License-Identifier: Apache-2.0

// How th1 and the th2 ratio move PMTC on s27, averaged over a few seeds.

use std::error::Error;

use hybist::scheduler::ThresholdOverrides;
use hybist::{
    bench, collapse_faults, derive_thresholds, enumerate_faults, run_campaign, CampaignConfig,
};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let net = bench::load_scanned("s27")?;
    let fs = collapse_faults(&enumerate_faults(&net), &net);
    println!("th1   ratio th2 th3  mean PMTC  mean PMDV");
    for th1 in [0.5, 0.7, 0.85, 0.95] {
        for ratio in [0.25, 0.5, 1.0] {
            let th = derive_thresholds(
                &net.profile(),
                &ThresholdOverrides {
                    th1: Some(th1),
                    th2_ratio: Some(ratio),
                    th2: None,
                },
            )?;
            let (mut cycles, mut pmdv) = (0, 0);
            let seeds = 1..=8u64;
            for seed in seeds.clone() {
                let mut cfg = CampaignConfig::for_netlist(&net, seed)?;
                cfg.thresholds = th;
                let r = run_campaign(&net, fs.clone(), cfg)?;
                cycles += r.accounting.cycles;
                pmdv += r.accounting.pmdv;
            }
            let k = seeds.count() as f64;
            println!(
                "{th1:<5} {ratio:<5} {:<3} {:<4} {:>9.1} {:>10.2}",
                th.th2,
                th.th3,
                cycles as f64 / k,
                pmdv as f64 / k
            );
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
