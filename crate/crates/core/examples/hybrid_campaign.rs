// SPDX-License-Identifier: Apache-2.0

// One full hybrid campaign on s27 with its event log and cost summary.

use std::error::Error;

use hybist::{
    bench, collapse_faults, compute_cost_model, compute_improvements, enumerate_faults,
    run_campaign, CampaignConfig, ExternalBaseline,
};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let net = bench::load_scanned("s27")?;
    let fs = collapse_faults(&enumerate_faults(&net), &net);
    let cfg = CampaignConfig::for_netlist(&net, 3)?;
    println!(
        "th1 {} th2 {} th3 {}",
        cfg.thresholds.th1, cfg.thresholds.th2, cfg.thresholds.th3
    );
    let r = run_campaign(&net, fs, cfg)?;
    print!("{}", r.events_csv());
    let a = &r.accounting;
    println!(
        "{:?}: PMDV {} PRTP {}+{} cycles {} (identity {})",
        r.terminated_by,
        a.pmdv,
        a.prtp_ph1,
        a.prtp_ph2,
        a.cycles,
        a.identity_holds()
    );
    // A hypothetical external baseline of 80 cycles.
    let cost = compute_improvements(compute_cost_model(
        "s27",
        a.adv as u64,
        &net.profile(),
        a,
        Some(&ExternalBaseline::from_pwtc(80)),
    )?);
    println!(
        "RTC {} PMTC {} imp_rts {:.1}% imp_pw {:.1}%",
        cost.rtc,
        cost.pmtc,
        cost.imp_rts.unwrap_or(f64::NAN),
        cost.imp_pw.unwrap_or(f64::NAN)
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
