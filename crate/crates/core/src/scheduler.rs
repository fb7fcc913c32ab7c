// SPDX-License-Identifier: Apache-2.0

//! The two-phase hybrid test campaign.
//!
//! Phase 1 alternates deterministic vectors with bursts of IP-BILBO patterns
//! in indirect mode (two cycles each). A burst ends after `th2` consecutive
//! patterns that detect nothing new. Once coverage reaches `th1` the
//! campaign switches to Phase 2, where bursts use direct mode (one cycle per
//! pattern) and tolerate `th3` non-detecting patterns. Every deterministic
//! vector is scanned into the register, so the next burst resumes from it.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::atpg::{
    build_pool_excluding, select_best_vector, AtpgBudget, AtpgError, TestVector, VectorPool,
};
use crate::faults::{Fault, FaultSet, FaultSimulator};
use crate::netlist::{CircuitProfile, Netlist};
use crate::registers::{BilboMode, IpBilbo, IpBilboConfig, RegisterError, RegisterState};
use crate::sim::{simulate_serial, PatternBatch, LANES};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchedulerError {
    #[error("th2 ratio {0} is outside (0, 1]")]
    InvalidRatio(f64),
    #[error("th1 {0} is outside [0, 1]")]
    InvalidTh1(f64),
    #[error("th2 must be at least 1")]
    ZeroTh2,
    #[error("scan length must be at least 1")]
    EmptyScanChain,
    #[error("coverage target {0} is outside (0, 1]")]
    InvalidTarget(f64),
    #[error("vector width {got} does not match scan length {expected}")]
    WidthMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Register(#[from] RegisterError),
}

/// Default fraction of the scan length tolerated as non-detecting patterns.
pub const DEFAULT_TH2_RATIO: f64 = 0.5;
/// Default ratio once the scan chain is longer than [`LARGE_SCAN_LENGTH`].
pub const LARGE_TH2_RATIO: f64 = 0.25;
pub const LARGE_SCAN_LENGTH: usize = 256;
pub const DEFAULT_TH1: f64 = 0.85;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Thresholds {
    pub th1: f64,
    pub th2: usize,
    pub th3: usize,
    pub th2_ratio: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ThresholdOverrides {
    pub th1: Option<f64>,
    pub th2_ratio: Option<f64>,
    /// Absolute th2; takes precedence over the ratio.
    pub th2: Option<usize>,
}

pub fn derive_thresholds(
    profile: &CircuitProfile,
    overrides: &ThresholdOverrides,
) -> Result<Thresholds, SchedulerError> {
    let n = profile.scan_length;
    if n == 0 {
        return Err(SchedulerError::EmptyScanChain);
    }
    let th1 = overrides.th1.unwrap_or(DEFAULT_TH1);
    if !(0.0..=1.0).contains(&th1) {
        return Err(SchedulerError::InvalidTh1(th1));
    }
    let ratio = overrides.th2_ratio.unwrap_or(if n > LARGE_SCAN_LENGTH {
        LARGE_TH2_RATIO
    } else {
        DEFAULT_TH2_RATIO
    });
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(SchedulerError::InvalidRatio(ratio));
    }
    let th2 = match overrides.th2 {
        Some(0) => return Err(SchedulerError::ZeroTh2),
        Some(t) => t,
        None => ((ratio * n as f64).ceil() as usize).max(1),
    };
    Ok(Thresholds {
        th1,
        th2,
        th3: 2 * th2,
        th2_ratio: ratio,
    })
}

/// Where deterministic vectors come from.
#[derive(Clone, Debug)]
pub enum VectorSource {
    /// Built-in PODEM, re-run against the undetected faults when the pool
    /// runs dry.
    Podem(AtpgBudget),
    /// A fixed pool, e.g. loaded from a vector file.
    Pool(VectorPool),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum DetectionMode {
    /// Responses are observed at the outputs for every pattern.
    #[default]
    Direct,
    /// The register is also unloaded every `unload_interval` patterns and the
    /// signatures are recorded.
    Signature,
}

#[derive(Clone, Debug)]
pub struct CampaignConfig {
    pub thresholds: Thresholds,
    pub generator: IpBilboConfig,
    /// Initial register state; all ones when unset.
    pub seed_state: Option<RegisterState>,
    pub source: VectorSource,
    pub cycle_budget: Option<u64>,
    pub rng_seed: u64,
    /// Fraction of the testable faults to detect before stopping.
    pub target: f64,
    pub detection_mode: DetectionMode,
    pub cycle_guard: bool,
}

impl CampaignConfig {
    /// Defaults for `net`: derived thresholds, built-in polynomial schedule,
    /// PODEM provider and a full-coverage target.
    pub fn for_netlist(net: &Netlist, rng_seed: u64) -> Result<CampaignConfig, SchedulerError> {
        Ok(CampaignConfig {
            thresholds: derive_thresholds(&net.profile(), &ThresholdOverrides::default())?,
            generator: IpBilboConfig::default_for(net.scan_length())?,
            seed_state: None,
            source: VectorSource::Podem(AtpgBudget::default()),
            cycle_budget: None,
            rng_seed,
            target: 1.0,
            detection_mode: DetectionMode::Direct,
            cycle_guard: true,
        })
    }
}

/// Test-cycle bookkeeping of a campaign.
#[derive(Clone, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CampaignAccounting {
    /// Deterministic vectors produced by the provider.
    pub adv: usize,
    /// Deterministic vectors applied.
    pub pmdv: u64,
    pub prtp_ph1: u64,
    pub prtp_ph2: u64,
    pub cycles: u64,
    pub scan_length: usize,
    pub coverage_trace: Vec<(u64, f64)>,
}

impl CampaignAccounting {
    /// `pmdv * scan_length + 2 * prtp_ph1 + prtp_ph2`
    pub fn expected_cycles(&self) -> u64 {
        self.pmdv * self.scan_length as u64 + 2 * self.prtp_ph1 + self.prtp_ph2
    }

    pub fn identity_holds(&self) -> bool {
        self.cycles == self.expected_cycles()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum EventKind {
    Deterministic,
    PseudoRandom,
}

impl EventKind {
    pub fn label(self) -> &'static str {
        match self {
            EventKind::Deterministic => "deterministic",
            EventKind::PseudoRandom => "pseudorandom",
        }
    }
}

/// One applied pattern. Counters are the totals after the application.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Event {
    pub cycle: u64,
    pub kind: EventKind,
    pub phase: u8,
    pub new_detections: usize,
    pub coverage: f64,
    pub pmdv: u64,
    pub prtp_ph1: u64,
    pub prtp_ph2: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Termination {
    TargetReached,
    CycleBudget,
    /// The loop guard tripped with no deterministic vector left to reseed from.
    GeneratorCycleDetected,
    /// The provider has nothing left that detects a new fault.
    ProviderExhausted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignResult {
    pub accounting: CampaignAccounting,
    /// Detected fraction of the faults not proven untestable or aborted.
    pub final_coverage: f64,
    pub events: Vec<Event>,
    pub terminated_by: Termination,
    pub rng_seed: u64,
    pub thresholds: Thresholds,
    pub total_faults: usize,
    pub detected_faults: usize,
    pub untestable_faults: usize,
    pub aborted_faults: usize,
    /// Hex signatures unloaded in signature mode.
    pub signatures: Vec<String>,
    /// Final detection state of the campaign's fault set.
    pub faults: FaultSet,
}

impl CampaignResult {
    pub fn events_csv(&self) -> String {
        let mut out = String::from("cycle,event,phase,new_detections,coverage\n");
        for e in &self.events {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.6}",
                e.cycle,
                e.kind.label(),
                e.phase,
                e.new_detections,
                e.coverage
            );
        }
        out
    }

    /// Longest run of consecutive non-detecting pseudo-random patterns in
    /// each phase, counted between deterministic applications.
    pub fn max_idle_runs(&self) -> [usize; 2] {
        let mut best = [0usize; 2];
        let mut run = 0usize;
        let mut phase = 0u8;
        for e in &self.events {
            if e.kind == EventKind::Deterministic || e.new_detections > 0 || e.phase != phase {
                run = 0;
            }
            phase = e.phase;
            if e.kind == EventKind::PseudoRandom && e.new_detections == 0 {
                run += 1;
                let slot = &mut best[e.phase as usize - 1];
                *slot = (*slot).max(run);
            }
        }
        best
    }
}

/// Campaign state machine.
pub struct Campaign<'a> {
    net: &'a Netlist,
    cfg: CampaignConfig,
    fs: FaultSet,
    excluded: Vec<bool>,
    untestable: usize,
    aborted: usize,
    acct: CampaignAccounting,
    generator: IpBilbo,
    response: Vec<bool>,
    pool: VectorPool,
    phase: u8,
    events: Vec<Event>,
    rng: ChaCha8Rng,
    patterns: u64,
}

enum Burst {
    /// `th` consecutive patterns detected nothing.
    Idle,
    Target,
    Budget,
    Guard,
    PhaseSwitch,
}

impl<'a> Campaign<'a> {
    pub fn new(
        net: &'a Netlist,
        fs: FaultSet,
        cfg: CampaignConfig,
    ) -> Result<Campaign<'a>, SchedulerError> {
        if !(cfg.target > 0.0 && cfg.target <= 1.0) {
            return Err(SchedulerError::InvalidTarget(cfg.target));
        }
        let generator = IpBilbo::new(cfg.generator.clone(), cfg.seed_state.clone())?
            .with_cycle_guard(cfg.cycle_guard);
        let response = simulate_serial(net, &generator.state().to_bits()).map_err(|_| {
            SchedulerError::WidthMismatch {
                expected: net.scan_length(),
                got: generator.state().width(),
            }
        })?;
        let pool = match &cfg.source {
            VectorSource::Pool(p) => p.clone(),
            VectorSource::Podem(_) => VectorPool::default(),
        };
        let mut acct = CampaignAccounting {
            scan_length: net.scan_length(),
            ..Default::default()
        };
        if let VectorSource::Pool(p) = &cfg.source {
            acct.adv = p.len();
        }
        let n = fs.len();
        Ok(Campaign {
            net,
            rng: ChaCha8Rng::seed_from_u64(cfg.rng_seed),
            cfg,
            fs,
            excluded: vec![false; n],
            untestable: 0,
            aborted: 0,
            acct,
            generator,
            response,
            pool,
            phase: 1,
            events: Vec::new(),
            patterns: 0,
        })
    }

    pub fn accounting(&self) -> &CampaignAccounting {
        &self.acct
    }

    pub fn faults(&self) -> &FaultSet {
        &self.fs
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Detected fraction of the faults not excluded as untestable/aborted.
    pub fn coverage(&self) -> f64 {
        let excluded_open = (0..self.fs.len())
            .filter(|&i| self.excluded[i] && !self.fs.is_detected(i))
            .count();
        let denom = self.fs.len() - excluded_open;
        if denom == 0 {
            1.0
        } else {
            self.fs.detected_count() as f64 / denom as f64
        }
    }

    fn target_reached(&self) -> bool {
        self.coverage() >= self.cfg.target - 1e-12
    }

    fn fits_budget(&self, cost: u64) -> bool {
        self.cfg
            .cycle_budget
            .is_none_or(|b| self.acct.cycles + cost <= b)
    }

    fn log(&mut self, kind: EventKind, new_detections: usize) {
        assert!(
            self.acct.identity_holds(),
            "cycle identity violated: {} != {}",
            self.acct.cycles,
            self.acct.expected_cycles()
        );
        let coverage = self.coverage();
        self.acct.coverage_trace.push((self.acct.cycles, coverage));
        self.events.push(Event {
            cycle: self.acct.cycles,
            kind,
            phase: self.phase,
            new_detections,
            coverage,
            pmdv: self.acct.pmdv,
            prtp_ph1: self.acct.prtp_ph1,
            prtp_ph2: self.acct.prtp_ph2,
        });
    }

    fn mode(&self) -> BilboMode {
        if self.phase == 1 {
            BilboMode::INDIRECT
        } else {
            BilboMode::DIRECT
        }
    }

    /// Scans `v` in, fault-simulates it and charges `scan_length` cycles.
    pub fn apply_deterministic(&mut self, v: &TestVector) -> Result<usize, SchedulerError> {
        let n = self.net.scan_length();
        if v.bits.len() != n {
            return Err(SchedulerError::WidthMismatch {
                expected: n,
                got: v.bits.len(),
            });
        }
        let new = crate::faults::fault_simulate(
            self.net,
            &PatternBatch::single(&v.bits),
            &mut self.fs,
            true,
            self.patterns,
        )
        .expect("width checked")[0];
        self.patterns += 1;
        self.acct.cycles += n as u64;
        self.acct.pmdv += 1;
        self.generator.load(RegisterState::from_bits(&v.bits))?;
        self.response = simulate_serial(self.net, &v.bits).expect("width checked");
        self.log(EventKind::Deterministic, new);
        Ok(new)
    }

    /// Applies one pseudo-random pattern of the current phase.
    pub fn apply_pseudorandom(&mut self) -> Result<usize, SchedulerError> {
        let mode = self.mode();
        let cycles = self.generator.next_pattern(mode, &self.response)?;
        let bits = self.generator.state().to_bits();
        let new = crate::faults::fault_simulate(
            self.net,
            &PatternBatch::single(&bits),
            &mut self.fs,
            true,
            self.patterns,
        )
        .expect("register width equals scan length")[0];
        self.patterns += 1;
        self.charge_pseudorandom(cycles);
        self.response =
            simulate_serial(self.net, &bits).expect("register width equals scan length");
        self.log(EventKind::PseudoRandom, new);
        Ok(new)
    }

    fn charge_pseudorandom(&mut self, cycles: u32) {
        self.acct.cycles += cycles as u64;
        if self.phase == 1 {
            self.acct.prtp_ph1 += 1;
        } else {
            self.acct.prtp_ph2 += 1;
        }
    }

    fn enter_phase2(&mut self) {
        if self.phase == 1 {
            self.phase = 2;
            self.generator.clear_guard();
        }
    }

    /// Next deterministic vector worth applying, refreshing the pool from
    /// PODEM when it is exhausted or only holds non-detecting vectors.
    fn next_deterministic(&mut self) -> Option<TestVector> {
        let mut refreshed = false;
        loop {
            match select_best_vector(&mut self.pool, self.net, &self.fs) {
                Ok(sel) if sel.new_detections > 0 => return Some(sel.vector),
                // Nothing left in the pool detects anything; it never will.
                Ok(_) => self.pool.exhaust(),
                Err(AtpgError::PoolExhausted) => {}
                Err(e) => unreachable!("selection only fails on exhaustion: {e}"),
            }
            let budget = match &self.cfg.source {
                VectorSource::Podem(b) if !refreshed => b.clone(),
                _ => return None,
            };
            refreshed = true;
            let build =
                build_pool_excluding(self.net, &self.fs, &budget, &mut self.rng, &self.excluded);
            for &i in &build.untestable {
                self.excluded[i] = true;
                self.untestable += 1;
            }
            for &i in &build.aborted {
                self.excluded[i] = true;
                self.aborted += 1;
            }
            self.acct.adv += build.pool.len();
            self.pool = build.pool;
        }
    }

    /// Runs one burst of pseudo-random patterns. Patterns are generated 64
    /// at a time ahead of fault simulation; the generator is then replayed
    /// up to the last pattern actually applied.
    fn burst(&mut self) -> Result<Burst, SchedulerError> {
        let mut idle = 0usize;
        let sim = FaultSimulator::new(self.net);
        loop {
            let th = if self.phase == 1 {
                self.cfg.thresholds.th2
            } else {
                self.cfg.thresholds.th3
            };
            let mode = self.mode();
            let cost = mode.cycles_per_pattern() as u64;
            // Look ahead.
            let mut look = self.generator.clone();
            let mut patterns: Vec<Vec<bool>> = Vec::with_capacity(LANES);
            let mut responses: Vec<Vec<bool>> = Vec::with_capacity(LANES);
            let mut guard_at = None;
            let mut feed = self.response.clone();
            while patterns.len() < LANES {
                match look.next_pattern(mode, &feed) {
                    Ok(_) => {}
                    Err(RegisterError::GeneratorCycle { .. }) => {
                        guard_at = Some(patterns.len());
                        break;
                    }
                    Err(e) => return Err(e.into()),
                }
                let bits = look.state().to_bits();
                feed = simulate_serial(self.net, &bits).expect("register width equals scan length");
                patterns.push(bits);
                responses.push(feed.clone());
            }
            let mut by_lane: Vec<Vec<usize>> = vec![Vec::new(); patterns.len()];
            if !patterns.is_empty() {
                let open: Vec<usize> = self.fs.undetected().collect();
                let faults: Vec<Fault> = open.iter().map(|&i| self.fs.fault(i)).collect();
                let batch = PatternBatch::from_patterns(&patterns).expect("non-empty batch");
                let masks = sim
                    .detection_masks(&batch, &faults)
                    .expect("register width equals scan length");
                for (&i, &m) in open.iter().zip(&masks) {
                    if m != 0 {
                        by_lane[m.trailing_zeros() as usize].push(i);
                    }
                }
            }
            let mut outcome = None;
            let mut applied = 0;
            for lane in 0..patterns.len() {
                if !self.fits_budget(cost) {
                    outcome = Some(Burst::Budget);
                    break;
                }
                let step = self.generator.next_pattern(mode, &self.response)?;
                debug_assert_eq!(self.generator.state().to_bits(), patterns[lane]);
                self.response = std::mem::take(&mut responses[lane]);
                let mut new = 0;
                for &i in &by_lane[lane] {
                    if self.fs.mark_detected(i, Some(self.patterns)) {
                        new += 1;
                    }
                }
                self.patterns += 1;
                self.charge_pseudorandom(step);
                self.log(EventKind::PseudoRandom, new);
                applied += 1;
                idle = if new > 0 { 0 } else { idle + 1 };
                if self.target_reached() {
                    outcome = Some(Burst::Target);
                } else if self.phase == 1 && self.coverage() >= self.cfg.thresholds.th1 {
                    outcome = Some(Burst::PhaseSwitch);
                } else if idle >= th {
                    outcome = Some(Burst::Idle);
                }
                if outcome.is_some() {
                    break;
                }
            }
            if let Some(o) = outcome {
                return Ok(o);
            }
            if guard_at == Some(applied) {
                return Ok(Burst::Guard);
            }
        }
    }

    /// Runs the campaign to termination.
    pub fn run(mut self) -> Result<CampaignResult, SchedulerError> {
        let scan = self.net.scan_length() as u64;
        let mut guard_tripped = false;
        let terminated_by = 'outer: loop {
            if self.target_reached() {
                break Termination::TargetReached;
            }
            match self.next_deterministic() {
                Some(v) => {
                    if !self.fits_budget(scan) {
                        break Termination::CycleBudget;
                    }
                    self.apply_deterministic(&v)?;
                    guard_tripped = false;
                }
                None if self.phase == 1 && !guard_tripped => self.enter_phase2(),
                None if guard_tripped => break Termination::GeneratorCycleDetected,
                None => break Termination::ProviderExhausted,
            }
            if self.target_reached() {
                break Termination::TargetReached;
            }
            if self.phase == 1 && self.coverage() >= self.cfg.thresholds.th1 {
                self.enter_phase2();
            }
            loop {
                match self.burst()? {
                    Burst::Idle => break,
                    Burst::Target => break 'outer Termination::TargetReached,
                    Burst::Budget => break 'outer Termination::CycleBudget,
                    Burst::Guard => {
                        guard_tripped = true;
                        self.enter_phase2();
                        break;
                    }
                    Burst::PhaseSwitch => self.enter_phase2(),
                }
            }
        };
        let coverage = self.coverage();
        let signatures = match self.cfg.detection_mode {
            DetectionMode::Direct => Vec::new(),
            DetectionMode::Signature => self
                .generator
                .signatures()
                .iter()
                .map(|s| s.to_hex())
                .collect(),
        };
        Ok(CampaignResult {
            final_coverage: coverage,
            events: self.events,
            terminated_by,
            rng_seed: self.cfg.rng_seed,
            thresholds: self.cfg.thresholds,
            total_faults: self.fs.len(),
            detected_faults: self.fs.detected_count(),
            untestable_faults: self.untestable,
            aborted_faults: self.aborted,
            signatures,
            accounting: self.acct,
            faults: self.fs,
        })
    }
}

pub fn run_campaign(
    net: &Netlist,
    fs: FaultSet,
    cfg: CampaignConfig,
) -> Result<CampaignResult, SchedulerError> {
    Campaign::new(net, fs, cfg)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atpg::{VectorOrigin, VectorPool};
    use crate::bench;
    use crate::faults::{collapse_faults, enumerate_faults};
    use crate::netlist::{full_scan_transform, parse_bench};

    fn profile(scan_length: usize) -> CircuitProfile {
        CircuitProfile {
            scan_length,
            ..Default::default()
        }
    }

    #[test]
    fn threshold_rules() {
        let none = ThresholdOverrides::default();
        let t = derive_thresholds(&profile(32), &none).unwrap();
        assert_eq!((t.th2, t.th3), (16, 32));
        assert_eq!(t.th1, 0.85);
        let t = derive_thresholds(&profile(700), &none).unwrap();
        assert_eq!((t.th2, t.th3), (175, 350));
        let t = derive_thresholds(&profile(256), &none).unwrap();
        assert_eq!(t.th2, 128);
        let t = derive_thresholds(&profile(1), &none).unwrap();
        assert_eq!(t.th2, 1);
        let fixed = ThresholdOverrides {
            th2: Some(10),
            ..none
        };
        let t = derive_thresholds(&profile(700), &fixed).unwrap();
        assert_eq!((t.th2, t.th3), (10, 20));
    }

    #[test]
    fn threshold_errors() {
        let p = profile(32);
        for r in [0.0, -0.5, 1.5, f64::NAN] {
            let o = ThresholdOverrides {
                th2_ratio: Some(r),
                ..Default::default()
            };
            assert!(matches!(
                derive_thresholds(&p, &o),
                Err(SchedulerError::InvalidRatio(_))
            ));
        }
        let o = ThresholdOverrides {
            th2: Some(0),
            ..Default::default()
        };
        assert_eq!(derive_thresholds(&p, &o), Err(SchedulerError::ZeroTh2));
        assert_eq!(
            derive_thresholds(&profile(0), &ThresholdOverrides::default()),
            Err(SchedulerError::EmptyScanChain)
        );
    }

    fn s27() -> Netlist {
        full_scan_transform(&parse_bench(bench::S27).unwrap())
    }

    #[test]
    fn one_vector_campaign() {
        let net = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(z)\nz = AND(a,b)").unwrap();
        let fs = FaultSet::new(vec![Fault::stem(net.net_id("z").unwrap(), false)]);
        let cfg = CampaignConfig::for_netlist(&net, 1).unwrap();
        let r = run_campaign(&net, fs, cfg).unwrap();
        assert_eq!(r.accounting.pmdv, 1);
        assert_eq!(r.accounting.prtp_ph1 + r.accounting.prtp_ph2, 0);
        assert_eq!(r.accounting.cycles, 2);
        assert_eq!(r.terminated_by, Termination::TargetReached);
    }

    #[test]
    fn s27_reaches_full_coverage_with_identity() {
        let net = s27();
        let fs = collapse_faults(&enumerate_faults(&net), &net);
        let cfg = CampaignConfig::for_netlist(&net, 7).unwrap();
        let r = run_campaign(&net, fs, cfg).unwrap();
        assert_eq!(r.terminated_by, Termination::TargetReached);
        assert_eq!(r.final_coverage, 1.0);
        assert!(r.accounting.identity_holds());
        assert!(r.accounting.cycles < 128 * 7);
        for e in &r.events {
            assert_eq!(e.cycle, e.pmdv * 7 + 2 * e.prtp_ph1 + e.prtp_ph2);
        }
        let [a, b] = r.max_idle_runs();
        assert!(a <= r.thresholds.th2 && b <= r.thresholds.th3);
    }

    #[test]
    fn th1_zero_skips_phase_one_bursts() {
        let net = s27();
        let fs = collapse_faults(&enumerate_faults(&net), &net);
        let mut cfg = CampaignConfig::for_netlist(&net, 3).unwrap();
        cfg.thresholds.th1 = 0.0;
        let r = run_campaign(&net, fs, cfg).unwrap();
        assert_eq!(r.accounting.prtp_ph1, 0);
        assert!(r.events[0].kind == EventKind::Deterministic);
    }

    #[test]
    fn budget_stops_the_campaign() {
        let net = s27();
        let fs = collapse_faults(&enumerate_faults(&net), &net);
        let mut cfg = CampaignConfig::for_netlist(&net, 3).unwrap();
        cfg.cycle_budget = Some(10);
        let r = run_campaign(&net, fs, cfg).unwrap();
        assert_eq!(r.terminated_by, Termination::CycleBudget);
        assert!(r.accounting.cycles <= 10);
    }

    #[test]
    fn fixed_pool_exhausts() {
        let net = s27();
        let fs = collapse_faults(&enumerate_faults(&net), &net);
        let pool = VectorPool::new(vec![TestVector {
            bits: vec![false; 7],
            origin: VectorOrigin::File,
            fill_seed: None,
        }]);
        let mut cfg = CampaignConfig::for_netlist(&net, 3).unwrap();
        cfg.source = VectorSource::Pool(pool);
        cfg.cycle_guard = false;
        cfg.thresholds.th2 = 1;
        cfg.thresholds.th3 = 2;
        let r = run_campaign(&net, fs, cfg).unwrap();
        assert!(matches!(
            r.terminated_by,
            Termination::ProviderExhausted | Termination::TargetReached
        ));
        assert_eq!(r.accounting.adv, 1);
        assert!(r.accounting.pmdv <= 1);
    }

    #[test]
    fn events_csv_header() {
        let net = s27();
        let fs = collapse_faults(&enumerate_faults(&net), &net);
        let r = run_campaign(&net, fs, CampaignConfig::for_netlist(&net, 7).unwrap()).unwrap();
        let csv = r.events_csv();
        assert!(csv.starts_with("cycle,event,phase,new_detections,coverage\n7,deterministic,1,"));
    }
}
