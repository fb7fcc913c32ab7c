// SPDX-License-Identifier: Apache-2.0

//! Single stuck-at faults.
//!
//! The uncollapsed universe puts both polarities on every net stem, and on
//! every gate input branch of nets whose fanout degree (gate pins plus PO/PPO
//! observation points) is at least two. Detection is judged at POs and PPOs.
//!
//! Fault simulation is parallel-pattern single-fault propagation: the good
//! machine is evaluated once per batch, then each fault is injected and its
//! difference is propagated event-driven through the fanout cone only.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::netlist::{GateKind, NetId, Netlist};
use crate::sim::{eval_bool, net_values, PatternBatch, SimError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fault {
    pub net: NetId,
    /// Index into [`Netlist::fanout`] of `net` for a branch fault; `None` for the stem.
    pub branch: Option<usize>,
    pub stuck_at: bool,
}

impl Fault {
    pub fn stem(net: NetId, stuck_at: bool) -> Fault {
        Fault {
            net,
            branch: None,
            stuck_at,
        }
    }

    pub fn branch(net: NetId, branch: usize, stuck_at: bool) -> Fault {
        Fault {
            net,
            branch: Some(branch),
            stuck_at,
        }
    }

    /// `(gate, pin)` the branch fault sits on.
    pub fn pin(&self, net: &Netlist) -> Option<(usize, usize)> {
        self.branch.map(|b| net.fanout(self.net)[b])
    }

    /// `netname[/branch] SA0|SA1`
    pub fn describe(&self, net: &Netlist) -> String {
        let mut s = net.net_name(self.net).to_string();
        if let Some(b) = self.branch {
            let _ = write!(s, "/{b}");
        }
        s + if self.stuck_at { " SA1" } else { " SA0" }
    }
}

/// Faults with detection bookkeeping.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaultSet {
    faults: Vec<Fault>,
    detected: Vec<bool>,
    detector: Vec<Option<u64>>,
    detected_count: usize,
}

impl FaultSet {
    pub fn new(faults: Vec<Fault>) -> FaultSet {
        let n = faults.len();
        FaultSet {
            faults,
            detected: vec![false; n],
            detector: vec![None; n],
            detected_count: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.faults.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faults.is_empty()
    }

    pub fn faults(&self) -> &[Fault] {
        &self.faults
    }

    pub fn fault(&self, i: usize) -> Fault {
        self.faults[i]
    }

    pub fn is_detected(&self, i: usize) -> bool {
        self.detected[i]
    }

    /// Index of the first pattern that detected fault `i`, when known.
    pub fn detector(&self, i: usize) -> Option<u64> {
        self.detector[i]
    }

    pub fn detected_count(&self) -> usize {
        self.detected_count
    }

    /// Detected fraction; an empty set counts as fully covered.
    pub fn coverage(&self) -> f64 {
        if self.faults.is_empty() {
            1.0
        } else {
            self.detected_count as f64 / self.faults.len() as f64
        }
    }

    /// Marks fault `i` detected. Returns `true` if it was not detected before.
    pub fn mark_detected(&mut self, i: usize, pattern: Option<u64>) -> bool {
        if self.detected[i] {
            return false;
        }
        self.detected[i] = true;
        self.detector[i] = pattern;
        self.detected_count += 1;
        true
    }

    pub fn undetected(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.faults.len()).filter(|&i| !self.detected[i])
    }

    pub fn reset_detection(&mut self) {
        self.detected.fill(false);
        self.detector.fill(None);
        self.detected_count = 0;
    }

    /// One line per fault: `netname[/branch] SA0|SA1 [DETECTED@pattern_idx]`.
    pub fn export(&self, net: &Netlist) -> String {
        let mut out = String::new();
        for (i, f) in self.faults.iter().enumerate() {
            out += &f.describe(net);
            if self.detected[i] {
                match self.detector[i] {
                    Some(p) => {
                        let _ = write!(out, " DETECTED@{p}");
                    }
                    None => out += " DETECTED",
                }
            }
            out.push('\n');
        }
        out
    }
}

pub fn enumerate_faults(net: &Netlist) -> FaultSet {
    let mut faults = Vec::new();
    for n in 0..net.net_count() {
        faults.push(Fault::stem(n, false));
        faults.push(Fault::stem(n, true));
        if net.fanout_degree(n) >= 2 {
            for b in 0..net.fanout(n).len() {
                faults.push(Fault::branch(n, b, false));
                faults.push(Fault::branch(n, b, true));
            }
        }
    }
    FaultSet::new(faults)
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// The fault seen by `pin` of `gate`: the branch fault when the driving net
/// has branches, the stem fault otherwise.
fn input_line_fault(net: &Netlist, gate: usize, pin: usize, stuck_at: bool) -> Fault {
    let n = net.gates()[gate].inputs[pin];
    if net.fanout_degree(n) >= 2 {
        let b = net
            .fanout(n)
            .iter()
            .position(|&p| p == (gate, pin))
            .expect("pin is in its net's fanout");
        Fault::branch(n, b, stuck_at)
    } else {
        Fault::stem(n, stuck_at)
    }
}

/// Structural equivalence classes over the uncollapsed universe, as a map
/// from fault to class id.
pub fn equivalence_classes(net: &Netlist) -> HashMap<Fault, usize> {
    let universe = enumerate_faults(net);
    let index: HashMap<Fault, usize> = universe
        .faults()
        .iter()
        .enumerate()
        .map(|(i, &f)| (f, i))
        .collect();
    let mut uf = UnionFind((0..universe.len()).collect());
    for g in net.gates() {
        let out = |v| index[&Fault::stem(g.output, v)];
        let pins = 0..g.inputs.len();
        let line = |pin, v| index[&input_line_fault(net, g.id, pin, v)];
        match g.kind {
            GateKind::And => pins.for_each(|p| uf.union(line(p, false), out(false))),
            GateKind::Nand => pins.for_each(|p| uf.union(line(p, false), out(true))),
            GateKind::Or => pins.for_each(|p| uf.union(line(p, true), out(true))),
            GateKind::Nor => pins.for_each(|p| uf.union(line(p, true), out(false))),
            GateKind::Not => {
                uf.union(line(0, false), out(true));
                uf.union(line(0, true), out(false));
            }
            GateKind::Buff | GateKind::Dff => {
                uf.union(line(0, false), out(false));
                uf.union(line(0, true), out(true));
            }
            GateKind::Xor | GateKind::Xnor => {}
        }
    }
    index.into_iter().map(|(f, i)| (f, uf.find(i))).collect()
}

/// Keeps the first fault (in set order) of every equivalence class. A kept
/// fault is detected if any member of its class present in `fs` was.
pub fn collapse_faults(fs: &FaultSet, net: &Netlist) -> FaultSet {
    let classes = equivalence_classes(net);
    let class_of = |i: usize| classes.get(&fs.faults[i]).copied();
    let mut detection: HashMap<usize, Option<u64>> = HashMap::new();
    for i in 0..fs.len() {
        if let (Some(c), true) = (class_of(i), fs.detected[i]) {
            let e = detection.entry(c).or_insert(fs.detector[i]);
            *e = match (*e, fs.detector[i]) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
        }
    }
    let mut seen = HashMap::new();
    let mut out = FaultSet::new(Vec::new());
    for i in 0..fs.len() {
        let (detected, detector) = match class_of(i) {
            Some(c) => {
                if seen.insert(c, ()).is_some() {
                    continue;
                }
                match detection.get(&c) {
                    Some(&d) => (true, d),
                    None => (false, None),
                }
            }
            None => (fs.detected[i], fs.detector[i]),
        };
        out.faults.push(fs.faults[i]);
        out.detected.push(detected);
        out.detector.push(detector);
        out.detected_count += detected as usize;
    }
    out
}

/// Per-worker propagation state.
struct Scratch {
    value: Vec<u64>,
    stamp: Vec<u32>,
    queued: Vec<u32>,
    epoch: u32,
    heap: BinaryHeap<Reverse<usize>>,
}

impl Scratch {
    fn new(net: &Netlist) -> Scratch {
        Scratch {
            value: vec![0; net.net_count()],
            stamp: vec![0; net.net_count()],
            queued: vec![0; net.gates().len()],
            epoch: 0,
            heap: BinaryHeap::new(),
        }
    }

    fn next_epoch(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.queued.fill(0);
            self.epoch = 1;
        }
        self.heap.clear();
    }

    fn enqueue_fanout(&mut self, net: &Netlist, n: NetId) {
        for &(g, _) in net.fanout(n) {
            if self.queued[g] != self.epoch {
                self.queued[g] = self.epoch;
                self.heap.push(Reverse(g));
            }
        }
    }
}

/// Parallel-pattern single-fault propagation over one netlist.
pub struct FaultSimulator<'a> {
    net: &'a Netlist,
}

const CHUNK: usize = 256;

impl<'a> FaultSimulator<'a> {
    pub fn new(net: &'a Netlist) -> FaultSimulator<'a> {
        FaultSimulator { net }
    }

    pub fn netlist(&self) -> &'a Netlist {
        self.net
    }

    /// For every fault, the lanes of `batch` in which it is detected.
    pub fn detection_masks(
        &self,
        batch: &PatternBatch,
        faults: &[Fault],
    ) -> Result<Vec<u64>, SimError> {
        let good = net_values(self.net, batch)?;
        let mask = batch.lane_mask();
        Ok(faults
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut scratch = Scratch::new(self.net);
                chunk
                    .iter()
                    .map(|f| self.detect(&good, mask, *f, &mut scratch))
                    .collect::<Vec<u64>>()
            })
            .collect::<Vec<_>>()
            .concat())
    }

    fn detect(&self, good: &[u64], mask: u64, fault: Fault, s: &mut Scratch) -> u64 {
        let net = self.net;
        let forced = if fault.stuck_at { !0u64 } else { 0 };
        let n = fault.net;
        let activated = (good[n] ^ forced) & mask;
        if activated == 0 {
            return 0;
        }
        s.next_epoch();
        let mut detected = 0u64;
        let pin = fault.pin(net);
        match pin {
            None => {
                s.value[n] = forced;
                s.stamp[n] = s.epoch;
                if net.observation_count(n) > 0 {
                    detected |= activated;
                }
                s.enqueue_fanout(net, n);
            }
            Some((g, _)) => {
                s.queued[g] = s.epoch;
                s.heap.push(Reverse(g));
            }
        }
        while let Some(Reverse(gi)) = s.heap.pop() {
            let g = &net.gates()[gi];
            let out = g.kind.eval_word(g.inputs.iter().enumerate().map(|(p, &i)| {
                if pin == Some((gi, p)) {
                    forced
                } else if s.stamp[i] == s.epoch {
                    s.value[i]
                } else {
                    good[i]
                }
            }));
            let diff = (out ^ good[g.output]) & mask;
            if diff != 0 {
                s.value[g.output] = out;
                s.stamp[g.output] = s.epoch;
                if net.observation_count(g.output) > 0 {
                    detected |= diff;
                }
                s.enqueue_fanout(net, g.output);
            }
        }
        detected
    }
}

/// Fault-simulates `batch` against `fs`. Lane `i` is pattern number
/// `first_pattern + i`. With `drop` set, already-detected faults are skipped.
///
/// Returns, per lane, the number of faults first detected in that lane;
/// a fault detected in several lanes is credited to the earliest one.
pub fn fault_simulate(
    net: &Netlist,
    batch: &PatternBatch,
    fs: &mut FaultSet,
    drop: bool,
    first_pattern: u64,
) -> Result<Vec<usize>, SimError> {
    let targets: Vec<usize> = if drop {
        fs.undetected().collect()
    } else {
        (0..fs.len()).collect()
    };
    let faults: Vec<Fault> = targets.iter().map(|&i| fs.faults[i]).collect();
    let masks = FaultSimulator::new(net).detection_masks(batch, &faults)?;
    let mut per_lane = vec![0usize; batch.width()];
    for (&i, &m) in targets.iter().zip(&masks) {
        if m == 0 {
            continue;
        }
        let lane = m.trailing_zeros() as usize;
        if fs.mark_detected(i, Some(first_pattern + lane as u64)) {
            per_lane[lane] += 1;
        }
    }
    Ok(per_lane)
}

/// Scalar response of the circuit with `fault` injected. Slow; evaluates
/// the whole netlist for one pattern.
pub fn faulty_response(
    net: &Netlist,
    pattern: &[bool],
    fault: Fault,
) -> Result<Vec<bool>, SimError> {
    if pattern.len() != net.scan_length() {
        return Err(SimError::WidthMismatch {
            expected: net.scan_length(),
            got: pattern.len(),
        });
    }
    let pin = fault.pin(net);
    let mut values = vec![false; net.net_count()];
    for (n, &b) in net.scan_inputs().zip(pattern) {
        values[n] = b;
    }
    if pin.is_none() {
        values[fault.net] = if net.driver(fault.net).is_none() {
            fault.stuck_at
        } else {
            values[fault.net]
        };
    }
    let mut scratch = Vec::new();
    for g in net.gates() {
        scratch.clear();
        scratch.extend(g.inputs.iter().enumerate().map(|(p, &i)| {
            if pin == Some((g.id, p)) {
                fault.stuck_at
            } else {
                values[i]
            }
        }));
        values[g.output] = eval_bool(g.kind, &scratch);
        if pin.is_none() && g.output == fault.net {
            values[g.output] = fault.stuck_at;
        }
    }
    Ok(net.scan_outputs().map(|o| values[o]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse_bench;

    fn and2() -> Netlist {
        parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(z)\nz = AND(a,b)").unwrap()
    }

    #[test]
    fn and_gate_universe_and_collapse() {
        let net = and2();
        let fs = enumerate_faults(&net);
        assert_eq!(fs.len(), 6);
        let collapsed = collapse_faults(&fs, &net);
        assert_eq!(collapsed.len(), 4);
        let again = collapse_faults(&collapsed, &net);
        assert_eq!(again, collapsed);
    }

    #[test]
    fn fanout_three_gives_eight_faults_on_the_net() {
        let net = parse_bench(
            "INPUT(a)\nINPUT(b)\nOUTPUT(x)\nOUTPUT(y)\nOUTPUT(z)\n\
             x = AND(a,b)\ny = OR(a,b)\nz = NAND(a,b)",
        )
        .unwrap();
        let fs = enumerate_faults(&net);
        let a = net.net_id("a").unwrap();
        assert_eq!(fs.faults().iter().filter(|f| f.net == a).count(), 8);
    }

    #[test]
    fn inverter_chain_collapses_to_two() {
        for k in 1..6 {
            let mut text = String::from("INPUT(n0)\n");
            text += &format!("OUTPUT(n{k})\n");
            for i in 1..=k {
                text += &format!("n{i} = NOT(n{})\n", i - 1);
            }
            let net = parse_bench(&text).unwrap();
            let collapsed = collapse_faults(&enumerate_faults(&net), &net);
            assert_eq!(collapsed.len(), 2, "chain of {k}");
        }
    }

    #[test]
    fn and_input_stuck_at_one() {
        let net = and2();
        let a = net.net_id("a").unwrap();
        let mut fs = FaultSet::new(vec![Fault::stem(a, true)]);
        let new = fault_simulate(
            &net,
            &PatternBatch::single(&[false, true]),
            &mut fs,
            true,
            0,
        )
        .unwrap();
        assert_eq!(new, [1]);
        assert_eq!(fs.detector(0), Some(0));

        let mut fs = FaultSet::new(vec![Fault::stem(a, true)]);
        fault_simulate(&net, &PatternBatch::single(&[true, true]), &mut fs, true, 0).unwrap();
        assert!(!fs.is_detected(0));
    }

    #[test]
    fn earlier_lanes_claim_shared_detections() {
        let net = and2();
        let mut fs = enumerate_faults(&net);
        let batch =
            PatternBatch::from_patterns(&[[true, true], [true, true], [false, true]]).unwrap();
        let per_lane = fault_simulate(&net, &batch, &mut fs, true, 10).unwrap();
        // 11 detects a0, b0, z0; then 01 adds a1 and z1.
        assert_eq!(per_lane, [3, 0, 2]);
        assert_eq!(per_lane.iter().sum::<usize>(), fs.detected_count());
        let text = fs.export(&net);
        assert!(text.contains("a SA0 DETECTED@10"), "{text}");
        assert!(text.contains("b SA1\n"), "{text}");
    }

    #[test]
    fn branch_faults_only_affect_their_pin() {
        // a fans out to x = BUFF(a) and y = NOT(a); a branch fault on the
        // BUFF pin must not disturb y.
        let net = parse_bench("INPUT(a)\nOUTPUT(x)\nOUTPUT(y)\nx = BUFF(a)\ny = NOT(a)").unwrap();
        let a = net.net_id("a").unwrap();
        let x_gate = net.driver(net.net_id("x").unwrap()).unwrap();
        let b = net
            .fanout(a)
            .iter()
            .position(|&(g, _)| g == x_gate)
            .unwrap();
        let sim = FaultSimulator::new(&net);
        let masks = sim
            .detection_masks(
                &PatternBatch::single(&[false]),
                &[Fault::branch(a, b, true), Fault::stem(a, true)],
            )
            .unwrap();
        assert_eq!(masks, [1, 1]);
    }
}
