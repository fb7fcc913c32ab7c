// SPDX-License-Identifier: Apache-2.0

//! Deterministic vector provider: vector files, PODEM and greedy
//! fault-dropping compaction.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::faults::{Fault, FaultSet, FaultSimulator};
use crate::netlist::{GateKind, NetId, Netlist};
use crate::sim::{PatternBatch, LANES};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AtpgError {
    #[error("line {line}: vector has the wrong length")]
    BadLength { line: usize },
    #[error("line {line}, column {col}: expected 0, 1, x or X")]
    BadChar { line: usize, col: usize },
    #[error("cannot read `{path}`: {message}")]
    Io { path: String, message: String },
    #[error("backtrack limit exceeded on fault {fault}")]
    BacktrackLimit { fault: String },
    #[error("vector pool exhausted")]
    PoolExhausted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum VectorOrigin {
    File,
    Podem,
    RandomGreedy,
}

/// A fully specified scan-input assignment (PIs then PPIs).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TestVector {
    pub bits: Vec<bool>,
    pub origin: VectorOrigin,
    /// Seed of the generator that filled the don't-care positions, if any.
    pub fill_seed: Option<u64>,
}

impl TestVector {
    pub fn to_bit_string(&self) -> String {
        self.bits
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect()
    }
}

/// Ordered vectors with a consumed bitmap.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VectorPool {
    vectors: Vec<TestVector>,
    consumed: Vec<bool>,
    /// Faults each vector was credited with when the pool was built.
    detects: Vec<Option<usize>>,
}

impl VectorPool {
    pub fn new(vectors: Vec<TestVector>) -> VectorPool {
        let n = vectors.len();
        VectorPool {
            vectors,
            consumed: vec![false; n],
            detects: vec![None; n],
        }
    }

    fn with_detects(vectors: Vec<TestVector>, detects: Vec<usize>) -> VectorPool {
        let mut pool = VectorPool::new(vectors);
        pool.detects = detects.into_iter().map(Some).collect();
        pool
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[TestVector] {
        &self.vectors
    }

    pub fn is_consumed(&self, i: usize) -> bool {
        self.consumed[i]
    }

    pub fn remaining(&self) -> usize {
        self.consumed.iter().filter(|&&c| !c).count()
    }

    /// Marks every vector consumed.
    pub fn exhaust(&mut self) {
        self.consumed.fill(true);
    }

    /// Detection count recorded at build time.
    pub fn detects(&self, i: usize) -> Option<usize> {
        self.detects[i]
    }

    /// One vector per line, each followed by `# detects=<k>` when known.
    pub fn export(&self) -> String {
        let mut out = String::new();
        for (v, d) in self.vectors.iter().zip(&self.detects) {
            out += &v.to_bit_string();
            out.push('\n');
            if let Some(k) = d {
                let _ = writeln!(out, "# detects={k}");
            }
        }
        out
    }
}

/// Parses vector text. `#` lines and blank lines are skipped; `x` positions
/// are filled from `rng`.
pub fn parse_vectors(
    text: &str,
    scan_length: usize,
    rng: &mut ChaCha8Rng,
) -> Result<VectorPool, AtpgError> {
    let mut vectors = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let mut bits = Vec::with_capacity(scan_length);
        let mut has_x = false;
        for (c, ch) in t.chars().enumerate() {
            bits.push(match ch {
                '0' => Some(false),
                '1' => Some(true),
                'x' | 'X' => {
                    has_x = true;
                    None
                }
                _ => return Err(AtpgError::BadChar { line, col: c + 1 }),
            });
        }
        if bits.len() != scan_length {
            return Err(AtpgError::BadLength { line });
        }
        let fill_seed = has_x.then(|| rng.next_u64());
        let mut fill = fill_seed.map(ChaCha8Rng::seed_from_u64);
        let bits = bits
            .into_iter()
            .map(|b| b.unwrap_or_else(|| fill.as_mut().expect("seeded for x").random()))
            .collect();
        vectors.push(TestVector {
            bits,
            origin: VectorOrigin::File,
            fill_seed,
        });
    }
    Ok(VectorPool::new(vectors))
}

pub fn load_vectors(
    path: impl AsRef<Path>,
    scan_length: usize,
    rng: &mut ChaCha8Rng,
) -> Result<VectorPool, AtpgError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| AtpgError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_vectors(&text, scan_length, rng)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtpgBudget {
    /// Backtracks allowed per target fault.
    pub backtrack_limit: u64,
    /// Random patterns fault-simulated before PODEM starts.
    pub random_prepass: usize,
}

impl Default for AtpgBudget {
    fn default() -> AtpgBudget {
        AtpgBudget {
            backtrack_limit: 1_000_000,
            random_prepass: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PodemOutcome {
    Test(TestVector),
    Untestable,
}

const X: u8 = 2;

fn eval3(kind: GateKind, inputs: impl Iterator<Item = u8>) -> u8 {
    let (mut zeros, mut ones, mut xs) = (0usize, 0usize, 0usize);
    for v in inputs {
        match v {
            0 => zeros += 1,
            1 => ones += 1,
            _ => xs += 1,
        }
    }
    let and = if zeros > 0 {
        0
    } else if xs > 0 {
        X
    } else {
        1
    };
    let or = if ones > 0 {
        1
    } else if xs > 0 {
        X
    } else {
        0
    };
    let parity = if xs > 0 { X } else { (ones % 2) as u8 };
    let inv = |v: u8| if v == X { X } else { 1 - v };
    match kind {
        GateKind::And => and,
        GateKind::Nand => inv(and),
        GateKind::Or => or,
        GateKind::Nor => inv(or),
        GateKind::Xor => parity,
        GateKind::Xnor => inv(parity),
        GateKind::Not => inv(or),
        GateKind::Buff | GateKind::Dff => or,
    }
}

/// PODEM over good/faulty three-valued value pairs.
pub struct Podem<'a> {
    net: &'a Netlist,
    input_pos: Vec<Option<usize>>,
    level: Vec<u32>,
    good: Vec<u8>,
    bad: Vec<u8>,
    queued: Vec<bool>,
    heap: BinaryHeap<Reverse<usize>>,
    visit: Vec<u32>,
    epoch: u32,
    fault: Fault,
    pin: Option<(usize, usize)>,
    cone: Vec<usize>,
    backtrack_limit: u64,
}

impl<'a> Podem<'a> {
    pub fn new(net: &'a Netlist, backtrack_limit: u64) -> Podem<'a> {
        let mut input_pos = vec![None; net.net_count()];
        for (i, n) in net.scan_inputs().enumerate() {
            input_pos[n] = Some(i);
        }
        let mut level = vec![0u32; net.net_count()];
        for g in net.gates() {
            level[g.output] = 1 + g.inputs.iter().map(|&i| level[i]).max().unwrap_or(0);
        }
        Podem {
            net,
            input_pos,
            level,
            good: vec![X; net.net_count()],
            bad: vec![X; net.net_count()],
            queued: vec![false; net.gates().len()],
            heap: BinaryHeap::new(),
            visit: vec![0; net.net_count()],
            epoch: 0,
            fault: Fault::stem(0, false),
            pin: None,
            cone: Vec::new(),
            backtrack_limit,
        }
    }

    fn bad_input(&self, gate: usize, pin: usize, n: NetId) -> u8 {
        if self.pin == Some((gate, pin)) {
            self.fault.stuck_at as u8
        } else {
            self.bad[n]
        }
    }

    fn eval_gate(&self, gi: usize) -> (u8, u8) {
        let g = &self.net.gates()[gi];
        let good = eval3(g.kind, g.inputs.iter().map(|&i| self.good[i]));
        let mut bad = eval3(
            g.kind,
            g.inputs
                .iter()
                .enumerate()
                .map(|(p, &i)| self.bad_input(gi, p, i)),
        );
        if self.pin.is_none() && g.output == self.fault.net {
            bad = self.fault.stuck_at as u8;
        }
        (good, bad)
    }

    fn push_fanout(&mut self, n: NetId) {
        for &(g, _) in self.net.fanout(n) {
            if !self.queued[g] {
                self.queued[g] = true;
                self.heap.push(Reverse(g));
            }
        }
    }

    fn reset(&mut self, fault: Fault) {
        self.fault = fault;
        self.pin = fault.pin(self.net);
        self.good.fill(X);
        self.bad.fill(X);
        if self.pin.is_none() && self.input_pos[fault.net].is_some() {
            self.bad[fault.net] = fault.stuck_at as u8;
        }
        for gi in 0..self.net.gates().len() {
            let (g, b) = self.eval_gate(gi);
            let out = self.net.gates()[gi].output;
            self.good[out] = g;
            self.bad[out] = b;
        }
        // Gates reachable from the fault site, in topological order.
        self.cone.clear();
        self.epoch += 1;
        let start = match self.pin {
            Some((g, _)) => {
                self.cone.push(g);
                self.net.gates()[g].output
            }
            None => fault.net,
        };
        let mut stack = vec![start];
        self.visit[start] = self.epoch;
        while let Some(n) = stack.pop() {
            for &(g, _) in self.net.fanout(n) {
                let out = self.net.gates()[g].output;
                if self.visit[out] != self.epoch {
                    self.visit[out] = self.epoch;
                    self.cone.push(g);
                    stack.push(out);
                }
            }
        }
        self.cone.sort_unstable();
        self.cone.dedup();
    }

    fn assign(&mut self, input: NetId, v: u8) {
        self.good[input] = v;
        if !(self.pin.is_none() && input == self.fault.net) {
            self.bad[input] = v;
        }
        self.push_fanout(input);
        while let Some(Reverse(gi)) = self.heap.pop() {
            self.queued[gi] = false;
            let (g, b) = self.eval_gate(gi);
            let out = self.net.gates()[gi].output;
            if g != self.good[out] || b != self.bad[out] {
                self.good[out] = g;
                self.bad[out] = b;
                self.push_fanout(out);
            }
        }
    }

    fn detected(&self) -> bool {
        self.net.scan_outputs().any(|o| {
            let (g, b) = (self.good[o], self.bad[o]);
            g != X && b != X && g != b
        })
    }

    fn has_d_input(&self, gi: usize) -> bool {
        let g = &self.net.gates()[gi];
        g.inputs.iter().enumerate().any(|(p, &i)| {
            let (gv, bv) = (self.good[i], self.bad_input(gi, p, i));
            gv != X && bv != X && gv != bv
        })
    }

    fn d_frontier(&self) -> Vec<usize> {
        self.cone
            .iter()
            .copied()
            .filter(|&gi| {
                let out = self.net.gates()[gi].output;
                (self.good[out] == X || self.bad[out] == X) && self.has_d_input(gi)
            })
            .collect()
    }

    /// Whether some frontier output reaches an observation point through
    /// nets that are still undetermined.
    fn x_path(&mut self, frontier: &[usize]) -> bool {
        self.epoch += 1;
        let mut stack: Vec<NetId> = frontier
            .iter()
            .map(|&g| self.net.gates()[g].output)
            .collect();
        for &n in &stack {
            self.visit[n] = self.epoch;
        }
        while let Some(n) = stack.pop() {
            if self.net.observation_count(n) > 0 {
                return true;
            }
            for &(g, _) in self.net.fanout(n) {
                let out = self.net.gates()[g].output;
                if self.visit[out] != self.epoch && (self.good[out] == X || self.bad[out] == X) {
                    self.visit[out] = self.epoch;
                    stack.push(out);
                }
            }
        }
        false
    }

    fn objective(&mut self) -> Option<(NetId, u8)> {
        let site = self.fault.net;
        let want = (!self.fault.stuck_at) as u8;
        match self.good[site] {
            X => return Some((site, want)),
            v if v != want => return None,
            _ => {}
        }
        let frontier = self.d_frontier();
        if frontier.is_empty() || !self.x_path(&frontier) {
            return None;
        }
        let gi = frontier[0];
        let g = &self.net.gates()[gi];
        let target = match g.kind {
            GateKind::And | GateKind::Nand => 1,
            _ => 0,
        };
        let pick = g
            .inputs
            .iter()
            .enumerate()
            .find(|&(p, &i)| self.pin != Some((gi, p)) && self.good[i] == X)
            .or_else(|| {
                g.inputs
                    .iter()
                    .enumerate()
                    .find(|&(p, &i)| self.pin != Some((gi, p)) && self.bad[i] == X)
            })
            .map(|(_, &i)| i)?;
        Some((pick, target))
    }

    /// Walks an objective back to an unassigned scan input.
    fn backtrace(&mut self, mut n: NetId, mut v: u8) -> Option<(NetId, u8)> {
        loop {
            if self.input_pos[n].is_some() {
                if self.good[n] == X {
                    return Some((n, v));
                }
                return self.any_unassigned(n);
            }
            let gi = self.net.driver(n)?;
            let g = &self.net.gates()[gi];
            if g.kind.is_inverting() {
                v = 1 - v;
            }
            let xs = g.inputs.iter().copied().filter(|&i| self.good[i] == X);
            // Setting the controlling value needs one input (take the
            // shallowest); the non-controlling value needs all of them
            // (attack the deepest first).
            let next = match g.kind.controlling_value() {
                Some(c) if v == c as u8 => xs.min_by_key(|&i| self.level[i]),
                Some(_) => xs.max_by_key(|&i| self.level[i]),
                None => xs.min_by_key(|&i| self.level[i]),
            };
            match next {
                Some(i) => n = i,
                None => return self.any_unassigned(n),
            }
        }
    }

    fn any_unassigned(&mut self, from: NetId) -> Option<(NetId, u8)> {
        self.epoch += 1;
        let mut stack = vec![from];
        self.visit[from] = self.epoch;
        while let Some(n) = stack.pop() {
            if self.input_pos[n].is_some() && self.good[n] == X {
                return Some((n, 0));
            }
            if let Some(gi) = self.net.driver(n) {
                for &i in &self.net.gates()[gi].inputs {
                    if self.visit[i] != self.epoch {
                        self.visit[i] = self.epoch;
                        stack.push(i);
                    }
                }
            }
        }
        None
    }

    /// Runs PODEM on `fault`; don't-cares are filled from `rng`.
    pub fn run(&mut self, fault: Fault, rng: &mut ChaCha8Rng) -> Result<PodemOutcome, AtpgError> {
        self.reset(fault);
        let mut stack: Vec<(NetId, u8, bool)> = Vec::new();
        let mut backtracks = 0u64;
        loop {
            if self.detected() {
                break;
            }
            let decision = match self.objective() {
                Some((n, v)) => self.backtrace(n, v),
                None => None,
            };
            if let Some((pi, v)) = decision {
                self.assign(pi, v);
                stack.push((pi, v, false));
                continue;
            }
            loop {
                match stack.pop() {
                    None => return Ok(PodemOutcome::Untestable),
                    Some((pi, _, true)) => self.assign(pi, X),
                    Some((pi, v, false)) => {
                        backtracks += 1;
                        if backtracks > self.backtrack_limit {
                            return Err(AtpgError::BacktrackLimit {
                                fault: fault.describe(self.net),
                            });
                        }
                        self.assign(pi, 1 - v);
                        stack.push((pi, 1 - v, true));
                        break;
                    }
                }
            }
        }
        let fill_seed = rng.next_u64();
        let mut fill = ChaCha8Rng::seed_from_u64(fill_seed);
        let bits: Vec<bool> = self
            .net
            .scan_inputs()
            .map(|n| match self.good[n] {
                X => fill.random(),
                v => v == 1,
            })
            .collect();
        let mask = FaultSimulator::new(self.net)
            .detection_masks(&PatternBatch::single(&bits), &[fault])
            .expect("PODEM vector has scan-length width");
        assert_eq!(
            mask,
            [1],
            "PODEM vector fails to detect {}",
            fault.describe(self.net)
        );
        Ok(PodemOutcome::Test(TestVector {
            bits,
            origin: VectorOrigin::Podem,
            fill_seed: Some(fill_seed),
        }))
    }
}

/// Single-fault PODEM with a fresh search context.
pub fn podem(
    net: &Netlist,
    fault: Fault,
    budget: &AtpgBudget,
    rng: &mut ChaCha8Rng,
) -> Result<PodemOutcome, AtpgError> {
    Podem::new(net, budget.backtrack_limit).run(fault, rng)
}

/// A compacted pool and the faults PODEM could not cover.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PoolBuild {
    pub pool: VectorPool,
    /// Indices into the fault set proven untestable.
    pub untestable: Vec<usize>,
    /// Indices into the fault set abandoned at the backtrack limit.
    pub aborted: Vec<usize>,
    /// Vectors generated before compaction.
    pub generated: usize,
}

/// Builds a pool covering the undetected faults of `fs`.
pub fn build_deterministic_pool(
    net: &Netlist,
    fs: &FaultSet,
    budget: &AtpgBudget,
    rng: &mut ChaCha8Rng,
) -> PoolBuild {
    build_pool_excluding(net, fs, budget, rng, &[])
}

/// Like [`build_deterministic_pool`] but never targets faults whose index is
/// flagged in `skip`.
pub fn build_pool_excluding(
    net: &Netlist,
    fs: &FaultSet,
    budget: &AtpgBudget,
    rng: &mut ChaCha8Rng,
    skip: &[bool],
) -> PoolBuild {
    let skipped = |i: usize| skip.get(i).copied().unwrap_or(false);
    let targets: Vec<usize> = fs.undetected().filter(|&i| !skipped(i)).collect();
    let mut work = FaultSet::new(targets.iter().map(|&i| fs.fault(i)).collect());
    let sim = FaultSimulator::new(net);
    let mut raw: Vec<TestVector> = Vec::new();

    let mut left = budget.random_prepass;
    while left > 0 {
        let width = left.min(LANES);
        let patterns: Vec<Vec<bool>> = (0..width)
            .map(|_| (0..net.scan_length()).map(|_| rng.random()).collect())
            .collect();
        let batch = PatternBatch::from_patterns(&patterns).expect("non-empty batch");
        let per_lane = crate::faults::fault_simulate(net, &batch, &mut work, true, 0)
            .expect("random patterns have scan-length width");
        for (p, n) in patterns.into_iter().zip(per_lane) {
            if n > 0 {
                raw.push(TestVector {
                    bits: p,
                    origin: VectorOrigin::RandomGreedy,
                    fill_seed: None,
                });
            }
        }
        left -= width;
    }

    let mut engine = Podem::new(net, budget.backtrack_limit);
    let mut untestable = Vec::new();
    let mut aborted = Vec::new();
    for (k, &target) in targets.iter().enumerate() {
        if work.is_detected(k) {
            continue;
        }
        match engine.run(work.fault(k), rng) {
            Ok(PodemOutcome::Test(v)) => {
                let undetected: Vec<usize> = work.undetected().collect();
                let faults: Vec<Fault> = undetected.iter().map(|&i| work.fault(i)).collect();
                let masks = sim
                    .detection_masks(&PatternBatch::single(&v.bits), &faults)
                    .expect("PODEM vector has scan-length width");
                for (&i, &m) in undetected.iter().zip(&masks) {
                    if m != 0 {
                        work.mark_detected(i, None);
                    }
                }
                raw.push(v);
            }
            Ok(PodemOutcome::Untestable) => untestable.push(target),
            Err(e) => {
                log::warn!("{e}");
                aborted.push(target);
            }
        }
    }

    let generated = raw.len();
    let all_faults: Vec<Fault> = targets.iter().map(|&i| fs.fault(i)).collect();
    let (order, counts) = greedy_cover(&sim, &raw, &all_faults);
    let vectors = order.iter().map(|&i| raw[i].clone()).collect();
    PoolBuild {
        pool: VectorPool::with_detects(vectors, counts),
        untestable,
        aborted,
        generated,
    }
}

/// Per-vector lists of detected fault indices.
fn detection_lists(
    sim: &FaultSimulator,
    vectors: &[TestVector],
    faults: &[Fault],
) -> Vec<Vec<usize>> {
    let mut lists = vec![Vec::new(); vectors.len()];
    for (c, chunk) in vectors.chunks(LANES).enumerate() {
        let bits: Vec<&[bool]> = chunk.iter().map(|v| v.bits.as_slice()).collect();
        let batch = PatternBatch::from_patterns(&bits).expect("vectors share a width");
        let masks = sim
            .detection_masks(&batch, faults)
            .expect("vectors have scan-length width");
        for (f, &m) in masks.iter().enumerate() {
            let mut m = m;
            while m != 0 {
                let lane = m.trailing_zeros() as usize;
                lists[c * LANES + lane].push(f);
                m &= m - 1;
            }
        }
    }
    lists
}

/// Greedy set cover: repeatedly keep the vector adding the most uncovered
/// faults (lowest index on ties) until no vector adds any.
fn greedy_cover(
    sim: &FaultSimulator,
    vectors: &[TestVector],
    faults: &[Fault],
) -> (Vec<usize>, Vec<usize>) {
    let lists = detection_lists(sim, vectors, faults);
    let mut covered = vec![false; faults.len()];
    let mut used = vec![false; vectors.len()];
    let (mut order, mut counts) = (Vec::new(), Vec::new());
    loop {
        let best = (0..vectors.len())
            .filter(|&v| !used[v])
            .map(|v| (lists[v].iter().filter(|&&f| !covered[f]).count(), v))
            .max_by_key(|&(n, v)| (n, Reverse(v)));
        match best {
            Some((n, v)) if n > 0 => {
                used[v] = true;
                for &f in &lists[v] {
                    covered[f] = true;
                }
                order.push(v);
                counts.push(n);
            }
            _ => break,
        }
    }
    (order, counts)
}

/// A vector taken from the pool.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Selection {
    pub index: usize,
    pub vector: TestVector,
    /// Undetected faults of the fault set it detects right now.
    pub new_detections: usize,
}

/// Takes the unconsumed vector detecting the most currently undetected
/// faults. Ties go to the lowest pool index. The winner is marked consumed
/// even when it detects nothing.
pub fn select_best_vector(
    pool: &mut VectorPool,
    net: &Netlist,
    fs: &FaultSet,
) -> Result<Selection, AtpgError> {
    let open: Vec<usize> = (0..pool.len()).filter(|&i| !pool.consumed[i]).collect();
    if open.is_empty() {
        return Err(AtpgError::PoolExhausted);
    }
    let undetected: Vec<usize> = fs.undetected().collect();
    let faults: Vec<Fault> = undetected.iter().map(|&i| fs.fault(i)).collect();
    let sim = FaultSimulator::new(net);
    let mut best: Option<(usize, usize)> = None;
    for chunk in open.chunks(LANES) {
        let bits: Vec<&[bool]> = chunk
            .iter()
            .map(|&i| pool.vectors[i].bits.as_slice())
            .collect();
        let batch = PatternBatch::from_patterns(&bits).expect("vectors share a width");
        let masks = if faults.is_empty() {
            Vec::new()
        } else {
            sim.detection_masks(&batch, &faults)
                .expect("pool vectors have scan-length width")
        };
        let mut counts = [0usize; LANES];
        for &m in &masks {
            let mut m = m;
            while m != 0 {
                counts[m.trailing_zeros() as usize] += 1;
                m &= m - 1;
            }
        }
        for (lane, &i) in chunk.iter().enumerate() {
            if best.is_none_or(|(_, n)| counts[lane] > n) {
                best = Some((i, counts[lane]));
            }
        }
    }
    let (index, new_detections) = best.expect("at least one open vector");
    pool.consumed[index] = true;
    Ok(Selection {
        index,
        vector: pool.vectors[index].clone(),
        new_detections,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench;
    use crate::faults::{collapse_faults, enumerate_faults};
    use crate::netlist::{full_scan_transform, parse_bench};

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(1)
    }

    #[test]
    fn vector_file_parsing() {
        let pool = parse_vectors("# header\n1010\n\n", 4, &mut rng()).unwrap();
        assert_eq!(pool.len(), 1);
        assert_eq!(pool.vectors()[0].to_bit_string(), "1010");
        assert_eq!(pool.vectors()[0].fill_seed, None);
        assert_eq!(
            parse_vectors("101\n", 4, &mut rng()),
            Err(AtpgError::BadLength { line: 1 })
        );
        assert_eq!(
            parse_vectors("0000\n10a1\n", 4, &mut rng()),
            Err(AtpgError::BadChar { line: 2, col: 3 })
        );
    }

    #[test]
    fn x_fill_is_reproducible() {
        let a = parse_vectors("1x0x\nxxxx", 4, &mut rng()).unwrap();
        let b = parse_vectors("1x0x\nxxxx", 4, &mut rng()).unwrap();
        assert_eq!(a, b);
        let v = &a.vectors()[0].bits;
        assert!(v[0] && !v[2]);
    }

    #[test]
    fn and_output_sa0_needs_11() {
        let net = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(z)\nz = AND(a,b)").unwrap();
        let z = net.net_id("z").unwrap();
        let out = podem(
            &net,
            Fault::stem(z, false),
            &AtpgBudget::default(),
            &mut rng(),
        )
        .unwrap();
        match out {
            PodemOutcome::Test(v) => assert_eq!(v.bits, [true, true]),
            PodemOutcome::Untestable => panic!("testable"),
        }
    }

    #[test]
    fn redundant_fault_is_untestable() {
        let net = parse_bench("INPUT(a)\nOUTPUT(z)\nn = NOT(a)\nz = AND(a,n)").unwrap();
        let z = net.net_id("z").unwrap();
        let out = podem(
            &net,
            Fault::stem(z, false),
            &AtpgBudget::default(),
            &mut rng(),
        )
        .unwrap();
        assert_eq!(out, PodemOutcome::Untestable);
    }

    #[test]
    fn backtrack_limit_is_distinct() {
        // z = a AND NOT a AND b: z s-a-0 is redundant; proving it takes a
        // backtrack, so a zero budget aborts instead.
        let net = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(z)\nn = NOT(a)\nz = AND(a,n,b)").unwrap();
        let z = net.net_id("z").unwrap();
        let budget = AtpgBudget {
            backtrack_limit: 0,
            random_prepass: 0,
        };
        assert!(matches!(
            podem(&net, Fault::stem(z, false), &budget, &mut rng()),
            Err(AtpgError::BacktrackLimit { .. })
        ));
    }

    #[test]
    fn and_pool_reaches_full_coverage() {
        let net = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(z)\nz = AND(a,b)").unwrap();
        let fs = collapse_faults(&enumerate_faults(&net), &net);
        assert_eq!(fs.len(), 4);
        let build = build_deterministic_pool(&net, &fs, &AtpgBudget::default(), &mut rng());
        assert!(build.pool.len() <= 3);
        assert!(build.untestable.is_empty());
        let total: usize = (0..build.pool.len())
            .map(|i| build.pool.detects(i).unwrap())
            .sum();
        assert_eq!(total, 4);
        let text = build.pool.export();
        assert!(text.contains("# detects="), "{text}");
    }

    #[test]
    fn empty_pool_when_all_detected() {
        let net = full_scan_transform(&parse_bench(bench::S27).unwrap());
        let mut fs = enumerate_faults(&net);
        for i in 0..fs.len() {
            fs.mark_detected(i, None);
        }
        let build = build_deterministic_pool(&net, &fs, &AtpgBudget::default(), &mut rng());
        assert!(build.pool.is_empty());
    }

    #[test]
    fn selection_order_and_exhaustion() {
        let net = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(z)\nz = AND(a,b)").unwrap();
        let fs = enumerate_faults(&net);
        let v = |s: &str| TestVector {
            bits: s.chars().map(|c| c == '1').collect(),
            origin: VectorOrigin::File,
            fill_seed: None,
        };
        // 00 detects z s-a-1 only; 11 detects a, b and z s-a-0; 10 detects
        // b s-a-1 and z s-a-1 (two, tie with 01).
        let mut pool = VectorPool::new(vec![v("00"), v("11"), v("10"), v("01")]);
        let first = select_best_vector(&mut pool, &net, &fs).unwrap();
        assert_eq!((first.index, first.new_detections), (1, 3));
        let second = select_best_vector(&mut pool, &net, &fs).unwrap();
        assert_eq!((second.index, second.new_detections), (2, 2));
        select_best_vector(&mut pool, &net, &fs).unwrap();
        select_best_vector(&mut pool, &net, &fs).unwrap();
        assert_eq!(
            select_best_vector(&mut pool, &net, &fs),
            Err(AtpgError::PoolExhausted)
        );
    }

    #[test]
    fn zero_count_still_selects_lowest_index() {
        let net = parse_bench("INPUT(a)\nOUTPUT(z)\nz = NOT(a)").unwrap();
        let mut fs = enumerate_faults(&net);
        for i in 0..fs.len() {
            fs.mark_detected(i, None);
        }
        let mut pool = parse_vectors("0\n1\n", 1, &mut rng()).unwrap();
        let s = select_best_vector(&mut pool, &net, &fs).unwrap();
        assert_eq!((s.index, s.new_detections), (0, 0));
    }
}
