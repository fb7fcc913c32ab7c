// SPDX-License-Identifier: Apache-2.0

//! Two-valued good-machine simulation of the combinational core.
//!
//! Patterns are packed one per bit lane of a `u64`, so one pass over the
//! levelized gate list evaluates up to [`LANES`] patterns.

use thiserror::Error;

use crate::netlist::{GateKind, Netlist};

/// Patterns evaluated per pass.
pub const LANES: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("width mismatch: expected {expected} bits, got {got}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("lane count {0} outside 1..={LANES}")]
    LaneCount(usize),
}

#[inline]
pub(crate) fn lane_mask(width: usize) -> u64 {
    if width >= LANES {
        !0
    } else {
        (1u64 << width) - 1
    }
}

/// Lane-packed values for a sequence of nets.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Lanes {
    width: usize,
    bits: Vec<u64>,
}

impl Lanes {
    fn new(len: usize, width: usize) -> Result<Lanes, SimError> {
        if width == 0 || width > LANES {
            return Err(SimError::LaneCount(width));
        }
        Ok(Lanes {
            width,
            bits: vec![0; len],
        })
    }

    fn from_rows<R: AsRef<[bool]>>(rows: &[R]) -> Result<Lanes, SimError> {
        let len = rows.first().map_or(0, |r| r.as_ref().len());
        let mut lanes = Lanes::new(len, rows.len())?;
        for (lane, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != len {
                return Err(SimError::WidthMismatch {
                    expected: len,
                    got: row.len(),
                });
            }
            for (i, &b) in row.iter().enumerate() {
                lanes.bits[i] |= (b as u64) << lane;
            }
        }
        Ok(lanes)
    }

    fn get(&self, lane: usize, i: usize) -> bool {
        (self.bits[i] >> lane) & 1 == 1
    }

    fn row(&self, lane: usize) -> Vec<bool> {
        (0..self.bits.len()).map(|i| self.get(lane, i)).collect()
    }
}

/// Up to [`LANES`] fully specified scan-input assignments (PIs then PPIs).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternBatch(Lanes);

impl PatternBatch {
    /// All-zero batch with `width` active lanes over `inputs` scan inputs.
    pub fn zeros(inputs: usize, width: usize) -> Result<PatternBatch, SimError> {
        Lanes::new(inputs, width).map(PatternBatch)
    }

    /// One lane per pattern, in order.
    pub fn from_patterns<R: AsRef<[bool]>>(patterns: &[R]) -> Result<PatternBatch, SimError> {
        Lanes::from_rows(patterns).map(PatternBatch)
    }

    pub fn single(pattern: &[bool]) -> PatternBatch {
        PatternBatch::from_patterns(&[pattern]).expect("one lane is always valid")
    }

    pub fn width(&self) -> usize {
        self.0.width
    }

    pub fn inputs(&self) -> usize {
        self.0.bits.len()
    }

    /// Lane-packed word for scan input `i`.
    pub fn word(&self, i: usize) -> u64 {
        self.0.bits[i]
    }

    pub fn set(&mut self, lane: usize, input: usize, value: bool) {
        assert!(lane < self.0.width, "lane {lane} is inactive");
        let bit = 1u64 << lane;
        if value {
            self.0.bits[input] |= bit;
        } else {
            self.0.bits[input] &= !bit;
        }
    }

    pub fn get(&self, lane: usize, input: usize) -> bool {
        self.0.get(lane, input)
    }

    pub fn pattern(&self, lane: usize) -> Vec<bool> {
        self.0.row(lane)
    }

    pub fn lane_mask(&self) -> u64 {
        lane_mask(self.0.width)
    }
}

/// Lane-packed POs then PPOs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResponseBatch(Lanes);

impl ResponseBatch {
    pub fn width(&self) -> usize {
        self.0.width
    }

    pub fn outputs(&self) -> usize {
        self.0.bits.len()
    }

    pub fn word(&self, i: usize) -> u64 {
        self.0.bits[i]
    }

    pub fn get(&self, lane: usize, output: usize) -> bool {
        self.0.get(lane, output)
    }

    pub fn response(&self, lane: usize) -> Vec<bool> {
        self.0.row(lane)
    }
}

fn check_width(net: &Netlist, got: usize) -> Result<(), SimError> {
    let expected = net.scan_length();
    if got != expected {
        return Err(SimError::WidthMismatch { expected, got });
    }
    Ok(())
}

/// Lane-packed values of every net. Inactive lanes hold garbage; callers mask.
pub(crate) fn net_values(net: &Netlist, batch: &PatternBatch) -> Result<Vec<u64>, SimError> {
    check_width(net, batch.inputs())?;
    let mut values = vec![0u64; net.net_count()];
    for (i, n) in net.scan_inputs().enumerate() {
        values[n] = batch.word(i);
    }
    for g in net.gates() {
        values[g.output] = g.kind.eval_word(g.inputs.iter().map(|&i| values[i]));
    }
    Ok(values)
}

pub fn simulate_batch(net: &Netlist, batch: &PatternBatch) -> Result<ResponseBatch, SimError> {
    let values = net_values(net, batch)?;
    let mask = batch.lane_mask();
    Ok(ResponseBatch(Lanes {
        width: batch.width(),
        bits: net.scan_outputs().map(|o| values[o] & mask).collect(),
    }))
}

pub(crate) fn eval_bool(kind: GateKind, inputs: &[bool]) -> bool {
    let ones = inputs.iter().filter(|&&b| b).count();
    match kind {
        GateKind::And => ones == inputs.len(),
        GateKind::Nand => ones != inputs.len(),
        GateKind::Or => ones > 0,
        GateKind::Nor => ones == 0,
        GateKind::Xor => ones % 2 == 1,
        GateKind::Xnor => ones % 2 == 0,
        GateKind::Not => !inputs[0],
        GateKind::Buff | GateKind::Dff => inputs[0],
    }
}

/// Scalar reference evaluator for one pattern.
pub fn simulate_serial(net: &Netlist, pattern: &[bool]) -> Result<Vec<bool>, SimError> {
    check_width(net, pattern.len())?;
    let mut values = vec![false; net.net_count()];
    for (n, &b) in net.scan_inputs().zip(pattern) {
        values[n] = b;
    }
    let mut scratch = Vec::new();
    for g in net.gates() {
        scratch.clear();
        scratch.extend(g.inputs.iter().map(|&i| values[i]));
        values[g.output] = eval_bool(g.kind, &scratch);
    }
    Ok(net.scan_outputs().map(|o| values[o]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench;
    use crate::netlist::{full_scan_transform, parse_bench};

    fn truth_table(kind: &str) -> Vec<bool> {
        let net = parse_bench(&format!("INPUT(a)\nINPUT(b)\nOUTPUT(z)\nz = {kind}(a,b)")).unwrap();
        let batch = PatternBatch::from_patterns(&[
            [false, false],
            [false, true],
            [true, false],
            [true, true],
        ])
        .unwrap();
        let r = simulate_batch(&net, &batch).unwrap();
        (0..4).map(|l| r.get(l, 0)).collect()
    }

    #[test]
    fn two_input_truth_tables() {
        assert_eq!(truth_table("AND"), [false, false, false, true]);
        assert_eq!(truth_table("XOR"), [false, true, true, false]);
        assert_eq!(truth_table("NOR"), [true, false, false, false]);
        assert_eq!(truth_table("XNOR"), [true, false, false, true]);
    }

    #[test]
    fn inactive_lanes_are_zero() {
        let net = parse_bench("INPUT(a)\nOUTPUT(z)\nz = NOT(a)").unwrap();
        let batch = PatternBatch::from_patterns(&[[false], [false], [true]]).unwrap();
        let r = simulate_batch(&net, &batch).unwrap();
        assert_eq!(r.word(0), 0b011);
    }

    #[test]
    fn scalar_gates() {
        let net = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(z)\nz = NAND(a,b)").unwrap();
        assert_eq!(simulate_serial(&net, &[true, true]).unwrap(), [false]);
        let buf = parse_bench("INPUT(x)\nOUTPUT(y)\ny = BUFF(x)").unwrap();
        for x in [false, true] {
            assert_eq!(simulate_serial(&buf, &[x]).unwrap(), [x]);
        }
    }

    #[test]
    fn s27_all_zero_hand_trace() {
        // Hand trace with G0..G3 = 0 and G5, G6, G7 = 0:
        // G14 = 1, G8 = AND(1, 0) = 0, G12 = NOR(0, 0) = 1, G15 = OR(1, 0) = 1,
        // G16 = OR(0, 0) = 0, G9 = NAND(0, 1) = 1, G11 = NOR(0, 1) = 0,
        // G17 = NOT(0) = 1, G10 = NOR(1, 0) = 0, G13 = NOR(0, 1) = 0.
        // Response order: G17, then PPOs G10, G11, G13.
        let net = full_scan_transform(&parse_bench(bench::S27).unwrap());
        let r = simulate_serial(&net, &[false; 7]).unwrap();
        assert_eq!(r, [true, false, false, false]);
        let b = simulate_batch(&net, &PatternBatch::single(&[false; 7])).unwrap();
        assert_eq!(b.response(0), r);
    }

    #[test]
    fn width_mismatch() {
        let net = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(z)\nz = AND(a,b)").unwrap();
        assert_eq!(
            simulate_serial(&net, &[true]),
            Err(SimError::WidthMismatch {
                expected: 2,
                got: 1
            })
        );
        let batch = PatternBatch::zeros(3, 4).unwrap();
        assert!(simulate_batch(&net, &batch).is_err());
        assert_eq!(PatternBatch::zeros(2, 65), Err(SimError::LaneCount(65)));
    }
}
