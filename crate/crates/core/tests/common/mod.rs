// SPDX-License-Identifier: Apache-2.0

// Shared helpers: random circuits and brute-force oracles.

#![allow(dead_code)]

use hybist::{
    faulty_response, full_scan_transform, parse_bench, simulate_serial, Fault, FaultSimulator,
    Netlist, PatternBatch, LANES,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KINDS: [&str; 8] = ["AND", "NAND", "OR", "NOR", "XOR", "XNOR", "NOT", "BUFF"];

/// `.bench` text of a random acyclic circuit with up to `max_gates` gates,
/// `2..=max_pis` primary inputs and up to two flip-flops.
pub fn random_bench(seed: u64, max_gates: usize, max_pis: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pis = rng.random_range(2..=max_pis.max(2));
    let dffs = rng.random_range(0..=2);
    let gates = rng.random_range(1..=max_gates);
    let mut nets: Vec<String> = (0..pis).map(|i| format!("i{i}")).collect();
    nets.extend((0..dffs).map(|i| format!("q{i}")));
    let mut used = vec![false; nets.len() + gates];
    let mut lines = Vec::new();
    for g in 0..gates {
        let kind = KINDS[rng.random_range(0..KINDS.len())];
        let arity = if matches!(kind, "NOT" | "BUFF") {
            1
        } else {
            rng.random_range(2..=3)
        };
        let args: Vec<String> = (0..arity)
            .map(|_| {
                let k = rng.random_range(0..nets.len());
                used[k] = true;
                nets[k].clone()
            })
            .collect();
        lines.push(format!("g{g} = {kind}({})", args.join(", ")));
        nets.push(format!("g{g}"));
    }
    let first_gate = pis + dffs;
    let mut text = String::new();
    for i in 0..pis {
        text += &format!("INPUT(i{i})\n");
    }
    let mut outputs = Vec::new();
    for (k, name) in nets.iter().enumerate().skip(first_gate) {
        if !used[k] || rng.random_bool(0.2) {
            outputs.push(name.clone());
        }
    }
    for o in &outputs {
        text += &format!("OUTPUT({o})\n");
    }
    for d in 0..dffs {
        let src = rng.random_range(first_gate..nets.len());
        text += &format!("q{d} = DFF({})\n", nets[src]);
    }
    for l in lines {
        text += &l;
        text.push('\n');
    }
    text
}

pub fn random_circuit(seed: u64, max_gates: usize, max_pis: usize) -> Netlist {
    let text = random_bench(seed, max_gates, max_pis);
    full_scan_transform(&parse_bench(&text).unwrap_or_else(|e| panic!("{e}\n{text}")))
}

/// Pattern `k` as bits: bit `i` of `k` drives scan input `i`.
pub fn pattern_of(k: u64, width: usize) -> Vec<bool> {
    (0..width).map(|i| (k >> i) & 1 == 1).collect()
}

/// Per fault, whether any of the `2^scan_length` patterns detects it.
pub fn exhaustive_detectable(net: &Netlist, faults: &[Fault]) -> Vec<bool> {
    let n = net.scan_length();
    assert!(n <= 20, "exhaustive oracle limited to 20 inputs");
    let sim = FaultSimulator::new(net);
    let mut hit = vec![false; faults.len()];
    let total = 1u64 << n;
    let mut k = 0;
    while k < total {
        let width = (total - k).min(LANES as u64);
        let patterns: Vec<Vec<bool>> = (k..k + width).map(|p| pattern_of(p, n)).collect();
        let masks = sim
            .detection_masks(&PatternBatch::from_patterns(&patterns).unwrap(), faults)
            .unwrap();
        for (h, m) in hit.iter_mut().zip(masks) {
            *h |= m != 0;
        }
        k += width;
    }
    hit
}

/// Serial single-fault oracle.
pub fn naive_detects(net: &Netlist, pattern: &[bool], fault: Fault) -> bool {
    simulate_serial(net, pattern).unwrap() != faulty_response(net, pattern, fault).unwrap()
}
