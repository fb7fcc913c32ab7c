// SPDX-License-Identifier: Apache-2.0

//! ISCAS'89 `.bench` netlists.
//!
//! Nets are named in the source text and mapped to dense [`NetId`]s on
//! parse. A [`Netlist`] is immutable once built and always stores its gates
//! in a stable topological order of the combinational core, with flip-flops
//! treated as sources. [`full_scan_transform`] removes the flip-flops and
//! exposes their outputs as pseudo-primary inputs (PPIs) and their inputs as
//! pseudo-primary outputs (PPOs).

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;
use std::path::Path;

use thiserror::Error;

/// Dense net index.
pub type NetId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetlistError {
    #[error("line {line}: syntax error: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unsupported gate kind `{kind}`")]
    UnsupportedGate { line: usize, kind: String },
    #[error("line {line}: {kind} gate cannot take {inputs} input(s)")]
    Arity {
        line: usize,
        kind: GateKind,
        inputs: usize,
    },
    #[error("net `{net}` is referenced but never defined")]
    UndefinedNet { net: String },
    #[error("line {line}: net `{net}` has more than one driver")]
    MultipleDrivers { net: String, line: usize },
    #[error("combinational cycle through nets {}", .nets.join(" -> "))]
    CombinationalCycle { nets: Vec<String> },
    #[error("cannot read `{path}`: {message}")]
    Io { path: String, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    And,
    Nand,
    Or,
    Nor,
    Xor,
    Xnor,
    Not,
    Buff,
    Dff,
}

impl GateKind {
    /// Case-insensitive keyword lookup. `BUF` is accepted as an alias of `BUFF`.
    pub fn from_keyword(word: &str) -> Option<GateKind> {
        let kind = match word.to_ascii_uppercase().as_str() {
            "AND" => GateKind::And,
            "NAND" => GateKind::Nand,
            "OR" => GateKind::Or,
            "NOR" => GateKind::Nor,
            "XOR" => GateKind::Xor,
            "XNOR" => GateKind::Xnor,
            "NOT" => GateKind::Not,
            "BUFF" | "BUF" => GateKind::Buff,
            "DFF" => GateKind::Dff,
            _ => return None,
        };
        Some(kind)
    }

    pub fn keyword(self) -> &'static str {
        match self {
            GateKind::And => "AND",
            GateKind::Nand => "NAND",
            GateKind::Or => "OR",
            GateKind::Nor => "NOR",
            GateKind::Xor => "XOR",
            GateKind::Xnor => "XNOR",
            GateKind::Not => "NOT",
            GateKind::Buff => "BUFF",
            GateKind::Dff => "DFF",
        }
    }

    pub fn accepts_inputs(self, n: usize) -> bool {
        match self {
            GateKind::Not | GateKind::Buff | GateKind::Dff => n == 1,
            _ => n >= 2,
        }
    }

    /// True when the output is the complement of the underlying AND/OR/XOR/BUFF.
    pub fn is_inverting(self) -> bool {
        matches!(
            self,
            GateKind::Nand | GateKind::Nor | GateKind::Xnor | GateKind::Not
        )
    }

    /// Controlling input value, if the gate has one.
    pub fn controlling_value(self) -> Option<bool> {
        match self {
            GateKind::And | GateKind::Nand => Some(false),
            GateKind::Or | GateKind::Nor => Some(true),
            _ => None,
        }
    }

    /// Evaluates the gate on lane-packed words.
    #[inline]
    pub fn eval_word<I: IntoIterator<Item = u64>>(self, inputs: I) -> u64 {
        let mut it = inputs.into_iter();
        let first = it.next().unwrap_or(0);
        match self {
            GateKind::And => it.fold(first, |a, b| a & b),
            GateKind::Nand => !it.fold(first, |a, b| a & b),
            GateKind::Or => it.fold(first, |a, b| a | b),
            GateKind::Nor => !it.fold(first, |a, b| a | b),
            GateKind::Xor => it.fold(first, |a, b| a ^ b),
            GateKind::Xnor => !it.fold(first, |a, b| a ^ b),
            GateKind::Not => !first,
            GateKind::Buff | GateKind::Dff => first,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gate {
    /// Position in the netlist's gate list.
    pub id: usize,
    pub kind: GateKind,
    pub inputs: Vec<NetId>,
    pub output: NetId,
}

/// Port and size summary of a post-scan netlist.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub struct CircuitProfile {
    pub pis: usize,
    pub pos: usize,
    pub ppis: usize,
    pub ppos: usize,
    pub gate_count: usize,
    /// `pis + ppis`: the number of scan cells loaded per deterministic vector.
    pub scan_length: usize,
}

#[derive(Clone, Debug)]
pub struct Netlist {
    name: String,
    net_names: Vec<String>,
    net_index: HashMap<String, NetId>,
    gates: Vec<Gate>,
    primary_inputs: Vec<NetId>,
    primary_outputs: Vec<NetId>,
    ppi_nets: Vec<NetId>,
    ppo_nets: Vec<NetId>,
    driver: Vec<Option<usize>>,
    fanout: Vec<Vec<(usize, usize)>>,
    observed: Vec<u32>,
}

impl Netlist {
    /// Assembles a netlist and levelizes it.
    fn build(
        name: String,
        net_names: Vec<String>,
        gates: Vec<Gate>,
        primary_inputs: Vec<NetId>,
        primary_outputs: Vec<NetId>,
        ppi_nets: Vec<NetId>,
        ppo_nets: Vec<NetId>,
    ) -> Result<Netlist, NetlistError> {
        let net_index = net_names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        let mut net = Netlist {
            name,
            net_names,
            net_index,
            gates,
            primary_inputs,
            primary_outputs,
            ppi_nets,
            ppo_nets,
            driver: Vec::new(),
            fanout: Vec::new(),
            observed: Vec::new(),
        };
        net.gates = net.topological_order()?;
        net.index();
        Ok(net)
    }

    fn index(&mut self) {
        let n = self.net_names.len();
        self.driver = vec![None; n];
        self.fanout = vec![Vec::new(); n];
        self.observed = vec![0; n];
        for (gi, g) in self.gates.iter_mut().enumerate() {
            g.id = gi;
            self.driver[g.output] = Some(gi);
            for (pin, &i) in g.inputs.iter().enumerate() {
                self.fanout[i].push((gi, pin));
            }
        }
        for &o in self.primary_outputs.iter().chain(&self.ppo_nets) {
            self.observed[o] += 1;
        }
    }

    /// Stable Kahn ordering: among ready gates the lowest original index goes
    /// first, so an already-ordered gate list is returned unchanged.
    fn topological_order(&self) -> Result<Vec<Gate>, NetlistError> {
        let n = self.net_names.len();
        let mut driver = vec![None; n];
        for (gi, g) in self.gates.iter().enumerate() {
            if g.kind != GateKind::Dff {
                driver[g.output] = Some(gi);
            }
        }
        let mut pending = vec![0usize; self.gates.len()];
        let mut readers: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut heap = BinaryHeap::new();
        for (gi, g) in self.gates.iter().enumerate() {
            if g.kind == GateKind::Dff {
                heap.push(Reverse(gi));
                continue;
            }
            for &i in &g.inputs {
                if driver[i].is_some() {
                    pending[gi] += 1;
                    readers[i].push(gi);
                }
            }
            if pending[gi] == 0 {
                heap.push(Reverse(gi));
            }
        }
        let mut order = Vec::with_capacity(self.gates.len());
        while let Some(Reverse(gi)) = heap.pop() {
            order.push(gi);
            let g = &self.gates[gi];
            if g.kind == GateKind::Dff {
                continue;
            }
            for &r in &readers[g.output] {
                pending[r] -= 1;
                if pending[r] == 0 {
                    heap.push(Reverse(r));
                }
            }
        }
        if order.len() != self.gates.len() {
            return Err(self.find_cycle(&driver, &pending));
        }
        Ok(order.into_iter().map(|gi| self.gates[gi].clone()).collect())
    }

    fn find_cycle(&self, driver: &[Option<usize>], pending: &[usize]) -> NetlistError {
        let start = pending.iter().position(|&p| p > 0).unwrap_or(0);
        let mut seen = HashMap::new();
        let mut path = Vec::new();
        let mut gi = start;
        loop {
            if let Some(&at) = seen.get(&gi) {
                let nets = path[at..]
                    .iter()
                    .map(|&g: &usize| self.net_names[self.gates[g].output].clone())
                    .collect();
                return NetlistError::CombinationalCycle { nets };
            }
            seen.insert(gi, path.len());
            path.push(gi);
            // Every blocked gate has at least one blocked combinational driver.
            gi = self.gates[gi]
                .inputs
                .iter()
                .filter_map(|&i| driver[i])
                .find(|&d| pending[d] > 0)
                .expect("blocked gate without blocked driver");
        }
    }

    /// Reads and parses a `.bench` file. The circuit name is the file stem.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Netlist, NetlistError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| NetlistError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "circuit".to_string());
        parse_bench_named(&name, &text)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn primary_inputs(&self) -> &[NetId] {
        &self.primary_inputs
    }

    pub fn primary_outputs(&self) -> &[NetId] {
        &self.primary_outputs
    }

    pub fn ppi_nets(&self) -> &[NetId] {
        &self.ppi_nets
    }

    pub fn ppo_nets(&self) -> &[NetId] {
        &self.ppo_nets
    }

    pub fn net_count(&self) -> usize {
        self.net_names.len()
    }

    pub fn net_name(&self, net: NetId) -> &str {
        &self.net_names[net]
    }

    pub fn net_id(&self, name: &str) -> Option<NetId> {
        self.net_index.get(name).copied()
    }

    /// Index of the gate driving `net`, if any (PIs and PPIs have none).
    pub fn driver(&self, net: NetId) -> Option<usize> {
        self.driver[net]
    }

    /// Gate input pins reading `net`, as `(gate index, pin)` pairs.
    pub fn fanout(&self, net: NetId) -> &[(usize, usize)] {
        &self.fanout[net]
    }

    /// Number of PO/PPO observation points attached to `net`.
    pub fn observation_count(&self, net: NetId) -> usize {
        self.observed[net] as usize
    }

    /// Gate pins plus observation points.
    pub fn fanout_degree(&self, net: NetId) -> usize {
        self.fanout[net].len() + self.observation_count(net)
    }

    pub fn has_flip_flops(&self) -> bool {
        self.gates.iter().any(|g| g.kind == GateKind::Dff)
    }

    /// PIs followed by PPIs: the bit order of every pattern.
    pub fn scan_inputs(&self) -> impl Iterator<Item = NetId> + '_ {
        self.primary_inputs.iter().chain(&self.ppi_nets).copied()
    }

    /// POs followed by PPOs: the bit order of every response.
    pub fn scan_outputs(&self) -> impl Iterator<Item = NetId> + '_ {
        self.primary_outputs.iter().chain(&self.ppo_nets).copied()
    }

    pub fn scan_length(&self) -> usize {
        self.primary_inputs.len() + self.ppi_nets.len()
    }

    pub fn response_width(&self) -> usize {
        self.primary_outputs.len() + self.ppo_nets.len()
    }

    /// Nets that drive nothing and are not observed.
    pub fn dangling_nets(&self) -> Vec<NetId> {
        (0..self.net_count())
            .filter(|&n| self.fanout_degree(n) == 0)
            .collect()
    }

    pub fn profile(&self) -> CircuitProfile {
        circuit_profile(self)
    }

    /// Emits the netlist as `.bench` text. Scan cells are written back as
    /// `ppi = DFF(ppo)` so that parsing and re-scanning reproduces the graph.
    pub fn to_bench(&self) -> String {
        let mut out = format!("# {}\n", self.name);
        for &i in &self.primary_inputs {
            out += &format!("INPUT({})\n", self.net_names[i]);
        }
        for &o in &self.primary_outputs {
            out += &format!("OUTPUT({})\n", self.net_names[o]);
        }
        for (&q, &d) in self.ppi_nets.iter().zip(&self.ppo_nets) {
            out += &format!("{} = DFF({})\n", self.net_names[q], self.net_names[d]);
        }
        for g in &self.gates {
            let args: Vec<&str> = g
                .inputs
                .iter()
                .map(|&i| self.net_names[i].as_str())
                .collect();
            out += &format!(
                "{} = {}({})\n",
                self.net_names[g.output],
                g.kind,
                args.join(", ")
            );
        }
        out
    }
}

/// Parses `.bench` text into a pre-scan netlist named `circuit`.
pub fn parse_bench(text: &str) -> Result<Netlist, NetlistError> {
    parse_bench_named("circuit", text)
}

fn syntax(line: usize, message: impl Into<String>) -> NetlistError {
    NetlistError::Syntax {
        line,
        message: message.into(),
    }
}

fn check_name(line: usize, name: &str) -> Result<(), NetlistError> {
    if name.is_empty() {
        return Err(syntax(line, "empty net name"));
    }
    if name
        .chars()
        .any(|c| c.is_whitespace() || matches!(c, '(' | ')' | ',' | '='))
    {
        return Err(syntax(line, format!("invalid net name `{name}`")));
    }
    Ok(())
}

/// Splits `KEYWORD(args)` into the keyword and the raw argument text.
fn split_call(line: usize, text: &str) -> Result<(&str, &str), NetlistError> {
    let open = text.find('(').ok_or_else(|| syntax(line, "expected `(`"))?;
    let inner = text[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| syntax(line, "expected `)` at end of line"))?;
    Ok((text[..open].trim(), inner))
}

#[derive(Default)]
struct Interner {
    names: Vec<String>,
    index: HashMap<String, NetId>,
    defined: Vec<Option<usize>>,
}

impl Interner {
    fn intern(&mut self, name: &str) -> NetId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        self.defined.push(None);
        id
    }

    fn define(&mut self, name: &str, line: usize) -> Result<NetId, NetlistError> {
        let id = self.intern(name);
        if self.defined[id].is_some() {
            return Err(NetlistError::MultipleDrivers {
                net: name.to_string(),
                line,
            });
        }
        self.defined[id] = Some(line);
        Ok(id)
    }
}

pub fn parse_bench_named(name: &str, text: &str) -> Result<Netlist, NetlistError> {
    let mut nets = Interner::default();
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    let mut gates = Vec::new();

    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some((lhs, rhs)) = body.split_once('=') {
            let lhs = lhs.trim();
            check_name(line, lhs)?;
            let (kw, args) = split_call(line, rhs.trim())?;
            let kind = GateKind::from_keyword(kw).ok_or_else(|| {
                if kw.is_empty() {
                    syntax(line, "missing gate kind")
                } else {
                    NetlistError::UnsupportedGate {
                        line,
                        kind: kw.to_string(),
                    }
                }
            })?;
            let args: Vec<&str> = args.split(',').map(str::trim).collect();
            for a in &args {
                check_name(line, a)?;
            }
            if !kind.accepts_inputs(args.len()) {
                return Err(NetlistError::Arity {
                    line,
                    kind,
                    inputs: args.len(),
                });
            }
            let out = nets.define(lhs, line)?;
            let ins = args.iter().map(|a| nets.intern(a)).collect();
            gates.push(Gate {
                id: gates.len(),
                kind,
                inputs: ins,
                output: out,
            });
        } else {
            let (kw, arg) = split_call(line, body)?;
            let arg = arg.trim();
            check_name(line, arg)?;
            match kw.to_ascii_uppercase().as_str() {
                "INPUT" => {
                    inputs.push(nets.define(arg, line)?);
                }
                "OUTPUT" => {
                    outputs.push(nets.intern(arg));
                }
                _ => return Err(syntax(line, format!("unknown declaration `{kw}`"))),
            }
        }
    }
    if let Some(id) = nets.defined.iter().position(Option::is_none) {
        return Err(NetlistError::UndefinedNet {
            net: nets.names[id].clone(),
        });
    }

    let net = Netlist::build(
        name.to_string(),
        nets.names,
        gates,
        inputs,
        outputs,
        Vec::new(),
        Vec::new(),
    )?;
    for d in net.dangling_nets() {
        log::warn!("{}: net `{}` is dangling", net.name, net.net_name(d));
    }
    Ok(net)
}

/// Replaces every flip-flop by a scan cell: its output net becomes a PPI and
/// its input net a PPO, in flip-flop order. Idempotent.
pub fn full_scan_transform(net: &Netlist) -> Netlist {
    if !net.has_flip_flops() {
        return net.clone();
    }
    let mut ppi = net.ppi_nets.clone();
    let mut ppo = net.ppo_nets.clone();
    let mut gates = Vec::with_capacity(net.gates.len());
    for g in &net.gates {
        if g.kind == GateKind::Dff {
            ppi.push(g.output);
            ppo.push(g.inputs[0]);
        } else {
            gates.push(g.clone());
        }
    }
    Netlist::build(
        net.name.clone(),
        net.net_names.clone(),
        gates,
        net.primary_inputs.clone(),
        net.primary_outputs.clone(),
        ppi,
        ppo,
    )
    .expect("removing flip-flops cannot create a combinational cycle")
}

/// Reorders the gate list topologically. Stable for already-ordered input.
pub fn levelize(net: &Netlist) -> Result<Netlist, NetlistError> {
    let mut out = net.clone();
    out.gates = net.topological_order()?;
    out.index();
    Ok(out)
}

/// Builds a netlist from an explicit gate list and levelizes it. Used to
/// detect combinational cycles in generated or hand-assembled graphs.
pub fn from_gates(
    name: &str,
    net_names: Vec<String>,
    gates: Vec<(GateKind, Vec<NetId>, NetId)>,
    primary_inputs: Vec<NetId>,
    primary_outputs: Vec<NetId>,
) -> Result<Netlist, NetlistError> {
    let gates = gates
        .into_iter()
        .enumerate()
        .map(|(id, (kind, inputs, output))| Gate {
            id,
            kind,
            inputs,
            output,
        })
        .collect();
    Netlist::build(
        name.to_string(),
        net_names,
        gates,
        primary_inputs,
        primary_outputs,
        Vec::new(),
        Vec::new(),
    )
}

pub fn circuit_profile(net: &Netlist) -> CircuitProfile {
    let pis = net.primary_inputs.len();
    let ppis = net.ppi_nets.len();
    CircuitProfile {
        pis,
        pos: net.primary_outputs.len(),
        ppis,
        ppos: net.ppo_nets.len(),
        gate_count: net.gates.iter().filter(|g| g.kind != GateKind::Dff).count(),
        scan_length: pis + ppis,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench;

    #[test]
    fn parses_two_input_and() {
        let net = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(z)\nz = AND(a,b)").unwrap();
        assert_eq!(net.primary_inputs().len(), 2);
        assert_eq!(net.primary_outputs().len(), 1);
        assert_eq!(net.gates().len(), 1);
        assert_eq!(net.net_name(net.gates()[0].output), "z");
    }

    #[test]
    fn s27_counts() {
        let net = parse_bench(bench::S27).unwrap();
        assert_eq!(net.primary_inputs().len(), 4);
        assert_eq!(net.primary_outputs().len(), 1);
        let dffs = net
            .gates()
            .iter()
            .filter(|g| g.kind == GateKind::Dff)
            .count();
        assert_eq!(dffs, 3);
        assert_eq!(net.gates().len() - dffs, 10);
        let scanned = full_scan_transform(&net);
        assert_eq!(scanned.profile().scan_length, 7);
        assert_eq!(scanned.profile().ppos, 3);
        assert!(!scanned.has_flip_flops());
    }

    #[test]
    fn single_input_and_is_rejected() {
        let err = parse_bench("INPUT(a)\nOUTPUT(z)\nz = AND(a)").unwrap_err();
        assert!(
            matches!(err, NetlistError::Arity { line: 3, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn malformed_lines_report_line_number() {
        let err = parse_bench("INPUT(a)\nOUTPUT(z)\nz = AND(a, b\n").unwrap_err();
        assert!(
            matches!(err, NetlistError::Syntax { line: 3, .. }),
            "{err:?}"
        );
        let err = parse_bench("INPUT(a)\n\nfoo bar\n").unwrap_err();
        assert!(
            matches!(err, NetlistError::Syntax { line: 3, .. }),
            "{err:?}"
        );
        let err = parse_bench("INPUT(a)\nz = AND(a, )\n").unwrap_err();
        assert!(
            matches!(err, NetlistError::Syntax { line: 2, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn graph_violations() {
        let err = parse_bench("INPUT(a)\nOUTPUT(z)\nz = AND(a, b)").unwrap_err();
        assert_eq!(err, NetlistError::UndefinedNet { net: "b".into() });
        let err = parse_bench("INPUT(a)\nINPUT(b)\nz = AND(a, b)\nz = OR(a, b)").unwrap_err();
        assert_eq!(
            err,
            NetlistError::MultipleDrivers {
                net: "z".into(),
                line: 4
            }
        );
        let err = parse_bench("INPUT(a)\na = NOT(a)").unwrap_err();
        assert!(matches!(err, NetlistError::MultipleDrivers { .. }));
        let err = parse_bench("INPUT(a)\nz = MUX(a, a)").unwrap_err();
        assert!(matches!(err, NetlistError::UnsupportedGate { line: 2, .. }));
        let err = parse_bench("INPUT(a)\nOUTPUT(y)").unwrap_err();
        assert_eq!(err, NetlistError::UndefinedNet { net: "y".into() });
    }

    #[test]
    fn keywords_are_case_insensitive_names_are_not() {
        let net = parse_bench("input(A)\ninput(a)\noutput(z)\nz = nand(A, a) # trailing").unwrap();
        assert_eq!(net.primary_inputs().len(), 2);
        assert_eq!(net.gates()[0].kind, GateKind::Nand);
    }

    #[test]
    fn wide_gates_are_accepted() {
        let net = parse_bench(
            "INPUT(a)\nINPUT(b)\nINPUT(c)\nINPUT(d)\nINPUT(e)\nOUTPUT(z)\nz = XOR(a,b,c,d,e)",
        )
        .unwrap();
        assert_eq!(net.gates()[0].inputs.len(), 5);
    }

    #[test]
    fn forward_references_are_levelized() {
        let net = parse_bench("INPUT(a)\nOUTPUT(z)\nz = NOT(g1)\ng1 = BUFF(a)").unwrap();
        let order: Vec<&str> = net.gates().iter().map(|g| net.net_name(g.output)).collect();
        assert_eq!(order, ["g1", "z"]);
    }

    #[test]
    fn levelize_chain_and_stability() {
        let net = parse_bench("INPUT(a)\nOUTPUT(g2)\ng1 = NOT(a)\ng2 = NOT(g1)").unwrap();
        let again = levelize(&net).unwrap();
        assert_eq!(net.gates(), again.gates());
        let order: Vec<&str> = again
            .gates()
            .iter()
            .map(|g| net.net_name(g.output))
            .collect();
        assert_eq!(order, ["g1", "g2"]);
    }

    #[test]
    fn cross_coupled_gates_form_a_cycle() {
        let err = parse_bench("INPUT(a)\nOUTPUT(x)\nx = NAND(a, y)\ny = NAND(a, x)").unwrap_err();
        match err {
            NetlistError::CombinationalCycle { nets } => {
                let mut nets = nets;
                nets.sort();
                assert_eq!(nets, ["x", "y"]);
            }
            e => panic!("unexpected {e:?}"),
        }
        // The same loop broken by a flip-flop is fine.
        let net =
            parse_bench("INPUT(a)\nOUTPUT(x)\nx = NAND(a, q)\nq = DFF(y)\ny = NAND(a, x)").unwrap();
        assert_eq!(full_scan_transform(&net).profile().ppis, 1);
    }

    #[test]
    fn from_gates_detects_cycles() {
        let names = vec!["a".to_string(), "x".to_string(), "y".to_string()];
        let err = from_gates(
            "loop",
            names,
            vec![
                (GateKind::And, vec![0, 2], 1),
                (GateKind::Or, vec![0, 1], 2),
            ],
            vec![0],
            vec![1],
        )
        .unwrap_err();
        assert!(matches!(err, NetlistError::CombinationalCycle { .. }));
    }

    #[test]
    fn full_scan_is_identity_on_combinational_and_idempotent() {
        let c17 = parse_bench(bench::C17).unwrap();
        let scanned = full_scan_transform(&c17);
        assert_eq!(scanned.gates(), c17.gates());
        assert_eq!(scanned.profile().ppis, 0);
        let s27 = full_scan_transform(&parse_bench(bench::S27).unwrap());
        let twice = full_scan_transform(&s27);
        assert_eq!(s27.gates(), twice.gates());
        assert_eq!(s27.ppi_nets(), twice.ppi_nets());
        assert_eq!(s27.ppo_nets(), twice.ppo_nets());
    }

    #[test]
    fn toy_profile() {
        let net = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(z)\nz = AND(a,b)").unwrap();
        let p = full_scan_transform(&net).profile();
        assert_eq!(
            p,
            CircuitProfile {
                pis: 2,
                pos: 1,
                ppis: 0,
                ppos: 0,
                gate_count: 1,
                scan_length: 2
            }
        );
    }

    #[test]
    fn dangling_nets_are_reported_not_rejected() {
        let net = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(z)\nz = AND(a,b)\nd = NOT(a)").unwrap();
        let dangling: Vec<&str> = net
            .dangling_nets()
            .iter()
            .map(|&n| net.net_name(n))
            .collect();
        assert_eq!(dangling, ["d"]);
    }
}
