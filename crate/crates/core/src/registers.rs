// SPDX-License-Identifier: Apache-2.0

//! Linear test registers: LFSR, MISR, BILBO and the irregular-polynomial
//! BILBO (IP-BILBO).
//!
//! All registers share one convention. A register of width `n` holds bits
//! `b_0..b_{n-1}`; a step under `p(x) = x^n + sum c_j x^j` computes the
//! feedback `f = XOR { b_j : c_j = 1 }`, shifts every bit down one position
//! (`b_j <- b_{j+1}`) and places `f` in `b_{n-1}`. The output stream `b_0`
//! then satisfies the recurrence whose characteristic polynomial is `p`, so
//! a primitive `p` visits all `2^n - 1` nonzero states.
//!
//! The IP-BILBO spans the whole scan chain (`n = PIs + PPIs`). Each step
//! XOR-folds the circuit response into the register (response bit `i` lands
//! on position `i mod n`) and the feedback polynomial advances round-robin
//! through a schedule, so consecutive patterns are produced by different
//! polynomials.
//!
//! The multiplexer wiring of the original register is not fully documented.
//! This model (one register doing both compression and generation, response
//! folded in before the feedback is applied, no separate signature register)
//! is one consistent realization, not a recovered schematic.

use std::collections::HashSet;
use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

use crate::faults::{faulty_response, Fault};
use crate::netlist::Netlist;
use crate::sim::simulate_serial;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegisterError {
    #[error("polynomial degree {got} does not match register width {expected}")]
    DegreeMismatch { expected: usize, got: usize },
    #[error("width mismatch: expected {expected} bits, got {got}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),
    #[error("polynomial {0} is not primitive")]
    NotPrimitive(String),
    #[error("primitivity of degree-{0} polynomials can only be checked up to degree 32")]
    CannotValidate(usize),
    #[error("no built-in primitive polynomial of degree {0}; supply a schedule explicitly")]
    NoTableEntry(usize),
    #[error("the all-zero seed is a fixed point of every LFSR")]
    ZeroSeed,
    #[error("invalid BILBO mode MS={ms}, B2B1={b2b1:02b}")]
    InvalidMode { ms: u8, b2b1: u8 },
    #[error("polynomial schedule must be non-empty and of a single degree")]
    BadSchedule,
    #[error("unload interval must be at least 1")]
    BadUnloadInterval,
    #[error(
        "generator revisited a (state, response, schedule index) triple after {patterns} patterns"
    )]
    GeneratorCycle { patterns: u64 },
}

/// `x^n + sum c_j x^j` over GF(2), stored as the sorted tap exponents `j < n`
/// with `c_j = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polynomial {
    degree: usize,
    taps: Vec<usize>,
}

impl Polynomial {
    /// Builds `x^e0 + x^e1 + ...` from an exponent list such as `[7, 3, 0]`.
    /// The largest exponent is the degree; duplicate exponents cancel.
    pub fn from_exponents(exponents: &[usize]) -> Result<Polynomial, RegisterError> {
        let degree = *exponents
            .iter()
            .max()
            .ok_or_else(|| RegisterError::InvalidPolynomial("empty exponent list".into()))?;
        let mut taps: Vec<usize> = Vec::new();
        let mut sorted = exponents.to_vec();
        sorted.sort_unstable();
        let mut top = 0;
        for chunk in sorted.chunk_by(|a, b| a == b) {
            if chunk.len() % 2 == 1 {
                if chunk[0] == degree {
                    top = 1;
                } else {
                    taps.push(chunk[0]);
                }
            }
        }
        if top == 0 {
            return Err(RegisterError::InvalidPolynomial(
                "leading term cancels".into(),
            ));
        }
        if degree < 2 {
            return Err(RegisterError::InvalidPolynomial(format!(
                "degree {degree} < 2"
            )));
        }
        if taps.first() != Some(&0) {
            return Err(RegisterError::InvalidPolynomial(
                "constant term must be 1 for a feedback polynomial".into(),
            ));
        }
        Ok(Polynomial { degree, taps })
    }

    /// Like [`Polynomial::from_exponents`] but also proves primitivity.
    pub fn primitive(exponents: &[usize]) -> Result<Polynomial, RegisterError> {
        let p = Polynomial::from_exponents(exponents)?;
        match p.is_primitive() {
            Some(true) => Ok(p),
            Some(false) => Err(RegisterError::NotPrimitive(p.to_string())),
            None => Err(RegisterError::CannotValidate(p.degree)),
        }
    }

    /// Parses `[7, 3, 0]`, `7,3,0` or `7 3 0`.
    pub fn parse(text: &str) -> Result<Polynomial, RegisterError> {
        let inner = text.trim().trim_start_matches('[').trim_end_matches(']');
        let exps = inner
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| RegisterError::InvalidPolynomial(format!("bad exponent `{s}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Polynomial::from_exponents(&exps)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn taps(&self) -> &[usize] {
        &self.taps
    }

    /// Descending exponents including the leading term.
    pub fn exponents(&self) -> Vec<usize> {
        std::iter::once(self.degree)
            .chain(self.taps.iter().rev().copied())
            .collect()
    }

    /// `[n, j, ..., 0]`
    pub fn exponent_list(&self) -> String {
        let e: Vec<String> = self.exponents().iter().map(|e| e.to_string()).collect();
        format!("[{}]", e.join(", "))
    }

    /// Exact primitivity test for degrees up to 32; `None` above that.
    pub fn is_primitive(&self) -> Option<bool> {
        if self.degree > 32 {
            return None;
        }
        let n = self.degree as u32;
        let modulus = self.taps.iter().fold(1u64 << n, |m, &t| m | (1 << t));
        let order = (1u64 << n) - 1;
        let x = 0b10 % (1u64 << n).max(2);
        if gf2_pow(x, order, modulus, n) != 1 {
            return Some(false);
        }
        Some(
            prime_factors(order)
                .into_iter()
                .all(|q| gf2_pow(x, order / q, modulus, n) != 1),
        )
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .exponents()
            .into_iter()
            .map(|e| match e {
                0 => "1".to_string(),
                1 => "x".to_string(),
                e => format!("x^{e}"),
            })
            .collect();
        f.write_str(&terms.join(" + "))
    }
}

fn gf2_mulmod(a: u64, b: u64, modulus: u64, n: u32) -> u64 {
    let mut prod: u64 = 0;
    for i in 0..n {
        if (b >> i) & 1 == 1 {
            prod ^= a << i;
        }
    }
    for i in (n..2 * n).rev() {
        if (prod >> i) & 1 == 1 {
            prod ^= modulus << (i - n);
        }
    }
    prod
}

fn gf2_pow(base: u64, mut e: u64, modulus: u64, n: u32) -> u64 {
    let mut result = 1u64;
    let mut b = base;
    while e > 0 {
        if e & 1 == 1 {
            result = gf2_mulmod(result, b, modulus, n);
        }
        b = gf2_mulmod(b, b, modulus, n);
        e >>= 1;
    }
    result
}

fn prime_factors(mut v: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= v {
        if v.is_multiple_of(d) {
            out.push(d);
            while v.is_multiple_of(d) {
                v /= d;
            }
        }
        d += 1;
    }
    if v > 1 {
        out.push(v);
    }
    out
}

static TABLE: OnceLock<Vec<Polynomial>> = OnceLock::new();

/// Built-in primitive polynomials, sorted by degree.
pub fn primitive_table() -> &'static [Polynomial] {
    TABLE.get_or_init(|| {
        include_str!("../data/primitive_polys.txt")
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| Polynomial::parse(l).expect("malformed built-in polynomial table"))
            .collect()
    })
}

/// Built-in primitive polynomials of degree `n` (up to two).
pub fn table_entries(n: usize) -> Vec<Polynomial> {
    primitive_table()
        .iter()
        .filter(|p| p.degree == n)
        .cloned()
        .collect()
}

/// The default IP-BILBO schedule: the built-in polynomials of degree `n`.
pub fn default_schedule(n: usize) -> Result<Vec<Polynomial>, RegisterError> {
    let entries = table_entries(n);
    if entries.is_empty() {
        return Err(RegisterError::NoTableEntry(n));
    }
    Ok(entries)
}

/// Register contents `b_0..b_{n-1}`, packed 64 bits per word.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RegisterState {
    width: usize,
    words: Vec<u64>,
}

impl RegisterState {
    pub fn zeros(width: usize) -> RegisterState {
        RegisterState {
            width,
            words: vec![0; width.div_ceil(64)],
        }
    }

    pub fn ones(width: usize) -> RegisterState {
        let mut s = RegisterState {
            width,
            words: vec![!0; width.div_ceil(64)],
        };
        s.clear_padding();
        s
    }

    pub fn from_bits(bits: &[bool]) -> RegisterState {
        let mut s = RegisterState::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            s.set(i, b);
        }
        s
    }

    /// Bit `j` of `value` becomes `b_j`. Requires `width <= 64`.
    pub fn from_u64(width: usize, value: u64) -> RegisterState {
        assert!(width <= 64, "from_u64 needs width <= 64");
        let mut s = RegisterState {
            width,
            words: vec![value; width.div_ceil(64)],
        };
        s.clear_padding();
        s
    }

    /// Parses the hex form written by [`RegisterState::to_hex`].
    pub fn from_hex(width: usize, hex: &str) -> Option<RegisterState> {
        let mut s = RegisterState::zeros(width);
        for (k, c) in hex.trim().chars().rev().enumerate() {
            let d = c.to_digit(16)? as u64;
            for b in 0..4 {
                let j = 4 * k + b;
                if (d >> b) & 1 == 1 {
                    if j >= width {
                        return None;
                    }
                    s.set(j, true);
                }
            }
        }
        Some(s)
    }

    fn clear_padding(&mut self) {
        let rem = self.width % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bit(&self, j: usize) -> bool {
        (self.words[j / 64] >> (j % 64)) & 1 == 1
    }

    pub fn set(&mut self, j: usize, value: bool) {
        let m = 1u64 << (j % 64);
        if value {
            self.words[j / 64] |= m;
        } else {
            self.words[j / 64] &= !m;
        }
    }

    pub fn to_bits(&self) -> Vec<bool> {
        (0..self.width).map(|j| self.bit(j)).collect()
    }

    /// Register value with `b_j` weighted `2^j`; `None` above 64 bits.
    pub fn to_u64(&self) -> Option<u64> {
        (self.width <= 64).then(|| self.words.first().copied().unwrap_or(0))
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor(&self, other: &RegisterState) -> Result<RegisterState, RegisterError> {
        if self.width != other.width {
            return Err(RegisterError::WidthMismatch {
                expected: self.width,
                got: other.width,
            });
        }
        Ok(RegisterState {
            width: self.width,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a ^ b)
                .collect(),
        })
    }

    /// Big-endian hex of the register value, `ceil(n/4)` digits.
    pub fn to_hex(&self) -> String {
        let digits = self.width.div_ceil(4);
        (0..digits)
            .rev()
            .map(|k| {
                let mut d = 0;
                for b in 0..4 {
                    let j = 4 * k + b;
                    if j < self.width && self.bit(j) {
                        d |= 1 << b;
                    }
                }
                char::from_digit(d, 16).unwrap()
            })
            .collect()
    }

    /// `b_j <- b_{j+1}`, `b_{n-1} <- top`.
    fn shift_down(&mut self, top: bool) {
        let len = self.words.len();
        for i in 0..len {
            let carry = if i + 1 < len {
                self.words[i + 1] & 1
            } else {
                0
            };
            self.words[i] = (self.words[i] >> 1) | (carry << 63);
        }
        self.set(self.width - 1, top);
    }
}

impl fmt::Display for RegisterState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in (0..self.width).rev() {
            f.write_str(if self.bit(j) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

pub fn next_lfsr(s: &RegisterState, p: &Polynomial) -> Result<RegisterState, RegisterError> {
    if p.degree != s.width {
        return Err(RegisterError::DegreeMismatch {
            expected: s.width,
            got: p.degree,
        });
    }
    let feedback = p.taps.iter().fold(false, |f, &j| f ^ s.bit(j));
    let mut next = s.clone();
    next.shift_down(feedback);
    Ok(next)
}

/// One MISR step: the LFSR step XOR the parallel input word.
pub fn next_misr(
    s: &RegisterState,
    p: &Polynomial,
    word: &RegisterState,
) -> Result<RegisterState, RegisterError> {
    next_lfsr(s, p)?.xor(word)
}

/// XOR-folds a response of any width into `n` bits.
pub fn fold_response(response: &[bool], n: usize) -> RegisterState {
    let mut s = RegisterState::zeros(n);
    for (i, &r) in response.iter().enumerate() {
        if r {
            let j = i % n;
            let cur = s.bit(j);
            s.set(j, !cur);
        }
    }
    s
}

/// Bitwise signature comparison. `Ok(true)` means pass.
pub fn compare_signature(
    observed: &RegisterState,
    golden: &RegisterState,
) -> Result<bool, RegisterError> {
    if observed.width != golden.width {
        return Err(RegisterError::WidthMismatch {
            expected: golden.width,
            got: observed.width,
        });
    }
    Ok(observed == golden)
}

/// Operating modes of a conventional BILBO register.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassicMode {
    /// Parallel load from the system inputs.
    Normal,
    /// Serial shift; `b_{n-1}` takes the scan-in bit and `b_0` is shifted out.
    Scan,
    /// Autonomous LFSR.
    PatternGenerator,
    /// LFSR compacting the parallel inputs.
    SignatureAnalyzer,
    /// Synchronous clear.
    Reset,
}

/// Conventional BILBO register.
#[derive(Clone, Debug)]
pub struct Bilbo {
    pub state: RegisterState,
    pub poly: Polynomial,
}

impl Bilbo {
    pub fn new(poly: Polynomial) -> Bilbo {
        Bilbo {
            state: RegisterState::zeros(poly.degree),
            poly,
        }
    }

    /// One clock. `parallel` is used in normal and signature modes,
    /// `scan_in` in scan mode. Returns the bit shifted out in scan mode.
    pub fn clock(
        &mut self,
        mode: ClassicMode,
        parallel: &RegisterState,
        scan_in: bool,
    ) -> Result<Option<bool>, RegisterError> {
        let n = self.state.width;
        let mut out = None;
        self.state = match mode {
            ClassicMode::Normal => {
                if parallel.width != n {
                    return Err(RegisterError::WidthMismatch {
                        expected: n,
                        got: parallel.width,
                    });
                }
                parallel.clone()
            }
            ClassicMode::Scan => {
                out = Some(self.state.bit(0));
                let mut s = self.state.clone();
                s.shift_down(scan_in);
                s
            }
            ClassicMode::PatternGenerator => next_lfsr(&self.state, &self.poly)?,
            ClassicMode::SignatureAnalyzer => next_misr(&self.state, &self.poly, parallel)?,
            ClassicMode::Reset => RegisterState::zeros(n),
        };
        Ok(out)
    }

    /// Shifts the whole register out in `n` scan clocks, `b_0` first.
    pub fn unload(&mut self) -> Vec<bool> {
        let zero = RegisterState::zeros(self.state.width);
        (0..self.state.width)
            .map(|_| {
                self.clock(ClassicMode::Scan, &zero, false)
                    .expect("scan mode cannot fail")
                    .expect("scan mode shifts a bit out")
            })
            .collect()
    }
}

/// IP-BILBO mode-select input.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum ModeSelect {
    /// MS = 0: the response is compressed in one cycle and a fresh pattern
    /// generated in a second one.
    Indirect,
    /// MS = 1: the response takes part in the feedback directly; one cycle.
    Direct,
}

/// Mode-select input together with the BILBO control bits it implies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BilboMode {
    ms: ModeSelect,
    b2b1: u8,
}

impl BilboMode {
    /// MS = 0, B2B1 = 01.
    pub const INDIRECT: BilboMode = BilboMode {
        ms: ModeSelect::Indirect,
        b2b1: 0b01,
    };
    /// MS = 1, B2B1 = 00.
    pub const DIRECT: BilboMode = BilboMode {
        ms: ModeSelect::Direct,
        b2b1: 0b00,
    };

    pub fn new(ms: u8, b2b1: u8) -> Result<BilboMode, RegisterError> {
        match (ms, b2b1) {
            (0, 0b01) => Ok(BilboMode::INDIRECT),
            (1, 0b00) => Ok(BilboMode::DIRECT),
            _ => Err(RegisterError::InvalidMode { ms, b2b1 }),
        }
    }

    pub fn ms(self) -> ModeSelect {
        self.ms
    }

    pub fn b2b1(self) -> u8 {
        self.b2b1
    }

    pub fn cycles_per_pattern(self) -> u32 {
        match self.ms {
            ModeSelect::Indirect => 2,
            ModeSelect::Direct => 1,
        }
    }
}

/// How a (POs + PPOs)-wide response maps onto the register.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FoldRule {
    /// Response bit `i` is XORed into position `i mod n`.
    #[default]
    XorModWidth,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IpBilboConfig {
    poly_schedule: Vec<Polynomial>,
    pub fold_rule: FoldRule,
    unload_interval: usize,
}

/// Default patterns between signature snapshots.
pub const DEFAULT_UNLOAD_INTERVAL: usize = 32;

impl IpBilboConfig {
    pub fn new(
        poly_schedule: Vec<Polynomial>,
        unload_interval: usize,
    ) -> Result<IpBilboConfig, RegisterError> {
        let degree = poly_schedule
            .first()
            .ok_or(RegisterError::BadSchedule)?
            .degree;
        if poly_schedule.iter().any(|p| p.degree != degree) {
            return Err(RegisterError::BadSchedule);
        }
        if unload_interval == 0 {
            return Err(RegisterError::BadUnloadInterval);
        }
        Ok(IpBilboConfig {
            poly_schedule,
            fold_rule: FoldRule::XorModWidth,
            unload_interval,
        })
    }

    /// Built-in schedule for width `n` and the default unload interval.
    pub fn default_for(n: usize) -> Result<IpBilboConfig, RegisterError> {
        IpBilboConfig::new(default_schedule(n)?, DEFAULT_UNLOAD_INTERVAL)
    }

    pub fn width(&self) -> usize {
        self.poly_schedule[0].degree
    }

    pub fn schedule(&self) -> &[Polynomial] {
        &self.poly_schedule
    }

    pub fn unload_interval(&self) -> usize {
        self.unload_interval
    }

    fn poly(&self, k: usize) -> &Polynomial {
        &self.poly_schedule[k % self.poly_schedule.len()]
    }

    fn fold(&self, response: &[bool]) -> RegisterState {
        match self.fold_rule {
            FoldRule::XorModWidth => fold_response(response, self.width()),
        }
    }
}

/// One IP-BILBO pattern step from state `s` with the schedule at index `k`.
///
/// Returns the new state, the clock cycles consumed and the next schedule
/// index. Indirect mode compresses the response under `p_k` and then
/// generates under `p_{k+1}` (two cycles); direct mode does both in a single
/// step under `p_k`.
pub fn ipbilbo_next_pattern(
    s: &RegisterState,
    cfg: &IpBilboConfig,
    k: usize,
    mode: BilboMode,
    response: &[bool],
) -> Result<(RegisterState, u32, usize), RegisterError> {
    if s.width != cfg.width() {
        return Err(RegisterError::WidthMismatch {
            expected: cfg.width(),
            got: s.width,
        });
    }
    let folded = cfg.fold(response);
    let compressed = next_lfsr(s, cfg.poly(k))?.xor(&folded)?;
    Ok(match mode.ms {
        ModeSelect::Indirect => (next_lfsr(&compressed, cfg.poly(k + 1))?, 2, k + 2),
        ModeSelect::Direct => (compressed, 1, k + 1),
    })
}

type GuardKey = (Vec<u64>, Vec<u64>, usize);

/// Stateful IP-BILBO generator with signature snapshots and the loop guard.
#[derive(Clone, Debug)]
pub struct IpBilbo {
    cfg: IpBilboConfig,
    state: RegisterState,
    schedule_index: usize,
    patterns: u64,
    signatures: Vec<RegisterState>,
    guard: Option<HashSet<GuardKey>>,
}

impl IpBilbo {
    /// `seed` defaults to all ones; an all-zero seed is rejected.
    pub fn new(cfg: IpBilboConfig, seed: Option<RegisterState>) -> Result<IpBilbo, RegisterError> {
        let n = cfg.width();
        let state = seed.unwrap_or_else(|| RegisterState::ones(n));
        if state.width != n {
            return Err(RegisterError::WidthMismatch {
                expected: n,
                got: state.width,
            });
        }
        if state.is_zero() {
            return Err(RegisterError::ZeroSeed);
        }
        Ok(IpBilbo {
            cfg,
            state,
            schedule_index: 0,
            patterns: 0,
            signatures: Vec::new(),
            guard: Some(HashSet::new()),
        })
    }

    /// Turns the revisit detector on or off (on by default).
    pub fn with_cycle_guard(mut self, enabled: bool) -> IpBilbo {
        self.guard = enabled.then(HashSet::new);
        self
    }

    pub fn config(&self) -> &IpBilboConfig {
        &self.cfg
    }

    pub fn state(&self) -> &RegisterState {
        &self.state
    }

    pub fn schedule_index(&self) -> usize {
        self.schedule_index
    }

    /// Pseudo-random patterns generated so far.
    pub fn patterns(&self) -> u64 {
        self.patterns
    }

    /// Scan-in of an externally supplied vector. Starts a fresh guard history.
    pub fn load(&mut self, state: RegisterState) -> Result<(), RegisterError> {
        if state.width != self.state.width {
            return Err(RegisterError::WidthMismatch {
                expected: self.state.width,
                got: state.width,
            });
        }
        self.state = state;
        self.clear_guard();
        Ok(())
    }

    pub fn clear_guard(&mut self) {
        if let Some(g) = &mut self.guard {
            g.clear();
        }
    }

    /// Generates the next pattern, feeding back `response` (the circuit's
    /// outputs under the current state). Returns the cycles consumed.
    pub fn next_pattern(
        &mut self,
        mode: BilboMode,
        response: &[bool],
    ) -> Result<u32, RegisterError> {
        let k = self.schedule_index % self.cfg.poly_schedule.len();
        if let Some(guard) = &mut self.guard {
            let key = (self.state.words.clone(), self.cfg.fold(response).words, k);
            if !guard.insert(key) {
                return Err(RegisterError::GeneratorCycle {
                    patterns: self.patterns,
                });
            }
        }
        let (next, cycles, k_next) =
            ipbilbo_next_pattern(&self.state, &self.cfg, k, mode, response)?;
        self.state = next;
        self.schedule_index = k_next % self.cfg.poly_schedule.len();
        self.patterns += 1;
        if self
            .patterns
            .is_multiple_of(self.cfg.unload_interval as u64)
        {
            self.signatures.push(self.state.clone());
        }
        Ok(cycles)
    }

    /// Snapshots taken every `unload_interval` patterns.
    pub fn signatures(&self) -> &[RegisterState] {
        &self.signatures
    }

    /// One hex line per unload.
    pub fn signature_trace(&self) -> String {
        self.signatures.iter().map(|s| s.to_hex() + "\n").collect()
    }
}

/// Outcome of a signature-mode aliasing measurement.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AliasingReport {
    pub faults: usize,
    /// Faults whose response differed from the golden response at least once.
    pub erroneous: usize,
    /// Erroneous faults caught by at least one signature comparison.
    pub signature_detected: usize,
    /// Erroneous faults whose every unloaded signature matched the golden one.
    pub aliased: usize,
}

impl AliasingReport {
    pub fn aliasing_rate(&self) -> f64 {
        if self.erroneous == 0 {
            0.0
        } else {
            self.aliased as f64 / self.erroneous as f64
        }
    }
}

/// Runs the IP-BILBO autonomously for `patterns` steps from `seed`, once on
/// the fault-free circuit and once per fault with the faulty circuit's
/// responses fed back, and compares the unloaded signatures.
pub fn measure_aliasing(
    net: &Netlist,
    faults: &[Fault],
    cfg: &IpBilboConfig,
    mode: BilboMode,
    seed: &RegisterState,
    patterns: usize,
) -> Result<AliasingReport, RegisterError> {
    let run =
        |fault: Option<Fault>| -> Result<(Vec<RegisterState>, Vec<Vec<bool>>), RegisterError> {
            let mut gen = IpBilbo::new(cfg.clone(), Some(seed.clone()))?.with_cycle_guard(false);
            let mut responses = Vec::with_capacity(patterns);
            for _ in 0..patterns {
                let pattern = gen.state().to_bits();
                let response = match fault {
                    None => simulate_serial(net, &pattern),
                    Some(f) => faulty_response(net, &pattern, f),
                }
                .map_err(|_| RegisterError::WidthMismatch {
                    expected: net.scan_length(),
                    got: pattern.len(),
                })?;
                gen.next_pattern(mode, &response)?;
                responses.push(response);
            }
            Ok((gen.signatures, responses))
        };
    let (golden_sigs, _) = run(None)?;
    let mut report = AliasingReport {
        faults: faults.len(),
        ..Default::default()
    };
    for &f in faults {
        let (sigs, responses) = run(Some(f))?;
        // Compare the faulty trajectory against the good machine under the
        // same applied patterns.
        let mut gen = IpBilbo::new(cfg.clone(), Some(seed.clone()))?.with_cycle_guard(false);
        let mut erroneous = false;
        for r in &responses {
            let good = simulate_serial(net, &gen.state().to_bits()).expect("width checked above");
            if &good != r {
                erroneous = true;
                break;
            }
            gen.next_pattern(mode, r)?;
        }
        if !erroneous {
            continue;
        }
        report.erroneous += 1;
        if sigs == golden_sigs {
            report.aliased += 1;
        } else {
            report.signature_detected += 1;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3() -> Polynomial {
        Polynomial::from_exponents(&[3, 1, 0]).unwrap()
    }

    #[test]
    fn lfsr_hand_trace() {
        let s = RegisterState::from_u64(3, 0b001);
        assert_eq!(next_lfsr(&s, &p3()).unwrap().to_u64(), Some(0b100));
    }

    #[test]
    fn lfsr_orbit_of_x3_x_1() {
        let mut s = RegisterState::from_u64(3, 1);
        let mut orbit = Vec::new();
        for _ in 0..7 {
            orbit.push(s.to_u64().unwrap());
            s = next_lfsr(&s, &p3()).unwrap();
        }
        assert_eq!(orbit, [1, 4, 2, 5, 6, 7, 3]);
        assert_eq!(s.to_u64(), Some(1));
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let z = RegisterState::zeros(3);
        assert_eq!(next_lfsr(&z, &p3()).unwrap(), z);
        assert_eq!(next_misr(&z, &p3(), &z).unwrap(), z);
    }

    #[test]
    fn degree_mismatch() {
        let s = RegisterState::ones(4);
        assert_eq!(
            next_lfsr(&s, &p3()),
            Err(RegisterError::DegreeMismatch {
                expected: 4,
                got: 3
            })
        );
        let s3 = RegisterState::ones(3);
        assert!(matches!(
            next_misr(&s3, &p3(), &RegisterState::ones(4)),
            Err(RegisterError::WidthMismatch { .. })
        ));
    }

    #[test]
    fn polynomial_validation() {
        assert!(Polynomial::from_exponents(&[3, 1]).is_err());
        assert!(Polynomial::from_exponents(&[1, 0]).is_err());
        assert!(Polynomial::from_exponents(&[]).is_err());
        assert_eq!(
            Polynomial::parse("[7, 3, 0]").unwrap().to_string(),
            "x^7 + x^3 + 1"
        );
        assert_eq!(
            Polynomial::parse("7 1 0").unwrap().exponent_list(),
            "[7, 1, 0]"
        );
        assert!(Polynomial::primitive(&[3, 1, 0]).is_ok());
        // x^4 + x^2 + 1 = (x^2 + x + 1)^2
        assert!(matches!(
            Polynomial::primitive(&[4, 2, 0]),
            Err(RegisterError::NotPrimitive(_))
        ));
        // x^4 + x^3 + x^2 + x + 1 is irreducible but has order 5.
        assert_eq!(
            Polynomial::from_exponents(&[4, 3, 2, 1, 0])
                .unwrap()
                .is_primitive(),
            Some(false)
        );
        assert_eq!(
            Polynomial::from_exponents(&[33, 13, 0])
                .unwrap()
                .is_primitive(),
            None
        );
    }

    #[test]
    fn table_entries_up_to_32_pass_the_algebraic_test() {
        for p in primitive_table().iter().filter(|p| p.degree() <= 32) {
            assert_eq!(p.is_primitive(), Some(true), "{p}");
        }
        for n in 3..=182 {
            assert!(!table_entries(n).is_empty(), "degree {n}");
        }
        assert_eq!(table_entries(7).len(), 2);
    }

    #[test]
    fn hex_and_bits() {
        let s = RegisterState::from_bits(&[true, false, true, true, false]);
        assert_eq!(s.to_hex(), "0d");
        assert_eq!(s.to_string(), "01101");
        assert_eq!(RegisterState::from_hex(5, "0d"), Some(s));
        assert_eq!(RegisterState::ones(70).to_hex().len(), 18);
    }

    #[test]
    fn wide_shift_crosses_words() {
        let mut bits = vec![false; 130];
        bits[64] = true;
        bits[128] = true;
        let p = Polynomial::from_exponents(&[130, 3, 0]).unwrap();
        let next = next_lfsr(&RegisterState::from_bits(&bits), &p).unwrap();
        let mut expect = vec![false; 130];
        expect[63] = true;
        expect[127] = true;
        assert_eq!(next.to_bits(), expect);
    }

    #[test]
    fn ipbilbo_modes() {
        let cfg = IpBilboConfig::new(vec![p3()], 32).unwrap();
        let s = RegisterState::from_u64(3, 0b001);
        // Response (b0, b1, b2) = (1, 1, 0) folds to 011.
        let (next, cycles, k) =
            ipbilbo_next_pattern(&s, &cfg, 0, BilboMode::INDIRECT, &[true, true, false]).unwrap();
        assert_eq!((next.to_u64(), cycles, k), (Some(0b011), 2, 2));

        let zero = [false; 3];
        let (direct, cycles, _) =
            ipbilbo_next_pattern(&s, &cfg, 0, BilboMode::DIRECT, &zero).unwrap();
        assert_eq!(direct, next_lfsr(&s, &p3()).unwrap());
        assert_eq!(cycles, 1);
        let (indirect, _, _) =
            ipbilbo_next_pattern(&s, &cfg, 0, BilboMode::INDIRECT, &zero).unwrap();
        assert_eq!(
            indirect,
            next_lfsr(&next_lfsr(&s, &p3()).unwrap(), &p3()).unwrap()
        );
    }

    #[test]
    fn response_wider_than_register_folds() {
        let folded = fold_response(&[true, false, false, true, true], 3);
        // bit 0: r0 ^ r3 = 0, bit 1: r1 ^ r4 = 1, bit 2: r2 = 0
        assert_eq!(folded.to_bits(), [false, true, false]);
    }

    #[test]
    fn modes_enforce_control_bits() {
        assert_eq!(BilboMode::new(0, 0b01), Ok(BilboMode::INDIRECT));
        assert_eq!(BilboMode::new(1, 0b00), Ok(BilboMode::DIRECT));
        assert!(BilboMode::new(0, 0b00).is_err());
        assert_eq!(BilboMode::INDIRECT.cycles_per_pattern(), 2);
        assert_eq!(BilboMode::DIRECT.cycles_per_pattern(), 1);
    }

    #[test]
    fn zero_seed_rejected_and_default_is_all_ones() {
        let cfg = IpBilboConfig::new(vec![p3()], 4).unwrap();
        assert_eq!(
            IpBilbo::new(cfg.clone(), Some(RegisterState::zeros(3))).unwrap_err(),
            RegisterError::ZeroSeed
        );
        let gen = IpBilbo::new(cfg, None).unwrap();
        assert_eq!(gen.state().to_u64(), Some(0b111));
    }

    #[test]
    fn guard_trips_on_revisit() {
        let cfg = IpBilboConfig::new(vec![p3()], 4).unwrap();
        let mut gen = IpBilbo::new(cfg, Some(RegisterState::from_u64(3, 1))).unwrap();
        let zero = [false; 3];
        for _ in 0..7 {
            gen.next_pattern(BilboMode::DIRECT, &zero).unwrap();
        }
        assert!(matches!(
            gen.next_pattern(BilboMode::DIRECT, &zero),
            Err(RegisterError::GeneratorCycle { patterns: 7 })
        ));
        assert_eq!(gen.signatures().len(), 1);
        gen.load(RegisterState::from_u64(3, 1)).unwrap();
        assert!(gen.next_pattern(BilboMode::DIRECT, &zero).is_ok());
    }

    #[test]
    fn classic_bilbo_unload() {
        let mut b = Bilbo::new(p3());
        b.clock(
            ClassicMode::Normal,
            &RegisterState::from_u64(3, 0b110),
            false,
        )
        .unwrap();
        assert_eq!(b.unload(), [false, true, true]);
        assert!(b.state.is_zero());
        b.clock(ClassicMode::Normal, &RegisterState::from_u64(3, 1), false)
            .unwrap();
        b.clock(
            ClassicMode::PatternGenerator,
            &RegisterState::zeros(3),
            false,
        )
        .unwrap();
        assert_eq!(b.state.to_u64(), Some(0b100));
        b.clock(ClassicMode::Reset, &RegisterState::zeros(3), false)
            .unwrap();
        assert!(b.state.is_zero());
    }

    #[test]
    fn compare_signature_width() {
        let a = RegisterState::ones(3);
        assert_eq!(compare_signature(&a, &a), Ok(true));
        let mut b = a.clone();
        b.set(1, false);
        assert_eq!(compare_signature(&b, &a), Ok(false));
        assert!(compare_signature(&RegisterState::ones(4), &a).is_err());
    }
}
