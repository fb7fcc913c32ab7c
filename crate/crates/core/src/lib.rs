// SPDX-License-Identifier: Apache-2.0

//! Hybrid built-in self-test simulation.
//!
//! The crate models a full-scan circuit under test together with an
//! irregular-polynomial BILBO (IP-BILBO) register that produces pseudo-random
//! patterns, a deterministic vector provider (built-in PODEM or an external
//! vector file), and a two-phase scheduler that interleaves both sources
//! while keeping exact test-cycle accounting.
//!
//! The pipeline, bottom-up:
//!
//! * [`netlist`]: `.bench` parsing, levelization and the full-scan transform.
//! * [`sim`]: bit-parallel good-machine simulation, 64 patterns per pass.
//! * [`faults`]: stuck-at fault universe, collapsing and PPSFP fault simulation.
//! * [`registers`]: LFSR, MISR, BILBO modes and the IP-BILBO generator.
//! * [`atpg`]: PODEM, vector files and greedy pool compaction.
//! * [`scheduler`]: the threshold-driven two-phase campaign.
//! * [`report`]: test-cycle cost model and the embedded reference results.
//! * [`config`]: run configuration shared by the command-line front end.

pub mod atpg;
pub mod bench;
pub mod config;
pub mod faults;
pub mod netlist;
pub mod registers;
pub mod report;
pub mod scheduler;
pub mod sim;

pub use atpg::{
    build_deterministic_pool, load_vectors, parse_vectors, podem, select_best_vector, AtpgBudget,
    AtpgError, PodemOutcome, PoolBuild, TestVector, VectorOrigin, VectorPool,
};
pub use faults::{
    collapse_faults, enumerate_faults, fault_simulate, faulty_response, Fault, FaultSet,
    FaultSimulator,
};
pub use netlist::{
    full_scan_transform, levelize, parse_bench, CircuitProfile, Gate, GateKind, NetId, Netlist,
    NetlistError,
};
pub use registers::{
    compare_signature, ipbilbo_next_pattern, next_lfsr, next_misr, BilboMode, IpBilbo,
    IpBilboConfig, Polynomial, RegisterError, RegisterState,
};
pub use report::{
    compute_cost_model, compute_improvements, emit_report, CostReport, ExternalBaseline,
    ReportFormat,
};
pub use scheduler::{
    derive_thresholds, run_campaign, Campaign, CampaignAccounting, CampaignConfig, CampaignResult,
    Termination, Thresholds, VectorSource,
};
pub use sim::{simulate_batch, simulate_serial, PatternBatch, ResponseBatch, SimError, LANES};
