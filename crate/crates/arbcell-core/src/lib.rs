//! Core library for degradation-aware battery energy arbitrage.
//!
//! Everything in here is pure computation over value-semantics state:
//! two cell models (a data-sheet linear model and a single particle model
//! with SEI growth), a day-ahead price generator, the dispatch optimisers
//! (exact LP for the linear model, trajectory search over physics rollouts
//! for the SPM), a virtual battery tester that replays schedules with
//! voltage clamping and monthly capacity check-ups, and the economic
//! post-processing.
//!
//! The crate is `no_std` (with `alloc`); all transcendental math goes
//! through [`libm`] so results are bit-identical across platforms. File
//! formats, configuration and the CLI live in the companion `arbcell`
//! crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod harness;
pub mod linear;
pub mod lp;
pub mod market;
pub mod objective;
pub mod pbm_opt;
pub mod report;
pub mod rng;
pub mod scenario;
pub mod spm;
pub mod year;

pub(crate) mod num;

pub use error::{CellFault, Electrode, HarnessError, MarketError, OptimizeError};
pub use harness::{
    CellModel, CheckupProtocol, CheckupRecord, ExperimentLedger, LedgerRow, TesterLimits,
    VirtualTester,
};
pub use linear::{LinearCellParams, LinearCellState};
pub use market::PriceSeries;
pub use objective::{DispatchSchedule, ObjectiveConfig};
pub use pbm_opt::PbmSearchConfig;
pub use scenario::ScenarioKind;
pub use spm::{OcvCurve, SpmCellState, SpmModel, SpmParams};
pub use year::YearPlan;

/// Faraday constant, C/mol.
pub const FARADAY: f64 = 96_485.332_12;
/// Ideal gas constant, J/(mol K).
pub const GAS_CONSTANT: f64 = 8.314_462_618;
/// Seconds per hour; the market clears hourly and all timestamps are in
/// whole seconds from the start of the simulation.
pub const HOUR_S: u64 = 3600;
