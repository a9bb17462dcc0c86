//! Trace-driven, cycle-level DRAM simulator whose banks are collections of
//! subarrays.
//!
//! Five operating modes share one engine: a subarray-oblivious baseline,
//! SALP-1 (overlapped precharge/activate across subarrays), SALP-2 (two
//! activated subarrays), MASA (many activated subarrays selected with
//! `SA_SEL`) and an ideal system with one bank per subarray.

pub mod config;
pub mod controller;
pub mod dram;
pub mod engine;
pub mod error;
pub mod scenario;
pub mod stats;
pub mod trace;
pub mod verify;

pub use config::SimConfig;
pub use dram::{CmdKind, Command, Coord, DramState, Geometry, Mode, TimingParams};
pub use engine::{run, run_timed, SimResult};
pub use error::{CommandError, CommandLogError, ConfigError, IssueError, SimError, TraceError};
