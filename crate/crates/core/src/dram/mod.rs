//! DRAM geometry, command vocabulary, per-mode timing tables and the
//! bank/subarray legality state machine.

mod command;
mod geometry;
mod state;
mod timing;

pub use command::{CmdKind, Command};
pub use geometry::{Coord, Geometry, Mode};
pub use state::{BankState, Blocked, Bound, DramState, Readiness, SubarrayState, SubarrayStatus};
pub use timing::{build_timing_table, Constraint, Param, Scope, TimingParams, TimingTable};
