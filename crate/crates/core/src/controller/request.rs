use std::fmt;
use std::str::FromStr;

use crate::dram::Coord;
use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RowPolicy {
    /// Rows stay open until a conflicting request needs the subarray.
    #[default]
    OpenRow,
    /// Rows close as soon as no queued request wants them.
    ClosedRow,
}

impl RowPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            RowPolicy::OpenRow => "open",
            RowPolicy::ClosedRow => "closed",
        }
    }
}

impl fmt::Display for RowPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RowPolicy {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "open" | "open_row" | "open-row" => Ok(RowPolicy::OpenRow),
            "closed" | "closed_row" | "closed-row" => Ok(RowPolicy::ClosedRow),
            _ => Err(ConfigError::invalid("row_policy", format!("unknown row policy `{s}`"))),
        }
    }
}

/// Row-buffer outcome of a request, judged when its first command issues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowOutcome {
    /// The row was already open in its subarray.
    Hit,
    /// The subarray had to be activated, nothing had to be closed.
    Miss,
    /// Another row had to be precharged first.
    Conflict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryRequest {
    /// Global arrival sequence number; lower is older.
    pub id: u64,
    pub stream: usize,
    pub is_write: bool,
    pub phys_addr: u64,
    /// Coordinate in the simulated geometry.
    pub coord: Coord,
    pub arrival_cycle: u64,
    /// Reads: end of the data burst. Writes: WR issue (writes are posted).
    pub completion_cycle: Option<u64>,
    pub outcome: Option<RowOutcome>,
    /// An ACT was issued on behalf of this request.
    pub activated: bool,
}

impl MemoryRequest {
    pub fn latency(&self) -> Option<u64> {
        self.completion_cycle.map(|c| c - self.arrival_cycle)
    }
}
