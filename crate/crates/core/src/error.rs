use thiserror::Error;

use crate::dram::Command;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("invalid `{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
}

impl ConfigError {
    pub fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError::Invalid { key: key.into(), reason: reason.into() }
    }
}

/// A command that can never be issued in the configured mode, whatever the
/// bank state.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CommandError {
    #[error("SA_SEL is only available in MASA mode")]
    SubarraySelectOutsideMasa,
    #[error("coordinate outside the configured geometry: {0:?}")]
    OutOfRange(crate::dram::Coord),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: address {addr:#x} is outside the {capacity}-byte memory")]
    OutOfCapacity { line: usize, addr: u64, capacity: u64 },
    #[error(transparent)]
    Io(#[from] IoError),
}

/// `std::io::Error` is neither `Clone` nor `PartialEq`; keep its message.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct IoError(pub String);

impl From<std::io::Error> for TraceError {
    fn from(e: std::io::Error) -> Self {
        TraceError::Io(IoError(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("stream {stream}: {source}")]
    Trace { stream: usize, source: TraceError },
    /// The simulator attempted something its own state machine forbids.
    /// Results up to this point are meaningless.
    #[error("simulation integrity fault at cycle {cycle}: {reason}")]
    Integrity { cycle: u64, reason: String },
}

impl SimError {
    pub fn integrity(cycle: u64, reason: impl Into<String>) -> Self {
        SimError::Integrity { cycle, reason: reason.into() }
    }

    pub fn is_integrity_fault(&self) -> bool {
        matches!(self, SimError::Integrity { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IssueError {
    #[error(transparent)]
    Command(#[from] CommandError),
    #[error("{cmd:?} issued at cycle {} but next legal at {earliest}", cmd.cycle)]
    TooEarly { cmd: Command, earliest: u64 },
    #[error("{cmd:?} is illegal in the current bank state: {reason}")]
    IllegalState { cmd: Command, reason: String },
}

/// A malformed line in a command-log CSV.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {reason}")]
pub struct CommandLogError {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("address {addr:#x} is outside the {capacity}-byte memory")]
pub struct AddressError {
    pub addr: u64,
    pub capacity: u64,
}
