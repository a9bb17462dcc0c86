use std::fmt;
use std::str::FromStr;

use super::Coord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmdKind {
    Act,
    Pre,
    PreAll,
    Rd,
    Wr,
    SaSel,
}

impl CmdKind {
    pub const ALL: [CmdKind; 6] =
        [CmdKind::Act, CmdKind::Pre, CmdKind::PreAll, CmdKind::Rd, CmdKind::Wr, CmdKind::SaSel];

    pub fn name(&self) -> &'static str {
        match self {
            CmdKind::Act => "ACT",
            CmdKind::Pre => "PRE",
            CmdKind::PreAll => "PRE_ALL",
            CmdKind::Rd => "RD",
            CmdKind::Wr => "WR",
            CmdKind::SaSel => "SA_SEL",
        }
    }

    pub fn is_column(&self) -> bool {
        matches!(self, CmdKind::Rd | CmdKind::Wr)
    }

    pub fn is_precharge(&self) -> bool {
        matches!(self, CmdKind::Pre | CmdKind::PreAll)
    }

    /// Kind under which timing constraints are recorded. A PRE_ALL acts as a
    /// PRE on every subarray it closes.
    pub fn timing_class(&self) -> CmdKind {
        match self {
            CmdKind::PreAll => CmdKind::Pre,
            k => *k,
        }
    }

    pub(crate) fn index(&self) -> usize {
        *self as usize
    }
}

impl fmt::Display for CmdKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CmdKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CmdKind::ALL.into_iter().find(|k| k.name() == s.trim()).ok_or_else(|| format!("unknown command kind `{s}`"))
    }
}

/// One DRAM command. PRE_ALL ignores `subarray`, `row` and `column`;
/// PRE and SA_SEL ignore `row` and `column`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Command {
    pub kind: CmdKind,
    pub coord: Coord,
    pub cycle: u64,
}

impl Command {
    pub fn new(kind: CmdKind, coord: Coord, cycle: u64) -> Self {
        Self { kind, coord: coord.normalized_for(kind), cycle }
    }

    pub fn at(self, cycle: u64) -> Self {
        Self { cycle, ..self }
    }
}

impl Coord {
    /// Zeroes the fields a command of `kind` does not carry.
    pub fn normalized_for(self, kind: CmdKind) -> Coord {
        match kind {
            CmdKind::PreAll => Coord { subarray: 0, row: 0, column: 0, ..self },
            CmdKind::Pre | CmdKind::SaSel => Coord { row: 0, column: 0, ..self },
            CmdKind::Act => Coord { column: 0, ..self },
            CmdKind::Rd | CmdKind::Wr => self,
        }
    }
}
