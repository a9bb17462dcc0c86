use std::fmt;
use std::str::FromStr;

use crate::error::ConfigError;

/// Static organization of the memory system.
///
/// A bank is a grid of `subarrays_per_bank` subarrays, each holding
/// `rows_per_subarray` rows behind its own local row buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Geometry {
    pub channels: usize,
    pub ranks_per_channel: usize,
    pub banks_per_rank: usize,
    pub subarrays_per_bank: usize,
    pub rows_per_subarray: usize,
    pub columns_per_row: usize,
    /// Access granularity of one column command (one cache line).
    pub bytes_per_column: usize,
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            channels: 1,
            ranks_per_channel: 1,
            banks_per_rank: 8,
            subarrays_per_bank: 8,
            rows_per_subarray: 512,
            columns_per_row: 128,
            bytes_per_column: 64,
        }
    }
}

impl Geometry {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let counts = [
            ("channels", self.channels),
            ("ranks_per_channel", self.ranks_per_channel),
            ("banks_per_rank", self.banks_per_rank),
            ("subarrays_per_bank", self.subarrays_per_bank),
            ("rows_per_subarray", self.rows_per_subarray),
            ("columns_per_row", self.columns_per_row),
            ("bytes_per_column", self.bytes_per_column),
        ];
        for (name, value) in counts {
            if value == 0 {
                return Err(ConfigError::invalid(name, "must be at least 1"));
            }
        }
        for (name, value) in [
            ("subarrays_per_bank", self.subarrays_per_bank),
            ("rows_per_subarray", self.rows_per_subarray),
            ("columns_per_row", self.columns_per_row),
        ] {
            if !value.is_power_of_two() {
                return Err(ConfigError::invalid(name, "must be a power of two"));
            }
        }
        if self.capacity_checked().is_none() {
            return Err(ConfigError::invalid("geometry", "capacity overflows 64 bits"));
        }
        Ok(())
    }

    pub fn rows_per_bank(&self) -> usize {
        self.subarrays_per_bank * self.rows_per_subarray
    }

    pub fn banks_per_channel(&self) -> usize {
        self.ranks_per_channel * self.banks_per_rank
    }

    pub fn total_banks(&self) -> usize {
        self.channels * self.banks_per_channel()
    }

    pub fn total_ranks(&self) -> usize {
        self.channels * self.ranks_per_channel
    }

    pub fn row_bytes(&self) -> u64 {
        self.columns_per_row as u64 * self.bytes_per_column as u64
    }

    fn capacity_checked(&self) -> Option<u64> {
        [
            self.channels,
            self.ranks_per_channel,
            self.banks_per_rank,
            self.subarrays_per_bank,
            self.rows_per_subarray,
            self.columns_per_row,
            self.bytes_per_column,
        ]
        .iter()
        .try_fold(1u64, |acc, &n| acc.checked_mul(n as u64))
    }

    /// Total addressable bytes.
    pub fn capacity(&self) -> u64 {
        self.capacity_checked().expect("validated geometry")
    }

    /// Geometry actually simulated for `mode`. IDEAL turns every subarray
    /// into an independent bank.
    pub fn for_mode(&self, mode: Mode) -> Geometry {
        match mode {
            Mode::Ideal => Geometry {
                banks_per_rank: self.banks_per_rank * self.subarrays_per_bank,
                subarrays_per_bank: 1,
                ..*self
            },
            _ => *self,
        }
    }

    /// Flat index of a bank across the whole system.
    pub fn flat_bank(&self, coord: &Coord) -> usize {
        (coord.channel * self.ranks_per_channel + coord.rank) * self.banks_per_rank + coord.bank
    }

    pub fn flat_rank(&self, coord: &Coord) -> usize {
        coord.channel * self.ranks_per_channel + coord.rank
    }

    pub fn contains(&self, coord: &Coord) -> bool {
        coord.channel < self.channels
            && coord.rank < self.ranks_per_channel
            && coord.bank < self.banks_per_rank
            && coord.subarray < self.subarrays_per_bank
            && coord.row < self.rows_per_subarray
            && coord.column < self.columns_per_row
    }
}

/// Position of a column inside the memory system. `row` is local to the
/// subarray.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Coord {
    pub channel: usize,
    pub rank: usize,
    pub bank: usize,
    pub subarray: usize,
    pub row: usize,
    pub column: usize,
}

impl Coord {
    pub fn global_row(&self, geometry: &Geometry) -> usize {
        self.subarray * geometry.rows_per_subarray + self.row
    }

    pub fn same_bank(&self, other: &Coord) -> bool {
        self.channel == other.channel && self.rank == other.rank && self.bank == other.bank
    }

    pub fn same_row(&self, other: &Coord) -> bool {
        self.same_bank(other) && self.subarray == other.subarray && self.row == other.row
    }

    /// Coordinate of the same cell once `geometry` is flattened for IDEAL.
    pub fn for_mode(&self, geometry: &Geometry, mode: Mode) -> Coord {
        match mode {
            Mode::Ideal => {
                Coord { bank: self.bank * geometry.subarrays_per_bank + self.subarray, subarray: 0, ..*self }
            }
            _ => *self,
        }
    }
}

/// Operating mode of the memory system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    /// Subarray-oblivious bank: one activated row, bank-wide timing.
    Baseline,
    /// Precharge of one subarray overlaps activation of another.
    Salp1,
    /// Two subarrays may be activated; the other must be precharged before a column command.
    Salp2,
    /// Many activated subarrays; SA_SEL picks the one driving the global bitlines.
    Masa,
    /// Baseline with one bank per subarray.
    Ideal,
}

impl Mode {
    pub const ALL: [Mode; 5] = [Mode::Baseline, Mode::Salp1, Mode::Salp2, Mode::Masa, Mode::Ideal];

    pub fn name(&self) -> &'static str {
        match self {
            Mode::Baseline => "baseline",
            Mode::Salp1 => "salp1",
            Mode::Salp2 => "salp2",
            Mode::Masa => "masa",
            Mode::Ideal => "ideal",
        }
    }

    /// Whether timing constraints distinguish subarrays within a bank.
    pub fn subarray_aware(&self) -> bool {
        matches!(self, Mode::Salp1 | Mode::Salp2 | Mode::Masa)
    }

    /// Maximum number of simultaneously activated subarrays per bank.
    pub fn activation_cap(&self, subarrays_per_bank: usize) -> usize {
        match self {
            Mode::Baseline | Mode::Salp1 | Mode::Ideal => 1,
            Mode::Salp2 => 2.min(subarrays_per_bank),
            Mode::Masa => subarrays_per_bank,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ConfigError::invalid("mode", format!("unknown mode `{s}`")))
    }
}
