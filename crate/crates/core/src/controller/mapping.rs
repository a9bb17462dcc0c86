use std::fmt;
use std::str::FromStr;

use crate::dram::{Coord, Geometry};
use crate::error::{AddressError, ConfigError};

/// How consecutive physical addresses spread over the memory system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MappingPolicy {
    /// Consecutive cache lines fill a row before moving to the next channel/bank.
    #[default]
    RowInterleaved,
    /// Consecutive cache lines stripe across channels, banks and ranks.
    LineInterleaved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Channel,
    Rank,
    Bank,
    Column,
    Row,
}

impl MappingPolicy {
    /// Address fields above the in-line offset, least significant first.
    fn fields(&self) -> [Field; 5] {
        use Field::*;
        match self {
            MappingPolicy::LineInterleaved => [Channel, Bank, Rank, Column, Row],
            MappingPolicy::RowInterleaved => [Column, Channel, Bank, Rank, Row],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MappingPolicy::RowInterleaved => "row",
            MappingPolicy::LineInterleaved => "line",
        }
    }
}

impl fmt::Display for MappingPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MappingPolicy {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "row" | "row_interleaved" | "row-interleaved" => Ok(MappingPolicy::RowInterleaved),
            "line" | "line_interleaved" | "line-interleaved" => Ok(MappingPolicy::LineInterleaved),
            _ => Err(ConfigError::invalid("mapping", format!("unknown mapping policy `{s}`"))),
        }
    }
}

fn radix(field: Field, g: &Geometry) -> u64 {
    (match field {
        Field::Channel => g.channels,
        Field::Rank => g.ranks_per_channel,
        Field::Bank => g.banks_per_rank,
        Field::Column => g.columns_per_row,
        Field::Row => g.rows_per_bank(),
    }) as u64
}

/// Decodes a byte address. With power-of-two counts each field is a plain
/// bit slice; other counts use the same layout in mixed radix.
pub fn map_address(addr: u64, geometry: &Geometry, policy: MappingPolicy) -> Result<Coord, AddressError> {
    let capacity = geometry.capacity();
    if addr >= capacity {
        return Err(AddressError { addr, capacity });
    }
    let mut rest = addr / geometry.bytes_per_column as u64;
    let mut coord = Coord::default();
    let mut row = 0;
    for field in policy.fields() {
        let r = radix(field, geometry);
        let value = (rest % r) as usize;
        rest /= r;
        match field {
            Field::Channel => coord.channel = value,
            Field::Rank => coord.rank = value,
            Field::Bank => coord.bank = value,
            Field::Column => coord.column = value,
            Field::Row => row = value,
        }
    }
    coord.subarray = row / geometry.rows_per_subarray;
    coord.row = row % geometry.rows_per_subarray;
    Ok(coord)
}

/// Inverse of [`map_address`]: the line-aligned address of `coord`.
pub fn unmap_address(coord: &Coord, geometry: &Geometry, policy: MappingPolicy) -> u64 {
    let mut addr = 0u64;
    for field in policy.fields().into_iter().rev() {
        let value = match field {
            Field::Channel => coord.channel,
            Field::Rank => coord.rank,
            Field::Bank => coord.bank,
            Field::Column => coord.column,
            Field::Row => coord.global_row(geometry),
        } as u64;
        addr = addr * radix(field, geometry) + value;
    }
    addr * geometry.bytes_per_column as u64
}
