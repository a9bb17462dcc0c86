//! Built-in fixed-arrival workloads and the text timeline used to inspect
//! their schedules.

use std::fmt::Write as _;

use crate::config::SimConfig;
use crate::controller::unmap_address;
use crate::dram::{CmdKind, Coord};
use crate::engine::{run_timed, SimResult, TimedRequest};
use crate::error::{ConfigError, SimError};

pub const SCENARIOS: &[&str] = &["fig23"];

/// Four requests to two rows of bank 0 that sit in different subarrays: a
/// read and a write arrive together, then one more read to each row.
pub fn fig23(config: &SimConfig) -> Result<Vec<TimedRequest>, ConfigError> {
    let g = &config.geometry;
    if g.subarrays_per_bank < 2 || g.rows_per_subarray < 2 {
        return Err(ConfigError::invalid("scenario", "fig23 needs two subarrays of at least two rows"));
    }
    let row_a = Coord { subarray: 0, row: g.rows_per_subarray / 32, ..Coord::default() };
    let row_b = Coord { subarray: 1, row: g.rows_per_subarray / 16, ..Coord::default() };
    let at = |arrival, is_write, coord: Coord| TimedRequest {
        arrival,
        is_write,
        phys_addr: unmap_address(&coord, g, config.mapping),
    };
    Ok(vec![
        at(0, false, row_a),
        at(0, true, row_b),
        at(30, false, Coord { column: 1, ..row_a }),
        at(31, false, Coord { column: 1, ..row_b }),
    ])
}

pub fn requests(name: &str, config: &SimConfig) -> Result<Vec<TimedRequest>, ConfigError> {
    match name {
        "fig23" => fig23(config),
        _ => {
            Err(ConfigError::invalid("scenario", format!("unknown scenario `{name}`; known: {}", SCENARIOS.join(", "))))
        }
    }
}

/// Runs scenario `name` with command recording on.
pub fn run_scenario(name: &str, config: &SimConfig) -> Result<SimResult, SimError> {
    let reqs = requests(name, config)?;
    run_timed(&SimConfig { record_commands: true, ..config.clone() }, &reqs)
}

/// One line per command, then the span. Coordinates are those of the
/// simulated geometry, so IDEAL shows one bank per subarray.
pub fn render_timeline(result: &SimResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "mode {}", result.mode);
    for cmd in result.command_log.as_deref().unwrap_or_default() {
        let c = &cmd.coord;
        let _ = write!(out, "{:>5} {:<7} ch{} rk{} bk{}", cmd.cycle, cmd.kind.name(), c.channel, c.rank, c.bank);
        match cmd.kind {
            CmdKind::PreAll => {}
            CmdKind::Pre | CmdKind::SaSel => {
                let _ = write!(out, " sa{}", c.subarray);
            }
            CmdKind::Act => {
                let _ = write!(out, " sa{} row{}", c.subarray, c.row);
            }
            CmdKind::Rd | CmdKind::Wr => {
                let _ = write!(out, " sa{} row{} col{}", c.subarray, c.row, c.column);
            }
        }
        out.push('\n');
    }
    let _ = writeln!(out, "span {}", result.dram_cycles);
    out
}
