//! Energy accounting, mode comparisons and the CSV reports.

mod energy;

use std::fmt::Write as _;

pub use energy::{energy_of, Energy, EnergyParams};
use thiserror::Error;

use crate::dram::Mode;
use crate::engine::SimResult;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SummaryError {
    #[error("no results to compare")]
    Empty,
    #[error("no BASELINE result to compare against")]
    NoBaseline,
    #[error("results come from different runs: {0}")]
    Mismatch(String),
}

/// Header of [`stats_csv`].
pub const STATS_HEADER: &str = "stream,instructions,core_cycles,ipc,reads,writes,mean_read_latency,dram_cycles,\
act,pre,rd,wr,sa_sel,row_hits,row_misses,row_conflicts,hit_rate,\
act_nj,pre_nj,rd_nj,wr_nj,sa_sel_nj,static_nj,dynamic_nj,total_nj";

/// One row per stream, then an `all` row with run-wide totals. Command,
/// row-buffer and energy columns are run-wide and left empty on stream rows.
/// The mode is deliberately absent so runs can be compared byte for byte.
pub fn stats_csv(result: &SimResult, params: &EnergyParams) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{STATS_HEADER}");
    for (i, s) in result.streams.iter().enumerate() {
        let _ = writeln!(
            out,
            "{i},{},{},{:.6},{},{},{:.3},,,,,,,,,,,,,,,,,,",
            s.instructions,
            s.core_cycles,
            s.ipc(),
            s.reads,
            s.writes,
            s.mean_read_latency()
        );
    }
    let c = &result.commands;
    let e = energy_of(result, params);
    let (reads, writes) = result.streams.iter().fold((0, 0), |(r, w), s| (r + s.reads, w + s.writes));
    let _ = writeln!(
        out,
        "all,{},{},{:.6},{reads},{writes},{:.3},{},{},{},{},{},{},{},{},{},{:.6},{:.3},{:.3},{:.3},{:.3},{:.3},{:.3},{:.3},{:.3}",
        result.instructions(),
        result.streams.iter().map(|s| s.core_cycles).max().unwrap_or(0),
        result.ipc(),
        result.mean_read_latency(),
        result.dram_cycles,
        c.act,
        c.precharges(),
        c.rd,
        c.wr,
        c.sa_sel,
        result.row_hits,
        result.row_misses,
        result.row_conflicts,
        result.row_hit_rate(),
        e.act,
        e.pre,
        e.rd,
        e.wr,
        e.sa_sel,
        e.static_nj,
        e.dynamic_nj(),
        e.total_nj()
    );
    out
}

/// One mode's figures next to the baseline's.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeComparison {
    pub mode: Mode,
    pub ipc: f64,
    /// Percent change relative to BASELINE.
    pub ipc_delta_pct: f64,
    pub hit_rate: f64,
    /// Percentage points relative to BASELINE.
    pub hit_rate_delta_pp: f64,
    pub energy: Energy,
    pub dynamic_delta_pct: f64,
    pub total_delta_pct: f64,
    pub act: u64,
    pub sa_sel: u64,
}

impl ModeComparison {
    /// SA_SEL per ACT, rounded half-up to three decimals.
    pub fn sa_sel_per_act(&self) -> String {
        ratio_3dp(self.sa_sel, self.act)
    }
}

fn ratio_3dp(num: u64, den: u64) -> String {
    if den == 0 {
        return "n/a".into();
    }
    let (num, den) = (num as u128, den as u128);
    let milli = (num * 2000 + den) / (2 * den);
    format!("{}.{:03}", milli / 1000, milli % 1000)
}

fn pct_change(value: f64, base: f64) -> f64 {
    if base == 0.0 {
        return if value == 0.0 { 0.0 } else { f64::INFINITY };
    }
    (value - base) / base * 100.0
}

/// Compares every result against the BASELINE one. All results must replay
/// the same workload on the same geometry.
pub fn summarize(results: &[SimResult], params: &EnergyParams) -> Result<Vec<ModeComparison>, SummaryError> {
    let first = results.first().ok_or(SummaryError::Empty)?;
    for r in results {
        if r.geometry != first.geometry {
            return Err(SummaryError::Mismatch(format!("{} and {} use different geometries", first.mode, r.mode)));
        }
        let shape = |r: &SimResult| r.streams.iter().map(|s| (s.instructions, s.reads, s.writes)).collect::<Vec<_>>();
        if shape(r) != shape(first) {
            return Err(SummaryError::Mismatch(format!("{} and {} replay different traces", first.mode, r.mode)));
        }
    }
    let base = results.iter().find(|r| r.mode == Mode::Baseline).ok_or(SummaryError::NoBaseline)?;
    let base_energy = energy_of(base, params);
    Ok(results
        .iter()
        .map(|r| {
            let energy = energy_of(r, params);
            ModeComparison {
                mode: r.mode,
                ipc: r.ipc(),
                ipc_delta_pct: pct_change(r.ipc(), base.ipc()),
                hit_rate: r.row_hit_rate(),
                hit_rate_delta_pp: (r.row_hit_rate() - base.row_hit_rate()) * 100.0,
                energy,
                dynamic_delta_pct: pct_change(energy.dynamic_nj(), base_energy.dynamic_nj()),
                total_delta_pct: pct_change(energy.total_nj(), base_energy.total_nj()),
                act: r.commands.act,
                sa_sel: r.commands.sa_sel,
            }
        })
        .collect())
}

pub const COMPARISON_HEADER: &str =
    "mode,ipc,ipc_delta_pct,hit_rate,hit_rate_delta_pp,dynamic_nj,dynamic_delta_pct,total_nj,total_delta_pct,act,sa_sel,sa_sel_per_act";

pub fn comparison_csv(rows: &[ModeComparison]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{COMPARISON_HEADER}");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:.6},{:.1},{:.6},{:.1},{:.3},{:.1},{:.3},{:.1},{},{},{}",
            r.mode,
            r.ipc,
            r.ipc_delta_pct,
            r.hit_rate,
            r.hit_rate_delta_pp,
            r.energy.dynamic_nj(),
            r.dynamic_delta_pct,
            r.energy.total_nj(),
            r.total_delta_pct,
            r.act,
            r.sa_sel,
            r.sa_sel_per_act()
        );
    }
    out
}
