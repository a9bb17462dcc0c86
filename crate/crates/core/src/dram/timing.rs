use std::fmt;

use super::{CmdKind, Mode};
use crate::error::ConfigError;

/// Timing constraints in DRAM command-clock cycles.
///
/// Defaults describe a DDR3-1600-class part (1.25 ns clock).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimingParams {
    pub t_rcd: u64,
    pub t_rp: u64,
    pub t_ras: u64,
    pub t_cl: u64,
    pub t_cwl: u64,
    pub t_bl: u64,
    pub t_rtp: u64,
    pub t_wr: u64,
    pub t_ccd: u64,
    pub t_rrd: u64,
    pub t_faw: u64,
    pub t_wtr: u64,
    pub t_rtw: u64,
    /// Precharge of one subarray to activation of another subarray in the same bank.
    pub t_pa: u64,
    /// SA_SEL to column command.
    pub t_scd: u64,
    /// Apply tRRD/tFAW between activations of the same bank (different
    /// subarrays) as well as between banks.
    pub act_window_same_bank: bool,
}

impl Default for TimingParams {
    fn default() -> Self {
        Self {
            t_rcd: 11,
            t_rp: 11,
            t_ras: 28,
            t_cl: 11,
            t_cwl: 8,
            t_bl: 4,
            t_rtp: 6,
            t_wr: 12,
            t_ccd: 4,
            t_rrd: 5,
            t_faw: 24,
            t_wtr: 6,
            t_rtw: 9,
            t_pa: 0,
            t_scd: 1,
            act_window_same_bank: true,
        }
    }
}

impl TimingParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.t_ras < self.t_rcd {
            return Err(ConfigError::invalid("tRAS", "must be at least tRCD"));
        }
        if self.t_bl == 0 {
            return Err(ConfigError::invalid("tBL", "a data burst lasts at least one cycle"));
        }
        Ok(())
    }

    pub fn t_rc(&self) -> u64 {
        self.t_ras + self.t_rp
    }

    /// WR to PRE of the same row: burst plus write recovery.
    pub fn write_to_precharge(&self) -> u64 {
        self.t_cwl + self.t_bl + self.t_wr
    }

    pub fn write_to_read(&self) -> u64 {
        self.t_cwl + self.t_bl + self.t_wtr
    }

    pub fn read_latency(&self) -> u64 {
        self.t_cl + self.t_bl
    }
}

/// Which earlier commands a constraint looks at, relative to the new command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scope {
    SameSubarray,
    /// Any subarray of the same bank, including the target one.
    SameBank,
    OtherSubarray,
    SameRank,
    /// Same rank, different bank.
    OtherBank,
    SameChannel,
}

impl Scope {
    pub fn name(&self) -> &'static str {
        match self {
            Scope::SameSubarray => "same-subarray",
            Scope::SameBank => "same-bank",
            Scope::OtherSubarray => "other-subarray",
            Scope::SameRank => "same-rank",
            Scope::OtherBank => "other-bank",
            Scope::SameChannel => "same-channel",
        }
    }
}

/// Timing parameter a constraint comes from. Used to name violations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Param {
    Rcd,
    Ras,
    Rp,
    Rc,
    Rrd,
    Faw,
    Rtp,
    WriteRecovery,
    Wtr,
    Ccd,
    Rtw,
    Pa,
    Scd,
}

impl Param {
    pub fn name(&self) -> &'static str {
        match self {
            Param::Rcd => "tRCD",
            Param::Ras => "tRAS",
            Param::Rp => "tRP",
            Param::Rc => "tRC",
            Param::Rrd => "tRRD",
            Param::Faw => "tFAW",
            Param::Rtp => "tRTP",
            Param::WriteRecovery => "tWR",
            Param::Wtr => "tWTR",
            Param::Ccd => "tCCD",
            Param::Rtw => "tRTW",
            Param::Pa => "tPA",
            Param::Scd => "tSCD",
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `next` may not issue less than `min_gap` cycles after `prev` within `scope`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub prev: CmdKind,
    pub next: CmdKind,
    pub scope: Scope,
    pub min_gap: u64,
    pub param: Param,
}

/// Complete constraint set for one mode. PRE_ALL is covered by the PRE rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimingTable {
    pub mode: Mode,
    pub constraints: Vec<Constraint>,
    /// No more than four ACTs per rank in any window of this many cycles.
    pub four_activate_window: u64,
    /// Whether tRRD/tFAW also count ACTs to the same bank.
    pub act_window_same_bank: bool,
    by_next: [Vec<Constraint>; 6],
}

impl TimingTable {
    /// Constraints whose `next` kind governs `kind`.
    pub fn constraining(&self, kind: CmdKind) -> &[Constraint] {
        &self.by_next[kind.timing_class().index()]
    }

    pub fn contains(&self, prev: CmdKind, next: CmdKind, scope: Scope, min_gap: u64) -> bool {
        self.constraints.iter().any(|c| c.prev == prev && c.next == next && c.scope == scope && c.min_gap == min_gap)
    }

    /// Constraint set as it applies to banks with `subarrays_per_bank`
    /// subarrays: with one subarray, same-subarray means same-bank and
    /// other-subarray rules never fire. The result is sorted.
    pub fn resolved(&self, subarrays_per_bank: usize) -> Vec<Constraint> {
        let mut out: Vec<Constraint> = self
            .constraints
            .iter()
            .filter_map(|c| match c.scope {
                _ if subarrays_per_bank > 1 => Some(*c),
                Scope::OtherSubarray => None,
                Scope::SameSubarray => Some(Constraint { scope: Scope::SameBank, ..*c }),
                _ => Some(*c),
            })
            // SA_SEL cannot occur without a second subarray to select.
            .filter(|c| subarrays_per_bank > 1 || (c.prev != CmdKind::SaSel && c.next != CmdKind::SaSel))
            .collect();
        out.sort_by_key(|c| (c.prev, c.next, c.scope, c.min_gap, c.param));
        out.dedup();
        out
    }
}

/// Builds the constraint table for `mode`.
pub fn build_timing_table(params: &TimingParams, mode: Mode) -> Result<TimingTable, ConfigError> {
    use CmdKind::*;
    params.validate()?;
    let p = params;
    let mut out = Vec::new();
    let mut add = |prev, next, scope, min_gap, param| {
        out.push(Constraint { prev, next, scope, min_gap, param });
    };

    // Activation, precharge and write recovery are local to a subarray once
    // the controller knows the subarray boundaries.
    let local = if mode.subarray_aware() { Scope::SameSubarray } else { Scope::SameBank };
    add(Act, Rd, local, p.t_rcd, Param::Rcd);
    add(Act, Wr, local, p.t_rcd, Param::Rcd);
    add(Act, Pre, local, p.t_ras, Param::Ras);
    add(Pre, Act, local, p.t_rp, Param::Rp);
    add(Act, Act, local, p.t_rc(), Param::Rc);
    add(Rd, Pre, local, p.t_rtp, Param::Rtp);
    add(Wr, Pre, local, p.write_to_precharge(), Param::WriteRecovery);

    if mode.subarray_aware() {
        add(Pre, Act, Scope::OtherSubarray, p.t_pa, Param::Pa);
        if p.act_window_same_bank {
            add(Act, Act, Scope::OtherSubarray, p.t_rrd, Param::Rrd);
        }
    }
    if mode == Mode::Masa {
        add(SaSel, Rd, Scope::SameBank, p.t_scd, Param::Scd);
        add(SaSel, Wr, Scope::SameBank, p.t_scd, Param::Scd);
        add(Act, SaSel, Scope::SameSubarray, p.t_rcd, Param::Rcd);
    }

    let act_scope = if p.act_window_same_bank { Scope::SameRank } else { Scope::OtherBank };
    add(Act, Act, act_scope, p.t_rrd, Param::Rrd);
    add(Wr, Rd, Scope::SameRank, p.write_to_read(), Param::Wtr);

    for prev in [Rd, Wr] {
        for next in [Rd, Wr] {
            add(prev, next, Scope::SameChannel, p.t_ccd, Param::Ccd);
        }
    }
    add(Rd, Wr, Scope::SameChannel, p.t_rtw, Param::Rtw);

    let mut by_next: [Vec<Constraint>; 6] = Default::default();
    for c in &out {
        by_next[c.next.index()].push(*c);
    }
    Ok(TimingTable {
        mode,
        constraints: out,
        four_activate_window: p.t_faw,
        act_window_same_bank: p.act_window_same_bank,
        by_next,
    })
}
