//! Offline checker for recorded command streams.
//!
//! Replays the stream with its own bank bookkeeping and compares every
//! command with each earlier one inside a sliding window, one rule at a time.
//! Nothing here goes through the timing table or `DramState`, so the two can
//! be tested against each other.

use std::collections::VecDeque;
use std::fmt::{self, Write as _};

use crate::dram::{CmdKind, Command, Coord, Geometry, Mode, TimingParams};
use crate::error::CommandLogError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub cycle: u64,
    /// `tRCD`, `tFAW`, `command-bus`, `activation-cap`, ...
    pub rule: &'static str,
    pub command: Command,
    /// Earlier command the offending one conflicts with, if any.
    pub earlier: Option<Command>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "cycle {}: {} violated by {} {:?}",
            self.cycle,
            self.rule,
            self.command.kind.name(),
            self.command.coord
        )?;
        if let Some(e) = &self.earlier {
            write!(f, " after {} {:?} at {}", e.kind.name(), e.coord, e.cycle)?;
        }
        write!(f, " ({})", self.detail)
    }
}

/// A command as the pairwise rules see it. PRE_ALL becomes one precharge
/// per subarray it actually closes.
#[derive(Debug, Clone, Copy)]
struct Event {
    kind: CmdKind,
    at: Coord,
    source: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Act,
    Pre,
    Rd,
    Wr,
    Sel,
}

fn op(kind: CmdKind) -> Op {
    match kind {
        CmdKind::Act => Op::Act,
        CmdKind::Pre | CmdKind::PreAll => Op::Pre,
        CmdKind::Rd => Op::Rd,
        CmdKind::Wr => Op::Wr,
        CmdKind::SaSel => Op::Sel,
    }
}

/// Minimum distances that `next` must keep from `prev`, by rule name.
fn pair_rules(prev: &Event, next: &Event, t: &TimingParams, mode: Mode) -> Vec<(&'static str, u64)> {
    let (a, b) = (&prev.at, &next.at);
    let channel = a.channel == b.channel;
    let rank = channel && a.rank == b.rank;
    let bank = rank && a.bank == b.bank;
    let subarray = bank && a.subarray == b.subarray;
    let salp = matches!(mode, Mode::Salp1 | Mode::Salp2 | Mode::Masa);
    let local = if salp { subarray } else { bank };
    let sibling = salp && bank && !subarray;

    let mut out = Vec::new();
    match (op(prev.kind), op(next.kind)) {
        (Op::Act, Op::Rd | Op::Wr) if local => out.push(("tRCD", t.t_rcd)),
        (Op::Act, Op::Pre) if local => out.push(("tRAS", t.t_ras)),
        (Op::Pre, Op::Act) if local => out.push(("tRP", t.t_rp)),
        (Op::Pre, Op::Act) if sibling => out.push(("tPA", t.t_pa)),
        (Op::Act, Op::Act) => {
            if local {
                out.push(("tRC", t.t_ras + t.t_rp));
            }
            let counted = if t.act_window_same_bank { rank } else { rank && !bank };
            if counted || (sibling && t.act_window_same_bank) {
                out.push(("tRRD", t.t_rrd));
            }
        }
        (Op::Rd, Op::Pre) if local => out.push(("tRTP", t.t_rtp)),
        (Op::Wr, Op::Pre) if local => out.push(("tWR", t.t_cwl + t.t_bl + t.t_wr)),
        (Op::Sel, Op::Rd | Op::Wr) if mode == Mode::Masa && bank => out.push(("tSCD", t.t_scd)),
        (Op::Act, Op::Sel) if mode == Mode::Masa && subarray => out.push(("tRCD", t.t_rcd)),
        _ => {}
    }
    match (op(prev.kind), op(next.kind)) {
        (Op::Wr, Op::Rd) if rank => out.push(("tWTR", t.t_cwl + t.t_bl + t.t_wtr)),
        _ => {}
    }
    if channel && matches!(op(prev.kind), Op::Rd | Op::Wr) && matches!(op(next.kind), Op::Rd | Op::Wr) {
        out.push(("tCCD", t.t_ccd));
        if op(prev.kind) == Op::Rd && op(next.kind) == Op::Wr {
            out.push(("tRTW", t.t_rtw));
        }
    }
    out
}

fn burst(cmd: &Command, t: &TimingParams) -> Option<(u64, u64)> {
    let start = match cmd.kind {
        CmdKind::Rd => cmd.cycle + t.t_cl,
        CmdKind::Wr => cmd.cycle + t.t_cwl,
        _ => return None,
    };
    Some((start, start + t.t_bl))
}

#[derive(Debug, Clone, Default)]
struct Bank {
    open: Vec<Option<usize>>,
    designated: Option<usize>,
}

/// Incremental form of [`verify_stream`].
#[derive(Debug, Clone)]
pub struct Checker {
    geometry: Geometry,
    timing: TimingParams,
    mode: Mode,
    banks: Vec<Bank>,
    history: VecDeque<Event>,
    /// All commands still inside the window, for bus checks.
    recent: VecDeque<Command>,
    /// Oldest history still able to constrain a new command.
    window: u64,
    last: Option<Command>,
}

impl Checker {
    /// `geometry` is the configured one; IDEAL flattening is applied here.
    pub fn new(geometry: &Geometry, timing: &TimingParams, mode: Mode) -> Self {
        let g = match mode {
            Mode::Ideal => Geometry {
                banks_per_rank: geometry.banks_per_rank * geometry.subarrays_per_bank,
                subarrays_per_bank: 1,
                ..*geometry
            },
            _ => *geometry,
        };
        let t = timing;
        let banks = g.channels * g.ranks_per_channel * g.banks_per_rank;
        Self {
            geometry: g,
            timing: *timing,
            mode,
            banks: vec![Bank { open: vec![None; g.subarrays_per_bank], designated: None }; banks],
            history: VecDeque::new(),
            recent: VecDeque::new(),
            window: [
                t.t_ras + t.t_rp,
                t.t_cwl + t.t_bl + t.t_wr,
                t.t_cwl + t.t_bl + t.t_wtr,
                t.t_faw,
                t.t_rcd,
                t.t_rtp,
                t.t_ccd,
                t.t_rtw,
                t.t_rrd,
                t.t_pa,
                t.t_scd,
                t.t_cl.max(t.t_cwl) + t.t_bl,
            ]
            .into_iter()
            .max()
            .unwrap_or(0)
                + 1,
            last: None,
        }
    }

    fn bank_index(&self, c: &Coord) -> usize {
        (c.channel * self.geometry.ranks_per_channel + c.rank) * self.geometry.banks_per_rank + c.bank
    }

    fn in_range(&self, c: &Coord) -> bool {
        let g = &self.geometry;
        c.channel < g.channels
            && c.rank < g.ranks_per_channel
            && c.bank < g.banks_per_rank
            && c.subarray < g.subarrays_per_bank
            && c.row < g.rows_per_subarray
            && c.column < g.columns_per_row
    }

    fn cap(&self) -> usize {
        match self.mode {
            Mode::Baseline | Mode::Salp1 | Mode::Ideal => 1,
            Mode::Salp2 => 2,
            Mode::Masa => self.geometry.subarrays_per_bank,
        }
    }

    fn events(&self, cmd: &Command) -> Vec<Event> {
        if cmd.kind != CmdKind::PreAll {
            return vec![Event { kind: cmd.kind, at: cmd.coord, source: *cmd }];
        }
        let bank = &self.banks[self.bank_index(&cmd.coord)];
        (0..bank.open.len())
            .filter(|&s| bank.open[s].is_some())
            .map(|s| Event { kind: CmdKind::Pre, at: Coord { subarray: s, ..cmd.coord }, source: *cmd })
            .collect()
    }

    /// Violations `cmd` would cause if appended now. Does not record it.
    pub fn check(&self, cmd: &Command) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut flag = |rule, earlier: Option<Command>, detail: String| {
            out.push(Violation { cycle: cmd.cycle, rule, command: *cmd, earlier, detail });
        };
        if !self.in_range(&cmd.coord) {
            flag("geometry", None, "coordinate outside the geometry".into());
            return out;
        }
        if let Some(last) = self.last {
            if cmd.cycle < last.cycle {
                flag("order", Some(last), "stream is not sorted by cycle".into());
            }
        }

        let bank = &self.banks[self.bank_index(&cmd.coord)];
        let s = cmd.coord.subarray;
        let open_count = bank.open.iter().filter(|r| r.is_some()).count();
        match cmd.kind {
            CmdKind::Act if bank.open[s].is_some() => flag("state", None, "ACT to a subarray with an open row".into()),
            CmdKind::Act if open_count >= self.cap() => {
                flag("activation-cap", None, format!("{open_count} subarrays already activated"))
            }
            CmdKind::Pre if bank.open[s].is_none() => flag("state", None, "PRE to a closed subarray".into()),
            CmdKind::PreAll if open_count == 0 => flag("state", None, "PRE_ALL to a closed bank".into()),
            CmdKind::SaSel if self.mode != Mode::Masa => flag("sa-sel-mode", None, "SA_SEL outside MASA".into()),
            CmdKind::SaSel if bank.open[s].is_none() => flag("state", None, "SA_SEL to a closed subarray".into()),
            CmdKind::Rd | CmdKind::Wr => match bank.open[s] {
                None => flag("state", None, "column command to a closed subarray".into()),
                Some(r) if r != cmd.coord.row => flag("state", None, format!("row {r} is open, not {}", cmd.coord.row)),
                Some(_) if self.mode == Mode::Salp2 && open_count > 1 => {
                    flag("single-driver", None, "another subarray is still activated".into())
                }
                Some(_) if self.mode == Mode::Masa && bank.designated != Some(s) => {
                    flag("designation", None, format!("designated subarray is {:?}", bank.designated))
                }
                Some(_) => {}
            },
            _ => {}
        }

        for prev in &self.recent {
            if prev.coord.channel == cmd.coord.channel && prev.cycle >= cmd.cycle {
                flag("command-bus", Some(*prev), "one command per channel per cycle".into());
            }
            if prev.coord.channel != cmd.coord.channel {
                continue;
            }
            if let (Some((s0, e0)), Some((s1, e1))) = (burst(prev, &self.timing), burst(cmd, &self.timing)) {
                if s0 < e1 && s1 < e0 {
                    flag("data-bus", Some(*prev), format!("bursts [{s0},{e0}) and [{s1},{e1}) overlap"));
                }
            }
        }

        for ev in self.events(cmd) {
            for prev in &self.history {
                for (rule, gap) in pair_rules(prev, &ev, &self.timing, self.mode) {
                    if cmd.cycle < prev.source.cycle + gap {
                        flag(
                            rule,
                            Some(prev.source),
                            format!("gap {} < {gap}", cmd.cycle as i64 - prev.source.cycle as i64),
                        );
                    }
                }
            }
        }

        if cmd.kind == CmdKind::Act {
            let window_same_bank = self.timing.act_window_same_bank;
            let earlier: Vec<&Event> = self
                .history
                .iter()
                .rev()
                .filter(|e| {
                    e.kind == CmdKind::Act
                        && e.at.channel == cmd.coord.channel
                        && e.at.rank == cmd.coord.rank
                        && (window_same_bank || e.at.bank != cmd.coord.bank)
                })
                .take(4)
                .collect();
            if let [.., fourth] = earlier[..] {
                if earlier.len() == 4 && cmd.cycle < fourth.source.cycle + self.timing.t_faw {
                    flag("tFAW", Some(fourth.source), "five activations inside one window".into());
                }
            }
        }
        out
    }

    /// Checks `cmd` and records it.
    pub fn push(&mut self, cmd: &Command) -> Vec<Violation> {
        let found = self.check(cmd);
        if !self.in_range(&cmd.coord) {
            return found;
        }
        let events = self.events(cmd);
        let cap_designation = self.mode == Mode::Masa;
        let idx = self.bank_index(&cmd.coord);
        let bank = &mut self.banks[idx];
        let s = cmd.coord.subarray;
        match cmd.kind {
            CmdKind::Act => {
                if cap_designation && bank.open.iter().all(Option::is_none) {
                    bank.designated = Some(s);
                }
                bank.open[s] = Some(cmd.coord.row);
            }
            CmdKind::Pre => {
                bank.open[s] = None;
                if bank.designated == Some(s) {
                    bank.designated = None;
                }
            }
            CmdKind::PreAll => {
                bank.open.iter_mut().for_each(|r| *r = None);
                bank.designated = None;
            }
            CmdKind::SaSel => bank.designated = Some(s),
            CmdKind::Rd | CmdKind::Wr => {}
        }

        let horizon = cmd.cycle.saturating_sub(self.window);
        self.history.extend(events);
        self.recent.push_back(*cmd);
        while self.history.front().is_some_and(|e| e.source.cycle < horizon) {
            self.history.pop_front();
        }
        while self.recent.front().is_some_and(|c| c.cycle < horizon) {
            self.recent.pop_front();
        }
        self.last = Some(match self.last {
            Some(l) if l.cycle > cmd.cycle => l,
            _ => *cmd,
        });
        found
    }
}

/// Every violation in `commands`, which should be sorted by cycle. Command
/// coordinates are those of the simulated geometry (flattened for IDEAL).
pub fn verify_stream(commands: &[Command], geometry: &Geometry, timing: &TimingParams, mode: Mode) -> Vec<Violation> {
    let mut checker = Checker::new(geometry, timing, mode);
    commands.iter().flat_map(|c| checker.push(c)).collect()
}

pub const COMMAND_LOG_HEADER: &str = "cycle,kind,channel,rank,bank,subarray,row,column";

/// Command log as CSV, one command per line after the header.
pub fn render_command_log(commands: &[Command]) -> String {
    let mut out = String::with_capacity(commands.len() * 24 + COMMAND_LOG_HEADER.len() + 1);
    out.push_str(COMMAND_LOG_HEADER);
    out.push('\n');
    for cmd in commands {
        let c = &cmd.coord;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            cmd.cycle,
            cmd.kind.name(),
            c.channel,
            c.rank,
            c.bank,
            c.subarray,
            c.row,
            c.column
        );
    }
    out
}

/// Parses a command log. The header line and blank lines are skipped.
pub fn parse_command_log(text: &str) -> Result<Vec<Command>, CommandLogError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line == COMMAND_LOG_HEADER {
            continue;
        }
        let err = |reason: String| CommandLogError { line: i + 1, reason };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 8 {
            return Err(err(format!("expected 8 fields, found {}", fields.len())));
        }
        let kind: CmdKind = fields[1].parse().map_err(err)?;
        let mut nums = [0u64; 7];
        for (slot, (j, f)) in nums.iter_mut().zip(fields.iter().enumerate().filter(|&(j, _)| j != 1)) {
            *slot = f.parse().map_err(|_| err(format!("field {} `{f}` is not a number", j + 1)))?;
        }
        let [cycle, channel, rank, bank, subarray, row, column] = nums;
        let coord = Coord {
            channel: channel as usize,
            rank: rank as usize,
            bank: bank as usize,
            subarray: subarray as usize,
            row: row as usize,
            column: column as usize,
        };
        out.push(Command { kind, coord, cycle });
    }
    Ok(out)
}
