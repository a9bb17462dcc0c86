use std::collections::VecDeque;

use super::{
    build_timing_table, CmdKind, Command, Constraint, Coord, Geometry, Mode, Scope, TimingParams, TimingTable,
};
use crate::error::{CommandError, ConfigError, IssueError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SubarrayStatus {
    Precharged,
    Activating,
    Activated,
    Precharging,
}

impl SubarrayStatus {
    /// Holds a row in its local row buffer.
    pub fn is_open(&self) -> bool {
        matches!(self, SubarrayStatus::Activating | SubarrayStatus::Activated)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SubarrayState {
    /// Present while ACTIVATING or ACTIVATED.
    pub open_row: Option<usize>,
    pub last_act: Option<u64>,
    pub last_pre: Option<u64>,
    pub last_rd: Option<u64>,
    pub last_wr: Option<u64>,
    pub last_sa_sel: Option<u64>,
    /// Last WR issue + tCWL + tBL + tWR, or 0 before any write.
    pub write_recovery_end: u64,
}

impl SubarrayState {
    pub fn status(&self, cycle: u64, timing: &TimingParams) -> SubarrayStatus {
        match (self.open_row, self.last_act, self.last_pre) {
            (Some(_), Some(act), _) if cycle < act + timing.t_rcd => SubarrayStatus::Activating,
            (Some(_), _, _) => SubarrayStatus::Activated,
            (None, _, Some(pre)) if cycle < pre + timing.t_rp => SubarrayStatus::Precharging,
            (None, _, _) => SubarrayStatus::Precharged,
        }
    }

    pub fn is_open(&self) -> bool {
        self.open_row.is_some()
    }

    /// A column command reached the currently open row.
    pub fn accessed_since_activation(&self) -> bool {
        let act = match self.last_act {
            Some(a) if self.is_open() => a,
            _ => return false,
        };
        self.last_rd.is_some_and(|c| c >= act) || self.last_wr.is_some_and(|c| c >= act)
    }

    fn last(&self, kind: CmdKind) -> Option<u64> {
        match kind.timing_class() {
            CmdKind::Act => self.last_act,
            CmdKind::Pre => self.last_pre,
            CmdKind::Rd => self.last_rd,
            CmdKind::Wr => self.last_wr,
            CmdKind::SaSel => self.last_sa_sel,
            CmdKind::PreAll => unreachable!(),
        }
    }
}

/// Latest event of one kind together with the latest event from a different
/// owner, so "latest among others" is O(1).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Latest {
    best: Option<(u64, usize)>,
    runner_up: Option<(u64, usize)>,
}

impl Latest {
    fn record(&mut self, cycle: u64, owner: usize) {
        match self.best {
            Some((_, o)) if o == owner => {}
            best => self.runner_up = best,
        }
        self.best = Some((cycle, owner));
    }

    fn any(&self) -> Option<u64> {
        self.best.map(|(c, _)| c)
    }

    fn excluding(&self, owner: usize) -> Option<u64> {
        match self.best {
            Some((_, o)) if o == owner => self.runner_up.map(|(c, _)| c),
            best => best.map(|(c, _)| c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BankState {
    pub subarrays: Vec<SubarrayState>,
    /// MASA: the subarray whose row buffer drives the global bitlines.
    pub designated: Option<usize>,
    open_count: usize,
    latest: [Latest; 6],
    extra_active_cycles: u64,
    last_count_change: u64,
}

impl BankState {
    fn new(subarrays: usize) -> Self {
        Self {
            subarrays: vec![SubarrayState::default(); subarrays],
            designated: None,
            open_count: 0,
            latest: Default::default(),
            extra_active_cycles: 0,
            last_count_change: 0,
        }
    }

    /// Subarrays holding an open row (ACTIVATING or ACTIVATED).
    pub fn activated_count(&self) -> usize {
        self.open_count
    }

    pub fn open_subarrays(&self) -> impl Iterator<Item = usize> + '_ {
        self.subarrays.iter().enumerate().filter(|(_, s)| s.is_open()).map(|(i, _)| i)
    }

    pub fn open_row(&self, subarray: usize) -> Option<usize> {
        self.subarrays[subarray].open_row
    }

    fn account(&mut self, cycle: u64) {
        let extra = self.open_count.saturating_sub(1) as u64;
        self.extra_active_cycles += extra * cycle.saturating_sub(self.last_count_change);
        self.last_count_change = self.last_count_change.max(cycle);
    }

    fn close(&mut self, subarray: usize, cycle: u64) {
        self.account(cycle);
        let sa = &mut self.subarrays[subarray];
        sa.open_row = None;
        sa.last_pre = Some(cycle);
        self.latest[CmdKind::Pre.index()].record(cycle, subarray);
        self.open_count -= 1;
        if self.designated == Some(subarray) {
            self.designated = None;
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct RankState {
    latest: [Latest; 6],
    /// Recent (cycle, bank) activations for the four-activate window.
    recent_acts: VecDeque<(u64, usize)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct ChannelState {
    last_cmd: Option<u64>,
    latest: [Option<u64>; 6],
    /// Data-bus occupancy `[start, end)` of bursts that may still matter.
    bursts: Vec<(u64, u64)>,
}

/// Why a command cannot issue in the current state, however long one waits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Blocked {
    /// ACT to a subarray that already holds a row.
    SubarrayOpen,
    /// PRE, column command or SA_SEL to a subarray without an open row.
    SubarrayClosed,
    /// PRE_ALL to a bank without any open row.
    BankClosed,
    /// Column command to a row other than the open one.
    RowMismatch,
    /// ACT would exceed the mode's activated-subarray cap.
    ActivationCap,
    /// SALP-2: another subarray has not been precharged yet.
    OtherSubarrayOpen,
    /// MASA: the target subarray is not designated.
    NotDesignated,
}

/// Constraint that determined an earliest issue cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    /// The caller's lower bound.
    NotBefore,
    /// One command per channel per cycle.
    CommandBus,
    Timing(Constraint),
    FourActivateWindow,
    DataBus,
}

impl Bound {
    /// Name of the rule, matching the verifier's vocabulary.
    pub fn rule_name(&self) -> &'static str {
        match self {
            Bound::NotBefore => "not-before",
            Bound::CommandBus => "command-bus",
            Bound::Timing(c) => c.param.name(),
            Bound::FourActivateWindow => "tFAW",
            Bound::DataBus => "data-bus",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Readiness {
    Ready {
        cycle: u64,
        bound: Bound,
    },
    /// Illegal until some other command changes the state.
    Blocked(Blocked),
}

impl Readiness {
    pub fn cycle(&self) -> Option<u64> {
        match self {
            Readiness::Ready { cycle, .. } => Some(*cycle),
            Readiness::Blocked(_) => None,
        }
    }
}

/// Legality state of the whole memory system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DramState {
    geometry: Geometry,
    timing: TimingParams,
    mode: Mode,
    table: TimingTable,
    banks: Vec<BankState>,
    ranks: Vec<RankState>,
    channels: Vec<ChannelState>,
    counts: [u64; 6],
}

impl DramState {
    /// `geometry` is the simulated geometry (already flattened for IDEAL).
    pub fn new(geometry: Geometry, timing: TimingParams, mode: Mode) -> Result<Self, ConfigError> {
        geometry.validate()?;
        let table = build_timing_table(&timing, mode)?;
        Ok(Self {
            banks: (0..geometry.total_banks()).map(|_| BankState::new(geometry.subarrays_per_bank)).collect(),
            ranks: vec![RankState::default(); geometry.total_ranks()],
            channels: vec![ChannelState::default(); geometry.channels],
            geometry,
            timing,
            mode,
            table,
            counts: [0; 6],
        })
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn timing(&self) -> &TimingParams {
        &self.timing
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn table(&self) -> &TimingTable {
        &self.table
    }

    pub fn bank(&self, coord: &Coord) -> &BankState {
        &self.banks[self.geometry.flat_bank(coord)]
    }

    pub fn banks(&self) -> &[BankState] {
        &self.banks
    }

    pub fn command_count(&self, kind: CmdKind) -> u64 {
        self.counts[kind.index()]
    }

    /// Σ over cycles up to `until` of max(activated subarrays − 1, 0), summed over banks.
    pub fn extra_activation_cycles(&self, until: u64) -> u64 {
        self.banks
            .iter()
            .map(|b| {
                let extra = b.open_count.saturating_sub(1) as u64;
                b.extra_active_cycles + extra * until.saturating_sub(b.last_count_change)
            })
            .sum()
    }

    pub fn last_command_cycle(&self, channel: usize) -> Option<u64> {
        self.channels[channel].last_cmd
    }

    fn check_structure(&self, kind: CmdKind, coord: &Coord) -> Result<(), CommandError> {
        if kind == CmdKind::SaSel && self.mode != Mode::Masa {
            return Err(CommandError::SubarraySelectOutsideMasa);
        }
        if !self.geometry.contains(coord) {
            return Err(CommandError::OutOfRange(*coord));
        }
        Ok(())
    }

    /// State-machine legality, independent of time.
    pub fn blocked(&self, kind: CmdKind, coord: &Coord) -> Option<Blocked> {
        let bank = self.bank(coord);
        let target = &bank.subarrays[coord.subarray];
        match kind {
            CmdKind::Act => {
                if target.is_open() {
                    Some(Blocked::SubarrayOpen)
                } else if bank.open_count >= self.mode.activation_cap(self.geometry.subarrays_per_bank) {
                    Some(Blocked::ActivationCap)
                } else {
                    None
                }
            }
            CmdKind::Pre | CmdKind::SaSel => (!target.is_open()).then_some(Blocked::SubarrayClosed),
            CmdKind::PreAll => (bank.open_count == 0).then_some(Blocked::BankClosed),
            CmdKind::Rd | CmdKind::Wr => match target.open_row {
                None => Some(Blocked::SubarrayClosed),
                Some(r) if r != coord.row => Some(Blocked::RowMismatch),
                Some(_) => match self.mode {
                    // The activation cap already guarantees a single open subarray.
                    Mode::Baseline | Mode::Salp1 | Mode::Ideal => None,
                    Mode::Salp2 => (bank.open_count > 1).then_some(Blocked::OtherSubarrayOpen),
                    Mode::Masa => (bank.designated != Some(coord.subarray)).then_some(Blocked::NotDesignated),
                },
            },
        }
    }

    fn last_in_scope(&self, kind: CmdKind, scope: Scope, coord: &Coord, subarray: usize) -> Option<u64> {
        let kind = kind.timing_class();
        match scope {
            Scope::SameSubarray => self.bank(coord).subarrays[subarray].last(kind),
            Scope::SameBank => self.bank(coord).latest[kind.index()].any(),
            Scope::OtherSubarray => self.bank(coord).latest[kind.index()].excluding(subarray),
            Scope::SameRank => self.ranks[self.geometry.flat_rank(coord)].latest[kind.index()].any(),
            Scope::OtherBank => self.ranks[self.geometry.flat_rank(coord)].latest[kind.index()].excluding(coord.bank),
            Scope::SameChannel => self.channels[coord.channel].latest[kind.index()],
        }
    }

    /// Smallest cycle ≥ `not_before` at which `kind` to `coord` violates no
    /// constraint, or the state-machine reason it cannot issue at all.
    pub fn earliest_issue_cycle(
        &self,
        kind: CmdKind,
        coord: &Coord,
        not_before: u64,
    ) -> Result<Readiness, CommandError> {
        self.check_structure(kind, coord)?;
        if let Some(reason) = self.blocked(kind, coord) {
            return Ok(Readiness::Blocked(reason));
        }

        let mut at = Earliest { cycle: not_before, bound: Bound::NotBefore };

        let channel = &self.channels[coord.channel];
        if let Some(last) = channel.last_cmd {
            at.raise(last + 1, Bound::CommandBus);
        }

        let bank = self.bank(coord);
        let targets: Vec<usize> = match kind {
            CmdKind::PreAll => bank.open_subarrays().collect(),
            _ => vec![coord.subarray],
        };
        for c in self.table.constraining(kind) {
            for &sa in &targets {
                if let Some(prev) = self.last_in_scope(c.prev, c.scope, coord, sa) {
                    at.raise(prev + c.min_gap, Bound::Timing(*c));
                }
            }
        }

        if kind == CmdKind::Act {
            let rank = &self.ranks[self.geometry.flat_rank(coord)];
            let window: Vec<u64> = rank
                .recent_acts
                .iter()
                .rev()
                .filter(|(_, b)| self.table.act_window_same_bank || *b != coord.bank)
                .map(|(c, _)| *c)
                .take(4)
                .collect();
            if window.len() == 4 {
                at.raise(window[3] + self.table.four_activate_window, Bound::FourActivateWindow);
            }
        }

        if kind.is_column() {
            let latency = if kind == CmdKind::Rd { self.timing.t_cl } else { self.timing.t_cwl };
            let start = fit_burst(&channel.bursts, at.cycle + latency, self.timing.t_bl);
            at.raise(start - latency, Bound::DataBus);
        }

        Ok(Readiness::Ready { cycle: at.cycle, bound: at.bound })
    }

    /// Applies `cmd`. Fails, leaving the state untouched, if `cmd` is not
    /// legal at its cycle.
    pub fn issue(&mut self, cmd: &Command) -> Result<(), IssueError> {
        match self.earliest_issue_cycle(cmd.kind, &cmd.coord, cmd.cycle)? {
            Readiness::Blocked(reason) => {
                return Err(IssueError::IllegalState { cmd: *cmd, reason: format!("{reason:?}") })
            }
            Readiness::Ready { cycle, .. } if cycle > cmd.cycle => {
                return Err(IssueError::TooEarly { cmd: *cmd, earliest: cycle })
            }
            Readiness::Ready { .. } => {}
        }
        self.apply(cmd);
        Ok(())
    }

    fn apply(&mut self, cmd: &Command) {
        let c = cmd.cycle;
        let coord = &cmd.coord;
        let t = self.timing;
        let kind = cmd.kind;
        let class = kind.timing_class().index();
        let flat_bank = self.geometry.flat_bank(coord);
        let flat_rank = self.geometry.flat_rank(coord);
        let masa = self.mode == Mode::Masa;

        let bank = &mut self.banks[flat_bank];
        match kind {
            CmdKind::Act => {
                bank.account(c);
                let sa = &mut bank.subarrays[coord.subarray];
                sa.open_row = Some(coord.row);
                sa.last_act = Some(c);
                if masa && bank.open_count == 0 {
                    bank.designated = Some(coord.subarray);
                }
                bank.open_count += 1;
                bank.latest[class].record(c, coord.subarray);
            }
            CmdKind::Pre => bank.close(coord.subarray, c),
            CmdKind::PreAll => {
                let open: Vec<usize> = bank.open_subarrays().collect();
                for sa in open {
                    bank.close(sa, c);
                }
            }
            CmdKind::Rd => {
                bank.subarrays[coord.subarray].last_rd = Some(c);
                bank.latest[class].record(c, coord.subarray);
            }
            CmdKind::Wr => {
                let sa = &mut bank.subarrays[coord.subarray];
                sa.last_wr = Some(c);
                sa.write_recovery_end = c + t.write_to_precharge();
                bank.latest[class].record(c, coord.subarray);
            }
            CmdKind::SaSel => {
                bank.subarrays[coord.subarray].last_sa_sel = Some(c);
                bank.designated = Some(coord.subarray);
                bank.latest[class].record(c, coord.subarray);
            }
        }

        let rank = &mut self.ranks[flat_rank];
        rank.latest[class].record(c, coord.bank);
        if kind == CmdKind::Act {
            rank.recent_acts.push_back((c, coord.bank));
        }
        let horizon = c.saturating_sub(t.t_faw);
        while rank.recent_acts.len() > 4 && rank.recent_acts.front().is_some_and(|&(a, _)| a < horizon) {
            rank.recent_acts.pop_front();
        }

        let channel = &mut self.channels[coord.channel];
        channel.last_cmd = Some(c);
        channel.latest[class] = Some(c);
        channel.bursts.retain(|&(_, end)| end > c);
        match kind {
            CmdKind::Rd => channel.bursts.push((c + t.t_cl, c + t.t_cl + t.t_bl)),
            CmdKind::Wr => channel.bursts.push((c + t.t_cwl, c + t.t_cwl + t.t_bl)),
            _ => {}
        }
        self.counts[kind.index()] += 1;
    }
}

struct Earliest {
    cycle: u64,
    bound: Bound,
}

impl Earliest {
    fn raise(&mut self, candidate: u64, why: Bound) {
        if candidate > self.cycle {
            self.cycle = candidate;
            self.bound = why;
        }
    }
}

/// Earliest burst start ≥ `start` of length `len` that overlaps none of `bursts`.
fn fit_burst(bursts: &[(u64, u64)], mut start: u64, len: u64) -> u64 {
    loop {
        let clash = bursts.iter().find(|&&(s, e)| start < e && start + len > s);
        match clash {
            Some(&(_, e)) => start = e,
            None => return start,
        }
    }
}
