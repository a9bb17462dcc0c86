use std::collections::VecDeque;

use super::{MemoryRequest, RowOutcome, RowPolicy};
use crate::dram::{BankState, CmdKind, Command, Coord, DramState, Geometry, Mode, Readiness};
use crate::error::{ConfigError, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ControllerParams {
    /// Requests held per bank before enqueue is refused.
    pub queue_depth: usize,
    /// Row hits that may bypass a bank's oldest request before the bank falls
    /// back to serving that request alone. `None` means 4 × queue depth.
    pub hit_cap: Option<usize>,
    /// MASA: most subarrays kept activated per bank. `None` means no limit
    /// beyond the subarray count.
    pub max_overlapped_acts: Option<usize>,
}

impl Default for ControllerParams {
    fn default() -> Self {
        Self { queue_depth: 32, hit_cap: None, max_overlapped_acts: None }
    }
}

impl ControllerParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.queue_depth == 0 {
            return Err(ConfigError::invalid("queue_depth", "must be at least 1"));
        }
        if self.max_overlapped_acts == Some(0) {
            return Err(ConfigError::invalid("max_overlapped_acts", "must be at least 1"));
        }
        Ok(())
    }

    pub fn effective_hit_cap(&self) -> usize {
        self.hit_cap.unwrap_or(4 * self.queue_depth)
    }
}

/// A command chosen for one channel this cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub cmd: Command,
    /// Request on whose behalf the command issues; `None` for closed-row
    /// precharges.
    pub request: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Step {
    Column,
    SubarraySelect,
    Activate,
    /// Precharge of the given subarray (PRE_ALL in subarray-oblivious modes).
    Precharge(usize),
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    /// (class, age or bank); lower issues first.
    priority: (u8, u64),
    earliest: u64,
    decision: Decision,
}

/// Per-bank request queues with an FR-FCFS scheduler.
///
/// Scheduling decisions depend only on queue contents and DRAM state, so the
/// candidate list of a channel is cached until a command issues or a request
/// arrives on it.
#[derive(Debug, Clone)]
pub struct Controller {
    geometry: Geometry,
    mode: Mode,
    row_policy: RowPolicy,
    params: ControllerParams,
    queues: Vec<VecDeque<MemoryRequest>>,
    bypassed_hits: Vec<usize>,
    candidates: Vec<Option<Vec<Candidate>>>,
    pending: usize,
}

impl Controller {
    /// `geometry` is the simulated geometry (flattened for IDEAL).
    pub fn new(
        geometry: Geometry,
        mode: Mode,
        row_policy: RowPolicy,
        params: ControllerParams,
    ) -> Result<Self, ConfigError> {
        geometry.validate()?;
        params.validate()?;
        Ok(Self {
            queues: vec![VecDeque::with_capacity(params.queue_depth); geometry.total_banks()],
            bypassed_hits: vec![0; geometry.total_banks()],
            candidates: vec![None; geometry.channels],
            geometry,
            mode,
            row_policy,
            params,
            pending: 0,
        })
    }

    pub fn pending(&self) -> usize {
        self.pending
    }

    pub fn queue(&self, coord: &Coord) -> &VecDeque<MemoryRequest> {
        &self.queues[self.geometry.flat_bank(coord)]
    }

    pub fn can_accept(&self, coord: &Coord) -> bool {
        self.queue(coord).len() < self.params.queue_depth
    }

    /// Queues `req`, handing it back if the bank queue is full.
    pub fn enqueue(&mut self, req: MemoryRequest) -> Result<(), MemoryRequest> {
        if !self.can_accept(&req.coord) {
            return Err(req);
        }
        let channel = req.coord.channel;
        let bank = self.geometry.flat_bank(&req.coord);
        debug_assert!(self.queues[bank].back().is_none_or(|q| q.id < req.id));
        self.queues[bank].push_back(req);
        self.pending += 1;
        self.candidates[channel] = None;
        Ok(())
    }

    /// Highest-priority command for `channel` that may legally issue at `cycle`.
    pub fn schedule(&mut self, channel: usize, cycle: u64, dram: &DramState) -> Option<Decision> {
        if self.candidates[channel].is_none() {
            self.candidates[channel] = Some(self.build_candidates(channel, dram));
        }
        let list = self.candidates[channel].as_mut()?;
        for c in list.iter_mut().filter(|c| c.earliest <= cycle) {
            if c.earliest < cycle && c.decision.cmd.kind.is_column() {
                // A data-bus gap that was open at `earliest` may have closed.
                let cmd = &c.decision.cmd;
                match dram.earliest_issue_cycle(cmd.kind, &cmd.coord, cycle) {
                    Ok(Readiness::Ready { cycle: e, .. }) => c.earliest = e,
                    _ => c.earliest = u64::MAX,
                }
                if c.earliest > cycle {
                    continue;
                }
            }
            return Some(Decision { cmd: c.decision.cmd.at(cycle), ..c.decision });
        }
        None
    }

    /// Earliest cycle at which [`Controller::schedule`] could return a
    /// command for `channel`, given no further arrivals.
    pub fn next_ready(&mut self, channel: usize, dram: &DramState) -> Option<u64> {
        if self.candidates[channel].is_none() {
            self.candidates[channel] = Some(self.build_candidates(channel, dram));
        }
        self.candidates[channel].as_ref().and_then(|l| l.iter().map(|c| c.earliest).min())
    }

    /// Issues `decision` to `dram`. Returns the request the command completed,
    /// if it was a column command.
    pub fn commit(&mut self, decision: &Decision, dram: &mut DramState) -> Result<Option<MemoryRequest>, SimError> {
        let cmd = decision.cmd;
        let flat = self.geometry.flat_bank(&cmd.coord);
        let pos = match decision.request {
            Some(id) => Some(
                self.queues[flat]
                    .iter()
                    .position(|r| r.id == id)
                    .ok_or_else(|| SimError::integrity(cmd.cycle, format!("request {id} is not queued")))?,
            ),
            None => None,
        };

        if let Some(p) = pos {
            let req = &mut self.queues[flat][p];
            if req.outcome.is_none() {
                let open = dram.bank(&req.coord).open_row(req.coord.subarray);
                req.outcome = Some(if open == Some(req.coord.row) {
                    RowOutcome::Hit
                } else if cmd.kind.is_precharge() {
                    RowOutcome::Conflict
                } else {
                    RowOutcome::Miss
                });
            }
            if cmd.kind == CmdKind::Act {
                req.activated = true;
            }
        }

        dram.issue(&cmd).map_err(|e| SimError::integrity(cmd.cycle, e.to_string()))?;
        self.candidates[cmd.coord.channel] = None;

        match pos {
            Some(p) if cmd.kind.is_column() => {
                if p == 0 {
                    self.bypassed_hits[flat] = 0;
                } else {
                    self.bypassed_hits[flat] += 1;
                }
                let mut req = self.queues[flat].remove(p).expect("position is valid");
                self.pending -= 1;
                req.completion_cycle =
                    Some(if req.is_write { cmd.cycle } else { cmd.cycle + dram.timing().read_latency() });
                Ok(Some(req))
            }
            _ => Ok(None),
        }
    }

    fn build_candidates(&self, channel: usize, dram: &DramState) -> Vec<Candidate> {
        let mut out = Vec::new();
        let banks = self.geometry.banks_per_channel();
        for local in 0..banks {
            let flat = channel * banks + local;
            let queue = &self.queues[flat];
            if queue.is_empty() && self.row_policy == RowPolicy::OpenRow {
                continue;
            }
            let coord = Coord {
                channel,
                rank: local / self.geometry.banks_per_rank,
                bank: local % self.geometry.banks_per_rank,
                ..Coord::default()
            };
            let view = BankView::new(self, queue, dram.bank(&coord), flat);
            view.collect(flat as u64, &mut |priority, step, req: Option<&MemoryRequest>, target: Coord| {
                let kind = self.command_kind(step, req);
                let cmd_coord = match (step, req) {
                    (Step::Column | Step::Activate, Some(r)) => r.coord,
                    _ => target,
                }
                .normalized_for(kind);
                if let Ok(Readiness::Ready { cycle, .. }) = dram.earliest_issue_cycle(kind, &cmd_coord, 0) {
                    out.push(Candidate {
                        priority,
                        earliest: cycle,
                        decision: Decision { cmd: Command::new(kind, cmd_coord, cycle), request: req.map(|r| r.id) },
                    });
                }
            });
        }
        out.sort_by_key(|c| c.priority);
        out
    }

    fn command_kind(&self, step: Step, req: Option<&MemoryRequest>) -> CmdKind {
        match step {
            Step::Column => match req {
                Some(r) if r.is_write => CmdKind::Wr,
                _ => CmdKind::Rd,
            },
            Step::SubarraySelect => CmdKind::SaSel,
            Step::Activate => CmdKind::Act,
            Step::Precharge(_) => match self.mode {
                Mode::Baseline | Mode::Salp1 | Mode::Ideal => CmdKind::PreAll,
                Mode::Salp2 | Mode::Masa => CmdKind::Pre,
            },
        }
    }
}

/// Receives (priority, step, request, target) for each candidate command.
type Emit<'r> = dyn FnMut((u8, u64), Step, Option<&MemoryRequest>, Coord) + 'r;

/// Scheduling view of one bank: its queue, DRAM state and the precomputed
/// row-hit status of every queued request.
struct BankView<'a> {
    ctl: &'a Controller,
    queue: &'a VecDeque<MemoryRequest>,
    bank: &'a BankState,
    /// Per request: hits its open row and its next step is a column command or SA_SEL.
    ready_hit: Vec<bool>,
    hit: Vec<bool>,
    capped: bool,
    bank_coord: Coord,
}

impl<'a> BankView<'a> {
    fn new(ctl: &'a Controller, queue: &'a VecDeque<MemoryRequest>, bank: &'a BankState, flat: usize) -> Self {
        let hit: Vec<bool> = queue.iter().map(|r| bank.open_row(r.coord.subarray) == Some(r.coord.row)).collect();
        let ready_hit = queue
            .iter()
            .zip(&hit)
            .map(|(r, &h)| h && !(ctl.mode == Mode::Salp2 && bank.open_subarrays().any(|x| x != r.coord.subarray)))
            .collect();
        let g = &ctl.geometry;
        let local = flat % g.banks_per_channel();
        Self {
            ctl,
            queue,
            bank,
            ready_hit,
            hit,
            capped: ctl.bypassed_hits[flat] >= ctl.params.effective_hit_cap(),
            bank_coord: Coord {
                channel: flat / g.banks_per_channel(),
                rank: local / g.banks_per_rank,
                bank: local % g.banks_per_rank,
                ..Coord::default()
            },
        }
    }

    /// Whether closing subarray `x` now would take an open row away from a
    /// request that should be served first: one older than request `r`, or a
    /// row hit ready to be served while hit-first reordering is allowed.
    fn protected(&self, x: usize, r: usize) -> bool {
        self.queue.iter().enumerate().any(|(i, q)| {
            i != r
                && q.coord.subarray == x
                && self.hit[i]
                && (q.id < self.queue[r].id || (!self.capped && self.ready_hit[i]))
        })
    }

    fn precharge_choice(&self, r: usize, exclude: Option<usize>) -> Option<Step> {
        self.bank.open_subarrays().filter(|&x| Some(x) != exclude).find(|&x| !self.protected(x, r)).map(Step::Precharge)
    }

    /// Next command in the service sequence of request `r`, or `None` if it
    /// must wait for other requests.
    fn next_step(&self, r: usize) -> Option<Step> {
        let req = &self.queue[r];
        let s = req.coord.subarray;
        let mode = self.ctl.mode;
        let open_others = self.bank.activated_count() - usize::from(self.bank.subarrays[s].is_open());
        match self.bank.open_row(s) {
            Some(row) if row == req.coord.row => match mode {
                Mode::Salp2 if open_others > 0 => self.precharge_choice(r, Some(s)),
                Mode::Masa if self.bank.designated != Some(s) => Some(Step::SubarraySelect),
                _ => Some(Step::Column),
            },
            Some(_) => (!self.protected(s, r)).then_some(Step::Precharge(s)),
            None => {
                let limit = match mode {
                    Mode::Masa => self
                        .ctl
                        .params
                        .max_overlapped_acts
                        .unwrap_or(usize::MAX)
                        .min(self.ctl.geometry.subarrays_per_bank),
                    _ => mode.activation_cap(self.ctl.geometry.subarrays_per_bank),
                };
                if open_others >= limit {
                    self.precharge_choice(r, None)
                } else if mode == Mode::Salp2 && self.bank.open_subarrays().any(|x| self.protected(x, r)) {
                    // The open subarray must close before this request's
                    // column command; do not start while it still has work.
                    None
                } else {
                    Some(Step::Activate)
                }
            }
        }
    }

    fn collect(&self, bank_key: u64, emit: &mut Emit<'_>) {
        let mut first_hit = true;
        for (i, req) in self.queue.iter().enumerate() {
            if self.capped && i != 0 {
                // Younger activations could keep reopening rows the oldest
                // request then has to close.
                break;
            }
            let target = Coord { subarray: req.coord.subarray, ..self.bank_coord };
            if self.hit[i] {
                let eligible_select = first_hit;
                first_hit = false;
                match self.next_step(i) {
                    Some(Step::Column) => {
                        emit((0, req.id), Step::Column, Some(req), target);
                        continue;
                    }
                    Some(Step::SubarraySelect) => {
                        if eligible_select {
                            emit((0, req.id), Step::SubarraySelect, Some(req), target);
                        }
                        continue;
                    }
                    _ => {}
                }
            }
            if let Some(step @ (Step::Activate | Step::Precharge(_))) = self.next_step(i) {
                let sa = match step {
                    Step::Precharge(x) => x,
                    _ => req.coord.subarray,
                };
                emit((2, req.id), step, Some(req), Coord { subarray: sa, ..self.bank_coord });
            }
        }

        if self.ctl.row_policy == RowPolicy::ClosedRow {
            for x in self.bank.open_subarrays() {
                let wanted = self.queue.iter().zip(&self.hit).any(|(q, &h)| h && q.coord.subarray == x);
                if !wanted && self.bank.subarrays[x].accessed_since_activation() {
                    emit((1, bank_key), Step::Precharge(x), None, Coord { subarray: x, ..self.bank_coord });
                }
            }
        }
    }
}
