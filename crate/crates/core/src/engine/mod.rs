//! Simulated time: core models feed the controller, the controller drives
//! the DRAM state, completed reads wake the cores.

mod core;

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

pub use self::core::CoreParams;
use self::core::{Core, Send};
use crate::config::SimConfig;
use crate::controller::{map_address, Controller, MemoryRequest, RowOutcome};
use crate::dram::{CmdKind, Command, DramState, Geometry, Mode};
use crate::error::{SimError, TraceError};
use crate::trace::TraceEntry;

/// Cycles without any forward progress before a run is declared stuck.
const WATCHDOG_CYCLES: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct StreamStats {
    pub instructions: u64,
    pub core_cycles: u64,
    pub reads: u64,
    pub writes: u64,
    pub read_latency_sum: u64,
}

impl StreamStats {
    pub fn ipc(&self) -> f64 {
        match self.core_cycles {
            0 => 0.0,
            c => self.instructions as f64 / c as f64,
        }
    }

    pub fn mean_read_latency(&self) -> f64 {
        match self.reads {
            0 => 0.0,
            n => self.read_latency_sum as f64 / n as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CommandCounts {
    pub act: u64,
    pub pre: u64,
    pub pre_all: u64,
    pub rd: u64,
    pub wr: u64,
    pub sa_sel: u64,
}

impl CommandCounts {
    fn of(dram: &DramState) -> Self {
        Self {
            act: dram.command_count(CmdKind::Act),
            pre: dram.command_count(CmdKind::Pre),
            pre_all: dram.command_count(CmdKind::PreAll),
            rd: dram.command_count(CmdKind::Rd),
            wr: dram.command_count(CmdKind::Wr),
            sa_sel: dram.command_count(CmdKind::SaSel),
        }
    }

    /// PRE and PRE_ALL together.
    pub fn precharges(&self) -> u64 {
        self.pre + self.pre_all
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub mode: Mode,
    /// Configured geometry, before any IDEAL flattening.
    pub geometry: Geometry,
    pub streams: Vec<StreamStats>,
    /// Cycles from start until the last request completed and every core
    /// retired its last instruction.
    pub dram_cycles: u64,
    pub commands: CommandCounts,
    pub row_hits: u64,
    pub row_misses: u64,
    pub row_conflicts: u64,
    /// Σ over cycles and banks of (activated subarrays − 1, floored at 0).
    pub extra_activation_cycles: u64,
    pub read_latency: BTreeMap<u64, u64>,
    pub write_latency: BTreeMap<u64, u64>,
    /// Completed requests in completion order.
    pub requests: Vec<MemoryRequest>,
    pub command_log: Option<Vec<Command>>,
}

impl SimResult {
    pub fn instructions(&self) -> u64 {
        self.streams.iter().map(|s| s.instructions).sum()
    }

    /// Aggregate IPC: all instructions over the longest-running core.
    pub fn ipc(&self) -> f64 {
        match self.streams.iter().map(|s| s.core_cycles).max() {
            Some(c) if c > 0 => self.instructions() as f64 / c as f64,
            _ => 0.0,
        }
    }

    pub fn row_hit_rate(&self) -> f64 {
        match self.row_hits + self.row_misses + self.row_conflicts {
            0 => 0.0,
            n => self.row_hits as f64 / n as f64,
        }
    }

    pub fn mean_read_latency(&self) -> f64 {
        let (n, sum) = self.read_latency.iter().fold((0, 0), |(n, s), (&l, &c)| (n + c, s + l * c));
        match n {
            0 => 0.0,
            n => sum as f64 / n as f64,
        }
    }
}

/// A request injected at a fixed cycle, independent of any core.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimedRequest {
    pub arrival: u64,
    pub is_write: bool,
    pub phys_addr: u64,
}

/// What one [`Simulation::step`] did.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepEvents {
    pub commands: Vec<Command>,
    pub completed: Vec<u64>,
    pub retired: u64,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    config: SimConfig,
    dram: DramState,
    ctl: Controller,
    cores: Vec<Core>,
    timed: VecDeque<TimedRequest>,
    /// Base address and size of each stream's slice of memory.
    slices: Vec<(u64, u64)>,
    cycle: u64,
    next_id: u64,
    /// Window slot of each request id; `None` for timed requests.
    slot_of: Vec<Option<(usize, u64)>>,
    wakeups: BinaryHeap<Reverse<(u64, usize, u64, bool)>>,
    last_progress: u64,
    last_completion: u64,
    requests: Vec<MemoryRequest>,
    log: Option<Vec<Command>>,
}

impl Simulation {
    /// Closed-loop run: one core model per trace.
    pub fn new(config: &SimConfig, traces: &[Vec<TraceEntry>]) -> Result<Self, SimError> {
        if traces.is_empty() {
            return Err(SimError::Config(crate::error::ConfigError::invalid(
                "trace",
                "at least one trace is required",
            )));
        }
        let mut sim = Self::empty(config, traces.len())?;
        for (stream, trace) in traces.iter().enumerate() {
            sim.check_capacity(stream, trace.iter().map(|e| e.phys_addr))?;
            sim.cores.push(Core::new(config.core, trace.clone()));
        }
        Ok(sim)
    }

    /// Open-loop run: requests arrive at fixed cycles regardless of progress.
    pub fn new_timed(config: &SimConfig, requests: &[TimedRequest]) -> Result<Self, SimError> {
        let mut sim = Self::empty(config, 1)?;
        sim.check_capacity(0, requests.iter().map(|r| r.phys_addr))?;
        let mut timed = requests.to_vec();
        timed.sort_by_key(|r| r.arrival);
        sim.timed = timed.into();
        Ok(sim)
    }

    fn empty(config: &SimConfig, streams: usize) -> Result<Self, SimError> {
        config.validate()?;
        let g = config.geometry.for_mode(config.mode);
        let capacity = config.geometry.capacity();
        let slice = capacity / streams as u64;
        Ok(Self {
            dram: DramState::new(g, config.timing, config.mode)?,
            ctl: Controller::new(g, config.mode, config.row_policy, config.controller)?,
            cores: Vec::with_capacity(streams),
            timed: VecDeque::new(),
            slices: (0..streams as u64).map(|s| (s * slice, slice)).collect(),
            cycle: 0,
            next_id: 0,
            slot_of: Vec::new(),
            wakeups: BinaryHeap::new(),
            last_progress: 0,
            last_completion: 0,
            requests: Vec::new(),
            log: config.record_commands.then(Vec::new),
            config: config.clone(),
        })
    }

    fn check_capacity(&self, stream: usize, addrs: impl Iterator<Item = u64>) -> Result<(), SimError> {
        let capacity = self.config.geometry.capacity();
        for (i, addr) in addrs.enumerate() {
            if addr >= capacity {
                return Err(SimError::Trace {
                    stream,
                    source: TraceError::OutOfCapacity { line: i + 1, addr, capacity },
                });
            }
        }
        Ok(())
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn dram(&self) -> &DramState {
        &self.dram
    }

    pub fn controller(&self) -> &Controller {
        &self.ctl
    }

    pub fn is_done(&self) -> bool {
        self.timed.is_empty()
            && self.ctl.pending() == 0
            && self.wakeups.is_empty()
            && self.cores.iter().all(Core::finished)
    }

    /// Builds the request for `phys_addr` in stream `stream`'s slice of memory.
    fn request(&self, stream: usize, is_write: bool, phys_addr: u64) -> Result<MemoryRequest, SimError> {
        let (base, size) = self.slices[stream];
        let addr = base + phys_addr % size;
        let g = &self.config.geometry;
        let coord = map_address(addr, g, self.config.mapping)
            .map_err(|e| SimError::integrity(self.cycle, e.to_string()))?
            .for_mode(g, self.config.mode);
        Ok(MemoryRequest {
            id: self.next_id,
            stream,
            is_write,
            phys_addr: addr,
            coord,
            arrival_cycle: self.cycle,
            completion_cycle: None,
            outcome: None,
            activated: false,
        })
    }

    /// Advances one DRAM command cycle.
    pub fn step(&mut self) -> Result<StepEvents, SimError> {
        let mut events = StepEvents::default();
        let cycle = self.cycle;

        while let Some(&Reverse((at, stream, seq, is_write))) = self.wakeups.peek() {
            if at > cycle {
                break;
            }
            self.wakeups.pop();
            self.cores[stream].complete(seq, is_write);
        }

        while let Some(t) = self.timed.front().copied() {
            if t.arrival > cycle {
                break;
            }
            let req = self.request(0, t.is_write, t.phys_addr)?;
            if self.ctl.enqueue(req).is_err() {
                break;
            }
            self.timed.pop_front();
            self.slot_of.push(None);
            self.next_id += 1;
        }

        let mut cores = std::mem::take(&mut self.cores);
        let mut fault = None;
        'cores: for (stream, core) in cores.iter_mut().enumerate() {
            for _ in 0..self.config.core.cpu_clock_ratio {
                events.retired += core.tick(&mut |s: Send| {
                    let req = match self.request(stream, s.is_write, s.phys_addr) {
                        Ok(r) => r,
                        Err(e) => {
                            fault = Some(e);
                            return false;
                        }
                    };
                    if self.ctl.enqueue(req).is_err() {
                        return false;
                    }
                    self.slot_of.push(Some((stream, s.seq)));
                    self.next_id += 1;
                    true
                });
                if fault.is_some() {
                    break 'cores;
                }
            }
        }
        self.cores = cores;
        if let Some(e) = fault {
            return Err(e);
        }

        for channel in 0..self.dram.geometry().channels {
            let Some(decision) = self.ctl.schedule(channel, cycle, &self.dram) else {
                continue;
            };
            let done = self.ctl.commit(&decision, &mut self.dram)?;
            events.commands.push(decision.cmd);
            if let Some(log) = &mut self.log {
                log.push(decision.cmd);
            }
            if let Some(req) = done {
                let at = req.completion_cycle.expect("set on completion");
                if let Some((stream, seq)) = self.slot_of[req.id as usize] {
                    self.wakeups.push(Reverse((at, stream, seq, req.is_write)));
                }
                self.last_completion = self.last_completion.max(at);
                events.completed.push(req.id);
                self.requests.push(req);
            }
        }

        // Commands alone are not progress: ACT/PRE can cycle without serving anyone.
        if !events.completed.is_empty() || events.retired > 0 {
            self.last_progress = cycle;
        } else if cycle - self.last_progress > WATCHDOG_CYCLES {
            return Err(SimError::integrity(cycle, "no request completed and no instruction retired for too long"));
        }
        self.cycle += 1;
        Ok(events)
    }

    pub fn run_to_completion(mut self) -> Result<SimResult, SimError> {
        while !self.is_done() {
            self.step()?;
        }
        self.finish()
    }

    fn finish(self) -> Result<SimResult, SimError> {
        let span = if self.cores.is_empty() { self.last_completion } else { self.cycle.max(self.last_completion) };
        let mut streams: Vec<StreamStats> = self
            .cores
            .iter()
            .map(|c| StreamStats {
                instructions: c.instructions(),
                core_cycles: c.core_cycles,
                reads: c.reads,
                writes: c.writes,
                read_latency_sum: 0,
            })
            .collect();
        if streams.is_empty() {
            let reads = self.requests.iter().filter(|r| !r.is_write).count() as u64;
            streams.push(StreamStats {
                instructions: 0,
                core_cycles: 0,
                reads,
                writes: self.requests.len() as u64 - reads,
                read_latency_sum: 0,
            });
        }

        let timing = *self.dram.timing();
        let (mut hits, mut misses, mut conflicts) = (0, 0, 0);
        let mut read_latency = BTreeMap::new();
        let mut write_latency = BTreeMap::new();
        for r in &self.requests {
            let latency = r.latency().expect("completed");
            match r.outcome {
                Some(RowOutcome::Hit) => hits += 1,
                Some(RowOutcome::Miss) => misses += 1,
                Some(RowOutcome::Conflict) => conflicts += 1,
                None => return Err(SimError::integrity(span, format!("request {} completed unclassified", r.id))),
            }
            if r.is_write {
                *write_latency.entry(latency).or_insert(0) += 1;
                continue;
            }
            let floor = timing.read_latency() + if r.activated { timing.t_rcd } else { 0 };
            if latency < floor {
                return Err(SimError::integrity(span, format!("read {} finished in {latency} cycles", r.id)));
            }
            *read_latency.entry(latency).or_insert(0) += 1;
            streams[r.stream].read_latency_sum += latency;
        }

        Ok(SimResult {
            mode: self.config.mode,
            geometry: self.config.geometry,
            streams,
            dram_cycles: span,
            commands: CommandCounts::of(&self.dram),
            row_hits: hits,
            row_misses: misses,
            row_conflicts: conflicts,
            extra_activation_cycles: self.dram.extra_activation_cycles(span),
            read_latency,
            write_latency,
            requests: self.requests,
            command_log: self.log,
        })
    }
}

/// Runs one core per trace until every request has completed.
pub fn run(config: &SimConfig, traces: &[Vec<TraceEntry>]) -> Result<SimResult, SimError> {
    Simulation::new(config, traces)?.run_to_completion()
}

/// Runs a fixed-arrival request list with no core model.
pub fn run_timed(config: &SimConfig, requests: &[TimedRequest]) -> Result<SimResult, SimError> {
    Simulation::new_timed(config, requests)?.run_to_completion()
}
