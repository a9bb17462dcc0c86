use std::collections::VecDeque;

use crate::error::ConfigError;
use crate::trace::TraceEntry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CoreParams {
    /// Instructions held in flight; an unfinished memory access at the head
    /// of a full window stalls the core.
    pub window_size: usize,
    /// Instructions retired and fetched per core cycle.
    pub width: usize,
    pub max_outstanding_reads: usize,
    /// Core cycles per DRAM command cycle.
    pub cpu_clock_ratio: u64,
}

impl Default for CoreParams {
    fn default() -> Self {
        Self { window_size: 128, width: 4, max_outstanding_reads: 32, cpu_clock_ratio: 4 }
    }
}

impl CoreParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (key, v) in [
            ("window_size", self.window_size as u64),
            ("core_width", self.width as u64),
            ("max_outstanding_reads", self.max_outstanding_reads as u64),
            ("cpu_clock_ratio", self.cpu_clock_ratio),
        ] {
            if v == 0 {
                return Err(ConfigError::invalid(key, "must be at least 1"));
            }
        }
        Ok(())
    }
}

/// What the core wants to send to memory. The callback returns false when
/// the controller cannot take the request yet.
pub(crate) struct Send {
    pub is_write: bool,
    pub phys_addr: u64,
    /// Window position to mark ready when the request completes.
    pub seq: u64,
}

/// Limited-window in-order-retire core replaying one trace.
#[derive(Debug, Clone)]
pub(crate) struct Core {
    params: CoreParams,
    trace: Vec<TraceEntry>,
    next: usize,
    /// Non-memory instructions still to fetch before `trace[next]`.
    gap_left: u64,
    /// Readiness of in-flight instructions, oldest first.
    window: VecDeque<bool>,
    head_seq: u64,
    pub outstanding_reads: usize,
    pub retired: u64,
    pub core_cycles: u64,
    pub reads: u64,
    pub writes: u64,
}

impl Core {
    pub fn new(params: CoreParams, trace: Vec<TraceEntry>) -> Self {
        let gap_left = trace.first().map_or(0, |e| e.inst_gap);
        Self {
            params,
            trace,
            next: 0,
            gap_left,
            window: VecDeque::with_capacity(params.window_size),
            head_seq: 0,
            outstanding_reads: 0,
            retired: 0,
            core_cycles: 0,
            reads: 0,
            writes: 0,
        }
    }

    pub fn instructions(&self) -> u64 {
        self.trace.iter().map(|e| e.inst_gap + 1).sum()
    }

    pub fn finished(&self) -> bool {
        self.next == self.trace.len() && self.window.is_empty()
    }

    pub fn complete(&mut self, seq: u64, is_write: bool) {
        self.window[(seq - self.head_seq) as usize] = true;
        if !is_write {
            self.outstanding_reads -= 1;
        }
    }

    /// One core cycle: retire from the head, then fetch into the window.
    /// Returns the number of instructions retired.
    pub fn tick(&mut self, send: &mut dyn FnMut(Send) -> bool) -> u64 {
        if self.finished() {
            return 0;
        }
        self.core_cycles += 1;
        let mut retired = 0;
        while retired < self.params.width as u64 && self.window.front() == Some(&true) {
            self.window.pop_front();
            self.head_seq += 1;
            retired += 1;
        }
        self.retired += retired;

        for _ in 0..self.params.width {
            if self.window.len() == self.params.window_size || self.next == self.trace.len() {
                break;
            }
            if self.gap_left > 0 {
                self.gap_left -= 1;
                self.window.push_back(true);
                continue;
            }
            let e = self.trace[self.next];
            if !e.is_write && self.outstanding_reads == self.params.max_outstanding_reads {
                break;
            }
            let seq = self.head_seq + self.window.len() as u64;
            if !send(Send { is_write: e.is_write, phys_addr: e.phys_addr, seq }) {
                break;
            }
            if e.is_write {
                self.writes += 1;
            } else {
                self.reads += 1;
                self.outstanding_reads += 1;
            }
            self.window.push_back(false);
            self.next += 1;
            self.gap_left = self.trace.get(self.next).map_or(0, |n| n.inst_gap);
        }
        retired
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(gap: u64, is_write: bool) -> TraceEntry {
        TraceEntry { inst_gap: gap, is_write, phys_addr: 0 }
    }

    #[test]
    fn retires_width_per_cycle_without_memory_stalls() {
        let mut core = Core::new(CoreParams::default(), vec![entry(7, true)]);
        let mut sent = Vec::new();
        core.tick(&mut |s| {
            sent.push(s.seq);
            true
        });
        assert_eq!(core.window.len(), 4);
        core.tick(&mut |s| {
            sent.push(s.seq);
            true
        });
        assert_eq!(sent, [7]);
        assert_eq!(core.retired, 4);
        core.complete(7, true);
        while !core.finished() {
            core.tick(&mut |_| true);
        }
        assert_eq!(core.retired, 8);
        assert_eq!(core.instructions(), 8);
    }

    #[test]
    fn full_window_behind_read_stops_retirement() {
        let params = CoreParams { window_size: 8, ..CoreParams::default() };
        let mut core = Core::new(params, vec![entry(0, false), entry(100, false)]);
        for _ in 0..10 {
            core.tick(&mut |_| true);
        }
        assert_eq!(core.window.len(), 8);
        assert_eq!(core.tick(&mut |_| true), 0);
        core.complete(0, false);
        assert_eq!(core.tick(&mut |_| true), 4);
    }

    #[test]
    fn outstanding_read_limit_holds_back_fetch() {
        let params = CoreParams { max_outstanding_reads: 2, ..CoreParams::default() };
        let mut core = Core::new(params, vec![entry(0, false); 5]);
        let mut sent = 0;
        for _ in 0..5 {
            core.tick(&mut |_| {
                sent += 1;
                true
            });
        }
        assert_eq!(sent, 2);
        assert_eq!(core.outstanding_reads, 2);
    }

    #[test]
    fn refused_request_is_retried() {
        let mut core = Core::new(CoreParams::default(), vec![entry(0, false)]);
        core.tick(&mut |_| false);
        assert!(core.window.is_empty());
        core.tick(&mut |_| true);
        assert_eq!(core.window.len(), 1);
    }
}
