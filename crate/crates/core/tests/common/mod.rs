//! Random configurations and traces shared by the property and acceptance
//! tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use salpsim::controller::{ControllerParams, MappingPolicy, RowPolicy};
use salpsim::dram::Readiness;
use salpsim::engine::CoreParams;
use salpsim::trace::{synth_trace, SynthParams, TraceEntry};
use salpsim::verify::verify_stream;
use salpsim::{run, Command, DramState, Geometry, Mode, SimConfig, SimResult, TimingParams};

#[derive(Debug, Clone)]
pub struct FuzzCase {
    pub config: SimConfig,
    pub traces: Vec<Vec<TraceEntry>>,
}

fn pick<T: Copy>(rng: &mut ChaCha8Rng, xs: &[T]) -> T {
    xs[rng.random_range(0..xs.len())]
}

pub fn random_timing(rng: &mut ChaCha8Rng) -> TimingParams {
    if rng.random_bool(0.3) {
        return TimingParams::default();
    }
    let t_rcd = rng.random_range(1..16);
    TimingParams {
        t_rcd,
        t_rp: rng.random_range(1..16),
        t_ras: t_rcd + rng.random_range(0..24),
        t_cl: rng.random_range(1..16),
        t_cwl: rng.random_range(1..12),
        t_bl: rng.random_range(1..9),
        t_rtp: rng.random_range(1..9),
        t_wr: rng.random_range(1..16),
        t_ccd: rng.random_range(1..9),
        t_rrd: rng.random_range(1..9),
        t_faw: rng.random_range(1..33),
        t_wtr: rng.random_range(1..9),
        t_rtw: rng.random_range(1..13),
        t_pa: rng.random_range(0..4),
        t_scd: rng.random_range(0..4),
        act_window_same_bank: rng.random_bool(0.7),
    }
}

pub fn random_geometry(rng: &mut ChaCha8Rng) -> Geometry {
    Geometry {
        channels: pick(rng, &[1, 1, 2]),
        ranks_per_channel: pick(rng, &[1, 1, 2]),
        banks_per_rank: pick(rng, &[1, 2, 3, 4, 8]),
        subarrays_per_bank: pick(rng, &[1, 2, 4, 8]),
        rows_per_subarray: pick(rng, &[2, 4, 16, 64]),
        columns_per_row: pick(rng, &[8, 32]),
        bytes_per_column: 64,
    }
}

pub fn fuzz_case(seed: u64) -> FuzzCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let geometry = random_geometry(&mut rng);
    let config = SimConfig {
        geometry,
        timing: random_timing(&mut rng),
        mode: pick(&mut rng, &Mode::ALL),
        mapping: pick(&mut rng, &[MappingPolicy::RowInterleaved, MappingPolicy::LineInterleaved]),
        row_policy: pick(&mut rng, &[RowPolicy::OpenRow, RowPolicy::OpenRow, RowPolicy::ClosedRow]),
        controller: ControllerParams {
            queue_depth: pick(&mut rng, &[1, 2, 4, 8, 32]),
            hit_cap: pick(&mut rng, &[None, Some(1), Some(4)]),
            max_overlapped_acts: pick(&mut rng, &[None, None, Some(1), Some(2)]),
        },
        core: CoreParams {
            window_size: pick(&mut rng, &[8, 32, 128]),
            width: pick(&mut rng, &[1, 4]),
            max_outstanding_reads: pick(&mut rng, &[1, 4, 32]),
            cpu_clock_ratio: pick(&mut rng, &[1, 4]),
        },
        record_commands: true,
        ..SimConfig::default()
    };
    let streams = pick(&mut rng, &[1, 1, 2]);
    let traces = (0..streams)
        .map(|_| {
            let p = SynthParams {
                n_requests: rng.random_range(20..250),
                read_fraction: pick(&mut rng, &[1.0, 0.7, 0.3]),
                mean_inst_gap: pick(&mut rng, &[0.0, 3.0, 20.0]),
                row_hit_prob: pick(&mut rng, &[0.0, 0.3, 0.8]),
                bank_skew: pick(&mut rng, &[1.0, 3.0, f64::INFINITY]),
                subarray_spread: rng.random_bool(0.7),
                seed: rng.random(),
            };
            synth_trace(&p, &geometry, config.mapping).unwrap()
        })
        .collect();
    FuzzCase { config, traces }
}

pub fn run_case(case: &FuzzCase) -> SimResult {
    run(&case.config, &case.traces).unwrap_or_else(|e| panic!("{e} for {case:?}"))
}

/// Number of verifier violations in the recorded command log of `case`.
pub fn violations(case: &FuzzCase, result: &SimResult) -> usize {
    let log = result.command_log.as_deref().unwrap_or_default();
    let c = &case.config;
    verify_stream(log, &c.geometry, &c.timing, c.mode).len()
}

/// A legal stream prefix plus one command moved a cycle ahead of the earliest
/// cycle the DRAM model allows, kept in cycle order. `rule` names the binding
/// constraint.
#[derive(Debug, Clone)]
pub struct Mutation {
    pub stream: Vec<Command>,
    pub rule: &'static str,
}

/// Mutations of every command of `log` whose earliest cycle is bound by a
/// rule (rather than by nothing at all).
pub fn mutations(config: &SimConfig, log: &[Command]) -> Vec<Mutation> {
    let g = config.geometry.for_mode(config.mode);
    let mut dram = DramState::new(g, config.timing, config.mode).unwrap();
    let mut out = Vec::new();
    for (i, cmd) in log.iter().enumerate() {
        if let Ok(Readiness::Ready { cycle, bound }) = dram.earliest_issue_cycle(cmd.kind, &cmd.coord, 0) {
            if cycle > 0 && bound.rule_name() != "not-before" {
                let moved = cmd.at(cycle - 1);
                let mut stream = log[..i].to_vec();
                let at = stream.partition_point(|c| c.cycle <= moved.cycle);
                stream.insert(at, moved);
                out.push(Mutation { stream, rule: bound.rule_name() });
            }
        }
        dram.issue(cmd).unwrap();
    }
    out
}
