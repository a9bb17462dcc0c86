mod common;

use common::{fuzz_case, mutations, run_case, violations};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use salpsim::controller::{map_address, unmap_address, MappingPolicy};
use salpsim::dram::Readiness;
use salpsim::trace::TraceEntry;
use salpsim::verify::{verify_stream, Checker};
use salpsim::{run, CmdKind, Command, Coord, DramState, Mode, SimConfig};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn controller_output_passes_the_verifier(seed in any::<u64>()) {
        let case = fuzz_case(seed);
        let r = run_case(&case);
        prop_assert_eq!(violations(&case, &r), 0);
    }

    #[test]
    fn run_invariants_hold(seed in any::<u64>()) {
        let case = fuzz_case(seed);
        let r = run_case(&case);
        let t = &case.config.timing;
        let n: usize = case.traces.iter().map(Vec::len).sum();
        prop_assert_eq!(r.requests.len(), n);
        prop_assert_eq!((r.commands.rd + r.commands.wr) as usize, n);
        prop_assert_eq!((r.row_hits + r.row_misses + r.row_conflicts) as usize, n);
        for q in &r.requests {
            let done = q.completion_cycle.unwrap();
            prop_assert!(done >= q.arrival_cycle);
            if !q.is_write {
                let floor = t.t_cl + t.t_bl + if q.activated { t.t_rcd } else { 0 };
                prop_assert!(q.latency().unwrap() >= floor);
            }
        }
        for (s, trace) in r.streams.iter().zip(&case.traces) {
            prop_assert_eq!(s.instructions, trace.iter().map(|e| e.inst_gap + 1).sum::<u64>());
            prop_assert!((s.ipc() - s.instructions as f64 / s.core_cycles as f64).abs() < 1e-12);
        }
        prop_assert!((0.0..=1.0).contains(&r.row_hit_rate()));
    }

    #[test]
    fn mutated_commands_are_flagged_by_their_rule(seed in any::<u64>()) {
        let case = fuzz_case(seed);
        let r = run_case(&case);
        let c = &case.config;
        for m in mutations(c, r.command_log.as_deref().unwrap()).into_iter().take(20) {
            let found = verify_stream(&m.stream, &c.geometry, &c.timing, c.mode);
            prop_assert!(found.iter().any(|v| v.rule == m.rule), "{} not flagged in {:?}", m.rule, found);
        }
    }

    #[test]
    fn dram_model_and_verifier_agree_on_legality(seed in any::<u64>()) {
        let case = fuzz_case(seed);
        let r = run_case(&case);
        let c = &case.config;
        let g = c.geometry.for_mode(c.mode);
        let mut dram = DramState::new(g, c.timing, c.mode).unwrap();
        let mut checker = Checker::new(&c.geometry, &c.timing, c.mode);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut latest = 0;
        for cmd in r.command_log.as_deref().unwrap() {
            let last = latest.max(cmd.cycle.saturating_sub(3));
            for probe in 0..6 {
                let coord = if probe == 0 {
                    cmd.coord
                } else {
                    Coord {
                        channel: rng.random_range(0..g.channels),
                        rank: rng.random_range(0..g.ranks_per_channel),
                        bank: rng.random_range(0..g.banks_per_rank),
                        subarray: rng.random_range(0..g.subarrays_per_bank),
                        row: rng.random_range(0..g.rows_per_subarray),
                        column: rng.random_range(0..g.columns_per_row),
                    }
                };
                let kind = if probe == 0 { cmd.kind } else { CmdKind::ALL[rng.random_range(0..CmdKind::ALL.len())] };
                let at = last + rng.random_range(0..30);
                let probe_cmd = Command::new(kind, coord, at);
                let model_ok = matches!(
                    dram.earliest_issue_cycle(kind, &probe_cmd.coord, at),
                    Ok(Readiness::Ready { cycle, .. }) if cycle == at
                );
                let oracle = checker.check(&probe_cmd);
                let oracle_ok = oracle.is_empty();
                prop_assert_eq!(model_ok, oracle_ok, "{:?} -> {:?}", probe_cmd, oracle);
            }
            prop_assert!(checker.push(cmd).is_empty());
            dram.issue(cmd).unwrap();
            latest = cmd.cycle;
        }
    }

    #[test]
    fn masa_keeps_rows_that_baseline_thrashes(seed in any::<u64>(), n in 20usize..200) {
        // Each subarray of the bank only ever holds one row, so every
        // conflict is between subarrays.
        let config = SimConfig::default();
        let g = config.geometry;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<usize> = (0..g.subarrays_per_bank).map(|_| rng.random_range(0..g.rows_per_subarray)).collect();
        let trace: Vec<TraceEntry> = (0..n)
            .map(|_| {
                let subarray = rng.random_range(0..4);
                let coord = Coord { subarray, row: rows[subarray], column: rng.random_range(0..g.columns_per_row), ..Coord::default() };
                TraceEntry { inst_gap: rng.random_range(0..40), is_write: rng.random_bool(0.3), phys_addr: unmap_address(&coord, &g, config.mapping) }
            })
            .collect();
        let hit_rate = |mode| run(&SimConfig { mode, ..config.clone() }, std::slice::from_ref(&trace)).unwrap().row_hit_rate();
        prop_assert!(hit_rate(Mode::Masa) >= hit_rate(Mode::Baseline));
    }

    #[test]
    fn mapping_round_trips_through_the_inverse(addr in any::<u64>(), line in any::<bool>()) {
        let g = salpsim::Geometry::default();
        let policy = if line { MappingPolicy::LineInterleaved } else { MappingPolicy::RowInterleaved };
        let addr = addr % g.capacity();
        let coord = map_address(addr, &g, policy).unwrap();
        prop_assert_eq!(unmap_address(&coord, &g, policy), addr / 64 * 64);
    }
}
