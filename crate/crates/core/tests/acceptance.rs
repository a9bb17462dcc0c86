//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use salpsim::controller::{controller_state_bytes, MappingPolicy};
use salpsim::scenario::{render_timeline, run_scenario};
use salpsim::stats::{energy_of, stats_csv, EnergyParams};
use salpsim::trace::{read_trace_file, synth_trace, SynthParams, TraceEntry};
use salpsim::verify::verify_stream;
use salpsim::{run, CmdKind, Geometry, Mode, SimConfig, SimResult};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn with_mode(config: &SimConfig, mode: Mode) -> SimConfig {
    SimConfig { mode, ..config.clone() }
}

/// Conflict-heavy workload: no intended row reuse, most requests on one bank,
/// spread over its subarrays.
fn conflict_trace(read_fraction: f64, geometry: &Geometry) -> Vec<TraceEntry> {
    let p = SynthParams {
        n_requests: 100_000,
        read_fraction,
        mean_inst_gap: 10.0,
        row_hit_prob: 0.0,
        bank_skew: 8.0,
        subarray_spread: true,
        seed: 1,
    };
    synth_trace(&p, geometry, MappingPolicy::RowInterleaved).unwrap()
}

fn ipc(config: &SimConfig, trace: &[TraceEntry]) -> f64 {
    run(config, &[trace.to_vec()]).unwrap().ipc()
}

fn golden_timeline(mode: Mode) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("tests/golden/fig23_{mode}.txt"));
    std::fs::read_to_string(path).unwrap()
}

fn golden_span(text: &str) -> u64 {
    text.lines().find_map(|l| l.strip_prefix("span ")).unwrap().parse().unwrap()
}

fn second_act(r: &SimResult) -> u64 {
    r.command_log.as_deref().unwrap().iter().filter(|c| c.kind == CmdKind::Act).nth(1).unwrap().cycle
}

fn golden_timeline_ordering() -> Outcome {
    let config = SimConfig::default();
    let mut spans = Vec::new();
    let mut acts = Vec::new();
    for mode in Mode::ALL {
        let r = run_scenario("fig23", &with_mode(&config, mode)).unwrap();
        let golden = golden_timeline(mode);
        if render_timeline(&r) != golden {
            return Err(format!("{mode} timeline differs from its golden file"));
        }
        spans.push(golden_span(&golden));
        acts.push(second_act(&r));
    }
    let ordered = spans[0] > spans[1] && spans[1] > spans[2] && spans[2] > spans[3];
    let act_gain = acts[0] - acts[1];
    ensure(
        ordered && act_gain == config.timing.t_rp - 1,
        format!(
            "spans baseline {} salp1 {} salp2 {} masa {} ideal {}; salp1 second ACT {} cycles earlier",
            spans[0], spans[1], spans[2], spans[3], spans[4], act_gain
        ),
    )
}

fn mode_ordering() -> Outcome {
    let config = SimConfig::default();
    let trace = conflict_trace(1.0, &config.geometry);
    let r = run(&config, std::slice::from_ref(&trace)).unwrap();
    let rpki = 1000.0 * trace.len() as f64 / r.instructions() as f64;
    let ipcs: Vec<f64> = Mode::ALL.iter().map(|&m| ipc(&with_mode(&config, m), &trace)).collect();
    let ordered = ipcs.windows(2).all(|w| w[0] <= w[1]);
    let masa_gain = ipcs[3] / ipcs[0] - 1.0;
    ensure(
        ordered && masa_gain >= 0.05 && rpki >= 15.0,
        format!(
            "{rpki:.0} requests/kinst; ipc {:.4} <= {:.4} <= {:.4} <= {:.4} <= {:.4}; masa +{:.1}%",
            ipcs[0],
            ipcs[1],
            ipcs[2],
            ipcs[3],
            ipcs[4],
            masa_gain * 100.0
        ),
    )
}

fn write_recovery_benefit() -> Outcome {
    let config = SimConfig::default();
    let gain = |read_fraction: f64| {
        let trace = conflict_trace(read_fraction, &config.geometry);
        ipc(&with_mode(&config, Mode::Salp2), &trace) / ipc(&with_mode(&config, Mode::Salp1), &trace) - 1.0
    };
    let (reads_only, half_writes) = (gain(1.0), gain(0.5));
    ensure(
        half_writes > reads_only,
        format!(
            "salp2 over salp1: +{:.1}% at write fraction 0.0, +{:.1}% at 0.5",
            reads_only * 100.0,
            half_writes * 100.0
        ),
    )
}

fn row_buffer_and_energy() -> Outcome {
    let config = SimConfig { mode: Mode::Baseline, ..SimConfig::default() };
    let g = &config.geometry;
    let addr = |subarray: usize, column: usize| {
        let coord = salpsim::Coord { subarray, row: 3, column, ..Default::default() };
        salpsim::controller::unmap_address(&coord, g, config.mapping)
    };
    let trace: Vec<TraceEntry> = (0..2000)
        .map(|i| TraceEntry {
            inst_gap: 200,
            is_write: i % 4 == 3,
            phys_addr: addr(i % 2, (i / 2) % g.columns_per_row),
        })
        .collect();
    let params = EnergyParams::default();
    let base = run(&config, std::slice::from_ref(&trace)).unwrap();
    let masa = run(&with_mode(&config, Mode::Masa), &[trace]).unwrap();
    let (hb, hm) = (base.row_hit_rate(), masa.row_hit_rate());
    let (eb, em) = (energy_of(&base, &params).dynamic_nj(), energy_of(&masa, &params).dynamic_nj());
    ensure(
        hm >= hb + 0.10 && em < eb,
        format!("hit rate {:.1}% -> {:.1}%; dynamic energy {eb:.1} -> {em:.1} nJ", hb * 100.0, hm * 100.0),
    )
}

fn subarray_sweep() -> Outcome {
    let base = SimConfig::default();
    let rows_per_bank = base.geometry.rows_per_bank();
    let at = |subarrays: usize| Geometry {
        subarrays_per_bank: subarrays,
        rows_per_subarray: rows_per_bank / subarrays,
        ..base.geometry
    };
    let trace = conflict_trace(1.0, &at(16));
    let mut ipcs = Vec::new();
    for s in [1, 2, 4, 8, 16] {
        ipcs.push(ipc(&SimConfig { geometry: at(s), mode: Mode::Masa, ..base.clone() }, &trace));
    }
    let baseline = ipc(&SimConfig { geometry: at(1), mode: Mode::Baseline, ..base.clone() }, &trace);
    let monotone = ipcs.windows(2).all(|w| w[0] <= w[1]);
    ensure(
        monotone && ipcs[0] == baseline,
        format!(
            "masa ipc over 1/2/4/8/16 subarrays: {}; baseline at 1: {baseline:.4}",
            ipcs.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ")
        ),
    )
}

fn verifier_and_mutations() -> Outcome {
    let mut dirty = Vec::new();
    let mut mutations = Vec::new();
    for seed in 0..1000 {
        let case = common::fuzz_case(seed);
        let r = common::run_case(&case);
        if common::violations(&case, &r) > 0 {
            dirty.push(seed);
        }
        if mutations.len() < 100 {
            // One mutation per run, at a position varying with the seed.
            let mut all = common::mutations(&case.config, r.command_log.as_deref().unwrap());
            if !all.is_empty() {
                let pick = (seed as usize * 7919) % all.len();
                mutations.push((case.config.clone(), all.swap_remove(pick)));
            }
        }
    }
    let missed = mutations
        .iter()
        .filter(|(c, m)| !verify_stream(&m.stream, &c.geometry, &c.timing, c.mode).iter().any(|v| v.rule == m.rule))
        .count();
    let rules: std::collections::BTreeSet<&str> = mutations.iter().map(|(_, m)| m.rule).collect();
    ensure(
        dirty.is_empty() && mutations.len() == 100 && missed == 0,
        format!(
            "1000 fuzzed runs, {} with violations {dirty:?}; {} of {} mutations detected, rules {rules:?}",
            dirty.len(),
            mutations.len() - missed,
            mutations.len()
        ),
    )
}

fn controller_state_bound() -> Outcome {
    let mut worst = (0, Geometry::default());
    for banks in 1..=8 {
        for subarrays in [1, 2, 4, 8] {
            for rows in (0..=16).map(|k| 1usize << k) {
                let g = Geometry {
                    channels: 1,
                    ranks_per_channel: 1,
                    banks_per_rank: banks,
                    subarrays_per_bank: subarrays,
                    rows_per_subarray: rows,
                    ..Geometry::default()
                };
                let bytes = controller_state_bytes(&g, Mode::Masa);
                if bytes > worst.0 {
                    worst = (bytes, g);
                }
            }
        }
    }
    let g = worst.1;
    ensure(
        worst.0 < 256,
        format!(
            "largest is {} bytes at {} banks x {} subarrays x {} rows",
            worst.0, g.banks_per_rank, g.subarrays_per_bank, g.rows_per_subarray
        ),
    )
}

fn degeneracy() -> Outcome {
    let base = SimConfig::default();
    let geometry =
        Geometry { subarrays_per_bank: 1, rows_per_subarray: base.geometry.rows_per_bank(), ..base.geometry };
    let config = SimConfig { geometry, ..base };
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus");
    let load = |name: &str| read_trace_file(&dir.join(format!("{name}.trace")), geometry.capacity()).unwrap();
    let workloads: Vec<(&str, Vec<Vec<TraceEntry>>)> = vec![
        ("conflict", vec![load("conflict")]),
        ("mixed", vec![load("mixed")]),
        ("writes", vec![load("writes")]),
        ("local", vec![load("local")]),
        ("mixed+writes", vec![load("mixed"), load("writes")]),
    ];
    let params = EnergyParams::default();
    let mut differing = Vec::new();
    for (name, traces) in &workloads {
        let csv = |mode| stats_csv(&run(&with_mode(&config, mode), traces).unwrap(), &params);
        let reference = csv(Mode::Baseline);
        for mode in &Mode::ALL[1..] {
            if csv(*mode) != reference {
                differing.push(format!("{name}/{mode}"));
            }
        }
    }
    ensure(differing.is_empty(), format!("{} workloads x 5 modes, differing: {differing:?}", workloads.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("golden timeline ordering", golden_timeline_ordering),
        ("mode ordering on the conflict trace", mode_ordering),
        ("write-recovery benefit grows with writes", write_recovery_benefit),
        ("row-buffer hit rate and dynamic energy", row_buffer_and_energy),
        ("subarray sweep monotonicity", subarray_sweep),
        ("verifier clean and mutations detected", verifier_and_mutations),
        ("controller state under 256 bytes", controller_state_bound),
        ("degeneracy at one subarray", degeneracy),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".to_string()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({secs:.1}s) {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({secs:.1}s) {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
