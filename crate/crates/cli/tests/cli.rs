use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn salpsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_salpsim")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A small conflict-heavy trace in `dir`.
fn conflict_trace(dir: &TempDir) -> PathBuf {
    let t = path(dir, "conflict.trc");
    stdout(&salpsim(&["synth", "--requests", "3000", "--bank-skew", "8", "--read-fraction", "0.8", "--out", s(&t)]));
    t
}

#[test]
fn run_writes_stats_with_the_documented_header() {
    let dir = TempDir::new().unwrap();
    let t = conflict_trace(&dir);
    let out = path(&dir, "stats.csv");
    stdout(&salpsim(&["run", "--mode", "masa", "--trace", s(&t), "--out", s(&out)]));
    let csv = fs::read_to_string(out).unwrap();
    assert_eq!(csv.lines().next(), Some(salpsim::stats::STATS_HEADER));
    assert!(csv.lines().last().unwrap().starts_with("all,"));
}

#[test]
fn one_subarray_makes_baseline_and_masa_identical() {
    let dir = TempDir::new().unwrap();
    let t = conflict_trace(&dir);
    let base = stdout(&salpsim(&["run", "--mode", "baseline", "--subarrays", "1", "--trace", s(&t)]));
    let masa = stdout(&salpsim(&["run", "--mode", "masa", "--subarrays", "1", "--trace", s(&t)]));
    assert_eq!(base, masa);
}

#[test]
fn timeline_matches_the_golden_files() {
    let text = stdout(&salpsim(&["run", "--timeline", "--scenario", "fig23"]));
    let golden_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden");
    let expected: Vec<String> = ["baseline", "salp1", "salp2", "masa", "ideal"]
        .iter()
        .map(|m| fs::read_to_string(golden_dir.join(format!("fig23_{m}.txt"))).unwrap())
        .collect();
    assert_eq!(text, expected.join("\n"));
}

#[test]
fn logged_commands_verify_clean_and_a_moved_command_is_caught() {
    let dir = TempDir::new().unwrap();
    let t = conflict_trace(&dir);
    let log = path(&dir, "log.csv");
    stdout(&salpsim(&["run", "--mode", "salp2", "--trace", s(&t), "--log-commands", s(&log), "--verify"]));
    let report = stdout(&salpsim(&["verify", "--mode", "salp2", "--log", s(&log)]));
    assert!(report.contains("no violations"), "{report}");

    // A read of the first activated row moved to one cycle after its ACT breaks tRCD.
    let text = fs::read_to_string(&log).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let act: Vec<&str> = lines[1].split(',').collect();
    let target = act[2..7].join(",");
    let act: u64 = act[0].parse().unwrap();
    let rd = lines.iter().position(|l| l.contains(&format!(",RD,{target},"))).unwrap();
    let rest = lines[rd].split_once(',').unwrap().1.to_string();
    lines.remove(rd);
    lines.insert(2, format!("{},{rest}", act + 1));
    let bad = path(&dir, "bad.csv");
    fs::write(&bad, lines.join("\n")).unwrap();
    let o = salpsim(&["verify", "--mode", "salp2", "--log", s(&bad)]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stdout).contains("tRCD"));
}

#[test]
fn sweep_is_ordered_stable_and_monotone_in_subarrays() {
    let dir = TempDir::new().unwrap();
    let t = conflict_trace(&dir);
    let args = ["sweep", "--mode", "masa", "--trace", s(&t), "--sweep", "subarrays=1,2,4,8"];
    let first = stdout(&salpsim(&args));
    assert_eq!(first, stdout(&salpsim(&args)));
    let rows: Vec<Vec<&str>> = first.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.iter().map(|r| r[3]).collect::<Vec<_>>(), ["1", "2", "4", "8"]);
    let ipc: Vec<f64> = rows.iter().map(|r| r[8].parse().unwrap()).collect();
    assert!(ipc.windows(2).all(|w| w[0] <= w[1]), "{ipc:?}");
}

#[test]
fn sweep_rows_agree_across_modes_at_one_subarray() {
    let dir = TempDir::new().unwrap();
    let t = conflict_trace(&dir);
    let out = stdout(&salpsim(&[
        "sweep",
        "--trace",
        s(&t),
        "--sweep",
        "subarrays=1",
        "--sweep",
        "mode=baseline,salp1,salp2,masa,ideal",
    ]));
    let tails: Vec<String> = out
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            f[6..].join(",")
        })
        .collect();
    assert_eq!(tails.len(), 5);
    assert!(tails.iter().all(|t| *t == tails[0]), "{tails:?}");
}

#[test]
fn bad_input_exits_with_status_two() {
    let dir = TempDir::new().unwrap();
    let t = conflict_trace(&dir);
    let out_of_range = salpsim(&["sweep", "--trace", s(&t), "--sweep", "banks=4,8"]);
    assert_eq!(out_of_range.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out_of_range.stderr).contains("banks=4"));

    let cfg = path(&dir, "bad.cfg");
    fs::write(&cfg, "tRCD = 11\nthis line has no equals sign\n").unwrap();
    let o = salpsim(&["run", "--config", s(&cfg), "--trace", s(&t)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let garbage = path(&dir, "garbage.trc");
    fs::write(&garbage, "0 R 0x40\n3 X 0x80\n").unwrap();
    assert_eq!(salpsim(&["run", "--trace", s(&garbage)]).status.code(), Some(2));
    assert_eq!(salpsim(&["run", "--scenario", "nope"]).status.code(), Some(2));
}

#[test]
fn config_file_and_flags_override_defaults() {
    let dir = TempDir::new().unwrap();
    let t = conflict_trace(&dir);
    let cfg = path(&dir, "slow.cfg");
    fs::write(&cfg, "# slower activation\ntRCD = 20\nmode = salp1\n").unwrap();
    let slow = stdout(&salpsim(&["run", "--config", s(&cfg), "--trace", s(&t)]));
    let default = stdout(&salpsim(&["run", "--mode", "salp1", "--trace", s(&t)]));
    let fast = stdout(&salpsim(&["run", "--config", s(&cfg), "--set", "tRCD=11", "--trace", s(&t)]));
    assert_ne!(slow, default);
    assert_eq!(fast, default);
}
