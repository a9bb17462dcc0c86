use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use salpsim::scenario::{render_timeline, run_scenario, SCENARIOS};
use salpsim::stats::{comparison_csv, energy_of, stats_csv, summarize};
use salpsim::trace::{read_trace_file, render_trace, synth_trace, SynthParams, TraceEntry};
use salpsim::verify::{parse_command_log, render_command_log, verify_stream};
use salpsim::{run, Mode, SimConfig, SimError, SimResult};

#[derive(Parser)]
#[command(name = "salpsim", version, about = "Cycle-level DRAM simulator with subarray-level parallelism")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate traces or a built-in scenario and write the stats CSV.
    Run(RunArgs),
    /// Run every combination of the swept parameters and write one row per run.
    Sweep(SweepArgs),
    /// Generate a synthetic trace.
    Synth(SynthArgs),
    /// Check a recorded command log against the timing and state rules.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// key = value configuration file; `#` starts a comment.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set tRCD=14`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Subarrays per bank. Rows per subarray are rescaled so rows per bank stay the same.
    #[arg(long)]
    subarrays: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// baseline, salp1, salp2, masa, ideal, or `all` for a mode comparison.
    #[arg(long)]
    mode: Option<String>,
    /// Trace file, one per core. Repeatable.
    #[arg(long, num_args = 1..)]
    trace: Vec<PathBuf>,
    /// Built-in scenario to run instead of traces.
    #[arg(long)]
    scenario: Option<String>,
    /// Print the command timeline of the scenario (all modes unless --mode is given).
    #[arg(long, requires = "scenario")]
    timeline: bool,
    /// Output file; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the issued commands as CSV.
    #[arg(long, value_name = "PATH")]
    log_commands: Option<PathBuf>,
    /// Check the issued commands and fail on any violation.
    #[arg(long)]
    verify: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    mode: Option<Mode>,
    /// Trace file, one per core. Repeatable.
    #[arg(long, num_args = 1.., required = true)]
    trace: Vec<PathBuf>,
    /// PARAM=V1,V2,... with PARAM one of subarrays, banks, channels, ranks, mode. Repeatable.
    #[arg(long, value_name = "PARAM=VALUES", required = true)]
    sweep: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, default_value_t = 10_000)]
    requests: usize,
    #[arg(long, default_value_t = 1.0)]
    read_fraction: f64,
    /// Mean non-memory instructions between requests.
    #[arg(long, default_value_t = 10.0)]
    gap: f64,
    /// Probability that a request reuses the previous row of its bank.
    #[arg(long, default_value_t = 0.0)]
    row_hit_prob: f64,
    /// Bank popularity skew; `inf` sends everything to one bank.
    #[arg(long, default_value_t = 1.0)]
    bank_skew: f64,
    /// Keep new rows in the subarray of the previous one.
    #[arg(long)]
    no_spread: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    mode: Option<Mode>,
    /// Command log CSV as written by `run --log-commands`.
    #[arg(long)]
    log: PathBuf,
}

enum Failure {
    Input(anyhow::Error),
    Integrity(anyhow::Error),
    Violations(usize),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

fn sim_failure(e: SimError) -> Failure {
    if e.is_integrity_fault() {
        Failure::Integrity(e.into())
    } else {
        Failure::Input(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Cmd::Run(a) => cmd_run(a),
        Cmd::Sweep(a) => cmd_sweep(a),
        Cmd::Synth(a) => cmd_synth(a),
        Cmd::Verify(a) => cmd_verify(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Integrity(e)) => {
            eprintln!("integrity fault: {e:#}");
            ExitCode::from(3)
        }
        Err(Failure::Violations(n)) => {
            eprintln!("{n} command-protocol violations");
            ExitCode::from(4)
        }
    }
}

fn with_subarrays(config: &SimConfig, subarrays: usize) -> anyhow::Result<SimConfig> {
    let rows_per_bank = config.geometry.rows_per_bank();
    if subarrays == 0 || !rows_per_bank.is_multiple_of(subarrays) {
        bail!("{subarrays} subarrays do not divide {rows_per_bank} rows per bank");
    }
    let mut c = config.clone();
    c.geometry.subarrays_per_bank = subarrays;
    c.geometry.rows_per_subarray = rows_per_bank / subarrays;
    Ok(c)
}

fn load_config(args: &ConfigArgs) -> anyhow::Result<SimConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            SimConfig::parse(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => SimConfig::default(),
    };
    for o in &args.overrides {
        let (key, value) = o.split_once('=').ok_or_else(|| anyhow!("--set expects KEY=VALUE, got `{o}`"))?;
        config.set(key.trim(), value.trim())?;
    }
    if let Some(s) = args.subarrays {
        config = with_subarrays(&config, s)?;
    }
    config.validate()?;
    Ok(config)
}

fn load_traces(paths: &[PathBuf], config: &SimConfig) -> anyhow::Result<Vec<Vec<TraceEntry>>> {
    paths
        .iter()
        .map(|p| read_trace_file(p, config.geometry.capacity()).with_context(|| format!("trace {}", p.display())))
        .collect()
}

fn write_out(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Stream-clean check of a finished run's command log.
fn check_log(config: &SimConfig, result: &SimResult) -> Result<(), Failure> {
    let log = result.command_log.as_deref().unwrap_or_default();
    let violations = verify_stream(log, &config.geometry, &config.timing, config.mode);
    for v in violations.iter().take(20) {
        eprintln!("{v}");
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Violations(violations.len()))
    }
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let mut config = load_config(&args.config)?;
    let record = args.log_commands.is_some() || args.verify;
    config.record_commands = record;
    let modes: Vec<Mode> = match args.mode.as_deref() {
        Some("all") => Mode::ALL.to_vec(),
        Some(m) => vec![m.parse().map_err(anyhow::Error::from)?],
        None if args.timeline => Mode::ALL.to_vec(),
        None => vec![config.mode],
    };

    if let Some(name) = &args.scenario {
        if !args.trace.is_empty() {
            return Err(anyhow!("--scenario and --trace are mutually exclusive").into());
        }
        if !SCENARIOS.contains(&name.as_str()) {
            return Err(anyhow!("unknown scenario `{name}`; known: {}", SCENARIOS.join(", ")).into());
        }
    } else if args.trace.is_empty() {
        return Err(anyhow!("give --trace or --scenario").into());
    }
    if modes.len() > 1 && args.log_commands.is_some() {
        return Err(anyhow!("--log-commands needs a single mode").into());
    }

    let traces = load_traces(&args.trace, &config)?;
    let results: Vec<Result<(SimConfig, SimResult), SimError>> = modes
        .par_iter()
        .map(|&mode| {
            let c = SimConfig { mode, ..config.clone() };
            let r = match &args.scenario {
                Some(name) => run_scenario(name, &c)?,
                None => run(&c, &traces)?,
            };
            Ok((c, r))
        })
        .collect();
    let results: Vec<(SimConfig, SimResult)> = results.into_iter().collect::<Result<_, _>>().map_err(sim_failure)?;

    if args.verify {
        for (c, r) in &results {
            check_log(c, r)?;
        }
    }
    if let (Some(path), [(_, r)]) = (&args.log_commands, results.as_slice()) {
        let log = r.command_log.as_deref().unwrap_or_default();
        fs::write(path, render_command_log(log)).with_context(|| format!("writing {}", path.display()))?;
    }

    let text = if args.timeline {
        results.iter().map(|(_, r)| render_timeline(r)).collect::<Vec<_>>().join("\n")
    } else if results.len() > 1 {
        let plain: Vec<SimResult> = results.into_iter().map(|(_, r)| r).collect();
        comparison_csv(&summarize(&plain, &config.energy).map_err(anyhow::Error::from)?)
    } else {
        stats_csv(&results[0].1, &config.energy)
    };
    write_out(args.out.as_deref(), &text)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SweepParam {
    Subarrays,
    Banks,
    Channels,
    Ranks,
    Mode,
}

impl SweepParam {
    fn parse(name: &str) -> anyhow::Result<Self> {
        Ok(match name.trim() {
            "subarrays" | "subarrays_per_bank" => SweepParam::Subarrays,
            "banks" | "banks_per_rank" => SweepParam::Banks,
            "channels" => SweepParam::Channels,
            "ranks" | "ranks_per_channel" => SweepParam::Ranks,
            "mode" => SweepParam::Mode,
            other => bail!("cannot sweep `{other}`; use subarrays, banks, channels, ranks or mode"),
        })
    }

    fn range(&self) -> Option<(usize, usize)> {
        match self {
            SweepParam::Subarrays => Some((1, 128)),
            SweepParam::Banks => Some((8, 64)),
            SweepParam::Channels | SweepParam::Ranks => Some((1, 8)),
            SweepParam::Mode => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum SweepValue {
    Count(usize),
    Mode(Mode),
}

fn parse_sweep(arg: &str) -> anyhow::Result<(SweepParam, Vec<SweepValue>)> {
    let (name, values) = arg.split_once('=').ok_or_else(|| anyhow!("--sweep expects PARAM=V1,V2,..., got `{arg}`"))?;
    let param = SweepParam::parse(name)?;
    let values = values
        .split(',')
        .map(|v| {
            let v = v.trim();
            match param.range() {
                None => Ok(SweepValue::Mode(v.parse()?)),
                Some((lo, hi)) => {
                    let n: usize = v.parse().with_context(|| format!("{name}: `{v}` is not a count"))?;
                    if !(lo..=hi).contains(&n) {
                        bail!("{name}={n} is outside the supported range {lo}..={hi}");
                    }
                    Ok(SweepValue::Count(n))
                }
            }
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    if values.is_empty() {
        bail!("--sweep {name} has no values");
    }
    Ok((param, values))
}

fn apply_sweep(config: &SimConfig, param: SweepParam, value: SweepValue) -> anyhow::Result<SimConfig> {
    let mut c = config.clone();
    match (param, value) {
        (SweepParam::Subarrays, SweepValue::Count(n)) => c = with_subarrays(&c, n)?,
        (SweepParam::Banks, SweepValue::Count(n)) => c.geometry.banks_per_rank = n,
        (SweepParam::Channels, SweepValue::Count(n)) => c.geometry.channels = n,
        (SweepParam::Ranks, SweepValue::Count(n)) => c.geometry.ranks_per_channel = n,
        (SweepParam::Mode, SweepValue::Mode(m)) => c.mode = m,
        _ => unreachable!("values are parsed per parameter"),
    }
    Ok(c)
}

const SWEEP_HEADER: &str =
    "channels,ranks,banks,subarrays,rows_per_subarray,mode,instructions,dram_cycles,ipc,row_hit_rate,dynamic_nj,static_nj,total_nj";

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    let mut base = load_config(&args.config)?;
    if let Some(m) = args.mode {
        base.mode = m;
    }
    let mut seen = Vec::new();
    let mut configs = vec![base.clone()];
    for arg in &args.sweep {
        let (param, values) = parse_sweep(arg)?;
        if seen.contains(&param) {
            return Err(anyhow!("parameter swept twice: {arg}").into());
        }
        seen.push(param);
        let mut next = Vec::with_capacity(configs.len() * values.len());
        for c in &configs {
            for &v in &values {
                let swept = apply_sweep(c, param, v)?;
                swept.validate().map_err(anyhow::Error::from)?;
                next.push(swept);
            }
        }
        configs = next;
    }
    let traces = load_traces(&args.trace, &base)?;
    for c in &configs {
        let capacity = c.geometry.capacity();
        for (path, t) in args.trace.iter().zip(&traces) {
            if let Some(e) = t.iter().find(|e| e.phys_addr >= capacity) {
                return Err(anyhow!(
                    "trace {} address {:#x} exceeds the {capacity}-byte memory of a swept configuration",
                    path.display(),
                    e.phys_addr
                )
                .into());
            }
        }
    }

    let results: Vec<Result<SimResult, SimError>> = configs.par_iter().map(|c| run(c, &traces)).collect();
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for (c, r) in configs.iter().zip(results) {
        let r = r.map_err(sim_failure)?;
        let e = energy_of(&r, &c.energy);
        let g = &c.geometry;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{:.6},{:.6},{:.3},{:.3},{:.3}\n",
            g.channels,
            g.ranks_per_channel,
            g.banks_per_rank,
            g.subarrays_per_bank,
            g.rows_per_subarray,
            c.mode,
            r.instructions(),
            r.dram_cycles,
            r.ipc(),
            r.row_hit_rate(),
            e.dynamic_nj(),
            e.static_nj,
            e.total_nj()
        ));
    }
    write_out(args.out.as_deref(), &out)?;
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<(), Failure> {
    let config = load_config(&args.config)?;
    let p = SynthParams {
        n_requests: args.requests,
        read_fraction: args.read_fraction,
        mean_inst_gap: args.gap,
        row_hit_prob: args.row_hit_prob,
        bank_skew: args.bank_skew,
        subarray_spread: !args.no_spread,
        seed: args.seed,
    };
    let trace = synth_trace(&p, &config.geometry, config.mapping).map_err(anyhow::Error::from)?;
    write_out(args.out.as_deref(), &render_trace(&trace, &p.header()))?;
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Failure> {
    let mut config = load_config(&args.config)?;
    if let Some(m) = args.mode {
        config.mode = m;
    }
    let text = fs::read_to_string(&args.log).with_context(|| format!("reading {}", args.log.display()))?;
    let log = parse_command_log(&text).with_context(|| format!("in {}", args.log.display()))?;
    let violations = verify_stream(&log, &config.geometry, &config.timing, config.mode);
    for v in &violations {
        println!("{v}");
    }
    if violations.is_empty() {
        println!("{} commands, no violations", log.len());
        Ok(())
    } else {
        Err(Failure::Violations(violations.len()))
    }
}
