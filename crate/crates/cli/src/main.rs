//! `msmr`: delay bounds, priority assignment, simulation, and
//! acceptance-ratio experiments for multi-stage multi-resource pipelines.
//!
//! Exit codes: 0 = ran, 1 = infeasible verdict under `--check`,
//! 2 = usage or parse error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use msmr_cli::config::load_spec;
use msmr_cli::experiment::{rows_to_csv, run_admission, run_experiment};
use msmr_cli::report::{analyze, AnalyzeMethod};
use msmr_core::assign::PriorityOrdering;
use msmr_core::dca::BoundMode;
use msmr_core::error::Error;
use msmr_core::io;
use msmr_core::model::JobId;
use msmr_core::opt::{export_lp, DEFAULT_NODE_BUDGET};
use msmr_core::sim::{simulate, DispatchPolicy, Preemption, SimConfig};
use msmr_core::workload::{generate, parse_ratio, EdgeConfig};

#[derive(Parser)]
#[command(
    name = "msmr",
    about = "Fixed-priority end-to-end delay analysis for multi-stage multi-resource pipelines",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Analyze an instance file: bounds, assignments, feasibility.
    Analyze(AnalyzeArgs),
    /// Generate an edge workload instance.
    Generate(GenerateArgs),
    /// Simulate an instance under a fixed-priority dispatch policy.
    Simulate(SimulateArgs),
    /// Run an acceptance-ratio sweep from a TOML spec, writing CSV.
    Sweep(SweepArgs),
    /// Run the admission-controller experiment (rejected heaviness).
    Admit(SweepArgs),
    /// Write the pairwise feasibility problem in LP text format.
    ExportLp(ExportLpArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Instance file (text or JSON form).
    file: PathBuf,
    /// bound | dm | dmr | opdca | opdca-admit | dmr-admit | opt | dcmp
    #[arg(long)]
    method: String,
    /// p-single | np-single | p-multi | np-multi | np-opa | p-refined | edge
    #[arg(long, default_value = "edge")]
    mode: String,
    /// Comma-separated job ids, highest priority first (method=bound).
    #[arg(long)]
    ordering: Option<String>,
    /// Node budget for the exact solver.
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    budget: u64,
    /// Emit the report as JSON.
    #[arg(long)]
    json: bool,
    /// Exit with code 1 when the verdict is not feasible.
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 25)]
    aps: usize,
    #[arg(long, default_value_t = 20)]
    servers: usize,
    #[arg(long, default_value_t = 100)]
    jobs: usize,
    /// Heaviness threshold, e.g. 0.15.
    #[arg(long, default_value = "0.15")]
    beta: String,
    /// Per-stage heavy-job ratios, e.g. 0.05,0.05,0.01.
    #[arg(long, default_value = "0.05,0.05,0.01")]
    heavy: String,
    /// System heaviness bound.
    #[arg(long, default_value = "0.7")]
    gamma: String,
    /// Optional upper cap on sampled deadlines (scheduling horizon).
    #[arg(long)]
    deadline_cap: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// text | json
    #[arg(long, default_value = "text")]
    format: String,
    /// Output file (stdout when omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Print the heaviness report to stderr.
    #[arg(long)]
    report: bool,
}

#[derive(Args)]
struct SimulateArgs {
    file: PathBuf,
    /// Comma-separated job ids, highest priority first.
    #[arg(long, conflicts_with = "dcmp")]
    ordering: Option<String>,
    /// Dispatch by virtual deadlines (the decomposition baseline).
    #[arg(long)]
    dcmp: bool,
    /// edge | comma list of p/np per stage (default: all preemptive).
    #[arg(long)]
    preempt: Option<String>,
    /// Write the event trace to a file.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Exit with code 1 when some job misses its deadline.
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Experiment spec (TOML).
    #[arg(long)]
    config: PathBuf,
    /// CSV output (stdout when omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExportLpArgs {
    file: PathBuf,
    #[arg(long, default_value = "p-refined")]
    mode: String,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn parse_mode(s: &str) -> Result<BoundMode, Error> {
    match s {
        "p-single" => Ok(BoundMode::PreemptiveSingle),
        "np-single" => Ok(BoundMode::NonpreemptiveSingle),
        "p-multi" => Ok(BoundMode::PreemptiveMulti),
        "np-multi" => Ok(BoundMode::NonpreemptiveMulti),
        "np-opa" => Ok(BoundMode::NonpreemptiveOpa),
        "p-refined" => Ok(BoundMode::PreemptiveRefined),
        "edge" => Ok(BoundMode::EdgeMixed),
        other => Err(Error::Argument(format!("unknown mode '{other}'"))),
    }
}

fn parse_ordering(s: &str) -> Result<Vec<JobId>, Error> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::Argument(format!("bad job id '{t}' in ordering")))
        })
        .collect()
}

fn parse_preemption(s: &str, n_stages: usize) -> Result<Vec<Preemption>, Error> {
    if s == "edge" {
        if n_stages != 3 {
            return Err(Error::Argument(
                "preempt=edge requires a 3-stage instance".into(),
            ));
        }
        return Ok(SimConfig::edge().preemption);
    }
    let flags: Vec<Preemption> = s
        .split(',')
        .map(|t| match t.trim() {
            "p" => Ok(Preemption::Preemptive),
            "np" => Ok(Preemption::NonPreemptive),
            other => Err(Error::Argument(format!("bad preemption flag '{other}'"))),
        })
        .collect::<Result<_, _>>()?;
    if flags.len() != n_stages {
        return Err(Error::Argument(format!(
            "{} preemption flags for {n_stages} stages",
            flags.len()
        )));
    }
    Ok(flags)
}

fn read_instance(path: &PathBuf) -> Result<msmr_core::model::JobSet, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Argument(format!("cannot read {}: {e}", path.display())))?;
    io::parse_jobset(&text)
}

fn write_output(path: &Option<PathBuf>, content: &str) -> Result<(), Error> {
    match path {
        Some(p) => fs::write(p, content)
            .map_err(|e| Error::Argument(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.cmd {
        Cmd::Analyze(args) => {
            let jobset = read_instance(&args.file)?;
            let method = AnalyzeMethod::parse(&args.method)?;
            let mode = parse_mode(&args.mode)?;
            let ordering = match &args.ordering {
                Some(s) => Some(parse_ordering(s)?),
                None => None,
            };
            let report = analyze(&jobset, method, mode, ordering.as_deref(), args.budget)?;
            if args.json {
                print!("{}", report.to_json());
            } else {
                print!("{}", report.to_text());
            }
            Ok(if args.check && report.is_infeasible() { 1 } else { 0 })
        }
        Cmd::Generate(args) => {
            let heavy: Vec<&str> = args.heavy.split(',').collect();
            if heavy.len() != 3 {
                return Err(Error::Argument(
                    "--heavy needs exactly three comma-separated ratios".into(),
                ));
            }
            let cfg = EdgeConfig {
                num_aps: args.aps,
                num_servers: args.servers,
                num_jobs: args.jobs,
                beta: parse_ratio(&args.beta)?,
                heavy_targets: [
                    parse_ratio(heavy[0])?,
                    parse_ratio(heavy[1])?,
                    parse_ratio(heavy[2])?,
                ],
                gamma: parse_ratio(&args.gamma)?,
                deadline_cap: args.deadline_cap,
                seed: args.seed,
                ..EdgeConfig::default()
            };
            let (jobset, report) = generate(&cfg)?;
            let content = match args.format.as_str() {
                "text" => io::write_jobset_text(&jobset),
                "json" => io::write_jobset_json(&jobset),
                other => {
                    return Err(Error::Argument(format!("unknown format '{other}'")))
                }
            };
            write_output(&args.output, &content)?;
            if args.report {
                eprintln!("H = {}", report.max_chi);
                for (j, r) in report.heavy_ratio.iter().enumerate() {
                    eprintln!("stage {j}: heavy ratio {r}");
                }
            }
            Ok(0)
        }
        Cmd::Simulate(args) => {
            let jobset = read_instance(&args.file)?;
            let n_stages = jobset.num_stages();
            let preemption = match &args.preempt {
                Some(s) => parse_preemption(s, n_stages)?,
                None => SimConfig::uniform(n_stages, Preemption::Preemptive).preemption,
            };
            let config = SimConfig {
                preemption: preemption.clone(),
                tie_break: msmr_core::sim::TieBreak::LowestId,
            };
            let trace = if args.dcmp {
                let vds = msmr_core::sim::virtual_deadlines(&jobset)?;
                let keys: Vec<Vec<u64>> = jobset
                    .jobs
                    .iter()
                    .zip(&vds)
                    .map(|(job, vd)| {
                        let mut acc = job.arrival;
                        vd.iter()
                            .map(|&d| {
                                acc = acc.saturating_add(d);
                                acc
                            })
                            .collect()
                    })
                    .collect();
                simulate(&jobset, &DispatchPolicy::StageKeys(keys), &config)?
            } else {
                let ranked = parse_ordering(args.ordering.as_deref().ok_or_else(|| {
                    Error::Argument("simulate needs --ordering or --dcmp".into())
                })?)?;
                let ordering = PriorityOrdering::from_ranked(ranked)?;
                simulate(&jobset, &DispatchPolicy::Ordering(ordering), &config)?
            };
            if let Some(path) = &args.trace {
                fs::write(path, io::write_trace_events(&trace)).map_err(|e| {
                    Error::Argument(format!("cannot write {}: {e}", path.display()))
                })?;
            }
            print!("{}", io::write_completion_table(&jobset, &trace));
            let all_met = jobset
                .jobs
                .iter()
                .enumerate()
                .all(|(i, job)| trace.completion[i] <= job.window_end());
            Ok(if args.check && !all_met { 1 } else { 0 })
        }
        Cmd::Sweep(args) => {
            let text = fs::read_to_string(&args.config).map_err(|e| {
                Error::Argument(format!("cannot read {}: {e}", args.config.display()))
            })?;
            let spec = load_spec(&text)?;
            let rows = run_experiment(&spec)?;
            let dest = args.output.or_else(|| spec.output.clone());
            write_output(&dest, &rows_to_csv(&rows, spec.timings))?;
            Ok(0)
        }
        Cmd::Admit(args) => {
            let text = fs::read_to_string(&args.config).map_err(|e| {
                Error::Argument(format!("cannot read {}: {e}", args.config.display()))
            })?;
            let spec = load_spec(&text)?;
            let rows = run_admission(&spec)?;
            let dest = args.output.or_else(|| spec.output.clone());
            write_output(&dest, &rows_to_csv(&rows, spec.timings))?;
            Ok(0)
        }
        Cmd::ExportLp(args) => {
            let jobset = read_instance(&args.file)?;
            let mode = parse_mode(&args.mode)?;
            let lp = export_lp(&jobset, mode)?;
            write_output(&args.output, &lp)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
