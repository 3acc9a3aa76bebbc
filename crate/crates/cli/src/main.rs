use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use coopexec::engine::{run_simulation_with, RunOptions};
use coopexec::lab::{self, presets, ExperimentResult, Workload};
use coopexec::{AgentLayout, Error, GraphFamily};

#[derive(Parser)]
#[command(name = "coopexec", version, about = "Simulate cooperative task execution by groups of agents")]
struct Cli {
    /// Master seed; replication r runs with seed + r. Defaults to 1, or to
    /// the config file's seed for `run`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Replications per experiment cell.
    #[arg(long, global = true, default_value_t = lab::DEFAULT_REPLICATIONS)]
    replications: usize,

    /// Write per-run rows as CSV to this path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Print the event log (`time kind group agent task detail`).
    #[arg(long, global = true)]
    trace: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario from a TOML file.
    Run {
        config: PathBuf,
    },
    /// Vary the number of groups.
    SweepGroups(SweepArgs),
    /// Centralized against decentralized control across task counts.
    CompareControls(CompareArgs),
    /// Partition placement on sparse and dense graphs, plus per-group
    /// waiting under both controls.
    DependencyStudy,
    /// Check the waiting-time laws against sampling and enumeration.
    CheckTheorems {
        /// Monte Carlo trials per grid point.
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
    /// Completed-task counts of two groups under the independent partition.
    TaskDistribution,
    /// System ET as the agent speed varies.
    SpeedSweep,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated group counts.
    #[arg(long, value_delimiter = ',', default_values_t = lab::GROUP_COUNTS)]
    groups: Vec<usize>,
    /// Fix the total number of agents (default 50).
    #[arg(long, conflicts_with = "agents_per_group")]
    total_agents: Option<usize>,
    /// Fix the number of agents in each group instead.
    #[arg(long)]
    agents_per_group: Option<usize>,
    #[arg(long, default_value_t = 500)]
    tasks: usize,
    /// `lds`, `hds` or a fixed edge density.
    #[arg(long, default_value = "hds")]
    family: GraphFamily,
}

#[derive(Args)]
struct CompareArgs {
    /// Comma-separated task counts.
    #[arg(long, value_delimiter = ',', default_values_t = lab::CONTROL_TASK_COUNTS)]
    tasks: Vec<usize>,
    #[arg(long, default_value = "lds")]
    family: GraphFamily,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    let mut stdout = io::stdout().lock();
    let out = &mut stdout;
    let seeds = cli.replications;
    let seed = cli.seed.unwrap_or(1);
    match &cli.command {
        Command::Run { config } => {
            let mut scenario = lab::load_scenario_file(config)?;
            if let Some(seed) = cli.seed {
                scenario.master_seed = seed;
            }
            let report = run_simulation_with(&scenario, RunOptions { trace: cli.trace }, &mut ())?;
            for e in &report.events {
                writeln!(out, "{}", e.to_line(&scenario.graph)).map_err(stdout_err)?;
            }
            let mut table = ExperimentResult::new("run", ["et_group", "tasks", "twt_group"]);
            for (g, et) in &report.et_group {
                table.push(
                    format!("g{}", g.0),
                    scenario.master_seed,
                    vec![*et, report.tasks_completed[g] as f64, report.twt_group[g]],
                )?;
            }
            writeln!(
                out,
                "ET {:.4}  TWT {:.4}  tasks {}  events {}  digest {:016x}",
                report.et_system,
                report.twt_system,
                report.total_completed(),
                report.event_count,
                report.log_digest
            )
            .map_err(stdout_err)?;
            print_table(out, &table)?;
            write_out(cli.out.as_deref(), &table)?;
        }
        Command::SweepGroups(a) => {
            let mut preset = presets::group_sweep_total(seed)?;
            preset.workload = Workload::Generated { family: a.family, tasks: a.tasks };
            let sizing = match (a.total_agents, a.agents_per_group) {
                (_, Some(n)) => AgentLayout::PerGroup(n),
                (Some(n), None) => AgentLayout::Total(n),
                (None, None) => AgentLayout::Total(50),
            };
            let res = lab::group_sweep(&preset.base, &preset.workload, &a.groups, sizing, seeds)?;
            print_summary(out, &res)?;
            if res.rows.len() >= 3 {
                let trend = lab::group_sweep_trend(&res)?;
                writeln!(out, "kendall tau(l, ET) = {:.3}  z = {:.2}", trend.tau, trend.z).map_err(stdout_err)?;
            }
            write_out(cli.out.as_deref(), &res)?;
        }
        Command::CompareControls(a) => {
            let (base, _) = presets::control_comparison(seed)?;
            let res = lab::control_comparison(&base, a.family, &a.tasks, seeds)?;
            print_summary(out, &res)?;
            write_out(cli.out.as_deref(), &res)?;
        }
        Command::DependencyStudy => {
            let (pbase, lds, hds) = presets::partition_study(seed)?;
            let controls = presets::group_controls(seed)?;
            let study = lab::dependency_study(&pbase, &lds, &hds, &controls.base, &controls.workload, seeds)?;
            print_summary(out, &study.partitions)?;
            writeln!(out).map_err(stdout_err)?;
            print_summary(out, &study.controls)?;
            let flag = study.hds_inversion().unwrap_or(false);
            writeln!(out, "dense graphs: independent partition lowers TWT but raises ET: {flag}")
                .map_err(stdout_err)?;
            write_out(cli.out.as_deref(), &study.partitions)?;
            if let Some(path) = &cli.out {
                write_out(Some(&sibling(path, "controls")), &study.controls)?;
            }
        }
        Command::CheckTheorems { trials } => {
            let grid = lab::waiting_law_grid(&[100, 1000], &[1, 2, 5], &[0.01, 0.1, 0.3], *trials, seed)?;
            let (z, exact, est) = (
                grid.column("z").unwrap(),
                grid.column("exact").unwrap(),
                grid.column("estimate").unwrap(),
            );
            writeln!(out, "waiting law, {trials} trials per point:").map_err(stdout_err)?;
            for r in &grid.rows {
                writeln!(
                    out,
                    "  {:<22} exact {:>9.3}  estimate {:>9.3}  z {:>6.2}",
                    r.cell, r.values[exact], r.values[est], r.values[z]
                )
                .map_err(stdout_err)?;
            }
            let within = grid.rows.iter().filter(|r| r.values[z].abs() <= 3.0).count();
            writeln!(out, "  {within}/{} points within 3 standard errors", grid.rows.len()).map_err(stdout_err)?;
            let ms: Vec<usize> = (2..=12).collect();
            let fc = lab::fully_connected_table(&ms, &[0.1, 0.5, 0.9])?;
            writeln!(out, "fully connected model (exact, proxy):").map_err(stdout_err)?;
            for r in &fc.rows {
                writeln!(out, "  {:<14} {:>12.6} {:>12.6e}", r.cell, r.values[2], r.values[3]).map_err(stdout_err)?;
            }
            write_out(cli.out.as_deref(), &grid)?;
        }
        Command::TaskDistribution => {
            let (base, workloads) = presets::task_distribution(seed)?;
            let res = lab::task_distribution(&base, &workloads, seeds)?;
            print_summary(out, &res)?;
            write_out(cli.out.as_deref(), &res)?;
        }
        Command::SpeedSweep => {
            let (preset, speeds) = presets::speed_sweep(seed)?;
            let res = lab::speed_sweep(&preset.base, &preset.workload, &speeds, seeds)?;
            print_summary(out, &res)?;
            write_out(cli.out.as_deref(), &res)?;
        }
    }
    Ok(())
}

fn stdout_err(e: io::Error) -> Error {
    Error::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    }
}

/// `dir/name.csv` -> `dir/name-<suffix>.csv`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    let name = match path.extension() {
        Some(ext) => format!("{stem}-{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}-{suffix}"),
    };
    path.with_file_name(name)
}

fn write_out(path: Option<&Path>, result: &ExperimentResult) -> Result<(), Error> {
    let Some(path) = path else { return Ok(()) };
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    result.write_csv(BufWriter::new(file))
}

fn print_table(out: &mut impl Write, result: &ExperimentResult) -> Result<(), Error> {
    write!(out, "{:<12}", "cell").map_err(stdout_err)?;
    for c in &result.columns {
        write!(out, " {c:>12}").map_err(stdout_err)?;
    }
    writeln!(out).map_err(stdout_err)?;
    for r in &result.rows {
        write!(out, "{:<12}", r.cell).map_err(stdout_err)?;
        for v in &r.values {
            write!(out, " {v:>12.4}").map_err(stdout_err)?;
        }
        writeln!(out).map_err(stdout_err)?;
    }
    Ok(())
}

/// Mean and standard deviation of every column per cell.
fn print_summary(out: &mut impl Write, result: &ExperimentResult) -> Result<(), Error> {
    let runs = result.rows.len() / result.cells().len().max(1);
    writeln!(out, "{} ({} runs per cell, mean ± std)", result.name, runs).map_err(stdout_err)?;
    write!(out, "{:<24}", "cell").map_err(stdout_err)?;
    for c in &result.columns {
        write!(out, " {c:>22}").map_err(stdout_err)?;
    }
    writeln!(out).map_err(stdout_err)?;
    let summary = result.summary();
    for cell in result.cells() {
        write!(out, "{cell:<24}").map_err(stdout_err)?;
        for s in summary.iter().filter(|s| s.cell == cell) {
            write!(out, " {:>22}", format!("{:.3} ± {:.3}", s.mean, s.std)).map_err(stdout_err)?;
        }
        writeln!(out).map_err(stdout_err)?;
    }
    Ok(())
}
