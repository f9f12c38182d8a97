//! `nepio`: solve problem files, run experiment presets, time the prox.
//!
//! Exit codes: 0 on success, 2 when a solve stops at `max_outer` without
//! meeting its tolerance, 1 on any input or I/O error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nepio_core::experiments::bench::{bench_prox, ProxStructure};
use nepio_core::experiments::{run_experiment, summarize, write_csv, ExperimentSpec, Selection};
use nepio_core::{nepio_solve, ConstraintDescription, Execution, FixedPointSettings, RegressionProblem, SolverConfig};

#[derive(Parser)]
#[command(name = "nepio", version, about = "Structured sparse regression with the accelerated prox solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem file and write the result as JSON.
    Solve {
        /// Problem JSON: {"X": [[..], ..], "y": [..], "rho": r}.
        #[arg(long)]
        problem: PathBuf,
        /// Constraint JSON (grid1d, grid2d, tree or none).
        #[arg(long)]
        constraint: PathBuf,
        /// Result file; stdout when omitted.
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverFlags,
        /// Write wall times as 0 so the output is byte-stable.
        #[arg(long)]
        omit_timings: bool,
    },
    /// Run an experiment and write one CSV row per (method, m, run).
    Experiment {
        /// Experiment spec JSON.
        #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
        spec: Option<PathBuf>,
        /// Named preset: regions1d, regions2d, scaling, wavelet_tree.
        #[arg(long)]
        preset: Option<String>,
        #[arg(long, short)]
        output: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        select: Option<SelectArg>,
        /// Override the number of runs per sample size.
        #[arg(long)]
        runs: Option<usize>,
        /// Restrict to these sample sizes (comma separated).
        #[arg(long, value_delimiter = ',')]
        sample_sizes: Option<Vec<usize>>,
        #[command(flatten)]
        solver: SolverFlags,
        /// Run cells one after another instead of on the thread pool.
        #[arg(long)]
        sequential: bool,
        /// Write wall times as 0 so the CSV is byte-stable.
        #[arg(long)]
        omit_timings: bool,
    },
    /// Time prox evaluations on random inputs.
    BenchProx {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, value_enum, default_value_t = StructureArg::Grid1d)]
        structure: StructureArg,
        #[arg(long, default_value_t = 10)]
        repetitions: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.2)]
        kappa: f64,
        #[arg(long, default_value_t = 1e-2)]
        inner_tol: f64,
        /// JSON report file; a summary is always printed.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Default)]
struct SolverFlags {
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    inner_tol: Option<f64>,
    #[arg(long)]
    outer_tol: Option<f64>,
    #[arg(long)]
    max_outer: Option<usize>,
}

impl SolverFlags {
    fn apply(&self, mut config: SolverConfig) -> SolverConfig {
        if let Some(k) = self.kappa {
            config.kappa = k;
        }
        if let Some(t) = self.inner_tol {
            config.inner_tol = t;
        }
        if let Some(t) = self.outer_tol {
            config.outer_tol = t;
        }
        if let Some(m) = self.max_outer {
            config.max_outer = m;
        }
        config
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SelectArg {
    Oracle,
    Validation,
}

#[derive(Clone, Copy, ValueEnum)]
enum StructureArg {
    Grid1d,
    Grid2d,
    Tree,
}

type CliResult<T> = Result<T, String>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn cmd_solve(problem: &Path, constraint: &Path, output: Option<&Path>, flags: &SolverFlags, omit_timings: bool) -> CliResult<ExitCode> {
    let pb = RegressionProblem::from_json(&read(problem)?).map_err(|e| format!("{}: {e}", problem.display()))?;
    let set = ConstraintDescription::from_json(&read(constraint)?)
        .and_then(|d| d.build())
        .map_err(|e| format!("{}: {e}", constraint.display()))?;
    let config = flags.apply(SolverConfig::default());
    let out = nepio_solve(&pb, &set, &config).map_err(|e| e.to_string())?;
    let mut report = out.report();
    if omit_timings {
        report.wall_time_ms = 0.0;
    }
    let text = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())? + "\n";
    match output {
        Some(path) => write(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    if out.converged {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("warning: stopped after {} outer iterations without meeting the tolerance", config.max_outer);
        Ok(ExitCode::from(2))
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_experiment(
    spec: Option<&Path>,
    preset: Option<&str>,
    output: &Path,
    seed: Option<u64>,
    select: Option<SelectArg>,
    runs: Option<usize>,
    sample_sizes: Option<&[usize]>,
    flags: &SolverFlags,
    sequential: bool,
    omit_timings: bool,
) -> CliResult<ExitCode> {
    let mut spec = match (spec, preset) {
        (Some(path), _) => ExperimentSpec::from_json(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))?,
        (None, Some(name)) => ExperimentSpec::preset(name).map_err(|e| e.to_string())?,
        (None, None) => return Err("one of --spec or --preset is required".into()),
    };
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    if let Some(select) = select {
        spec.selection = match select {
            SelectArg::Oracle => Selection::Oracle,
            SelectArg::Validation => Selection::Validation,
        };
    }
    if let Some(runs) = runs {
        spec.runs = runs;
    }
    if let Some(sizes) = sample_sizes {
        spec.sample_sizes = sizes.to_vec();
    }
    spec.solver = flags.apply(spec.solver);
    let execution = if sequential { Execution::Sequential } else { Execution::Parallel };
    let records = run_experiment(&spec, execution).map_err(|e| e.to_string())?;

    let mut bytes = Vec::new();
    write_csv(&records, &mut bytes, omit_timings).map_err(|e| e.to_string())?;
    write(output, &bytes)?;
    for row in summarize(&records) {
        println!(
            "{:<7} m={:<5} runs={:<3} mean_error={:.4} stderr={:.4} nonconverged={}",
            row.method.name(),
            row.m,
            row.runs,
            row.mean_error,
            row.stderr,
            row.nonconverged
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench_prox(
    n: usize,
    structure: StructureArg,
    repetitions: usize,
    seed: u64,
    settings: FixedPointSettings,
    output: Option<&Path>,
) -> CliResult<ExitCode> {
    let structure = match structure {
        StructureArg::Grid1d => ProxStructure::Grid1d,
        StructureArg::Grid2d => ProxStructure::Grid2d,
        StructureArg::Tree => ProxStructure::Tree,
    };
    let report = bench_prox(n, structure, repetitions, seed, &settings).map_err(|e| e.to_string())?;
    println!(
        "n={} structure={:?} repetitions={} mean_ms={:.4} stddev_ms={:.4} mean_iterations={:.1}",
        report.n, report.structure, report.repetitions, report.mean_ms, report.stddev_ms, report.mean_iterations
    );
    if let Some(path) = output {
        let text = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())? + "\n";
        write(path, text.as_bytes())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    match cli.command {
        Command::Solve { problem, constraint, output, solver, omit_timings } => {
            cmd_solve(&problem, &constraint, output.as_deref(), &solver, omit_timings)
        }
        Command::Experiment { spec, preset, output, seed, select, runs, sample_sizes, solver, sequential, omit_timings } => cmd_experiment(
            spec.as_deref(),
            preset.as_deref(),
            &output,
            seed,
            select,
            runs,
            sample_sizes.as_deref(),
            &solver,
            sequential,
            omit_timings,
        ),
        Command::BenchProx { n, structure, repetitions, seed, kappa, inner_tol, output } => {
            let settings = FixedPointSettings { kappa, tol: inner_tol, ..FixedPointSettings::default() };
            cmd_bench_prox(n, structure, repetitions, seed, settings, output.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
