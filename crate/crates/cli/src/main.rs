use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use iproj::{constraints, kl_divergence, oracle, reduce, Mode, Problem, Termination};
use iproj_cli::{emit, examples, exit, parse_problem, problem, CliError, LoadedProblem, Result};
use log::info;

#[derive(Debug, Parser)]
#[command(
    name = "iproj",
    version,
    about = "I-projection onto intersections of convex sets of measures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Corrected,
    Naive,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a problem file and write density.csv, diag.csv and summary.json.
    Run {
        file: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        cycles: Option<usize>,
        #[arg(long)]
        tol_tv: Option<f64>,
        #[arg(long)]
        tol_feas: Option<f64>,
    },
    /// Write a built-in example as a problem file, or solve it.
    Example {
        #[arg(value_parser = examples::NAMES)]
        name: String,
        /// Only write the problem file to this path.
        #[arg(long)]
        emit_config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Solve a small problem with the reference solver.
    #[command(hide = true)]
    Oracle {
        file: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn termination_code(t: Option<Termination>) -> u8 {
    match t {
        Some(Termination::Converged) | None => exit::CONVERGED,
        Some(Termination::MaxCycles) => exit::MAX_CYCLES,
        Some(Termination::MonitorCap { .. }) => exit::MONITOR_CAP,
    }
}

fn solve(loaded: &LoadedProblem, out: &Path) -> Result<u8> {
    let problem = &loaded.problem;
    info!(
        "solving {} constraint(s) on {} nodes ({} mode)",
        problem.constraints.len(),
        problem.base.len(),
        problem.options.mode
    );
    let (solution, report) = iproj::run(problem)?;
    let summary = emit(out, problem, &solution, &report, loaded.base_mass)?;
    for w in &summary.warnings {
        log::warn!("{w}");
    }
    println!(
        "{} after {} cycle(s); I(P|Q) = {:.10e}",
        summary.termination, summary.cycles, summary.kl_divergence
    );
    Ok(termination_code(report.termination))
}

fn run_file(
    file: &Path,
    out: &Path,
    mode: Option<ModeArg>,
    cycles: Option<usize>,
    tol_tv: Option<f64>,
    tol_feas: Option<f64>,
) -> Result<u8> {
    let mut loaded = parse_problem(file)?;
    let o = &mut loaded.problem.options;
    if let Some(m) = mode {
        o.mode = match m {
            ModeArg::Corrected => Mode::Corrected,
            ModeArg::Naive => Mode::Naive,
        };
    }
    if let Some(n) = cycles {
        o.max_cycles = n;
    }
    if let Some(t) = tol_tv {
        o.tol_tv = t;
    }
    if let Some(t) = tol_feas {
        o.tol_feas = t;
    }
    o.validate()?;
    solve(&loaded, out)
}

fn run_oracle(file: &Path, out: &Path) -> Result<u8> {
    let loaded = parse_problem(file)?;
    let Problem {
        base, constraints: cs, ..
    } = loaded.problem;
    let inst = oracle::SmallInstance::new(base, cs)?;
    let p = oracle::brute_force_projection(&inst)?;
    std::fs::create_dir_all(out).map_err(|source| CliError::Write {
        path: out.to_path_buf(),
        source,
    })?;
    emit::write_density(&out.join("density.csv"), &p, &inst.q)?;
    let violations = inst
        .constraints
        .iter()
        .map(|c| constraints::feasible(c, &p, 0.0).map(|f| f.violation))
        .collect::<iproj::Result<Vec<_>>>()?;
    println!(
        "I(P*|Q) = {:.10e}; violations {violations:?}",
        kl_divergence(&p, &inst.q)?
    );
    Ok(exit::CONVERGED)
}

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Run {
            file,
            out,
            mode,
            cycles,
            tol_tv,
            tol_feas,
        } => run_file(&file, &out, mode, cycles, tol_tv, tol_feas),
        Command::Example { name, emit_config, out } => {
            let file = examples::by_name(&name).expect("clap restricts example names");
            if let Some(path) = emit_config {
                std::fs::write(&path, file.to_json()).map_err(|source| CliError::Write { path, source })?;
                return Ok(exit::CONVERGED);
            }
            let loaded = problem::build(file, Path::new("."))?;
            solve(&loaded, &out)
        }
        Command::Oracle { file, out } => run_oracle(&file, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::INPUT } else { exit::CONVERGED });
        }
    };
    if let Err(e) = reduce::configure_from_env() {
        eprintln!("error: {e}");
        return ExitCode::from(exit::INPUT);
    }
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
