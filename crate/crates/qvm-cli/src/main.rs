//! Command-line front end: run programs, inspect parses, anneal models,
//! and unpack the bundled corpus.
//!
//! Machine-readable JSON goes to stdout; everything human-readable goes to
//! stderr. Exit codes: 0 success, 1 for input errors (unreadable files,
//! lex/parse/elaboration failures), 2 for runtime failures.

use clap::{Parser, Subcommand};
use qvm::annealer::{anneal, AnnealSchedule, IsingModel};
use qvm::lang::{elaborate, parse, pretty_print, tokenize};
use qvm::rng::PRNG_ID;
use qvm::runtime::{run_shots, RunConfig};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qvm", version, about = "Seven-instruction quantum virtual machine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, elaborate, and execute a .qvm program; print the run report.
    Run {
        /// Program file.
        path: PathBuf,
        /// Master seed for the run.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of shots to execute.
        #[arg(long, default_value_t = 1)]
        shots: u64,
        /// Embed the final state in the report (single-shot runs).
        #[arg(long)]
        dump_state: bool,
        /// Embed per-shot records in the report.
        #[arg(long)]
        trace: bool,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse a program and print its canonical form (or the raw AST).
    Parse {
        /// Program file.
        path: PathBuf,
        /// Print the AST instead of the formatted source.
        #[arg(long)]
        ast: bool,
    },
    /// Minimize an Ising model file with the annealing backend.
    Anneal {
        /// Model file (`h <i> <v>` / `J <i> <j> <v>` lines).
        model: PathBuf,
        /// Master seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Initial temperature (default 2.0).
        #[arg(long)]
        t0: Option<f64>,
        /// Final temperature (default 0.01).
        #[arg(long)]
        t1: Option<f64>,
        /// Sweeps per restart (default 200 per spin).
        #[arg(long)]
        sweeps: Option<u64>,
        /// Independent restarts (default 8).
        #[arg(long)]
        restarts: Option<u64>,
    },
    /// Write a bundled example program (and its data files) to disk.
    Corpus {
        /// One of: shor_9_4, grover_64, dj_constant, dj_balanced, anneal_demo.
        name: String,
        /// Target directory.
        #[arg(long, default_value = "corpus")]
        dir: PathBuf,
    },
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }

    fn runtime(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run { path, seed, shots, dump_state, trace, out } => {
            cmd_run(&path, RunConfig { seed, shots, trace, dump_state }, out.as_deref())
        }
        Command::Parse { path, ast } => cmd_parse(&path, ast),
        Command::Anneal { model, seed, t0, t1, sweeps, restarts } => {
            cmd_anneal(&model, seed, t0, t1, sweeps, restarts)
        }
        Command::Corpus { name, dir } => cmd_corpus(&name, &dir),
    }
}

fn read_source(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn compile(path: &Path) -> Result<qvm::ElaboratedProgram, CliError> {
    let source = read_source(path)?;
    let base_dir = path.parent().unwrap_or_else(|| Path::new("."));
    let tokens =
        tokenize(&source).map_err(|e| CliError::input(format!("{}:{e}", path.display())))?;
    let ast = parse(&tokens).map_err(|e| CliError::input(format!("{}:{e}", path.display())))?;
    elaborate(&ast, base_dir).map_err(|e| CliError::input(format!("{}:{e}", path.display())))
}

fn cmd_run(path: &Path, config: RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let program = compile(path)?;
    if config.dump_state && config.shots > 1 {
        eprintln!("note: --dump-state applies to single-shot runs only; skipping the dump");
    }
    let report = run_shots(&program, &config).map_err(|e| CliError::runtime(e.to_string()))?;
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::runtime(format!("cannot serialize report: {e}")))?;
    match out {
        Some(out_path) => std::fs::write(out_path, json.as_bytes())
            .map_err(|e| CliError::runtime(format!("{}: {e}", out_path.display())))?,
        None => println!("{json}"),
    }
    Ok(())
}

fn cmd_parse(path: &Path, show_ast: bool) -> Result<(), CliError> {
    let source = read_source(path)?;
    let tokens =
        tokenize(&source).map_err(|e| CliError::input(format!("{}:{e}", path.display())))?;
    let ast = parse(&tokens).map_err(|e| CliError::input(format!("{}:{e}", path.display())))?;
    if show_ast {
        println!("{ast:#?}");
    } else {
        print!("{}", pretty_print(&ast));
    }
    Ok(())
}

#[derive(Serialize)]
struct AnnealReport {
    prng: &'static str,
    seed: u64,
    model: String,
    vertices: usize,
    schedule: AnnealSchedule,
    energy: f64,
    spins: Vec<i8>,
}

fn cmd_anneal(
    path: &Path,
    seed: u64,
    t0: Option<f64>,
    t1: Option<f64>,
    sweeps: Option<u64>,
    restarts: Option<u64>,
) -> Result<(), CliError> {
    let text = read_source(path)?;
    let model = IsingModel::from_text(&text)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let default = AnnealSchedule::default_for(model.vertex_count());
    let schedule = AnnealSchedule::new(
        t0.unwrap_or(default.t_initial),
        t1.unwrap_or(default.t_final),
        sweeps.unwrap_or(default.sweeps),
        restarts.unwrap_or(default.restarts),
    )
    .map_err(|e| CliError::input(e.to_string()))?;
    let (spins, energy) = anneal(&model, &schedule, seed);
    let report = AnnealReport {
        prng: PRNG_ID,
        seed,
        model: path.to_string_lossy().into_owned(),
        vertices: model.vertex_count(),
        schedule,
        energy,
        spins: spins.spins().to_vec(),
    };
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::runtime(format!("cannot serialize report: {e}")))?;
    println!("{json}");
    Ok(())
}

fn cmd_corpus(name: &str, dir: &Path) -> Result<(), CliError> {
    let entry = qvm::corpus::entry(name).ok_or_else(|| {
        CliError::input(format!(
            "unknown corpus name `{name}` (available: {})",
            qvm::corpus::CORPUS_NAMES.join(", ")
        ))
    })?;
    let program_path = qvm::corpus::materialize(&entry, dir)
        .map_err(|e| CliError::runtime(format!("{}: {e}", dir.display())))?;
    eprintln!("wrote {}", program_path.display());
    for aux in &entry.aux {
        eprintln!("wrote {}", dir.join(aux.name).display());
    }
    Ok(())
}
