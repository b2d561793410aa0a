//! The `flagsyz` command line.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::betti::{betti_table, BettiTable};
use crate::error::{Error, Result};
use crate::experiments::{
    evaluate_gates, run_experiment, write_outputs, ExperimentConfig, ExperimentKind, GateOutcome,
};
use crate::graph::{sample_graph, Graph, SampleParams};
use crate::homology::FieldChar;
use crate::oracle::{cross_validate_with, verify_extremal_lemma, ExtremalReport};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_CAPACITY: u8 = 3;
pub const EXIT_ASSERT: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "flagsyz", version, about = "Betti tables of random flag complexes")]
pub struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// More log output on stderr; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a graph from G(n, p).
    Gen(GenArgs),
    /// Print the Betti table of a graph's Stanley-Reisner ring.
    Betti(BettiArgs),
    /// Run a Monte Carlo experiment from a JSON config.
    Experiment(ExperimentArgs),
    /// Exhaustive and cross-implementation checks.
    Verify {
        #[command(subcommand)]
        check: VerifyCommand,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum GraphFormat {
    Json,
    Edgelist,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: GraphFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BettiArgs {
    /// Graph file, JSON or edge list.
    #[arg(long, conflicts_with_all = ["n", "p", "seed"])]
    pub input: Option<PathBuf>,
    #[arg(long, requires_all = ["p", "seed"])]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    /// Characteristic of the coefficient field.
    #[arg(long = "char", default_value_t = 2)]
    pub field_char: u32,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    pub kind: String,
    #[arg(long)]
    pub config: PathBuf,
    /// Exit with code 4 unless every gate in the config passes.
    #[arg(long = "assert")]
    pub assert_gates: bool,
    /// Output prefix; writes `<out>.csv`, `<out>.cells.csv` and `<out>.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Vertex and edge bounds for graphs with homology in degree r.
    LemmaEdges {
        #[arg(long)]
        r: usize,
        #[arg(long = "n-max")]
        n_max: usize,
        #[arg(long = "char", default_value_t = 2)]
        field_char: u32,
    },
    /// Hochster against Taylor on seeded random graphs.
    Oracle {
        #[arg(long)]
        trials: usize,
        #[arg(long = "n-max")]
        n_max: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "char", default_value_t = 2)]
        field_char: u32,
    },
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parameter(_) | Error::Config(_) | Error::Parse(_) | Error::Json(_) => EXIT_CONFIG,
        Error::Capacity(_) | Error::FacesCapped(_) => EXIT_CAPACITY,
        Error::ZeroMean | Error::Io(_) | Error::Csv(_) => EXIT_FAILURE,
    }
}

/// Parses `args`, runs, and maps the outcome onto an exit code.
pub fn main_with<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = write!(err, "{}", e.render());
            if !e.use_stderr() {
                let _ = write!(out, "{}", e.render());
            }
            return code;
        }
    };
    init_logging(cli.verbose);
    let result = match cli.threads {
        Some(0) => Err(Error::Config("--threads must be positive".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))
            .and_then(|pool| pool.install(|| dispatch(cli.command, out, err))),
        None => dispatch(cli.command, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn main() -> ExitCode {
    ExitCode::from(main_with(
        std::env::args_os(),
        &mut std::io::stdout(),
        &mut std::io::stderr(),
    ))
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .target(env_logger::Target::Stderr)
        .try_init();
}

fn dispatch(command: Command, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<u8> {
    match command {
        Command::Gen(a) => cmd_gen(&a, out),
        Command::Betti(a) => cmd_betti(&a, out),
        Command::Experiment(a) => cmd_experiment(&a, out, err),
        Command::Verify { check } => cmd_verify(check, out),
    }
}

fn emit(text: &str, path: Option<&Path>, out: &mut (dyn Write + Send)) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn cmd_gen(a: &GenArgs, out: &mut (dyn Write + Send)) -> Result<u8> {
    let g = sample_graph(&SampleParams {
        n: a.n,
        p: a.p,
        seed: a.seed,
        stream: a.stream,
    })?;
    let text = match a.format {
        GraphFormat::Json => g.to_json() + "\n",
        GraphFormat::Edgelist => g.to_edge_list(),
    };
    emit(&text, a.out.as_deref(), out)?;
    Ok(EXIT_OK)
}

/// Reads a graph as JSON when the text starts with `{`, else as an edge list.
pub fn read_graph(path: &Path) -> Result<Graph> {
    let text = std::fs::read_to_string(path)?;
    if text.trim_start().starts_with('{') {
        Graph::from_json(&text)
    } else {
        Graph::from_edge_list(&text)
    }
}

pub fn cmd_betti(a: &BettiArgs, out: &mut (dyn Write + Send)) -> Result<u8> {
    let field = FieldChar::new(a.field_char)?;
    let g = match (&a.input, a.n, a.p, a.seed) {
        (Some(path), ..) => read_graph(path)?,
        (None, Some(n), Some(p), Some(seed)) => sample_graph(&SampleParams {
            n,
            p,
            seed,
            stream: a.stream,
        })?,
        _ => return Err(Error::Config("betti needs --input or --n, --p and --seed".into())),
    };
    let table: BettiTable = betti_table(&g, field)?;
    let text = if a.json {
        table.to_json() + "\n"
    } else {
        table.to_grid()
    };
    emit(&text, None, out)?;
    Ok(EXIT_OK)
}

pub fn cmd_experiment(a: &ExperimentArgs, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<u8> {
    let kind: ExperimentKind = a.kind.parse()?;
    let cfg = ExperimentConfig::from_path(&a.config)?;
    if cfg.kind != kind {
        return Err(Error::Config(format!("config is for {}, not {kind}", cfg.kind)));
    }
    let summary = run_experiment(&cfg)?;
    let gates: Vec<GateOutcome> = evaluate_gates(&summary, &cfg.gates);
    match &a.out {
        Some(base) => {
            let paths = write_outputs(&summary, &cfg, &gates, base)?;
            log::info!("wrote {} and {}", paths.records.display(), paths.sidecar.display());
        }
        None => out.write_all(&summary.records.to_csv()?)?,
    }
    for g in &gates {
        writeln!(
            err,
            "{} {} {:?} observed {:?}",
            if g.passed { "PASS" } else { "FAIL" },
            g.gate.stat,
            (g.gate.min, g.gate.max),
            g.observed
        )?;
    }
    if a.assert_gates && gates.iter().any(|g| !g.passed) {
        return Ok(EXIT_ASSERT);
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct LemmaOutput<'a> {
    #[serde(flatten)]
    report: &'a ExtremalReport,
    sharp: bool,
}

pub fn cmd_verify(check: VerifyCommand, out: &mut (dyn Write + Send)) -> Result<u8> {
    match check {
        VerifyCommand::LemmaEdges { r, n_max, field_char } => {
            let report = verify_extremal_lemma(r, n_max, FieldChar::new(field_char)?)?;
            let body = LemmaOutput {
                report: &report,
                sharp: report.is_sharp(),
            };
            writeln!(out, "{}", serde_json::to_string_pretty(&body)?)?;
            Ok(if report.holds() { EXIT_OK } else { EXIT_ASSERT })
        }
        VerifyCommand::Oracle {
            trials,
            n_max,
            seed,
            field_char,
        } => {
            let report = cross_validate_with(trials, n_max, seed, FieldChar::new(field_char)?)?;
            if report.agrees() {
                writeln!(
                    out,
                    "all agree: {} graphs compared, {} over-capacity draws redrawn",
                    report.compared, report.skipped_over_capacity
                )?;
                Ok(EXIT_OK)
            } else {
                writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
                Ok(EXIT_ASSERT)
            }
        }
    }
}
