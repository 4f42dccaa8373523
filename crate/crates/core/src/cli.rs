//! Command-line front end. [`run`] maps every failure to an exit code:
//! 0 success, 1 usage, 2 corpus or parse, 3 oracle or protocol.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::corpus::{load_dir, load_file, Corpus, CorpusError};
use crate::coverage::{CoverageOracle, ExecOracle, OracleError, SyntheticOracle, DEFAULT_THRESHOLD};
use crate::engine::{
    baseline_corpus, fuzz_corpus, sweep_max, EngineError, FuzzConfig, DEFAULT_MAX_MUTATIONS,
};
use crate::mutators::{apply, MutationError, OperatorId, Rng};
use crate::report::{
    export, export_sweep, summarize, write_mutants, ConfigEcho, CorpusEcho, Format, Mode,
    ReportError, SweepReport, SCHEMA_VERSION,
};

const PROBE_PROGRAM: &str = "int probe(int a, int b) {\n    int s = a + b;\n    return s;\n}\n";

#[derive(Debug, Parser)]
#[command(name = "cocofuzz", version, about = "Coverage-guided metamorphic fuzzing of Java methods")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Apply one operator to a Java method and print the mutant.
    Mutate {
        #[arg(long)]
        op: OperatorId,
        #[arg(long = "seed-rng", default_value_t = 0)]
        seed_rng: u64,
        file: PathBuf,
    },
    /// Run NC-guided test generation over a corpus.
    Fuzz(CampaignArgs),
    /// Run the Random@K baseline over a corpus.
    Baseline {
        #[command(flatten)]
        campaign: CampaignArgs,
        #[arg(long, default_value_t = 3)]
        k: usize,
    },
    /// Mean noise fraction for each MAX in a range.
    SweepMax {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 1)]
        from: usize,
        #[arg(long, default_value_t = 10)]
        to: usize,
        #[arg(long = "seed-rng", default_value_t = 0)]
        seed_rng: u64,
        #[arg(long, value_delimiter = ',')]
        ops: Option<Vec<OperatorId>>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check an oracle's handshake, response shape and determinism.
    OracleCheck {
        #[arg(long)]
        oracle: String,
        /// Program to query with; a built-in probe otherwise.
        #[arg(long)]
        program: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct CampaignArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// `synthetic` or `exec:<command>`.
    #[arg(long, default_value = "synthetic")]
    oracle: String,
    #[arg(long, default_value_t = DEFAULT_MAX_MUTATIONS)]
    max: usize,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    #[arg(long = "seed-rng", default_value_t = 0)]
    seed_rng: u64,
    /// Comma-separated subset of Op1..Op10.
    #[arg(long, value_delimiter = ',')]
    ops: Option<Vec<OperatorId>>,
    /// Output directory for the report and mutant files; the JSON report
    /// goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Report format written to stdout when `--out` is absent.
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Oracle(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Oracle(_) => 3,
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        CliError::Oracle(e.to_string())
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::UnknownFormat(_) => CliError::Usage(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Config(_) | EngineError::Pool(_) => CliError::Usage(e.to_string()),
            EngineError::Oracle(_) => CliError::Oracle(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

fn open_oracle(name: &str) -> Result<Box<dyn CoverageOracle>, CliError> {
    if name == "synthetic" {
        return Ok(Box::new(SyntheticOracle::default()));
    }
    match name.strip_prefix("exec:") {
        Some(cmd) if !cmd.trim().is_empty() => Ok(Box::new(ExecOracle::spawn(cmd)?)),
        _ => Err(CliError::Usage(format!("unknown oracle `{name}` (expected synthetic or exec:CMD)"))),
    }
}

fn corpus_echo(corpus: &Corpus) -> CorpusEcho {
    CorpusEcho {
        fingerprint: corpus.fingerprint.clone(),
        seeds: corpus.seeds.len(),
        skipped: corpus.skipped.iter().map(|s| s.path.display().to_string()).collect(),
    }
}

fn operators(ops: Option<Vec<OperatorId>>) -> Vec<OperatorId> {
    ops.unwrap_or_else(|| OperatorId::ALL.to_vec())
}

fn print(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| CliError::Input(format!("cannot write to stdout: {e}")))
}

fn campaign(args: CampaignArgs, k: Option<usize>) -> Result<(), CliError> {
    let format: Format = args.format.parse()?;
    let cfg = FuzzConfig {
        max_mutations: args.max,
        activation_threshold: args.threshold,
        master_seed: args.seed_rng,
        operator_set: operators(args.ops),
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    if k == Some(0) {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    let corpus = load_dir(&args.corpus)?;
    let oracle = open_oracle(&args.oracle)?;
    let (mode, runs) = match k {
        None => (Mode::NcGuided, fuzz_corpus(&corpus.seeds, oracle.as_ref(), &cfg, args.jobs)?),
        Some(k) => (Mode::Random, baseline_corpus(&corpus.seeds, oracle.as_ref(), &cfg, k, args.jobs)?),
    };
    let report = summarize(
        mode,
        ConfigEcho::new(&cfg, k, oracle.describe()),
        corpus_echo(&corpus),
        oracle.topology(),
        &runs,
    );
    match &args.out {
        Some(out) => {
            export(&report, Format::Json, &out.join("report.json"))?;
            export(&report, Format::Csv, &out.join("report.csv"))?;
            let n = write_mutants(&runs, out)?;
            eprintln!(
                "{mode}: {} tests from {} seeds; report and {n} mutants in {}",
                report.campaign.tests,
                runs.len(),
                out.display()
            );
        }
        None => print(&match format {
            Format::Json => crate::report::to_json(&report)?,
            Format::Csv => crate::report::to_csv(&report)?,
        })?,
    }
    Ok(())
}

fn mutate(op: OperatorId, seed_rng: u64, file: &Path) -> Result<(), CliError> {
    let seed = load_file(file)?;
    let mut rng = Rng::new(seed_rng);
    let mutation = apply(&seed.unit, op, &mut rng).map_err(|e| match e {
        MutationError::NotApplicable(_) => CliError::Input(format!("{}: {e}", file.display())),
        MutationError::InternalRender { .. } => CliError::Input(e.to_string()),
    })?;
    let mut text = mutation.mutant.text().to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    print(&text)
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    corpus: &Path,
    from: usize,
    to: usize,
    seed_rng: u64,
    ops: Option<Vec<OperatorId>>,
    jobs: usize,
    out: Option<&Path>,
) -> Result<(), CliError> {
    if from == 0 || to < from {
        return Err(CliError::Usage(format!("invalid MAX range {from}..={to}")));
    }
    let ops = operators(ops);
    let corpus = load_dir(corpus)?;
    let maxes: Vec<usize> = (from..=to).collect();
    let rows = sweep_max(&corpus.seeds, &maxes, &ops, seed_rng, jobs)?;
    let report = SweepReport {
        schema: SCHEMA_VERSION,
        master_seed: seed_rng,
        operator_set: ops,
        corpus: corpus_echo(&corpus),
        rows,
    };
    let mut table = String::from("MAX\tmean_noise\n");
    for r in &report.rows {
        table.push_str(&format!("{}\t{:.4}\n", r.max, r.mean_noise_fraction));
    }
    print(&table)?;
    if let Some(out) = out {
        export_sweep(&report, Format::Json, &out.join("sweep.json"))?;
        export_sweep(&report, Format::Csv, &out.join("sweep.csv"))?;
    }
    Ok(())
}

fn oracle_check(name: &str, program: Option<&Path>) -> Result<(), CliError> {
    let program = match program {
        Some(p) => load_file(p)?.unit.text().to_string(),
        None => PROBE_PROGRAM.to_string(),
    };
    let oracle = open_oracle(name)?;
    let topology = oracle.topology().clone();
    print(&format!("handshake ok: topology {topology} ({} neurons)\n", topology.total()))?;
    let first = oracle.activations(&program)?;
    let second = oracle.activations(&program)?;
    for (i, raw) in [&first, &second].into_iter().enumerate() {
        if !raw.matches(&topology) {
            return Err(CliError::Oracle(format!("response {i}: layer sizes differ from the handshake")));
        }
    }
    if first != second {
        return Err(CliError::Oracle("two identical queries returned different activations".into()));
    }
    print("shape ok\ndeterminism ok\n")
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Mutate { op, seed_rng, file } => mutate(op, seed_rng, &file),
        Command::Fuzz(args) => campaign(args, None),
        Command::Baseline { campaign: args, k } => campaign(args, Some(k)),
        Command::SweepMax { corpus, from, to, seed_rng, ops, jobs, out } => {
            sweep(&corpus, from, to, seed_rng, ops, jobs, out.as_deref())
        }
        Command::OracleCheck { oracle, program } => oracle_check(&oracle, program.as_deref()),
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("cocofuzz: {e}");
            e.code()
        }
    }
}
