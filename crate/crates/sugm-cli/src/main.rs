//! Command-line harness around the sugm library: sample realizations,
//! compute exact expectations, compare the two at single sizes or across a
//! size sweep, and run the exhaustive small-model verification checks.
//!
//! Exit codes: 0 success, 1 usage or runtime error, 2 capacity error
//! (model too large for exact treatment or the evaluation budget),
//! 3 verification or validation failure.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sugm::enumeration::{EnumeratedModel, EnumerationError};
use sugm::expectation::{expected_adjacency, write_matrix_csv, ExpectError, ExpectOptions};
use sugm::model::{validate_spec, FindingStatus, ModelConfig, ModelError};
use sugm::sampler::{sample, write_edges_csv, SampleError, SampleOptions};
use sugm::sweep::{emit_csv, emit_plot, run_sweep, AlphaChoice, SweepError, SweepOptions};

const EXIT_USAGE: u8 = 1;
const EXIT_CAPACITY: u8 = 2;
const EXIT_VERIFICATION: u8 = 3;

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Failure {
        Failure { code: EXIT_USAGE, message: message.to_string() }
    }

    fn capacity(message: impl ToString) -> Failure {
        Failure { code: EXIT_CAPACITY, message: message.to_string() }
    }

    fn verification(message: impl ToString) -> Failure {
        Failure { code: EXIT_VERIFICATION, message: message.to_string() }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Failure {
        Failure::usage(e)
    }
}

impl From<ExpectError> for Failure {
    fn from(e: ExpectError) -> Failure {
        match e {
            ExpectError::Budget { .. } | ExpectError::Allocation { .. } => Failure::capacity(e),
            ExpectError::Model(m) => Failure::usage(m),
            other => Failure::usage(other),
        }
    }
}

impl From<SampleError> for Failure {
    fn from(e: SampleError) -> Failure {
        match e {
            SampleError::Budget { .. } | SampleError::Allocation { .. } => Failure::capacity(e),
            SampleError::Model(m) => Failure::usage(m),
            other => Failure::usage(other),
        }
    }
}

impl From<EnumerationError> for Failure {
    fn from(e: EnumerationError) -> Failure {
        match e {
            EnumerationError::TooManyPlacements { .. } | EnumerationError::NodeCount { .. } => {
                Failure::capacity(e)
            }
            EnumerationError::Model(m) => Failure::usage(m),
            other => Failure::usage(other),
        }
    }
}

impl From<SweepError> for Failure {
    fn from(e: SweepError) -> Failure {
        Failure::usage(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::usage(e)
    }
}

fn parse_alpha(text: &str) -> Result<AlphaChoice, String> {
    if text == "auto" {
        return Ok(AlphaChoice::Auto);
    }
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(AlphaChoice::Fixed(v)),
        _ => Err(format!("expected \"auto\" or a positive number, got {text:?}")),
    }
}

#[derive(Parser)]
#[command(
    name = "sugm",
    version,
    about = "Sample subgraph-generated random graphs and compare them with exact expectations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one realization and write its edge list as CSV.
    Sample {
        /// Model family as JSON.
        #[arg(long)]
        config: PathBuf,
        /// Number of nodes.
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Destination file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the exact expected adjacency matrices.
    Expect {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        n: usize,
        /// Base path; writes <out>.weighted.csv and <out>.unweighted.csv.
        /// Without it both matrices go to stdout under comment headers.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample once and report deviations from the expectation as CSV rows.
    Error {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Tail mass for the concentration bound column.
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        /// Katz discount: "auto" (half the invertibility window of the
        /// expected matrix) or a positive number.
        #[arg(long, default_value = "auto", value_parser = parse_alpha)]
        alpha: AlphaChoice,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run trials across a size grid and emit the record CSV and plot.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated node counts, strictly ascending.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "auto", value_parser = parse_alpha)]
        alpha: AlphaChoice,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a log-log SVG plot of trial-averaged errors.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Exhaustively check the variance-proxy lemmas on a small model.
    Verify {
        /// Model family to enumerate; omitted means a seeded random model.
        #[arg(long, requires = "n")]
        config: Option<PathBuf>,
        /// Node count for --config (at most 8 for exact enumeration).
        #[arg(long)]
        n: Option<usize>,
        /// Seed for the random model when --config is omitted.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Validate a model family against the scaling assumptions.
    Check {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        n: usize,
    },
}

/// Buffered file writer, or stdout when no path is given.
fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    match path {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut name = base.as_os_str().to_os_string();
    name.push(suffix);
    PathBuf::from(name)
}

fn cmd_sample(config: &Path, n: usize, seed: u64, out: Option<&Path>) -> Result<(), Failure> {
    let family = ModelConfig::load(config)?;
    let spec = family.at_size(n)?;
    let realization = sample(&spec, seed, &SampleOptions::default())?;
    let mut writer = open_out(out)?;
    write_edges_csv(&realization, &mut writer)?;
    writer.flush()?;
    eprintln!(
        "sampled n = {n}, seed = {seed}, realized placements per type = {:?}, connected = {}",
        realization.realized_per_type,
        realization.is_connected()
    );
    Ok(())
}

fn cmd_expect(config: &Path, n: usize, out: Option<&Path>) -> Result<(), Failure> {
    let family = ModelConfig::load(config)?;
    let spec = family.at_size(n)?;
    let matrices = expected_adjacency(&spec, &ExpectOptions::default())?;
    match out {
        Some(base) => {
            for (suffix, matrix) in
                [(".weighted.csv", &matrices.weighted), (".unweighted.csv", &matrices.unweighted)]
            {
                let path = with_suffix(base, suffix);
                let mut writer = open_out(Some(&path))?;
                write_matrix_csv(matrix, &mut writer)?;
                writer.flush()?;
                println!("{}", path.display());
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "# weighted")?;
            write_matrix_csv(&matrices.weighted, &mut stdout)?;
            writeln!(stdout, "# unweighted")?;
            write_matrix_csv(&matrices.unweighted, &mut stdout)?;
        }
    }
    eprintln!(
        "expected max degree: weighted = {}, unweighted = {}",
        matrices.delta_weighted(),
        matrices.delta_unweighted()
    );
    Ok(())
}

fn cmd_error(
    config: &Path,
    n: usize,
    seed: u64,
    epsilon: f64,
    alpha: AlphaChoice,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let family = ModelConfig::load(config)?;
    // Surface capacity problems with their own exit code before the sweep
    // machinery folds them into row statuses.
    let spec = family.at_size(n)?;
    expected_adjacency(&spec, &ExpectOptions::default())?;
    sample(&spec, seed, &SampleOptions::default())?;
    let options = SweepOptions {
        sizes: vec![n],
        trials: 1,
        epsilon,
        master_seed: seed,
        alpha,
    };
    let outcome = run_sweep(&family, &options)?;
    let mut writer = open_out(out)?;
    emit_csv(&outcome.records, &mut writer)?;
    writer.flush()?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    config: &Path,
    sizes: Vec<usize>,
    trials: usize,
    epsilon: f64,
    seed: u64,
    alpha: AlphaChoice,
    out: Option<&Path>,
    plot: Option<&Path>,
) -> Result<(), Failure> {
    let family = ModelConfig::load(config)?;
    let options = SweepOptions { sizes, trials, epsilon, master_seed: seed, alpha };
    let outcome = run_sweep(&family, &options)?;
    let mut writer = open_out(out)?;
    emit_csv(&outcome.records, &mut writer)?;
    writer.flush()?;
    if let Some(plot_path) = plot {
        let mut plot_writer = open_out(Some(plot_path))?;
        emit_plot(&outcome.records, &mut plot_writer)?;
        plot_writer.flush()?;
    }
    eprintln!(
        "{} records over {} sizes, density ratio envelope mu = {}",
        outcome.records.len(),
        options.sizes.len(),
        outcome.mu
    );
    Ok(())
}

fn cmd_verify(config: Option<&Path>, n: Option<usize>, seed: u64) -> Result<(), Failure> {
    let model = match (config, n) {
        (Some(path), Some(n)) => {
            let family = ModelConfig::load(path)?;
            EnumeratedModel::from_spec(&family.at_size(n)?)?
        }
        _ => EnumeratedModel::random(seed),
    };
    println!(
        "enumerating {} placements on {} nodes ({} realization vectors)",
        model.placement_count(),
        model.n(),
        model.config_count()
    );
    let report = model.check_all()?;
    let mut failures = 0;
    for (name, outcome) in &report {
        let status = if outcome.passed { "pass" } else { "FAIL" };
        print!("{status}  {name:<34} worst margin {:+.6e}", outcome.worst_margin);
        if let (false, Some(witness)) = (outcome.passed, &outcome.witness) {
            print!("  witness {witness:?}");
        }
        println!();
        if !outcome.passed {
            failures += 1;
        }
    }
    if failures > 0 {
        return Err(Failure::verification(format!("{failures} of {} checks failed", report.len())));
    }
    Ok(())
}

fn cmd_check(config: &Path, n: usize) -> Result<(), Failure> {
    let family = ModelConfig::load(config)?;
    let spec = family.at_size(n)?;
    let report = validate_spec(&spec);
    for finding in &report.findings {
        let value = match finding.value {
            Some(v) => format!("{v:.6}"),
            None => "-".to_string(),
        };
        println!(
            "{:<5} {:<12} {:<28} {:>12}  {}",
            finding.status.to_string(),
            finding.type_name,
            finding.check.to_string(),
            value,
            finding.detail
        );
    }
    if !report.passed() {
        let failed = report
            .findings
            .iter()
            .filter(|f| f.status == FindingStatus::Fail)
            .count();
        return Err(Failure::verification(format!("{failed} validation findings failed")));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Sample { config, n, seed, out } => cmd_sample(&config, n, seed, out.as_deref()),
        Command::Expect { config, n, out } => cmd_expect(&config, n, out.as_deref()),
        Command::Error { config, n, seed, epsilon, alpha, out } => {
            cmd_error(&config, n, seed, epsilon, alpha, out.as_deref())
        }
        Command::Sweep { config, sizes, trials, epsilon, seed, alpha, out, plot } => cmd_sweep(
            &config,
            sizes,
            trials,
            epsilon,
            seed,
            alpha,
            out.as_deref(),
            plot.as_deref(),
        ),
        Command::Verify { config, n, seed } => cmd_verify(config.as_deref(), n, seed),
        Command::Check { config, n } => cmd_check(&config, n),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            // Help and version are successful outputs, not usage errors.
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
