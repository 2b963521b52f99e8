//! Command-line surface for the distance-graph verifiers: run the analytic
//! checks over the fixed corpus or over a user-specified instance and emit
//! structured reports (JSON lines or CSV).
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 scale-guard refusal,
//! 4 a non-vacuous bound check failed. The environment variable
//! `DISTGRAPH_THREADS` caps worker parallelism for the acceptance runner.

mod config;
mod output;
mod runs;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use distgraph::acceptance::{run_all, FaultInjection};
use distgraph::report::CheckRecord;

use config::RunConfig;
use output::Format;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(distgraph::Error),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<distgraph::Error> for CliError {
    fn from(e: distgraph::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(distgraph::Error::ScaleGuard { .. })
            | CliError::Core(distgraph::Error::CountOverflow) => 3,
            CliError::Core(distgraph::Error::SpectralRounding { .. }) => 4,
            CliError::Core(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "distgraph",
    version,
    about = "Distance-graph statistics of subsets of F_q^d: counts, spectra, and verified bounds",
    long_about = "Computes chain/path/star statistics of subsets of F_q^d, their Fourier-side \
quantities, and checks every count against the analytic bound that governs it. Reports are \
line-oriented JSON or CSV with a timestamped header, a deterministic data section, and a \
timing section. DISTGRAPH_THREADS caps worker parallelism."
)]
struct Cli {
    /// TOML config file; explicit flags override its fields.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Report format: json (default) or csv.
    #[arg(long, global = true)]
    format: Option<String>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct CommonFlags {
    /// Odd prime field size.
    #[arg(long)]
    q: Option<u64>,

    /// Dimension of the vector space.
    #[arg(long)]
    d: Option<u32>,

    /// Distance type as a comma list, e.g. --t 1,1,2.
    #[arg(long)]
    t: Option<String>,

    /// Uniform unit-distance type length (t = 1,...,1).
    #[arg(long)]
    k: Option<usize>,

    /// Vertex set kind: full (default), random_size, random_density,
    /// subspace, sphere_union, product, explicit.
    #[arg(long)]
    ensemble: Option<String>,

    /// Set size for random_size.
    #[arg(long)]
    size: Option<usize>,

    /// Generator seed for the random ensembles.
    #[arg(long)]
    seed: Option<u64>,

    /// Keep probability for random_density.
    #[arg(long)]
    density: Option<f64>,

    /// Radii (comma list) for sphere_union.
    #[arg(long)]
    radii: Option<String>,

    /// Codimension for subspace.
    #[arg(long)]
    codim: Option<u32>,

    /// Points for explicit, semicolon-separated: "0,0;1,2".
    #[arg(long)]
    points: Option<String>,

    /// Axis sizes (comma list) for product.
    #[arg(long)]
    axes: Option<String>,
}

impl CommonFlags {
    fn to_config(&self) -> RunConfig {
        RunConfig {
            q: self.q,
            d: self.d,
            t: self.t.clone(),
            k: self.k,
            ensemble: self.ensemble.clone(),
            size: self.size,
            seed: self.seed,
            density: self.density,
            radii: self.radii.clone(),
            codim: self.codim,
            points: self.points.clone(),
            axes: self.axes.clone(),
            ..Default::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sphere cardinalities and spectrum decay reports.
    Sphere {
        #[command(flatten)]
        common: CommonFlags,
        /// Sweep every nonzero t.
        #[arg(long)]
        all_t: bool,
    },
    /// Fourier identity checks on a set indicator.
    Dft {
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Chain counts with oracle agreement and the count inequalities.
    Chains {
        #[command(flatten)]
        common: CommonFlags,
        /// Also recompute the count through the spectral route.
        #[arg(long)]
        spectral_check: bool,
    },
    /// Non-overlapping path counts, witnesses, and the long-path bound.
    Paths {
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Star counts, degree tails, and the star-existence thresholds.
    Stars {
        #[command(flatten)]
        common: CommonFlags,
        /// Largest tail depth n to sweep.
        #[arg(long)]
        tail_n: Option<u32>,
    },
    /// List the fixed acceptance corpus.
    Corpus,
    /// Run the acceptance suite over the corpus.
    Acceptance {
        /// Comma list of criterion numbers to run (default: all).
        #[arg(long)]
        only: Option<String>,
        /// Self-test hook: inject a known defect (kinds: sphere-membership)
        /// and verify the suite reports it.
        #[arg(long, value_name = "KIND")]
        inject_fault: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn load_config(cli: &Cli, flags: RunConfig) -> Result<RunConfig, CliError> {
    let base = match &cli.config {
        Some(path) => RunConfig::from_file(path).map_err(CliError::Config)?,
        None => RunConfig::default(),
    };
    let mut merged = base.merged_with(&flags);
    if cli.format.is_some() {
        merged.format = cli.format.clone();
    }
    if cli.out.is_some() {
        merged.out = cli.out.clone();
    }
    Ok(merged)
}

fn dispatch(cli: Cli) -> Result<ExitCode, CliError> {
    match &cli.command {
        Command::Sphere { common, all_t } => {
            let mut flags = common.to_config();
            if *all_t {
                flags.all_t = Some(true);
            }
            let cfg = load_config(&cli, flags)?;
            let out = runs::run_sphere(&cfg)?;
            emit(&cfg, "sphere", &out.records, &out.timings)?;
            Ok(exit_for_records(&out.records))
        }
        Command::Dft { common } => {
            let cfg = load_config(&cli, common.to_config())?;
            let out = runs::run_dft(&cfg)?;
            emit(&cfg, "dft", &out.records, &out.timings)?;
            Ok(exit_for_records(&out.records))
        }
        Command::Chains {
            common,
            spectral_check,
        } => {
            let mut flags = common.to_config();
            if *spectral_check {
                flags.spectral_check = Some(true);
            }
            let cfg = load_config(&cli, flags)?;
            let out = runs::run_chains(&cfg)?;
            emit(&cfg, "chains", &out.records, &out.timings)?;
            Ok(exit_for_records(&out.records))
        }
        Command::Paths { common } => {
            let cfg = load_config(&cli, common.to_config())?;
            let out = runs::run_paths(&cfg)?;
            emit(&cfg, "paths", &out.records, &out.timings)?;
            Ok(exit_for_records(&out.records))
        }
        Command::Stars { common, tail_n } => {
            let mut flags = common.to_config();
            if tail_n.is_some() {
                flags.tail_n = *tail_n;
            }
            let cfg = load_config(&cli, flags)?;
            let out = runs::run_stars(&cfg)?;
            emit(&cfg, "stars", &out.records, &out.timings)?;
            Ok(exit_for_records(&out.records))
        }
        Command::Corpus => {
            let cfg = load_config(&cli, RunConfig::default())?;
            let out = runs::run_corpus()?;
            emit(&cfg, "corpus", &out.records, &out.timings)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Acceptance { only, inject_fault } => {
            let mut flags = RunConfig::default();
            if only.is_some() {
                flags.only = only.clone();
            }
            let cfg = load_config(&cli, flags)?;
            let criteria = cfg.only_criteria().map_err(CliError::Config)?;
            let fault = match inject_fault.as_deref() {
                None => None,
                Some("sphere-membership") => Some(FaultInjection::SphereMembership),
                Some(other) => {
                    return Err(CliError::Config(format!(
                        "unknown fault kind '{other}' (expected sphere-membership)"
                    )))
                }
            };

            let outcome = run_all(criteria.as_deref(), fault)?;
            for c in &outcome.criteria {
                eprintln!(
                    "criterion {} ({}): {}: {} checks, {} vacuous, {} violations",
                    c.number,
                    c.name,
                    if c.passed { "PASS" } else { "FAIL" },
                    c.checks,
                    c.vacuous,
                    c.violations
                );
            }
            emit(&cfg, "acceptance", &outcome.records, &outcome.timings)?;
            if let Some(v) = outcome.first_violation() {
                eprintln!("FAILED: first violated check is {}", v.key);
                return Ok(ExitCode::from(4));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Instance commands exit 4 when some non-vacuous check failed.
fn exit_for_records(records: &[CheckRecord]) -> ExitCode {
    match records.iter().find(|r| r.is_violation()) {
        Some(v) => {
            eprintln!("FAILED: first violated check is {}", v.key);
            ExitCode::from(4)
        }
        None => ExitCode::SUCCESS,
    }
}

fn emit(
    cfg: &RunConfig,
    command: &str,
    records: &[CheckRecord],
    timings: &[distgraph::report::Timing],
) -> Result<(), CliError> {
    let format = Format::from_config(cfg).map_err(CliError::Config)?;
    match &cfg.out {
        Some(path) => {
            let mut file = std::fs::File::create(path)?;
            output::write_report(&mut file, command, cfg, records, timings, format)?;
            file.flush()?;
            eprintln!("report written to {}", path.display());
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            output::write_report(&mut lock, command, cfg, records, timings, format)?;
            lock.flush()?;
        }
    }
    Ok(())
}
