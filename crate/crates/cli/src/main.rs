/// `print!` that exits quietly when stdout is a closed pipe.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        if let Err(e) = write!(std::io::stdout(), $($arg)*) {
            if e.kind() == std::io::ErrorKind::BrokenPipe {
                std::process::exit(0);
            }
            panic!("writing to stdout: {e}");
        }
    }};
}

macro_rules! outln {
    () => { out!("\n") };
    ($($arg:tt)*) => {{ out!($($arg)*); out!("\n") }};
}

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use folmt_core::MrId;
use folmt_harness::parse::ParseMode;
use folmt_harness::prompt::PromptStrategy;

/// Exit status: 0 success, 1 violations found, 2 usage or input error, 3 transport error.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    pub fn transport(message: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: message.into(),
        }
    }
}

#[derive(Parser)]
#[command(name = "folmt", version, about = "Metamorphic testing of logical reasoning over first-order logic")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReportFmt {
    #[value(alias = "table-text")]
    Text,
    Csv,
    #[value(alias = "structured")]
    Json,
}

#[derive(Args)]
pub struct DatasetArg {
    /// Line-delimited source records (default: the bundled desk corpus).
    #[arg(long)]
    pub dataset: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a formula and print its syntax tree.
    Parse {
        #[arg(allow_hyphen_values = true)]
        formula: String,
        #[arg(long, value_enum, default_value = "text")]
        format: OutFormat,
    },
    /// Rewrite a formula into its normal form and print the rewrite trace.
    Normalize {
        #[arg(allow_hyphen_values = true)]
        formula: String,
        /// Choose redexes at random within each stage.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "text")]
        format: OutFormat,
    },
    /// Apply one metamorphic relation to one record.
    Transform {
        #[arg(long)]
        mr: MrId,
        /// Record id (default: the first record).
        #[arg(long)]
        record: Option<String>,
        #[command(flatten)]
        dataset: DatasetArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// System used to translate changed formulas (default: rule-based).
        #[arg(long)]
        translator: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: OutFormat,
    },
    /// Decide entailment for a record or for premises given on the command line.
    Check {
        #[arg(long, conflicts_with_all = ["premise", "conclusion"])]
        record: Option<String>,
        #[command(flatten)]
        dataset: DatasetArg,
        #[arg(long, allow_hyphen_values = true)]
        premise: Vec<String>,
        #[arg(long, allow_hyphen_values = true, required_unless_present = "record")]
        conclusion: Option<String>,
        #[arg(long)]
        max_domain: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        format: OutFormat,
    },
    /// Apply relations to every record and write the group pool.
    Generate {
        #[command(flatten)]
        dataset: DatasetArg,
        #[arg(long)]
        seed: Option<u64>,
        /// Relations to apply, comma separated (default: all).
        #[arg(long, value_delimiter = ',')]
        mr: Vec<MrId>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        translator: Option<String>,
        /// Let formula-level relations rewrite the conclusion as well.
        #[arg(long)]
        e_rules_on_conclusion: bool,
        /// Domain bound for the consistency check of added premises.
        #[arg(long)]
        max_domain: Option<usize>,
    },
    /// Draw a seeded sample from a pool, capped per relation.
    Sample {
        #[arg(long)]
        pool: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 200)]
        cap: usize,
        /// Per-category size below which a warning is printed.
        #[arg(long, default_value_t = 385)]
        minimum: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Query systems under test with every group, appending to the run log.
    Run {
        #[arg(long)]
        groups: Option<PathBuf>,
        /// Systems to query (default: every system in the config).
        #[arg(long)]
        sut: Vec<String>,
        #[arg(long)]
        strategy: Option<PromptStrategy>,
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long)]
        parse_mode: Option<ParseMode>,
    },
    /// Send a sample of reported violations to the auditor.
    Audit {
        #[arg(long)]
        groups: Option<PathBuf>,
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long)]
        auditor: Option<String>,
        #[arg(long, default_value_t = 360)]
        sample: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Findings file (JSON).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        parse_mode: Option<ParseMode>,
    },
    /// Compute metrics from a run log. Exits 1 when any violation was found.
    Report {
        #[arg(long)]
        groups: Option<PathBuf>,
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: ReportFmt,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Count unparseable answers as wrong instead of excluding their groups.
        #[arg(long)]
        parse_errors_as_wrong: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let result = config::CliConfig::load(cli.config.as_deref()).and_then(|cfg| commands::dispatch(cli.command, &cfg));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
