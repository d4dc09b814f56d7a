//! Command-line front end: `run`, `list`, `oracle`, `compare`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::model::{Named, OutcomeType, Registry};
use crate::oracle::{enumerate_outcomes, format_outcome_set, MemoryModel};
use crate::report::{
    compare, reports_from_json, reports_to_json, CompareOptions, FreqStyle, RunReport,
};
use crate::runner::{run_test, AffinityScheme, RunParams};
use crate::suite::{builtin_registry, SuiteEntry};

/// Exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const ERROR: i32 = 1;
    pub const INTERESTING: i32 = 2;
    pub const FORBIDDEN: i32 = 3;
    pub const DISCREPANCIES: i32 = 4;
}

/// Environment variable consulted when `--affinity` is not given.
pub const AFFINITY_ENV: &str = "LITMUS_AFFINITY";

#[derive(Debug, Parser)]
#[command(
    name = "litmus",
    version,
    about = "Stress-run litmus tests and classify weak-memory outcomes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the selected tests and print their reports.
    Run(RunArgs),
    /// List built-in tests.
    List {
        /// Glob over test names.
        #[arg(default_value = "*")]
        selector: String,
    },
    /// Print the outcome sets the oracle derives for the selected tests.
    Oracle {
        selector: String,
        #[arg(long, value_enum, default_value_t = ModelArg::Sc)]
        model: ModelArg,
    },
    /// Compare two JSON reports.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Frequency ratio reported as informational.
        #[arg(long, default_value_t = 100.0)]
        ratio: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Sc,
    Tso,
}

impl From<ModelArg> for MemoryModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Sc => MemoryModel::Sc,
            ModelArg::Tso => MemoryModel::Tso,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FreqStyleArg {
    Uniform,
    Paper,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Test name or glob, e.g. `sb.*`.
    pub selector: String,
    #[arg(long, default_value_t = 1_000_000)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 10)]
    pub rounds: usize,
    #[arg(long, default_value_t = 100)]
    pub sync_every: usize,
    /// none, seq, spread, or a comma-separated CPU list.
    #[arg(long)]
    pub affinity: Option<String>,
    /// Bytes of padding after each state: 0, 64, 128, or any multiple of 8.
    #[arg(long, default_value_t = 0)]
    pub padding: usize,
    /// Independent runner instances whose histograms are merged.
    #[arg(long, default_value_t = 1)]
    pub parallel: usize,
    /// Wall-clock cap per test in seconds; truncates remaining rounds.
    #[arg(long)]
    pub duration: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FreqStyleArg::Uniform)]
    pub freq_style: FreqStyleArg,
}

impl RunArgs {
    fn params(&self, env_affinity: Option<String>) -> Result<RunParams, String> {
        let affinity = match self.affinity.clone().or(env_affinity) {
            Some(s) => s.parse::<AffinityScheme>()?,
            None => AffinityScheme::None,
        };
        let time_budget = match self.duration {
            None => None,
            Some(secs) if secs.is_finite() && secs > 0.0 => Some(Duration::from_secs_f64(secs)),
            Some(secs) => return Err(format!("invalid duration {secs}: must be positive")),
        };
        let params = RunParams {
            batch_size: self.batch_size,
            rounds: self.rounds,
            sync_every: self.sync_every,
            affinity,
            padding_bytes: self.padding,
            parallel_instances: self.parallel,
            time_budget,
        };
        params.validate().map_err(|e| e.to_string())?;
        Ok(params)
    }
}

/// Exit code for the worst status across the selected tests.
pub fn exit_code_for(statuses: impl IntoIterator<Item = OutcomeType>) -> i32 {
    match statuses.into_iter().max() {
        None | Some(OutcomeType::Acceptable) => exit::OK,
        Some(OutcomeType::Interesting) => exit::INTERESTING,
        Some(OutcomeType::Forbidden) => exit::FORBIDDEN,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => exit::OK,
                _ => exit::ERROR,
            };
            let rendered = e.render().to_string();
            if code == exit::OK {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    let registry = builtin_registry();
    let result = match cli.command {
        Command::Run(args) => cmd_run(&registry, &args, out, err),
        Command::List { selector } => cmd_list(&registry, &selector, out, err),
        Command::Oracle { selector, model } => {
            cmd_oracle(&registry, &selector, model.into(), out, err)
        }
        Command::Compare { a, b, ratio } => cmd_compare(&a, &b, ratio, out),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            exit::ERROR
        }
    }
}

fn select<'a>(
    registry: &'a Registry<SuiteEntry>,
    selector: &str,
) -> Result<Vec<&'a SuiteEntry>, String> {
    let found = registry.lookup(selector).map_err(|e| e.to_string())?;
    if found.is_empty() {
        return Err(format!(
            "no test matches {selector:?}; candidates: {}",
            suggestions(registry, selector).join(", ")
        ));
    }
    Ok(found)
}

/// Names sharing the selector's first dotted segment, or every name.
fn suggestions(registry: &Registry<SuiteEntry>, selector: &str) -> Vec<String> {
    let family = selector
        .split('.')
        .next()
        .unwrap_or("")
        .to_ascii_lowercase();
    let close: Vec<String> = registry
        .names()
        .filter(|n| !family.is_empty() && n.split('.').next() == Some(family.as_str()))
        .map(str::to_string)
        .collect();
    if close.is_empty() {
        registry.names().map(str::to_string).collect()
    } else {
        close
    }
}

fn io_err(e: std::io::Error) -> String {
    e.to_string()
}

fn cmd_run(
    registry: &Registry<SuiteEntry>,
    args: &RunArgs,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, String> {
    let params = args.params(std::env::var(AFFINITY_ENV).ok())?;
    let entries = select(registry, &args.selector)?;
    let style = match args.freq_style {
        FreqStyleArg::Uniform => FreqStyle::Uniform,
        FreqStyleArg::Paper => FreqStyle::Paper,
    };
    let mut reports: Vec<RunReport> = Vec::with_capacity(entries.len());
    for entry in entries {
        let report =
            run_test(&entry.test, &params).map_err(|e| format!("{}: {e}", entry.name()))?;
        for w in &report.warnings {
            writeln!(err, "warning: {}: {w}", entry.name()).map_err(io_err)?;
        }
        reports.push(report);
    }
    let rendered: Vec<u8> = match args.format {
        Format::Json => reports_to_json(&reports),
        Format::Text => reports
            .iter()
            .map(|r| r.format_table(style))
            .collect::<Vec<_>>()
            .join("\n")
            .into_bytes(),
    };
    match &args.output {
        Some(path) => {
            std::fs::write(path, &rendered).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => {
            out.write_all(&rendered).map_err(io_err)?;
            if args.format == Format::Json {
                writeln!(out).map_err(io_err)?;
            }
        }
    }
    Ok(exit_code_for(reports.iter().map(|r| r.overall_status)))
}

fn cmd_list(
    registry: &Registry<SuiteEntry>,
    selector: &str,
    out: &mut dyn Write,
    _err: &mut dyn Write,
) -> Result<i32, String> {
    let entries = select(registry, selector)?;
    let width = entries.iter().map(|e| e.name().len()).max().unwrap_or(0);
    for e in entries {
        writeln!(out, "{:<width$}  {}", e.name(), e.test.description()).map_err(io_err)?;
    }
    Ok(exit::OK)
}

fn cmd_oracle(
    registry: &Registry<SuiteEntry>,
    selector: &str,
    model: MemoryModel,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, String> {
    let entries = select(registry, selector)?;
    let many = entries.len() > 1;
    let mut missing = false;
    for (i, e) in entries.iter().enumerate() {
        if many {
            if i > 0 {
                writeln!(out).map_err(io_err)?;
            }
            writeln!(out, "test: {}", e.name()).map_err(io_err)?;
        }
        match &e.twin {
            Some(twin) => {
                let set = enumerate_outcomes(twin, model).map_err(|e| e.to_string())?;
                write!(out, "{}", format_outcome_set(model, &set)).map_err(io_err)?;
            }
            None => {
                missing = true;
                writeln!(
                    err,
                    "{}: no abstract program; the oracle cannot enumerate it",
                    e.name()
                )
                .map_err(io_err)?;
            }
        }
    }
    Ok(if missing && !many {
        exit::ERROR
    } else {
        exit::OK
    })
}

fn cmd_compare(a: &PathBuf, b: &PathBuf, ratio: f64, out: &mut dyn Write) -> Result<i32, String> {
    let load = |p: &PathBuf| -> Result<Vec<RunReport>, String> {
        let bytes = std::fs::read(p).map_err(|e| format!("{}: {e}", p.display()))?;
        reports_from_json(&bytes).map_err(|e| format!("{}: {e}", p.display()))
    };
    let left = load(a)?;
    let right = load(b)?;
    let options = CompareOptions {
        frequency_ratio: ratio,
    };
    let mut any = false;
    for ra in &left {
        let rb = right
            .iter()
            .find(|r| r.test_name == ra.test_name)
            .ok_or_else(|| format!("{} has no report for {}", b.display(), ra.test_name))?;
        let found = compare(ra, rb, &options).map_err(|e| e.to_string())?;
        for d in &found {
            writeln!(out, "{}: {d}", ra.test_name).map_err(io_err)?;
        }
        any |= found.iter().any(|d| !d.is_informational());
    }
    if let Some(extra) = right
        .iter()
        .find(|r| !left.iter().any(|l| l.test_name == r.test_name))
    {
        return Err(format!(
            "{} has no report for {}",
            a.display(),
            extra.test_name
        ));
    }
    if any {
        Ok(exit::DISCREPANCIES)
    } else {
        writeln!(out, "no discrepancies").map_err(io_err)?;
        Ok(exit::OK)
    }
}
