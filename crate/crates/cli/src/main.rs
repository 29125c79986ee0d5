//! `giry`: run convex-space, transport and algebra checks from the command line.
//!
//! Exit codes: 0 when every requested check passes, 1 when any fails, 2 on
//! usage, parse or I/O errors.

mod commands;
mod spacefile;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use giry::check::{CheckConfig, DEFAULT_BUDGET, DEFAULT_SEED};
use giry::measures::{measure_space_id, FinMeasure};
use giry::metric::Method;
use giry::registry::{Registry, SpaceEntry};
use serde_json::{json, Value};

use commands::Outcome;

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(
    name = "giry",
    version,
    about = "Exact checks for probability monad algebras on convex spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Space-definition file; its spaces are added to the built-ins.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED, value_parser = clap::value_parser!(u64).range(1..))]
    seed: u64,
    /// Sampled instances per check when a carrier cannot be enumerated.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET, value_parser = positive)]
    budget: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Include elapsed time in JSON reports (text reports always show it).
    #[arg(long, global = true)]
    timing: bool,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("expected a positive integer, got {s:?}")),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Lp,
    Brute,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Two-point and four-point compatibility of each space's metric.
    CheckCompat {
        /// Only this space; all registered spaces otherwise.
        #[arg(long)]
        space: Option<String>,
    },
    /// Build the expectation algebra and run the law suite.
    CheckLaws {
        #[arg(long)]
        space: Option<String>,
    },
    /// Exact optimal transport cost between two measure files.
    Wasserstein {
        /// Defaults to the space named in the first measure file.
        #[arg(long)]
        space: Option<String>,
        p: PathBuf,
        q: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Lp)]
        method: MethodArg,
    },
    /// Expectations of the coseparating maps against the algebra's value.
    Expect {
        #[arg(long)]
        space: Option<String>,
        measure: PathBuf,
    },
    /// The three-point space C and why it has no algebra.
    Counterexample,
    /// Atoms and joins of generated, dyadic and evaluation fields.
    FieldsDemo {
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(0..=8))]
        depth: u8,
    },
    /// Laws and compatibility on every registered space, plus the counterexample and field demo.
    ReportAll,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::CheckCompat { .. } => "check-compat",
            Command::CheckLaws { .. } => "check-laws",
            Command::Wasserstein { .. } => "wasserstein",
            Command::Expect { .. } => "expect",
            Command::Counterexample => "counterexample",
            Command::FieldsDemo { .. } => "fields-demo",
            Command::ReportAll => "report-all",
        }
    }
}

/// Usage, parse and I/O failures.
struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(UsageError(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn load_registry(input: Option<&Path>) -> Result<Registry, UsageError> {
    match input {
        None => Ok(Registry::builtins()),
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
            spacefile::parse_space_file(&text)
                .map_err(|e| UsageError(format!("{}: {e}", path.display())))
        }
    }
}

fn selected<'a>(
    registry: &'a Registry,
    space: Option<&str>,
) -> Result<Vec<&'a SpaceEntry>, UsageError> {
    match space {
        Some(id) => Ok(vec![registry.get(id)?]),
        None => Ok(registry.entries().collect()),
    }
}

fn read_measure(
    path: &Path,
    registry: &Registry,
    space: Option<&str>,
) -> Result<(SpaceEntry, FinMeasure), UsageError> {
    let text =
        fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    let id = match space {
        Some(id) => id.to_string(),
        None => measure_space_id(&text)
            .map_err(|e| UsageError(format!("{}: {e}", path.display())))?
            .to_string(),
    };
    let entry = registry.get(&id)?.clone();
    let measure = FinMeasure::parse(&text, &entry.space)
        .map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    Ok((entry, measure))
}

/// Runs each entry through `check` and merges the outcomes.
fn per_space(entries: &[&SpaceEntry], check: impl Fn(&SpaceEntry) -> Outcome) -> Outcome {
    let outcomes: Vec<Outcome> = entries.iter().map(|e| check(e)).collect();
    Outcome {
        passed: outcomes.iter().all(|o| o.passed),
        text: outcomes.iter().map(|o| o.text.as_str()).collect(),
        results: Value::Array(outcomes.into_iter().map(|o| o.results).collect()),
    }
}

fn execute(cli: &Cli, cfg: &CheckConfig) -> Result<Outcome, UsageError> {
    let registry = load_registry(cli.input.as_deref())?;
    Ok(match &cli.command {
        Command::CheckCompat { space } => per_space(&selected(&registry, space.as_deref())?, |e| {
            commands::check_compat(e, cfg)
        }),
        Command::CheckLaws { space } => per_space(&selected(&registry, space.as_deref())?, |e| {
            commands::check_laws(e, cfg)
        }),
        Command::Wasserstein {
            space,
            p,
            q,
            method,
        } => {
            let (entry, p) = read_measure(p, &registry, space.as_deref())?;
            let (_, q) = read_measure(q, &registry, Some(&entry.space.id))?;
            let method = match method {
                MethodArg::Lp => Method::Lp,
                MethodArg::Brute => Method::Brute,
            };
            commands::transport(&entry, &p, &q, method)?
        }
        Command::Expect { space, measure } => {
            let (entry, p) = read_measure(measure, &registry, space.as_deref())?;
            commands::expect(&entry, &p, cfg)?
        }
        Command::Counterexample => commands::counterexample(cfg)?,
        Command::FieldsDemo { depth } => commands::fields_demo(usize::from(*depth))?,
        Command::ReportAll => {
            let entries: Vec<&SpaceEntry> = registry.entries().collect();
            let laws = per_space(&entries, |e| commands::check_laws(e, cfg));
            let compat = per_space(&entries, |e| commands::check_compat(e, cfg));
            let counter = commands::counterexample(cfg)?;
            let fields = commands::fields_demo(3)?;
            let passed = laws.passed && compat.passed && counter.passed && fields.passed;
            let text = format!(
                "== laws ==\n{}== compatibility ==\n{}== counterexample ==\n{}== fields ==\n{}",
                laws.text, compat.text, counter.text, fields.text
            );
            Outcome {
                passed,
                results: json!({
                    "laws": laws.results,
                    "compat": compat.results,
                    "counterexample": counter.results,
                    "fields": fields.results,
                }),
                text,
            }
        }
    })
}

fn run(cli: &Cli) -> Result<bool, UsageError> {
    let cfg = CheckConfig::with_seed(cli.seed).with_budget(cli.budget);
    let started = Instant::now();
    let outcome = execute(cli, &cfg)?;
    let elapsed_ms = started.elapsed().as_millis();
    let verdict = if outcome.passed { "pass" } else { "fail" };
    let rendered = match cli.format {
        Format::Json => {
            let mut doc = json!({
                "schema": SCHEMA_VERSION,
                "command": cli.command.name(),
                "seed": cli.seed,
                "budget": cli.budget,
                "passed": outcome.passed,
                "results": outcome.results,
            });
            if cli.timing {
                doc["timing_ms"] = json!(elapsed_ms);
            }
            let mut s = serde_json::to_string_pretty(&doc)?;
            s.push('\n');
            s
        }
        Format::Text => format!(
            "giry {} (seed {}, budget {})\n{}result: {verdict} ({elapsed_ms} ms)\n",
            cli.command.name(),
            cli.seed,
            cli.budget,
            outcome.text
        ),
    };
    match &cli.output {
        Some(path) => {
            fs::write(path, rendered).map_err(|e| UsageError(format!("{}: {e}", path.display())))?
        }
        None => print!("{rendered}"),
    }
    Ok(outcome.passed)
}
