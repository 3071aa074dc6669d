//! Argument parsing and dispatch for the `weakdo` binary.
//!
//! Exit codes: 0 success, 1 a declared check failed (scenario assertion,
//! demo expectation, or weakest-policy dominance), 2 usage, parse or I/O
//! error.

use std::ffi::OsString;
use std::num::NonZeroUsize;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use weakdo_core::experiments::runner::parse_policies;
use weakdo_core::experiments::{
    run_scenario, scenario_do_switch, scenario_raincoat, seeded_world, verify_all_worlds,
    verify_premises, world_label, Format, Mode, Report,
};
use weakdo_core::{Language, Policy, TaskBounds};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const DEFAULT_SAMPLES: u64 = 10_000;

#[derive(Debug, Parser)]
#[command(
    name = "weakdo",
    version,
    about = "Weakness-maximising induction experiments"
)]
struct Cli {
    /// Table format for reports; a .txt summary is always written too.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Worker threads for enumeration (default: all cores).
    #[arg(long, global = true)]
    threads: Option<NonZeroUsize>,
    /// Suppress the summary printed to stdout.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: CommandArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum CommandArgs {
    /// Compare the generalisation probability of hypothesis-selection policies.
    VerifyPremises(VerifyArgs),
    /// Run a canned demonstration.
    Demo {
        #[arg(value_enum)]
        target: DemoTarget,
        #[arg(long, default_value = "reports")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate a JSON scenario file.
    Run {
        scenario: PathBuf,
        #[arg(long, default_value = "reports")]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DemoTarget {
    Raincoat,
    DoSwitch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Auto,
    Exhaustive,
    Sampling,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Number of world states (maximum with --all-worlds).
    #[arg(long, default_value_t = 3)]
    states: usize,
    /// Number of programs, all in the vocabulary (maximum with --all-worlds).
    #[arg(long, default_value_t = 3)]
    vocab: usize,
    /// Child task bounds as `max_situations,max_decisions`.
    #[arg(long, default_value = "1,1", value_parser = parse_bounds)]
    child_bounds: TaskBounds,
    /// Parent task bounds as `max_situations,max_decisions`.
    #[arg(long, default_value = "2,2", value_parser = parse_bounds)]
    parent_bounds: TaskBounds,
    /// Comma-separated policies: weakest, strongest, random, random:N, lex.
    #[arg(
        long,
        default_value = "weakest,strongest,random,lexicographic-first",
        value_delimiter = ','
    )]
    policies: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "reports")]
    out: PathBuf,
    /// Sweep every world up to --states states and --vocab programs.
    #[arg(long)]
    all_worlds: bool,
    #[arg(long, value_enum, default_value = "auto")]
    mode: ModeArg,
    /// Parent samples per child task in sampling mode.
    #[arg(long)]
    samples: Option<u64>,
}

fn parse_bounds(s: &str) -> Result<TaskBounds, String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `situations,decisions`, got `{s}`"))?;
    let a: usize = a
        .trim()
        .parse()
        .map_err(|e| format!("bad situation bound: {e}"))?;
    let b: usize = b
        .trim()
        .parse()
        .map_err(|e| format!("bad decision bound: {e}"))?;
    TaskBounds::new(a, b).map_err(|e| e.to_string())
}

/// Validated invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvocationConfig {
    pub command: Command,
    pub format: Format,
    pub threads: Option<usize>,
    pub quiet: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    VerifyPremises {
        states: usize,
        vocab: usize,
        child: TaskBounds,
        parent: TaskBounds,
        policies: Vec<Policy>,
        seed: u64,
        out: PathBuf,
        all_worlds: bool,
        mode: Mode,
    },
    Demo {
        target: DemoTarget,
        out: PathBuf,
        seed: u64,
    },
    Run {
        scenario: PathBuf,
        out: PathBuf,
    },
}

/// Parses and validates the command line. `--help` and `--version` come
/// back as errors of the matching kind; callers print them and exit.
pub fn parse_args<I, T>(argv: I) -> Result<InvocationConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let usage = |kind, msg: String| Cli::command().error(kind, msg);
    let command = match cli.command {
        CommandArgs::VerifyPremises(a) => {
            let mode = match (a.mode, a.samples) {
                (ModeArg::Exhaustive, Some(_)) => {
                    return Err(usage(
                        ErrorKind::ArgumentConflict,
                        "--samples cannot be used with --mode exhaustive".into(),
                    ))
                }
                (ModeArg::Exhaustive, None) => Mode::Exhaustive,
                (ModeArg::Sampling, s) => Mode::Sampling {
                    samples: s.unwrap_or(DEFAULT_SAMPLES),
                },
                (ModeArg::Auto, s) => Mode::Auto {
                    samples: s.unwrap_or(DEFAULT_SAMPLES),
                },
            };
            if matches!(
                mode,
                Mode::Sampling { samples: 0 } | Mode::Auto { samples: 0 }
            ) {
                return Err(usage(
                    ErrorKind::ValueValidation,
                    "--samples must be positive".into(),
                ));
            }
            if a.states == 0 || a.vocab == 0 {
                return Err(usage(
                    ErrorKind::ValueValidation,
                    "--states and --vocab must be positive".into(),
                ));
            }
            if a.vocab > 16 {
                return Err(usage(
                    ErrorKind::ValueValidation,
                    "--vocab above 16 is not supported".into(),
                ));
            }
            if a.states > 20 {
                return Err(usage(
                    ErrorKind::ValueValidation,
                    "--states above 20 is not supported".into(),
                ));
            }
            let policies = parse_policies(&a.policies, a.seed)
                .map_err(|e| usage(ErrorKind::InvalidValue, e.to_string()))?;
            if policies.is_empty() {
                return Err(usage(
                    ErrorKind::ValueValidation,
                    "--policies is empty".into(),
                ));
            }
            Command::VerifyPremises {
                states: a.states,
                vocab: a.vocab,
                child: a.child_bounds,
                parent: a.parent_bounds,
                policies,
                seed: a.seed,
                out: a.out,
                all_worlds: a.all_worlds,
                mode,
            }
        }
        CommandArgs::Demo { target, out, seed } => Command::Demo { target, out, seed },
        CommandArgs::Run { scenario, out } => Command::Run { scenario, out },
    };
    Ok(InvocationConfig {
        command,
        format: match cli.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        },
        threads: cli.threads.map(NonZeroUsize::get),
        quiet: cli.quiet,
    })
}

fn premises_report(cmd: &Command) -> weakdo_core::Result<Report> {
    let Command::VerifyPremises {
        states,
        vocab,
        child,
        parent,
        policies,
        seed,
        all_worlds,
        mode,
        ..
    } = cmd
    else {
        unreachable!("called with verify-premises only")
    };
    if *all_worlds {
        let mut r = verify_all_worlds(*states, *vocab, *child, *parent, policies, *mode, *seed)?
            .to_report();
        r.header.insert(
            0,
            (
                "worlds_up_to".into(),
                format!("states={states};programs={vocab}"),
            ),
        );
        Ok(r)
    } else {
        let world = seeded_world(*states, *vocab, *seed)?;
        let lang = Language::new(&world, &world.full_vocabulary()?)?;
        let label = world_label(&world);
        let mut r =
            verify_premises(&lang, &label, *child, *parent, policies, *mode, *seed)?.to_report();
        r.header.insert(0, ("world".into(), label));
        Ok(r)
    }
}

fn execute(config: &InvocationConfig) -> weakdo_core::Result<(i32, Vec<PathBuf>, String)> {
    let (report, out) = match &config.command {
        cmd @ Command::VerifyPremises { out, .. } => (premises_report(cmd)?, out),
        Command::Demo { target, out, seed } => (
            match target {
                DemoTarget::Raincoat => scenario_raincoat()?,
                DemoTarget::DoSwitch => scenario_do_switch(*seed)?,
            },
            out,
        ),
        Command::Run { scenario, out } => {
            let outcome = run_scenario(scenario, out, config.format)?;
            let files = vec![out.join(format!(
                "{}.{}",
                outcome.report.name,
                if config.format == Format::Json {
                    "json"
                } else {
                    "csv"
                }
            ))];
            let code = if outcome.failures == 0 {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            };
            return Ok((code, files, summary(&outcome.report)));
        }
    };
    let files = report.write(out, config.format)?;
    let code = if report.passed {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    };
    Ok((code, files, summary(&report)))
}

fn summary(r: &Report) -> String {
    let mut lines = vec![format!(
        "{}: {}",
        r.name,
        if r.passed { "pass" } else { "fail" }
    )];
    lines.extend(r.header.iter().map(|(k, v)| format!("  {k}: {v}")));
    lines.join("\n")
}

/// Runs a validated invocation and returns the process exit code.
pub fn dispatch(config: &InvocationConfig) -> i32 {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.threads {
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return EXIT_USAGE;
        }
    };
    match pool.install(|| execute(config)) {
        Ok((code, files, summary)) => {
            if !config.quiet {
                println!("{summary}");
                for f in files {
                    println!("wrote {}", f.display());
                }
            }
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
