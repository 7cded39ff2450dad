//! Argument parsing for the `rccs` binary.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::construct::{ConstructionRequest, CoreChoice, Mode, Schedule};
use crate::error::{Error, Result};
use crate::oracle::SearchBudget;
use crate::rational;
use crate::report::{self, Inputs, RunReport, VerifyKind};
use crate::space::{CorrelationSummary, SpaceDocument};

#[derive(Debug, Parser)]
#[command(
    name = "rccs",
    version,
    about = "Exact checks and constructions for common cause systems"
)]
pub struct Cli {
    /// Print the full report as JSON
    #[arg(long, global = true)]
    pub json: bool,
    /// Add floating-point approximations (non-authoritative)
    #[arg(long, global = true)]
    pub decimal: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Kind {
    Fork,
    Rccs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Literal,
    Realizable,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Literal => Mode::Literal,
            ModeArg::Realizable => Mode::Realizable,
        }
    }
}

#[derive(Debug, Args)]
pub struct Instance {
    /// Space file: {"atoms":[{"label","weight"}],"events":{name:[labels]}}
    #[arg(long)]
    pub space: PathBuf,
    /// Named events A,B
    #[arg(long)]
    pub pair: String,
    /// Comma-separated cell event names (one name for a fork's cause)
    #[arg(long)]
    pub partition: String,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    /// Initial epsilon of the retry schedule
    #[arg(long)]
    pub epsilon: Option<String>,
    /// Factor applied to epsilon on each retry
    #[arg(long)]
    pub shrink: Option<String>,
    /// Pin the realizable core's low-cell mass (with --core-a)
    #[arg(long, requires = "core_a")]
    pub core_c: Option<String>,
    /// Pin the realizable core's low-cell p(A|C) (with --core-c)
    #[arg(long, requires = "core_c")]
    pub core_a: Option<String>,
}

impl ScheduleArgs {
    fn core(&self) -> Result<Option<CoreChoice>> {
        match (&self.core_c, &self.core_a) {
            (Some(c), Some(a)) => Ok(Some(CoreChoice {
                c: rational::parse(c)?,
                a: rational::parse(a)?,
            })),
            _ => Ok(None),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a conjunctive fork or a common cause system
    Verify {
        #[arg(value_enum)]
        kind: Kind,
        #[command(flatten)]
        instance: Instance,
    },
    /// Build an admissible* set of size n for a correlated target
    Construct {
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        b: Option<String>,
        #[arg(long)]
        pab: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum, default_value = "realizable")]
        mode: ModeArg,
        /// Read the whole request from a JSON file instead
        #[arg(long, conflicts_with_all = ["a", "b", "pab", "n"])]
        request: Option<PathBuf>,
        #[command(flatten)]
        schedule: ScheduleArgs,
    },
    /// Embed the space in an extension carrying a common cause system
    Extend {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        pair: String,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "realizable")]
        mode: ModeArg,
        #[command(flatten)]
        schedule: ScheduleArgs,
        /// Where to write the extension space
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce the admissible-but-not-screening two-cell example
    Counterexample,
    /// Per-cell screening defects and whether they cancel
    Diagnose {
        #[command(flatten)]
        instance: Instance,
    },
    /// Enumerate every n-cell partition that is a common cause system
    OracleSearch {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        pair: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = SearchBudget::default().max_atoms)]
        max_atoms: usize,
    },
    /// Check the covariance decomposition on one instance or a random sweep
    Identities {
        #[arg(long, requires_all = ["pair", "partition"])]
        space: Option<PathBuf>,
        #[arg(long)]
        pair: Option<String>,
        #[arg(long)]
        partition: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
}

fn split_pair(s: &str) -> Result<(&str, &str)> {
    match s.split(',').map(str::trim).collect::<Vec<_>>()[..] {
        [a, b] if !a.is_empty() && !b.is_empty() => Ok((a, b)),
        _ => Err(Error::Parse(format!(
            "--pair expects two names A,B, got {s:?}"
        ))),
    }
}

fn split_names(s: &str) -> Vec<String> {
    s.split(',')
        .map(|x| x.trim().to_string())
        .filter(|x| !x.is_empty())
        .collect()
}

fn load(inputs: &mut Inputs, path: &Path) -> Result<SpaceDocument> {
    SpaceDocument::from_json(&inputs.read(&path.to_string_lossy())?)
}

fn schedule(args: &ScheduleArgs, base: Schedule) -> Result<Schedule> {
    let mut s = base;
    if let Some(e) = &args.epsilon {
        s.epsilon = rational::parse(e)?;
    }
    if let Some(f) = &args.shrink {
        s.shrink = rational::parse(f)?;
    }
    report::schedule_from_env(s)
}

fn required<'a>(v: &'a Option<String>, flag: &str) -> Result<&'a str> {
    v.as_deref()
        .ok_or_else(|| Error::InvalidInput(format!("{flag} is required without --request")))
}

fn dispatch(cli: &Cli, inputs: &mut Inputs) -> Result<RunReport> {
    match &cli.command {
        Command::Verify { kind, instance } => {
            let doc = load(inputs, &instance.space)?;
            let kind = match kind {
                Kind::Fork => VerifyKind::Fork,
                Kind::Rccs => VerifyKind::Rccs,
            };
            report::verify(
                inputs,
                kind,
                &doc,
                split_pair(&instance.pair)?,
                &split_names(&instance.partition),
            )
        }
        Command::Construct {
            a,
            b,
            pab,
            n,
            mode,
            request,
            schedule: sched,
        } => {
            let req = match request {
                Some(path) => {
                    let mut req =
                        ConstructionRequest::from_json(&inputs.read(&path.to_string_lossy())?)?;
                    req.schedule = schedule(sched, req.schedule.clone())?;
                    if let Some(core) = sched.core()? {
                        req.core = Some(core);
                    }
                    req
                }
                None => {
                    let target = CorrelationSummary::from_marginals(
                        rational::parse(required(a, "--a")?)?,
                        rational::parse(required(b, "--b")?)?,
                        rational::parse(required(pab, "--pab")?)?,
                    );
                    let n = n.ok_or_else(|| {
                        Error::InvalidInput("--n is required without --request".into())
                    })?;
                    let mut req = ConstructionRequest::new(target, n, (*mode).into());
                    req.schedule = schedule(sched, req.schedule.clone())?;
                    req.core = sched.core()?;
                    req
                }
            };
            report::construct(inputs, &req)
        }
        Command::Extend {
            space,
            pair,
            n,
            mode,
            schedule: sched,
            out,
        } => {
            let doc = load(inputs, space)?;
            let core = sched.core()?;
            let sched = schedule(sched, Schedule::default())?;
            let mut result = report::extend(
                inputs,
                &doc,
                split_pair(pair)?,
                *n,
                (*mode).into(),
                sched,
                core,
            )?;
            if let Some(path) = out {
                let text = serde_json::to_string_pretty(&result.extension).expect("json");
                std::fs::write(path, text + "\n")
                    .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                result
                    .report
                    .summary
                    .push_str(&format!("\n  written to {}", path.display()));
            }
            Ok(result.report)
        }
        Command::Counterexample => report::counterexample(inputs),
        Command::Diagnose { instance } => {
            let doc = load(inputs, &instance.space)?;
            report::diagnose(
                inputs,
                &doc,
                split_pair(&instance.pair)?,
                &split_names(&instance.partition),
            )
        }
        Command::OracleSearch {
            space,
            pair,
            n,
            max_atoms,
        } => {
            let doc = load(inputs, space)?;
            let budget = SearchBudget {
                max_atoms: *max_atoms,
                ..SearchBudget::default()
            };
            report::oracle_search(inputs, &doc, split_pair(pair)?, *n, budget)
        }
        Command::Identities {
            space,
            pair,
            partition,
            seed,
            count,
        } => match space {
            Some(path) => {
                let doc = load(inputs, path)?;
                let pair = pair.as_deref().unwrap_or_default();
                let cells = split_names(partition.as_deref().unwrap_or_default());
                report::identities_on(inputs, &doc, split_pair(pair)?, &cells)
            }
            None => report::identities_sweep(inputs, *seed, *count),
        },
    }
}

/// Rendered result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub text: String,
    pub code: i32,
    /// Human-readable errors go to stderr; JSON always goes to stdout.
    pub stderr: bool,
}

/// Run one invocation, `args[0]` being the program name.
pub fn run(args: Vec<String>) -> Output {
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            return Output {
                text: e.render().to_string(),
                code: if usage {
                    report::EXIT_PARSE
                } else {
                    report::EXIT_OK
                },
                stderr: usage,
            };
        }
    };
    // echo without the program name so digests do not depend on the install path
    let mut inputs = Inputs::new(args.into_iter().skip(1).collect());
    let mut report =
        dispatch(&cli, &mut inputs).unwrap_or_else(|e| RunReport::from_error(&inputs, &e));
    if cli.decimal {
        report = report.with_decimal();
    }
    let text = if cli.json {
        report.to_json() + "\n"
    } else {
        report.to_text()
    };
    Output {
        text,
        code: report.exit_code,
        stderr: !cli.json && report.error.is_some(),
    }
}
