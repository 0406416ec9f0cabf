use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use metarate::corpus::{generate_corpus_with_horizon, Profile};
use metarate::oracle::{Extras, OracleCaps, Theorem, DEFAULT_HORIZON};
use metarate::report::{emit_plot_data, Report};
use metarate::runner::{bound_scenarios, run_scenarios, RunOptions};
use metarate::scenario::{Caps, ScenarioFile};

#[derive(Parser, Debug)]
#[command(name = "metarate", version, about = "Rates of metastability for iterations on [0,1], checked by brute force")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Largest bit length any intermediate natural may reach.
    #[arg(long, global = true)]
    cap_bits: Option<u64>,
    /// Longest run the oracle generates, in points.
    #[arg(long, global = true)]
    horizon: Option<u64>,
    /// Largest N the oracle examines (defaults to the bound).
    #[arg(long, global = true)]
    search: Option<u64>,
    /// Worker threads for `verify`.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Corpus seed for `gen`.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute each scenario's bound and print its full trace.
    Bound {
        /// Scenario file, or `-` for stdin.
        scenarios: PathBuf,
        /// Only this scenario.
        #[arg(long)]
        id: Option<String>,
    },
    /// Run the oracle on every scenario and write a report.
    Verify {
        /// Scenario file, or `-` for stdin.
        scenarios: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Cross-check every search with the pairwise checker.
        #[arg(long)]
        pairwise: bool,
        /// Record wall time per scenario.
        #[arg(long)]
        timings: bool,
    },
    /// Generate a seeded scenario corpus.
    Gen {
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long, value_enum, default_value_t = TheoremArg::Mixed)]
        theorem: TheoremArg,
        #[arg(long, default_value = "desk")]
        profile: Profile,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Turn a report into CSV rows for plotting.
    PlotData {
        /// Report file, or `-` for stdin.
        report: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TheoremArg {
    Fmcp,
    Km,
    Ishikawa,
    Lipschitz,
    Mixed,
}

impl TheoremArg {
    fn theorem(self) -> Option<Theorem> {
        match self {
            TheoremArg::Fmcp => Some(Theorem::Fmcp),
            TheoremArg::Km => Some(Theorem::Km),
            TheoremArg::Ishikawa => Some(Theorem::Ishikawa),
            TheoremArg::Lipschitz => Some(Theorem::Lipschitz),
            TheoremArg::Mixed => None,
        }
    }
}

fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).context("reading stdin")?;
        Ok(s)
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn load_scenarios(path: &Path) -> Result<ScenarioFile> {
    let text = read_input(path)?;
    ScenarioFile::parse(&text).with_context(|| format!("invalid scenario file {}", path.display()))
}

fn run_options(g: &Global) -> RunOptions {
    RunOptions {
        jobs: g.jobs.max(1),
        defaults: OracleCaps::default(),
        overrides: Caps {
            nat_bits: g.cap_bits,
            horizon: g.horizon,
            search: g.search,
            steps: None,
        },
        extras: Extras::default(),
        timings: false,
    }
}

/// Exit 0 on success, 1 on a soundness failure; input errors go through `Err`.
fn run(cli: Cli) -> Result<ExitCode> {
    let g = &cli.global;
    match cli.command {
        Command::Bound { scenarios, id } => {
            let mut file = load_scenarios(&scenarios)?;
            if let Some(id) = id {
                file.scenarios.retain(|s| s.id == id);
                anyhow::ensure!(!file.scenarios.is_empty(), "no scenario with id `{id}`");
            }
            let entries = bound_scenarios(&file, &run_options(g))?;
            let mut text = serde_json::to_string_pretty(&entries)?;
            text.push('\n');
            write_output(None, &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            scenarios,
            output,
            pairwise,
            timings,
        } => {
            let file = load_scenarios(&scenarios)?;
            let mut options = run_options(g);
            options.extras.pairwise = pairwise;
            options.timings = timings;
            let report = run_scenarios(&file, &options)?;
            write_output(output.as_deref(), &report.to_json())?;
            let s = report.summary;
            eprintln!(
                "{} scenarios: {} sound, {} skipped, {} bound-only, {} failed",
                s.total, s.sound, s.skipped, s.bound_only, s.failed
            );
            Ok(if report.accepted() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Gen {
            count,
            theorem,
            profile,
            output,
        } => {
            let horizon = g.horizon.unwrap_or(DEFAULT_HORIZON);
            let file = generate_corpus_with_horizon(g.seed, count, theorem.theorem(), profile, horizon)?;
            write_output(output.as_deref(), &file.to_json())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::PlotData { report, output } => {
            let text = read_input(&report)?;
            let report: Report = serde_json::from_str(&text).with_context(|| format!("invalid report {}", report.display()))?;
            write_output(output.as_deref(), &emit_plot_data(&report))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
