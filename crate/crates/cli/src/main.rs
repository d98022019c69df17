//! `bionet`: JSON front end to the reachability, coverability, liveness and
//! history engines.
//!
//! Exit codes: 0 when the query was answered (true or false), 2 for
//! unknown-capped, unstable or disagreeing results, 64 for usage errors and
//! 65 for unusable input data.

mod commands;
mod input;
mod oracle_diff;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::input::CliError;
use crate::report::Report;

#[derive(Parser)]
#[command(name = "bionet", version, about = "Reachability, coverability and liveness for IO and BIO nets")]
struct Cli {
    /// Emit a JSON report (the only output format; accepted for scripts).
    #[arg(long, global = true)]
    json: bool,
    /// Add wall-clock timings. Timed reports are not byte-stable.
    #[arg(long, global = true)]
    timings: bool,
    /// Directory searched for nets given by name.
    #[arg(long, global = true, value_name = "DIR")]
    fixtures: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct NetArg {
    /// Net file, a name in --fixtures, or a built-in fixture name.
    #[arg(long, value_name = "PATH")]
    net: String,
}

#[derive(Args, Default)]
pub struct CapArgs {
    /// Largest count per place in explicit searches [default: max(16, 2 x largest marking)].
    #[arg(long, value_name = "N")]
    pub cap_per_place: Option<u64>,
    /// Largest total token count in explicit searches [default: per-place cap x places].
    #[arg(long, value_name = "N")]
    pub cap_total: Option<u64>,
}

#[derive(Args, Default)]
pub struct EngineArgs {
    /// Counts tracked exactly by the footprint engine [default: m + n].
    #[arg(long, value_name = "N")]
    pub tracked_cap: Option<u64>,
    /// Smoke representative [default: tracked cap + 1].
    #[arg(long, value_name = "N")]
    pub smoke_rep: Option<u64>,
    /// Times the representative is raised to confirm a verdict [default: 2].
    #[arg(long, value_name = "N")]
    pub stability_rounds: Option<u64>,
    /// Per-place box of the engine's explicit searches [default: derived].
    #[arg(long, value_name = "N")]
    pub search_cap: Option<u64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum ReachEngine {
    /// Breadth-first search over blocks; the witness is a shortest one.
    #[default]
    Explicit,
    /// Footprint engine on the exact source marking.
    Footprint,
    /// Counting-set pre-image of the target.
    Cube,
}

impl ReachEngine {
    pub fn name(self) -> &'static str {
        match self {
            ReachEngine::Explicit => "explicit",
            ReachEngine::Footprint => "footprint",
            ReachEngine::Cube => "cube",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum CoverEngine {
    /// Search for a covering marking.
    #[default]
    Explicit,
    /// Destroyers on every place, then exact reachability.
    Reduction,
    /// Counting-set pre-image of the upward closure.
    Cube,
}

impl CoverEngine {
    pub fn name(self) -> &'static str {
        match self {
            CoverEngine::Explicit => "explicit",
            CoverEngine::Reduction => "reduction",
            CoverEngine::Cube => "cube",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// Random BIO nets.
    #[default]
    Random,
    /// TOY-KILL with every target of counts up to 2.
    ToyKill,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Random => "random",
            Family::ToyKill => "toy-kill",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Classify a net as IO, BIO or EXTENDED.
    Classify {
        #[command(flatten)]
        net: NetArg,
    },
    /// Is --to reachable from --from?
    Reach {
        #[command(flatten)]
        net: NetArg,
        /// Source marking as JSON, e.g. '{"p":6}'.
        #[arg(long)]
        from: String,
        /// Target marking as JSON.
        #[arg(long)]
        to: String,
        #[arg(long, value_enum, default_value_t)]
        engine: ReachEngine,
        #[command(flatten)]
        caps: CapArgs,
        #[command(flatten)]
        params: EngineArgs,
    },
    /// Is some marking covering --to reachable from --from?
    Cover {
        #[command(flatten)]
        net: NetArg,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long, value_enum, default_value_t)]
        engine: CoverEngine,
        #[command(flatten)]
        caps: CapArgs,
        #[command(flatten)]
        params: EngineArgs,
    },
    /// Least number of blocks t^k from --from to --to.
    MinLen {
        #[command(flatten)]
        net: NetArg,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        /// Give up after this many blocks.
        #[arg(long, value_name = "N")]
        max_blocks: Option<usize>,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Can some marking of --cube-from reach some marking of --cube-to?
    CubeReach {
        #[command(flatten)]
        net: NetArg,
        /// Cube as JSON: {"lower": {...}, "upper": {...}} with "inf" allowed.
        #[arg(long)]
        cube_from: String,
        #[arg(long)]
        cube_to: String,
        #[command(flatten)]
        params: EngineArgs,
    },
    /// Can some marking of --cube-from cover some marking of --cube-to?
    CubeCover {
        #[command(flatten)]
        net: NetArg,
        #[arg(long)]
        cube_from: String,
        #[arg(long)]
        cube_to: String,
        #[command(flatten)]
        params: EngineArgs,
    },
    /// Pre-image of a marking (--to) or a cube (--cube-to) as a counting set.
    PreStar {
        #[command(flatten)]
        net: NetArg,
        #[arg(long, required_unless_present = "cube_to", conflicts_with = "cube_to")]
        to: Option<String>,
        #[arg(long)]
        cube_to: Option<String>,
        #[command(flatten)]
        params: EngineArgs,
    },
    /// The set of live markings as a counting set.
    LiveSet {
        #[command(flatten)]
        net: NetArg,
        #[command(flatten)]
        params: EngineArgs,
    },
    /// Is --from live? Answered by the live set, cross-checked explicitly.
    Live {
        #[command(flatten)]
        net: NetArg,
        #[arg(long)]
        from: String,
        #[command(flatten)]
        caps: CapArgs,
        #[command(flatten)]
        params: EngineArgs,
    },
    /// Equivalent fuel-efficient history with pairwise distinct footprints.
    Shorten {
        #[command(flatten)]
        net: NetArg,
        /// History file or inline JSON.
        #[arg(long)]
        history: String,
        /// Decoration file or inline JSON [default: non-cargo nodes are fuel].
        #[arg(long)]
        decoration: Option<String>,
    },
    /// Flatness witness of an IO net, with an optional pattern check.
    Flatten {
        #[command(flatten)]
        net: NetArg,
        /// Use this many rounds instead of (n^3+1)^n.
        #[arg(long, value_name = "K")]
        k: Option<u64>,
        /// Source of a pattern check (needs --to and --k).
        #[arg(long, requires_all = ["to", "k"])]
        from: Option<String>,
        #[arg(long, requires = "from")]
        to: Option<String>,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Realizability, decoration validity, wasteful places and footprints.
    ValidateHistory {
        #[command(flatten)]
        net: NetArg,
        #[arg(long)]
        history: String,
        #[arg(long)]
        decoration: Option<String>,
    },
    /// Compare the pre-image engine with an explicit oracle on generated instances.
    OracleDiff {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Places per generated net.
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Largest number of transitions per generated net.
        #[arg(long, default_value_t = 3)]
        transitions: usize,
        #[arg(long, default_value_t = 100)]
        instances: usize,
        /// Largest count per place among compared markings.
        #[arg(long, default_value_t = 8)]
        cap: u64,
        #[arg(long, value_enum, default_value_t)]
        family: Family,
        #[command(flatten)]
        params: EngineArgs,
    },
    /// Length and token bounds for shortened histories of this net.
    Bounds {
        #[command(flatten)]
        net: NetArg,
        /// Target size.
        #[arg(long)]
        m: u64,
        /// Source size.
        #[arg(long = "m-prime")]
        m_prime: u64,
    },
}

fn dispatch(cli: &Cli) -> Result<Report, CliError> {
    let fixtures = cli.fixtures.as_deref();
    let load = |n: &NetArg| input::load_net(&n.net, fixtures);
    match &cli.command {
        Command::Classify { net } => commands::classify(&load(net)?),
        Command::Reach { net, from, to, engine, caps, params } => {
            commands::reach(&load(net)?, from, to, *engine, caps, params)
        }
        Command::Cover { net, from, to, engine, caps, params } => {
            commands::cover(&load(net)?, from, to, *engine, caps, params)
        }
        Command::MinLen { net, from, to, max_blocks, caps } => commands::min_len(&load(net)?, from, to, caps, *max_blocks),
        Command::CubeReach { net, cube_from, cube_to, params } => {
            commands::cube_query(&load(net)?, false, cube_from, cube_to, params)
        }
        Command::CubeCover { net, cube_from, cube_to, params } => {
            commands::cube_query(&load(net)?, true, cube_from, cube_to, params)
        }
        Command::PreStar { net, to, cube_to, params } => {
            commands::pre_star(&load(net)?, to.as_deref(), cube_to.as_deref(), params)
        }
        Command::LiveSet { net, params } => commands::live_set(&load(net)?, params),
        Command::Live { net, from, caps, params } => commands::live(&load(net)?, from, caps, params),
        Command::Shorten { net, history, decoration } => commands::shorten(&load(net)?, history, decoration.as_deref()),
        Command::Flatten { net, k, from, to, caps } => {
            commands::flatten(&load(net)?, *k, from.as_deref(), to.as_deref(), caps)
        }
        Command::ValidateHistory { net, history, decoration } => {
            commands::validate_history(&load(net)?, history, decoration.as_deref())
        }
        Command::OracleDiff { seed, n, transitions, instances, cap, family, params } => {
            let suite = oracle_diff::Suite {
                seed: *seed,
                places: *n,
                transitions: *transitions,
                instances: *instances,
                cap: *cap,
                family: *family,
            };
            let engine = bionet_core::EngineParams {
                tracked_cap: params.tracked_cap,
                smoke_rep: params.smoke_rep,
                stability_rounds: params.stability_rounds,
                search_cap: params.search_cap,
            };
            oracle_diff::run(&suite, &engine)
        }
        Command::Bounds { net, m, m_prime } => commands::bounds(&load(net)?, *m, *m_prime),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let start = Instant::now();
    match dispatch(&cli) {
        Ok(report) => {
            let elapsed = cli.timings.then(|| start.elapsed().as_secs_f64() * 1000.0);
            let text = serde_json::to_string_pretty(&report.to_json(elapsed)).expect("reports serialize");
            let mut out = std::io::stdout().lock();
            let _ = writeln!(out, "{text}");
            ExitCode::from(report.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("bionet: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
