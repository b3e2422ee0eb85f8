//! `cubeavg`: exact cube averages, box seminorms, magic extensions and
//! recurrence sets on finite measure-preserving systems.
//!
//! Exit codes: 0 success, 2 a checked property was violated, 1 usage, input
//! or IO error. Errors are printed to stderr as JSON.

mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cubeavg::measure::{MeasureOptions, Strategy, DEFAULT_MAX_ENTRIES};
use cubeavg::suite::Property;
use cubeavg::Exec;
use serde_json::{json, Value};

#[derive(Debug, Parser)]
#[command(name = "cubeavg", version, about = "Exact cube averages and box seminorms on finite measure-preserving systems")]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Write the JSON result here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    /// Run every data-parallel loop on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,

    /// Cap on sparse-measure entries.
    #[arg(long, global = true, env = "CUBEAVG_MAX_ENTRIES", default_value_t = DEFAULT_MAX_ENTRIES)]
    max_entries: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check that a system config is a valid measure-preserving system: every
    /// map a bijection preserving the weights, and (if required) pairwise
    /// commuting. A failing commutation check reports a witness point.
    Validate {
        #[arg(long)]
        system: PathBuf,
    },

    /// Box seminorm ⫴f⫴_ε: the 2^|ε|-th root of ∫ ⊗f dμ*, where μ* is the
    /// iterated relative product over the invariant σ-algebras of T_i, i ∈ ε.
    /// The exact power is reported as "power_value".
    Seminorm {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        function: PathBuf,
        /// Vertex digits, e.g. "101" for ε = {1,3}; defaults to all maps.
        #[arg(long)]
        epsilon: Option<String>,
        #[arg(long, value_enum, default_value_t = StrategyArg::Auto)]
        strategy: StrategyArg,
    },

    /// Cube average over a box: ∏ 1/(N_i − M_i) Σ_n ∏_{ε≠∅} f_ε ∘ T_ε^n.
    /// Optionally writes a CSV trace of L² deviations from the limit along
    /// boxes that double in length.
    Average {
        /// Cube spec file: system, per-vertex function files, box, rank cap.
        #[arg(long)]
        spec: PathBuf,
        /// Override the box, e.g. "0:100,0:100".
        #[arg(long = "box")]
        bx: Option<String>,
        /// CSV path for the deviation trace (box_len_1..box_len_d, l2_deviation).
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, default_value_t = 6)]
        trace_steps: u32,
    },

    /// Limit of the cube averages (exact, by averaging over one full period
    /// box) together with the iterated limit taken one variable at a time;
    /// the two must agree. --check-bounds compares ‖limit‖_L² with
    /// min_ε ⫴f_ε⫴_{T_1,…,T_d} and, for each rank r, the rank-r average with
    /// min_{|ε|=r} ⫴f_ε⫴_ε. --set A checks that the integrated limit of 1_A
    /// equals ⫴1_A⫴^{2^d} and is at least μ(A)^{2^d}.
    Limit {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        check_bounds: bool,
        /// Indicator function file for the recurrence lower bound.
        #[arg(long)]
        set: Option<PathBuf>,
    },

    /// Build the magic extension (X*, μ*, T_1*, …, T_d*) and check it:
    /// "factor" checks that the ∅ coordinate maps it onto the original system;
    /// "defect" checks that f ⟂ ⋁_i I(T_i*) forces ⫴f⫴* = 0;
    /// "characterization" checks, for every nonempty ε, that the part of f
    /// orthogonal to ⋁_{i∈ε} I(T_i*) has ⫴f⫴*_ε = 0.
    Magic {
        #[arg(long)]
        system: PathBuf,
        #[arg(long, value_enum, default_value_t = CheckArg::All)]
        check: CheckArg,
        /// Seed for the random test functions on X*.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },

    /// Shifts n with μ(⋂_ε T_ε^{-n} A) ≥ μ(A)^{2^d} − c on the cyclic system
    /// of a lattice subset, and the smallest R such that every R-cube of the
    /// period torus holds one. The set must contain 0 when c = 0 and be
    /// nonempty when c > 0.
    Recurrence {
        /// Subset file: { "moduli": [...], "members": [[...], ...] }.
        #[arg(long)]
        subset: PathBuf,
        /// Nonnegative rational slack, e.g. "1/100".
        #[arg(long, default_value = "0")]
        c: String,
    },

    /// Run the randomized property suite on seeded instances. Each failure
    /// names the violated statement and includes the instance for replay.
    Suite {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        instances: usize,
        #[arg(long, default_value_t = 8)]
        max_points: usize,
        #[arg(long, default_value_t = 3)]
        max_dim: usize,
        /// Draw non-uniform weights constant on group orbits.
        #[arg(long)]
        weighted: bool,
        /// Restrict to these properties (repeatable); default all.
        #[arg(long, value_enum)]
        property: Vec<PropertyArg>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    Auto,
    Direct,
    Recursive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub(crate) enum CheckArg {
    Defect,
    Characterization,
    Factor,
    All,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PropertyArg {
    SeminormOracle,
    MultiPeriod,
    IteratedLimit,
    LowerBound,
    UpperBound,
    BaseCase,
    RankBound,
    Magic,
    SeminormAxioms,
    Recurrence,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Auto => Strategy::Auto,
            StrategyArg::Direct => Strategy::Direct,
            StrategyArg::Recursive => Strategy::Recursive,
        }
    }
}

impl From<PropertyArg> for Property {
    fn from(p: PropertyArg) -> Self {
        match p {
            PropertyArg::SeminormOracle => Property::SeminormOracle,
            PropertyArg::MultiPeriod => Property::MultiPeriod,
            PropertyArg::IteratedLimit => Property::IteratedLimit,
            PropertyArg::LowerBound => Property::LowerBound,
            PropertyArg::UpperBound => Property::UpperBound,
            PropertyArg::BaseCase => Property::BaseCase,
            PropertyArg::RankBound => Property::RankBound,
            PropertyArg::Magic => Property::Magic,
            PropertyArg::SeminormAxioms => Property::SeminormAxioms,
            PropertyArg::Recurrence => Property::Recurrence,
        }
    }
}

/// A finished command: its JSON result and whether a checked property failed.
pub(crate) struct Outcome {
    pub value: Value,
    pub violated: bool,
}

impl Outcome {
    pub fn ok(value: Value) -> Self {
        Self { value, violated: false }
    }
}

fn diagnostic(err: &cubeavg::Error) -> Value {
    let detail = match serde_json::to_value(err) {
        Ok(Value::Object(map)) => map.into_iter().next().map(|(_, v)| v).unwrap_or(Value::Null),
        _ => Value::Null,
    };
    json!({ "error": err.kind(), "message": err.to_string(), "detail": detail })
}

fn emit(value: &Value, output: Option<&PathBuf>) -> Result<(), cubeavg::Error> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| cubeavg::Error::Parse(e.to_string()))?;
    text.push('\n');
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| cubeavg::Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| cubeavg::Error::Io {
                    path: "<stdout>".into(),
                    message: e.to_string(),
                })
        }
    }
}

fn run(cli: Cli) -> Result<Outcome, cubeavg::Error> {
    let opts = MeasureOptions {
        max_entries: cli.global.max_entries,
        exec: if cli.global.sequential {
            Exec::Sequential
        } else {
            Exec::default()
        },
        allow_non_commuting: false,
    };
    match cli.command {
        Command::Validate { system } => commands::validate(&system),
        Command::Seminorm {
            system,
            function,
            epsilon,
            strategy,
        } => commands::seminorm(&system, &function, epsilon.as_deref(), strategy.into(), &opts),
        Command::Average {
            spec,
            bx,
            trace,
            trace_steps,
        } => commands::average(&spec, bx.as_deref(), trace.as_deref(), trace_steps, &opts),
        Command::Limit { spec, check_bounds, set } => commands::limit(&spec, check_bounds, set.as_deref(), &opts),
        Command::Magic { system, check, seed } => commands::magic(&system, check, seed, &opts),
        Command::Recurrence { subset, c } => commands::recurrence(&subset, &c, &opts),
        Command::Suite {
            seed,
            instances,
            max_points,
            max_dim,
            weighted,
            property,
        } => {
            let bounds = cubeavg::random::InstanceBounds::default()
                .with_points(max_points)
                .with_dims(1, max_dim)
                .weighted(weighted);
            let properties = property.into_iter().map(Into::into).collect();
            commands::suite(seed, instances, bounds, properties, &opts)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let output = cli.global.output.clone();
    let result = run(cli).and_then(|outcome| {
        emit(&outcome.value, output.as_ref())?;
        Ok(outcome.violated)
    });
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(err) => {
            let text = serde_json::to_string_pretty(&diagnostic(&err)).unwrap_or_else(|_| err.to_string());
            eprintln!("{text}");
            ExitCode::from(1)
        }
    }
}
