//! Command-line front end. Reports go to stdout as JSON; `--pretty` adds a table on stderr.

mod commands;
mod input;

use std::ffi::OsString;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::orders::{PairKind, Side};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Schema { path: String, message: String },
    Infeasible { code: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Schema { .. } => EXIT_SCHEMA,
            CliError::Infeasible { .. } => EXIT_INFEASIBLE,
        }
    }

    fn to_json(&self) -> Value {
        match self {
            CliError::Usage(m) => json!({"error": {"kind": "usage", "message": m}}),
            CliError::Schema { path, message } => {
                json!({"error": {"kind": "schema", "path": path, "message": message}})
            }
            CliError::Infeasible { code, message } => {
                json!({"error": {"kind": "infeasible", "code": code, "message": message}})
            }
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "paritylab", version, about = "Exact risk orders, insurance contracts and witness chains")]
pub struct Cli {
    /// Also print a human-readable table on stderr.
    #[arg(long, global = true)]
    pub pretty: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OrderArg {
    Cx,
    Lhcx,
    Rhcx,
    Mono,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SideArg {
    Left,
    Right,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Left => Side::Left,
            SideArg::Right => Side::Right,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GenKind {
    Cx,
    LeftHandle,
    RightHandle,
    Monotone,
    /// Two independent draws, usually not comparable.
    Random,
}

impl GenKind {
    fn pair_kind(self) -> Option<PairKind> {
        match self {
            GenKind::Cx => Some(PairKind::Cx),
            GenKind::LeftHandle => Some(PairKind::LeftHandle),
            GenKind::RightHandle => Some(PairKind::RightHandle),
            GenKind::Monotone => Some(PairKind::Monotone),
            GenKind::Random => None,
        }
    }
}

#[derive(Debug, Args)]
pub struct PairArgs {
    #[arg(long, requires = "y", conflicts_with = "pair")]
    pub x: Option<String>,
    #[arg(long, requires = "x")]
    pub y: Option<String>,
    /// File holding `{"x": ..., "y": ...}`, e.g. the output of `gen`.
    #[arg(long)]
    pub pair: Option<String>,
}

/// Family parameters; any flag not used by the chosen family is rejected.
#[derive(Debug, Args, Default)]
pub struct FamilyArgs {
    #[arg(long)]
    pub family: Option<String>,
    /// Whole family as JSON (inline or file), tagged by "family".
    #[arg(long, conflicts_with = "family")]
    pub family_file: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub pi0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub d0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub kappa0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub premium: Option<String>,
    /// Premium principle as JSON (inline or file).
    #[arg(long)]
    pub rho: Option<String>,
    /// Grids: `lo:step:hi`, a comma list, or JSON.
    #[arg(long, allow_hyphen_values = true)]
    pub premium_grid: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub d_grid: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau_grid: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta_grid: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub zeta_grid: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide x <= y in a stochastic order and print a certificate.
    CheckOrder {
        #[arg(long, value_enum)]
        order: OrderArg,
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Break x -> y into mean-preserving spreads.
    Decompose {
        #[command(flatten)]
        pair: PairArgs,
        /// Handle side; plain convex order when absent.
        #[arg(long, value_enum)]
        side: Option<SideArg>,
    },
    /// Build a witness chain of contracts.
    Witness {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        pair: PairArgs,
        /// SpreadSpec JSON for a single spread.
        #[arg(long, conflicts_with_all = ["x", "pair", "handle"])]
        spread: Option<String>,
        /// HandleSpread JSON for a single handle spread.
        #[arg(long, conflicts_with_all = ["x", "pair"])]
        handle: Option<String>,
        /// Full-indemnity chain from the mean of this variable.
        #[arg(long, conflicts_with_all = ["x", "pair", "spread", "handle"])]
        weak: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        max_links: usize,
    },
    /// Check every link equation of a chain exactly.
    VerifyChain {
        #[arg(long)]
        chain: String,
    },
    /// Classify a weighting function.
    ClassifyH {
        #[arg(long)]
        h: String,
    },
    /// Dual utility of z, or the preference between x and y.
    EvalUtility {
        #[arg(long)]
        h: String,
        #[arg(long, conflicts_with_all = ["x", "pair"])]
        z: Option<String>,
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Search the four-point family for a dispreferred handle spread.
    FindViolation {
        #[arg(long)]
        h: String,
        #[arg(long, value_enum)]
        side: SideArg,
        #[arg(long, default_value_t = crate::dual::DEFAULT_MAX_DEN)]
        max_den: i64,
    },
    /// Three-atom instance refusing a contract under monotone risk aversion.
    CounterexampleMonotone {
        #[arg(long)]
        contract: String,
    },
    /// Seeded random pairs.
    Gen {
        /// Defaults to PARITYLAB_SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "cx")]
        kind: GenKind,
        /// Emit `{"pairs": [...]}` with this many pairs instead of one pair.
        #[arg(long)]
        count: Option<usize>,
        #[arg(long, default_value_t = 2)]
        min_atoms: usize,
        #[arg(long, default_value_t = 8)]
        max_atoms: usize,
        #[arg(long, default_value_t = 20)]
        value_bound: i64,
        #[arg(long, default_value_t = 12)]
        denom_bound: i64,
        #[arg(long, default_value_t = 3)]
        max_steps: usize,
    },
}

/// Runs the tool on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(&cli.command) {
        Ok(report) => {
            println!("{}", serde_json::to_string(&report).expect("report serializes"));
            if cli.pretty {
                eprint!("{}", table(&report));
            }
            EXIT_OK
        }
        Err(err) => {
            println!("{}", err.to_json());
            eprintln!("paritylab: {}", describe(&err));
            err.exit_code()
        }
    }
}

fn describe(e: &CliError) -> String {
    match e {
        CliError::Usage(m) => m.clone(),
        CliError::Schema { path, message } => format!("schema error at {path}: {message}"),
        CliError::Infeasible { code, message } => format!("{code}: {message}"),
    }
}

/// Two-column rendering of the top-level report fields.
fn table(v: &Value) -> String {
    let mut rows: Vec<(String, String)> = Vec::new();
    match v.as_object() {
        Some(o) => {
            for (k, val) in o {
                rows.push((k.clone(), cell(val)));
            }
        }
        None => rows.push(("value".into(), cell(v))),
    }
    let w = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.into_iter().map(|(k, c)| format!("{k:<w$}  {c}\n")).collect()
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(a) if a.iter().all(|x| x.is_string() || x.is_number() || x.is_boolean()) => {
            a.iter().map(cell).collect::<Vec<_>>().join(" ")
        }
        Value::Array(a) => format!("[{} entries]", a.len()),
        Value::Object(o) if o.len() == 1 && o.contains_key("atoms") => cell(&o["atoms"]),
        Value::Object(o) => {
            let inner: Vec<String> = o.iter().take(6).map(|(k, x)| format!("{k}={}", cell(x))).collect();
            inner.join(", ")
        }
        other => other.to_string(),
    }
}
