use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "genusavg", version, about = "Exact genus averages of ternary quadratic forms")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Text, global = true)]
    pub output: OutputFormat,

    /// Shorthand for `--output json`.
    #[arg(long, global = true)]
    pub json: bool,

    /// Largest p^r the local density counter may use.
    #[arg(long, env = "GENUSAVG_DEPTH_CAP", global = true)]
    pub depth_cap: Option<u128>,

    /// Largest number of cells a direct lattice-point count may visit.
    #[arg(long, env = "GENUSAVG_ENUM_BUDGET", global = true)]
    pub enum_budget: Option<u128>,

    /// Entries per memo table.
    #[arg(long, global = true)]
    pub memo_cap: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Json,
}

/// Lattice given by `--diag`, `--gram` or `--file`.
#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct LatticeArgs {
    /// Diagonal form, e.g. `1,3,5`.
    #[arg(long, allow_hyphen_values = true)]
    pub diag: Option<String>,
    /// Row-major Gram matrix, e.g. `2,1,0;1,2,1;0,1,4`.
    #[arg(long, allow_hyphen_values = true)]
    pub gram: Option<String>,
    /// JSON file holding `{"gram": [[..],[..],[..]]}` or `{"diag": [a,b,c]}`.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Hurwitz class number H(N); N may be a fraction.
    Hurwitz {
        n: String,
        /// Also print a truncated decimal (not authoritative).
        #[arg(long)]
        approx: bool,
    },
    /// Class number h(d) of primitive positive definite forms of discriminant d < 0.
    Classnum {
        #[arg(allow_hyphen_values = true)]
        d: i64,
    },
    /// Jordan splitting of the lattice over Z_p.
    Jordan {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(short)]
        p: u64,
    },
    /// Hasse symbols S_p and S_p*.
    Hasse {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(short)]
        p: u64,
    },
    /// Local density alpha_p(n, L).
    LocalDensity {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(short)]
        p: u64,
        #[arg(short)]
        n: u64,
        /// Force the counting oracle.
        #[arg(long)]
        oracle: bool,
    },
    /// One Watson step or the full chain to a stable lattice.
    Watson {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(short, conflicts_with = "to_stable", required_unless_present = "to_stable")]
        m: Option<u64>,
        #[arg(long)]
        to_stable: bool,
    },
    /// Genus average r(n, gen L).
    GenusAvg {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(short)]
        n: u64,
        /// Report how the value was obtained.
        #[arg(long)]
        provenance: bool,
        /// Use the mass-formula route instead of the formula engine.
        #[arg(long)]
        semi_oracle: bool,
        /// Also print a truncated decimal (not authoritative).
        #[arg(long)]
        approx: bool,
    },
    /// Number of lattice vectors of norm n, by direct enumeration.
    Count {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(short)]
        n: u64,
    },
    /// Piecewise Hurwitz class number formula for r(n, gen L).
    Formula {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long)]
        modulus_cap: Option<u64>,
        /// Samples checked per piece.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Run every cross-check over a corpus.
    Verify {
        /// JSON array of lattices; defaults to the built-in corpus.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        nmax: u64,
        /// Worker threads; 0 uses all cores.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
}
