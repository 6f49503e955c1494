use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "perm-moments", version, about = "Averages of randomized class functions over permutation groups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute E_n by one route and print a result record.
    Expect(ExpectArgs),
    /// CSV of E_n against the leading asymptotic over a range of n.
    Table(TableArgs),
    /// Run a named invariant suite.
    Verify(VerifyArgs),
    /// Feller-coupling Monte Carlo.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Group {
    S,
    A,
    /// Weyl group of SO(2n)
    WeylD,
    /// Weyl group of SO(2n+1)
    WeylB,
    /// Weyl group of SU(n)
    WeylSu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Route {
    Exact,
    Gf,
    Mc,
    Brute,
    Asym,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    W1,
    W2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// f(x) = 1 - x
    OneMinusX,
    /// f(x) = x
    X,
    /// f = 1
    One,
    /// f(x) = 1/(1 - x), kept to degree --trunc with a certified tail
    Geometric,
}

/// The class function: a coefficient file, inline coefficients, a preset or
/// the exponents of `det(I - x1 w)^{s1} det(I - x2 w)^{s2}`.
#[derive(Debug, Clone, Args)]
pub struct FunctionArgs {
    /// Coefficient file, one "k1 k2 re im" line per coefficient
    #[arg(long = "f", value_name = "FILE")]
    pub file: Option<PathBuf>,
    /// Inline coefficients, lines separated by ';'
    #[arg(long, value_name = "LINES")]
    pub coeffs: Option<String>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long)]
    pub s1: Option<u32>,
    #[arg(long)]
    pub s2: Option<u32>,
    /// Truncation degree K for the geometric preset
    #[arg(long, value_name = "K", default_value_t = 60)]
    pub trunc: usize,
}

#[derive(Debug, Clone, Args)]
pub struct PointArgs {
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub x1: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub x1_im: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub x2: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub x2_im: f64,
}

#[derive(Debug, Clone, Args)]
pub struct DistArgs {
    /// dirac | uniform | roots:P
    #[arg(long, default_value = "dirac")]
    pub dist: String,
    /// Atom list, one "theta_re theta_im vartheta_re vartheta_im prob" line per atom
    #[arg(long, value_name = "FILE", conflicts_with = "dist")]
    pub dist_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Variant::W1)]
    pub variant: Variant,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct ExpectArgs {
    #[command(flatten)]
    pub f: FunctionArgs,
    #[command(flatten)]
    pub x: PointArgs,
    #[command(flatten)]
    pub dist: DistArgs,
    #[arg(long, value_enum, default_value_t = Group::S)]
    pub group: Group,
    #[arg(long, value_enum, default_value_t = Route::Gf)]
    pub route: Route,
    #[arg(long)]
    pub n: usize,
    /// Series order N, at least n; defaults to n
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Fail when a truncation certificate exceeds this
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub f: FunctionArgs,
    #[command(flatten)]
    pub x: PointArgs,
    #[command(flatten)]
    pub dist: DistArgs,
    /// START:END[:STEP], END inclusive
    #[arg(long, value_name = "RANGE")]
    pub n_range: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// class-equation | gf-vs-exact | feller | asymptotics | groups
    pub suite: String,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub f: FunctionArgs,
    #[command(flatten)]
    pub x: PointArgs,
    #[command(flatten)]
    pub dist: DistArgs,
    /// Finite n; use --limit instead for the n -> infinity mean
    #[arg(long, required_unless_present = "limit")]
    pub n: Option<usize>,
    #[arg(long, conflicts_with = "n")]
    pub limit: bool,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Sample length L for the limit sampler
    #[arg(long = "length", value_name = "L")]
    pub length: Option<usize>,
    /// Fail when a truncation certificate exceeds this
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}
