use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Circulant, g-circulant and cyclic matrices over GF(2^m).
///
/// Field syntax: `gf(2^m)/0x<modulus>`, e.g. `gf(2^8)/0x11b`.
/// Row syntax: comma-separated entries, each hex (`0x1b`) or a polynomial in
/// `a` (`1+a^2+a^3`), mixed freely.
/// Cycle syntax: `(0 2 4 3 5 1)`.
/// Shape syntax: `circulant`, `left-circulant`, `g-circulant:<g>`, `cyclic:<cycle>`.
///
/// Exit status: 0 when every verdict holds, 1 when one fails, 2 on usage or
/// I/O errors.
#[derive(Parser, Debug)]
#[command(name = "cyclic-mds", version)]
pub struct Cli {
    /// Output format.
    #[arg(
        long,
        global = true,
        value_enum,
        env = "CYCLIC_MDS_OUTPUT",
        default_value = "human"
    )]
    pub output: OutputMode,

    /// Attach wall-clock timings to reports. Makes output non-reproducible.
    #[arg(long, global = true)]
    pub timings: bool,

    /// Suppress progress messages on stderr.
    #[arg(long, short, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputMode {
    Human,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a structured matrix and print it.
    Construct {
        #[arg(long)]
        field: String,
        #[command(flatten)]
        shape: ShapeArgs,
    },
    /// Check properties of a structured matrix or a matrix JSON file.
    Check(CheckArgs),
    /// Scan first rows of a shape for matrices with the required properties.
    Search(SearchArgs),
    /// Run a named verification suite.
    Verify(VerifyArgs),
    /// Describe a field and, optionally, some of its elements.
    FieldInfo {
        #[arg(long)]
        field: String,
        /// Element literals to describe.
        elements: Vec<String>,
    },
}

#[derive(Args, Debug, Clone, Default)]
pub struct ShapeArgs {
    /// Circulant with this first row.
    #[arg(long, value_name = "ROW", group = "shape")]
    pub circulant: Option<String>,
    /// Left-circulant with this first row.
    #[arg(long, value_name = "ROW", group = "shape")]
    pub left_circulant: Option<String>,
    /// g-circulant with shift G; first row from --row.
    #[arg(long, value_name = "G", group = "shape", requires = "row")]
    pub g_circulant: Option<usize>,
    /// Cyclic matrix for this k-cycle; first row from --row.
    #[arg(long, value_name = "CYCLE", group = "shape", requires = "row")]
    pub cyclic: Option<String>,
    /// First row for --g-circulant and --cyclic.
    #[arg(long, value_name = "ROW")]
    pub row: Option<String>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// Field; taken from the file with --matrix.
    #[arg(long)]
    pub field: Option<String>,
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Matrix JSON file as printed by `construct --output json`.
    #[arg(long, value_name = "FILE", conflicts_with = "shape")]
    pub matrix: Option<std::path::PathBuf>,
    /// Comma-separated subset of orthogonal, involutory, mds.
    #[arg(long, short, default_value = "mds")]
    pub properties: String,
    /// Also compute branch numbers by exhaustive enumeration.
    #[arg(long)]
    pub branch: bool,
    /// Vector budget for --branch.
    #[arg(long, default_value_t = cyclic_mds::props::DEFAULT_BRANCH_BUDGET)]
    pub budget: u64,
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    #[arg(long)]
    pub field: String,
    #[arg(long)]
    pub k: usize,
    /// circulant, left-circulant, g-circulant:<g> or cyclic:<cycle>.
    #[arg(long)]
    pub shape: String,
    /// Comma-separated subset of orthogonal, involutory, mds.
    #[arg(long)]
    pub require: String,
    /// Scan every first row in lexicographic order.
    #[arg(long, conflicts_with = "random")]
    pub exhaustive: bool,
    /// Sample this many rows uniformly instead.
    #[arg(long, value_name = "TRIALS", requires = "seed")]
    pub random: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Most hits to record.
    #[arg(long, default_value_t = 100)]
    pub limit: usize,
    /// Largest exhaustive candidate count accepted.
    #[arg(long, default_value_t = cyclic_mds::search::DEFAULT_CEILING)]
    pub ceiling: u64,
    /// Run on one thread.
    #[arg(long)]
    pub sequential: bool,
    /// Evaluate properties in the order given rather than cheapest first.
    #[arg(long)]
    pub given_order: bool,
    /// Also write the result JSON here.
    #[arg(long, value_name = "FILE")]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Orthogonal and involutory MDS examples over gf(2^8)/0x11b.
    ReferenceExamples,
    /// Exhaustive non-existence certificate for order 2^d g-circulants.
    #[value(name = "nonexistence-2d")]
    Nonexistence2d,
    /// Determinant, power, shift and product laws on seeded random rows.
    Lemmas,
    /// Permutation equivalence and the cyclic / circulant correspondence.
    Equivalence,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    /// Field for nonexistence-2d.
    #[arg(long)]
    pub field: Option<String>,
    /// Order exponent for nonexistence-2d (k = 2^d).
    #[arg(long)]
    pub d: Option<u32>,
    /// Shifts for nonexistence-2d; default every odd g below 2^d.
    #[arg(long, value_delimiter = ',')]
    pub g: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = cyclic_mds::search::DEFAULT_CEILING)]
    pub ceiling: u64,
    /// Directory for certificate files.
    #[arg(long, default_value = "certificates")]
    pub out: std::path::PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
