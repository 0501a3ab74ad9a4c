use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "qca",
    version,
    about = "Rule-150 quantum cellular automaton simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Per-cell activity P(k, t) as a T x K grid.
    Evolve(CommonArgs),
    /// Mean density series rho(t) with its mean and standard deviation.
    Density(CommonArgs),
    /// Eigenvalues, time-averaged configuration probabilities and symmetry report.
    Spectrum(CommonArgs),
    /// Configuration probabilities |phi_i(t)|^2 as a T x N grid.
    Grid(CommonArgs),
    /// Classical rule-150 trajectory and invertibility checks.
    Classical(CommonArgs),
    /// Closed-form K = 4 averages and deviations against the spectral route.
    Exact4(CommonArgs),
    /// Unitarity, symmetry and consistency suite; nonzero exit on a violation.
    Verify(CommonArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct CommonArgs {
    /// Number of cells K.
    #[arg(long)]
    pub cells: Option<u32>,
    /// Mixing angle: a decimal, `pi/4`, `3*pi/8`, ...
    #[arg(long)]
    pub theta: Option<String>,
    /// INDEX, `bits:BITSTRING` (cell 0 first) or `file:PATH` with `index,re,im` rows.
    #[arg(long)]
    pub initial: Option<String>,
    /// Number of time steps T (default 2^K).
    #[arg(long)]
    pub steps: Option<usize>,
    /// Output file (a directory for `spectrum`); stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Largest K for which N x N matrices may be built.
    #[arg(long)]
    pub dense_cap: Option<u32>,
    /// Largest K for matrix-free stepping.
    #[arg(long)]
    pub free_cap: Option<u32>,
    /// Pair every configuration column with its complement (`grid` only).
    #[arg(long)]
    pub paired_order: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Csv,
    Pgm,
}
