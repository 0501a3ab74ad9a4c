//! Command-line front end. Every command validates its whole configuration,
//! renders its output in memory and only then writes, so a failed run leaves
//! no partial files behind.

mod args;
mod commands;
pub mod output;
pub mod parse;

use std::fmt;
use std::path::{Path, PathBuf};

pub use args::{Cli, Command, CommonArgs, Format};
pub use parse::{parse_theta, InitialSpec};

use crate::bitconfig::CellCount;
use crate::evolution::{check_evolvable, Caps, EvolutionOperator, MixingAngle, StateVector};
use crate::QcaError;

/// Process exit status for each failure class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitKind {
    Validation = 1,
    Invariant = 2,
    Resource = 3,
    Io = 4,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ExitKind,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            kind: ExitKind::Validation,
            message: message.into(),
        }
    }

    pub fn invariant(message: impl Into<String>) -> Self {
        Self {
            kind: ExitKind::Invariant,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind as i32
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<QcaError> for CliError {
    fn from(e: QcaError) -> Self {
        let kind = match e {
            QcaError::CapExceeded { .. } => ExitKind::Resource,
            QcaError::Io(_) => ExitKind::Io,
            QcaError::AmbiguousDegeneracy { .. }
            | QcaError::Decomposition(_)
            | QcaError::ConstructionInconsistency(_) => ExitKind::Invariant,
            _ => ExitKind::Validation,
        };
        Self {
            kind,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Evolve,
    Density,
    Spectrum,
    Grid,
    Classical,
    Exact4,
    Verify,
}

impl CommandKind {
    fn quantum(self) -> bool {
        !matches!(self, CommandKind::Classical)
    }

    fn dense(self) -> bool {
        matches!(
            self,
            CommandKind::Spectrum | CommandKind::Grid | CommandKind::Exact4 | CommandKind::Verify
        )
    }
}

/// A fully validated invocation.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub kind: CommandKind,
    pub cells: CellCount,
    pub theta: MixingAngle,
    /// `exact4` sweeps a grid when no angle is given.
    pub theta_given: bool,
    pub initial: StateVector,
    pub initial_spec: Option<InitialSpec>,
    pub steps: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub caps: Caps,
    pub paired_order: bool,
}

const DEFAULT_CELLS: u32 = 5;
const DEFAULT_THETA: f64 = 0.35764;
const CLASSICAL_STEP_LIMIT: usize = 1 << 20;

impl RunConfig {
    pub fn validate(kind: CommandKind, a: &CommonArgs) -> CliResult<Self> {
        let default_cells = if kind == CommandKind::Exact4 {
            4
        } else {
            DEFAULT_CELLS
        };
        let cells = CellCount::new(a.cells.unwrap_or(default_cells))?;
        if kind == CommandKind::Exact4 && cells.get() != 4 {
            return Err(CliError::validation(format!(
                "exact4 is defined for 4 cells only, got {cells}"
            )));
        }

        let mut caps = Caps::default();
        if let Some(d) = a.dense_cap {
            caps.dense = d;
        }
        if let Some(f) = a.free_cap {
            caps.matrix_free = f;
        }

        let theta = MixingAngle::new(match &a.theta {
            Some(expr) => parse_theta(expr)?,
            None => DEFAULT_THETA,
        })?;
        if kind == CommandKind::Exact4 && a.theta.is_some() && !theta.is_interior() {
            return Err(CliError::validation(
                "exact4 closed forms need an angle strictly inside (0, pi/2)",
            ));
        }

        if kind.quantum() {
            check_evolvable(cells)?;
            let op = EvolutionOperator::with_caps(cells, theta, caps)?;
            if kind.dense() {
                op.check_dense()?;
            }
        }

        let initial_spec = a.initial.as_deref().map(InitialSpec::parse).transpose()?;
        if kind == CommandKind::Exact4 {
            if let Some(spec) = &initial_spec {
                if !matches!(spec, InitialSpec::Index(0 | 3)) {
                    return Err(CliError::validation("exact4 initial state must be 0 or 3"));
                }
            }
        }
        let initial = match &initial_spec {
            Some(spec) => spec.resolve(cells)?,
            None => StateVector::basis(cells, 0)?,
        };
        if kind == CommandKind::Classical && initial.as_basis().is_none() {
            return Err(CliError::validation(
                "classical trajectories need a single configuration as initial state",
            ));
        }

        let steps = match a.steps {
            Some(0) => return Err(CliError::validation("--steps must be positive")),
            Some(t) => t,
            None if kind == CommandKind::Classical => cells.dim().min(CLASSICAL_STEP_LIMIT),
            None => cells.dim(),
        };

        if a.paired_order && kind != CommandKind::Grid {
            return Err(CliError::validation("--paired-order applies to grid only"));
        }
        if a.format == Format::Pgm && !matches!(kind, CommandKind::Evolve | CommandKind::Grid) {
            return Err(CliError::validation(
                "pgm output is available for evolve and grid only",
            ));
        }

        Ok(Self {
            kind,
            cells,
            theta,
            theta_given: a.theta.is_some(),
            initial,
            initial_spec,
            steps,
            out: a.out.clone(),
            format: a.format,
            caps,
            paired_order: a.paired_order,
        })
    }

    pub fn operator(&self) -> CliResult<EvolutionOperator> {
        Ok(EvolutionOperator::with_caps(
            self.cells, self.theta, self.caps,
        )?)
    }

    pub fn initial_label(&self) -> String {
        match &self.initial_spec {
            Some(s) => s.describe(),
            None => "delta_0".to_string(),
        }
    }
}

/// A warning for dense caps above the default, with the matrix footprint.
pub fn dense_cap_warning(caps: Caps) -> Option<String> {
    let default = Caps::default().dense;
    if caps.dense <= default {
        return None;
    }
    let n = 2f64.powi(caps.dense as i32);
    let mib = n * n * 16.0 / (1024.0 * 1024.0);
    Some(format!(
        "warning: dense cap raised to K = {}; one complex N x N matrix needs {:.0} MiB",
        caps.dense, mib
    ))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError {
        kind: ExitKind::Io,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

/// Rendered output of one command.
#[derive(Debug, Default)]
pub struct Report {
    /// `(file name, contents)`; with `--out DIR` each becomes a file in DIR.
    pub files: Vec<(String, String)>,
    /// Set when an invariant check failed after the output was produced.
    pub violation: Option<String>,
}

impl Report {
    fn single(name: &str, text: String) -> Self {
        Self {
            files: vec![(name.to_string(), text)],
            violation: None,
        }
    }

    /// Concatenation of all parts as printed on stdout.
    pub fn to_stdout_text(&self) -> String {
        if self.files.len() == 1 {
            return self.files[0].1.clone();
        }
        self.files
            .iter()
            .map(|(name, text)| format!("# {name}\n{text}"))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

pub fn execute(cfg: &RunConfig) -> CliResult<Report> {
    match cfg.kind {
        CommandKind::Evolve => commands::evolve(cfg),
        CommandKind::Density => commands::density(cfg),
        CommandKind::Spectrum => commands::spectrum(cfg),
        CommandKind::Grid => commands::grid(cfg),
        CommandKind::Classical => commands::classical(cfg),
        CommandKind::Exact4 => commands::exact4(cfg),
        CommandKind::Verify => commands::verify(cfg),
    }
}

/// Validates, computes and emits. Returns the process exit status.
pub fn run(cli: Cli) -> CliResult<()> {
    let (kind, a) = match &cli.command {
        Command::Evolve(a) => (CommandKind::Evolve, a),
        Command::Density(a) => (CommandKind::Density, a),
        Command::Spectrum(a) => (CommandKind::Spectrum, a),
        Command::Grid(a) => (CommandKind::Grid, a),
        Command::Classical(a) => (CommandKind::Classical, a),
        Command::Exact4(a) => (CommandKind::Exact4, a),
        Command::Verify(a) => (CommandKind::Verify, a),
    };
    let cfg = RunConfig::validate(kind, a)?;
    if let Some(w) = dense_cap_warning(cfg.caps) {
        eprintln!("{w}");
    }
    let report = execute(&cfg)?;

    match &cfg.out {
        None => print!("{}", report.to_stdout_text()),
        Some(path) if report.files.len() > 1 => {
            std::fs::create_dir_all(path).map_err(|e| CliError {
                kind: ExitKind::Io,
                message: format!("cannot create {}: {e}", path.display()),
            })?;
            for (name, text) in &report.files {
                write_text(&path.join(name), text)?;
            }
        }
        Some(path) => write_text(path, &report.files[0].1)?,
    }

    match report.violation {
        Some(v) => Err(CliError::invariant(v)),
        None => Ok(()),
    }
}

pub use commands::paired_column_order;
