//! Parsers for command-line values: angle expressions, initial-state specs
//! and amplitude files.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;

use crate::bitconfig::{parse_bitstring, CellCount};
use crate::error::{QcaError, Result};
use crate::evolution::StateVector;

/// Norm tolerance for amplitude files.
pub const FILE_NORM_TOLERANCE: f64 = 1e-8;

/// Accepts a decimal literal or `pi`, `pi/INT`, `INT*pi`, `INT*pi/INT`.
pub fn parse_theta(expr: &str) -> Result<f64> {
    let e: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || QcaError::Parse(format!("cannot parse angle {expr:?}"));
    if !e.contains("pi") {
        return e.parse::<f64>().map_err(|_| bad());
    }
    let (numer, denom) = match e.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (e.as_str(), None),
    };
    let factor = match numer.strip_suffix("pi") {
        Some("") => 1.0,
        Some(f) => f
            .strip_suffix('*')
            .ok_or_else(bad)?
            .parse::<u64>()
            .map_err(|_| bad())? as f64,
        None => return Err(bad()),
    };
    let div = match denom {
        Some(d) => {
            let d = d.parse::<u64>().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            d as f64
        }
        None => 1.0,
    };
    Ok(factor * PI / div)
}

/// How the initial state was given on the command line.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialSpec {
    Index(usize),
    Bits(String),
    File(String),
}

impl InitialSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(bits) = s.strip_prefix("bits:") {
            return Ok(InitialSpec::Bits(bits.to_string()));
        }
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(InitialSpec::File(path.to_string()));
        }
        s.parse::<usize>().map(InitialSpec::Index).map_err(|_| {
            QcaError::Parse(format!(
                "cannot parse initial state {s:?}; use INDEX, bits:BITSTRING or file:PATH"
            ))
        })
    }

    pub fn resolve(&self, cells: CellCount) -> Result<StateVector> {
        match self {
            InitialSpec::Index(i) => StateVector::basis(cells, *i),
            InitialSpec::Bits(b) => StateVector::basis(cells, parse_bitstring(b, cells)?),
            InitialSpec::File(p) => read_amplitude_file(Path::new(p), cells),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            InitialSpec::Index(i) => format!("delta_{i}"),
            InitialSpec::Bits(b) => format!("bits:{b}"),
            InitialSpec::File(p) => format!("file:{p}"),
        }
    }
}

/// Parses CSV rows `index,re,im`; unlisted indices are zero. A header row
/// and `#` comments are skipped. The vector must already be normalized.
pub fn parse_amplitudes(text: &str, cells: CellCount) -> Result<StateVector> {
    let mut amps = vec![Complex64::new(0.0, 0.0); cells.dim()];
    let mut seen = vec![false; cells.dim()];
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if lineno == 0 && fields.first().is_some_and(|f| f.parse::<usize>().is_err()) {
            continue;
        }
        let err = |msg: &str| QcaError::Parse(format!("amplitude file line {}: {msg}", lineno + 1));
        if fields.len() != 3 {
            return Err(err("expected index,re,im"));
        }
        let i: usize = fields[0].parse().map_err(|_| err("bad index"))?;
        cells.check_index(i)?;
        if seen[i] {
            return Err(err("duplicate index"));
        }
        seen[i] = true;
        let re: f64 = fields[1].parse().map_err(|_| err("bad real part"))?;
        let im: f64 = fields[2].parse().map_err(|_| err("bad imaginary part"))?;
        amps[i] = Complex64::new(re, im);
    }
    StateVector::from_amplitudes(cells, amps, FILE_NORM_TOLERANCE)
}

pub fn read_amplitude_file(path: &Path, cells: CellCount) -> Result<StateVector> {
    let text = std::fs::read_to_string(path)?;
    parse_amplitudes(&text, cells)
}
