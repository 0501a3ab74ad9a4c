//! Configuration indexing on a ring of K cells.
//!
//! A configuration is labelled by `i = Σ q_k 2^k`, so bit `k` of the index is
//! the state of cell `k`. The text form used on the command line lists cell 0
//! first (leftmost character).

use std::fmt;

use crate::error::{QcaError, Result};

/// Largest K representable with machine-word indices.
pub const MAX_CELLS: u32 = 62;

/// Number of cells on the ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellCount(u32);

impl CellCount {
    pub fn new(cells: u32) -> Result<Self> {
        if cells == 0 {
            return Err(QcaError::TooFewCells { cells, min: 1 });
        }
        if cells > MAX_CELLS {
            return Err(QcaError::CapExceeded {
                what: "configuration indexing",
                cells,
                cap: MAX_CELLS,
            });
        }
        Ok(Self(cells))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    /// N = 2^K, the number of configurations.
    #[inline]
    pub fn dim(self) -> usize {
        1usize << self.0
    }

    /// Bitmask with all K cells set, i.e. index N - 1.
    #[inline]
    pub fn mask(self) -> usize {
        self.dim() - 1
    }

    pub fn check_index(self, i: usize) -> Result<()> {
        if i >= self.dim() {
            return Err(QcaError::IndexOutOfRange {
                index: i as u64,
                cells: self.0,
            });
        }
        Ok(())
    }

    pub fn configs(self) -> std::ops::Range<usize> {
        0..self.dim()
    }
}

impl fmt::Display for CellCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// State of cell `k` in configuration `i`.
pub fn bit_at(i: usize, k: u32, cells: CellCount) -> Result<u8> {
    if k >= cells.get() {
        return Err(QcaError::CellOutOfRange {
            k,
            cells: cells.get(),
        });
    }
    Ok(((i >> k) & 1) as u8)
}

/// Cell states `q_0..q_{K-1}` of configuration `i`.
pub fn bits(i: usize, cells: CellCount) -> Vec<u8> {
    (0..cells.get()).map(|k| ((i >> k) & 1) as u8).collect()
}

/// Inverse of [`bits`]: `Σ q_k 2^k`.
pub fn assemble(bits: &[u8]) -> usize {
    bits.iter()
        .enumerate()
        .fold(0, |acc, (k, &q)| acc | (((q & 1) as usize) << k))
}

/// The bit-flipped configuration `(N - 1) - i`.
#[inline]
pub fn complement(i: usize, cells: CellCount) -> usize {
    cells.mask() - (i & cells.mask())
}

/// Number of active cells.
#[inline]
pub fn popcount(i: usize) -> u32 {
    i.count_ones()
}

/// `(-1)^{#i}`
#[inline]
pub fn parity_sign(i: usize) -> f64 {
    if popcount(i).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Number of cells in which `a` and `b` differ. The distance that enters the
/// amplitude magnitude law is `mismatch_count(i, F(j))`.
#[inline]
pub fn mismatch_count(a: usize, b: usize, cells: CellCount) -> u32 {
    ((a ^ b) & cells.mask()).count_ones()
}

/// Render a configuration as K characters, cell 0 first.
pub fn to_bitstring(i: usize, cells: CellCount) -> String {
    (0..cells.get())
        .map(|k| if (i >> k) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Parse K characters of '0'/'1', cell 0 first.
pub fn parse_bitstring(s: &str, cells: CellCount) -> Result<usize> {
    let s = s.trim();
    if s.chars().count() != cells.get() as usize {
        return Err(QcaError::Parse(format!(
            "bitstring {s:?} has {} characters, expected {}",
            s.chars().count(),
            cells
        )));
    }
    s.chars()
        .enumerate()
        .try_fold(0usize, |acc, (k, c)| match c {
            '0' => Ok(acc),
            '1' => Ok(acc | (1 << k)),
            _ => Err(QcaError::Parse(format!(
                "bitstring {s:?} contains {c:?}, expected '0' or '1'"
            ))),
        })
}
