//! Classical rule-150 / rule-105 dynamics on a ring, and the GF(2) linear
//! algebra showing the rule-150 map is a bijection iff `K mod 3 != 0`.

use std::collections::HashMap;

use crate::bitconfig::{complement, CellCount};
use crate::error::{QcaError, Result};

#[inline]
fn rotate_left(i: usize, cells: CellCount) -> usize {
    let n = cells.get();
    let m = cells.mask();
    ((i << 1) | (i >> (n - 1))) & m
}

#[inline]
fn rotate_right(i: usize, cells: CellCount) -> usize {
    let n = cells.get();
    let m = cells.mask();
    ((i >> 1) | (i << (n - 1))) & m
}

/// One step of rule 150: new `q_k = q_{k-1} + q_k + q_{k+1} (mod 2)` with
/// cyclic boundary. Defined for every K, including the degenerate K = 1, 2
/// where neighbours coincide.
#[inline]
pub fn rule150_step(i: usize, cells: CellCount) -> usize {
    let i = i & cells.mask();
    // bit k of rotate_left is q_{k-1}, of rotate_right is q_{k+1}
    i ^ rotate_left(i, cells) ^ rotate_right(i, cells)
}

/// Rule 105 = 255 - 150, the bitwise complement of rule 150.
#[inline]
pub fn rule105_step(i: usize, cells: CellCount) -> usize {
    complement(rule150_step(i, cells), cells)
}

/// K x K matrix over {0, 1}. Row `r` is stored as a column bitmask.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryCirculant {
    cells: CellCount,
    rows: Vec<usize>,
}

impl BinaryCirculant {
    pub fn cells(&self) -> CellCount {
        self.cells
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn entry(&self, r: usize, c: usize) -> u8 {
        ((self.rows[r] >> c) & 1) as u8
    }

    /// `self * v (mod 2)` with `v` packed as a configuration index.
    pub fn apply(&self, v: usize) -> usize {
        self.rows.iter().enumerate().fold(0, |acc, (r, &row)| {
            acc | ((((row & v).count_ones() & 1) as usize) << r)
        })
    }

    /// `self * other (mod 2)`.
    pub fn mul(&self, other: &BinaryCirculant) -> BinaryCirculant {
        let n = self.rows.len();
        let rows = self
            .rows
            .iter()
            .map(|&row| {
                (0..n)
                    .filter(|&k| (row >> k) & 1 == 1)
                    .fold(0, |acc, k| acc ^ other.rows[k])
            })
            .collect();
        BinaryCirculant {
            cells: self.cells,
            rows,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.rows.iter().enumerate().all(|(r, &row)| row == 1 << r)
    }

    /// Entries as integers, for exact determinant work.
    pub fn to_integer_rows(&self) -> Vec<Vec<i128>> {
        let n = self.rows.len();
        (0..n)
            .map(|r| (0..n).map(|c| self.entry(r, c) as i128).collect())
            .collect()
    }
}

fn require_ring(cells: CellCount) -> Result<()> {
    if cells.get() < 3 {
        return Err(QcaError::TooFewCells {
            cells: cells.get(),
            min: 3,
        });
    }
    Ok(())
}

/// The circulant matrix `A` with `F(v) = A v (mod 2)`: row `k` has ones at
/// columns `k-1`, `k`, `k+1` (mod K).
pub fn build_a(cells: CellCount) -> Result<BinaryCirculant> {
    require_ring(cells)?;
    let n = cells.get() as usize;
    let rows = (0..n)
        .map(|k| (1 << ((k + n - 1) % n)) | (1 << k) | (1 << ((k + 1) % n)))
        .collect();
    Ok(BinaryCirculant { cells, rows })
}

/// Exact integer determinant by Bareiss fraction-free elimination.
pub fn integer_determinant(mut a: Vec<Vec<i128>>) -> i128 {
    let n = a.len();
    if n == 0 {
        return 1;
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
            a[i][k] = 0;
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

/// Determinant of `A` over the integers: 0 when 3 divides K, otherwise
/// `3 (-1)^(K+1)`.
pub fn det_a(cells: CellCount) -> Result<i128> {
    Ok(integer_determinant(build_a(cells)?.to_integer_rows()))
}

/// The configuration with `q_k = 1` iff `k mod 3 != 0`, i.e. `{0,1,1,0,1,1,...}`.
/// When K is a multiple of 3 it lies in the kernel of `A`.
pub fn kernel_pattern(cells: CellCount) -> usize {
    (0..cells.get() as usize)
        .filter(|k| k % 3 != 0)
        .fold(0, |acc, k| acc | (1 << k))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bijectivity {
    Bijective,
    /// Two distinct configurations with the same rule-150 image.
    Collision(usize, usize),
}

impl Bijectivity {
    pub fn is_bijective(&self) -> bool {
        matches!(self, Bijectivity::Bijective)
    }
}

pub fn is_bijective(cells: CellCount) -> Result<Bijectivity> {
    require_ring(cells)?;
    if !cells.get().is_multiple_of(3) {
        return Ok(Bijectivity::Bijective);
    }
    let witness = kernel_pattern(cells);
    debug_assert_eq!(rule150_step(witness, cells), rule150_step(0, cells));
    Ok(Bijectivity::Collision(0, witness))
}

/// The row pattern `b_K`: `(1,1,0)` repeated for `K = 1 (mod 3)`, `(1,0,1)`
/// repeated for `K = 2 (mod 3)`, truncated to K entries.
pub fn inverse_row_pattern(cells: CellCount) -> Result<Vec<u8>> {
    let unit: [u8; 3] = match cells.get() % 3 {
        0 => return Err(QcaError::NonUnitaryConfiguration { cells: cells.get() }),
        1 => [1, 1, 0],
        _ => [1, 0, 1],
    };
    Ok((0..cells.get() as usize).map(|k| unit[k % 3]).collect())
}

/// The inverse matrix `B`: row `i` is `b_K` cyclically shifted right `i` times.
pub fn build_b(cells: CellCount) -> Result<BinaryCirculant> {
    require_ring(cells)?;
    let pattern = inverse_row_pattern(cells)?;
    let n = pattern.len();
    let rows = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&c| pattern[(c + n - i) % n] == 1)
                .fold(0, |acc, c| acc | (1 << c))
        })
        .collect();
    Ok(BinaryCirculant { cells, rows })
}

/// The unique `v` with `rule150_step(v) = w`.
pub fn inverse_step(w: usize, cells: CellCount) -> Result<usize> {
    Ok(build_b(cells)?.apply(w & cells.mask()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trajectory {
    pub cells: CellCount,
    /// Distinct states in visiting order, starting from the initial state.
    pub states: Vec<usize>,
    /// Cycle length, if a repeat was seen within the step budget.
    pub period: Option<usize>,
    /// Number of states before the cycle is entered (0 whenever the map is a
    /// bijection).
    pub preperiod: usize,
}

impl Trajectory {
    /// State at time `t`, following the cycle past the recorded states.
    pub fn state_at(&self, t: usize) -> Option<usize> {
        if t < self.states.len() {
            return Some(self.states[t]);
        }
        let p = self.period?;
        Some(self.states[self.preperiod + (t - self.preperiod) % p])
    }

    pub fn cycle(&self) -> &[usize] {
        match self.period {
            Some(_) => &self.states[self.preperiod..],
            None => &[],
        }
    }
}

/// Iterate rule 150 from `start` until a state repeats or `max_steps` steps
/// have been taken.
pub fn trajectory(start: usize, cells: CellCount, max_steps: usize) -> Result<Trajectory> {
    cells.check_index(start)?;
    let mut seen = HashMap::new();
    let mut states = Vec::new();
    let mut s = start;
    for t in 0..=max_steps {
        if let Some(&t0) = seen.get(&s) {
            return Ok(Trajectory {
                cells,
                states,
                period: Some(t - t0),
                preperiod: t0,
            });
        }
        if t == max_steps {
            break;
        }
        seen.insert(s, t);
        states.push(s);
        s = rule150_step(s, cells);
    }
    Ok(Trajectory {
        cells,
        states,
        period: None,
        preperiod: 0,
    })
}
