//! The unitary evolution operator built from rule 150.
//!
//! `M_ij = Π_k g(F(j)_k ; i_k)` where `g` is a 2x2 rotation by the mixing
//! angle. Because `M_ij` depends on `j` only through `F(j)`, the operator
//! factorizes as `M = R^{⊗K} · P` with `P` the rule-150 basis permutation.
//! [`EvolutionOperator::step`] applies it in `O(K 2^K)`; [`EvolutionOperator::dense`]
//! materialises the `N x N` matrix for spectral work.

use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::bitconfig::{mismatch_count, CellCount};
use crate::classical::rule150_step;
use crate::error::{QcaError, Result};

pub const NORM_TOLERANCE: f64 = 1e-10;

/// Angle in radians, restricted to `[0, π/2]`. The endpoints are the
/// classical limits (rule 150 at 0, rule 105 at π/2).
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct MixingAngle(f64);

impl MixingAngle {
    pub fn new(theta: f64) -> Result<Self> {
        // allow the rounding error in a computed π/2
        if !(theta.is_finite() && (0.0..=FRAC_PI_2 + 1e-12).contains(&theta)) {
            return Err(QcaError::AngleOutOfRange {
                theta,
                range: "[0, pi/2]",
            });
        }
        Ok(Self(theta.min(FRAC_PI_2)))
    }

    #[inline]
    pub fn radians(self) -> f64 {
        self.0
    }

    /// Strictly inside `(0, π/2)`.
    pub fn is_interior(self) -> bool {
        self.0 > 0.0 && self.0 < FRAC_PI_2
    }
}

/// Upper limits on K for dense (`N x N`) work and for matrix-free stepping.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    pub dense: u32,
    pub matrix_free: u32,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            dense: 12,
            matrix_free: 24,
        }
    }
}

/// Amplitudes over the `N = 2^K` configurations.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    cells: CellCount,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `δ_i`
    pub fn basis(cells: CellCount, i: usize) -> Result<Self> {
        cells.check_index(i)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); cells.dim()];
        amps[i] = Complex64::new(1.0, 0.0);
        Ok(Self { cells, amps })
    }

    /// Takes the amplitudes as given; rejects vectors whose norm is off by
    /// more than `tol` rather than renormalizing.
    pub fn from_amplitudes(cells: CellCount, amps: Vec<Complex64>, tol: f64) -> Result<Self> {
        if amps.len() != cells.dim() {
            return Err(QcaError::DimensionMismatch {
                len: amps.len(),
                cells: cells.get(),
            });
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > tol {
            return Err(QcaError::NotNormalized { norm });
        }
        Ok(Self { cells, amps })
    }

    /// Random unit vector: independent uniform real and imaginary parts,
    /// normalized.
    pub fn random<R: Rng + ?Sized>(cells: CellCount, rng: &mut R) -> Self {
        let mut amps: Vec<Complex64> = (0..cells.dim())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        Self { cells, amps }
    }

    /// Equal real amplitudes `1/√N` on every configuration.
    pub fn uniform(cells: CellCount) -> Self {
        let a = 1.0 / (cells.dim() as f64).sqrt();
        Self {
            cells,
            amps: vec![Complex64::new(a, 0.0); cells.dim()],
        }
    }

    pub fn cells(&self) -> CellCount {
        self.cells
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `|φ_i|^2` for every configuration.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Index of the largest `|φ_i|^2` (lowest index on ties).
    pub fn dominant_config(&self) -> usize {
        let mut best = 0;
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() > self.amps[best].norm_sqr() + 1e-15 {
                best = i;
            }
        }
        best
    }

    /// `Some(i)` when the state is `δ_i` up to a phase.
    pub fn as_basis(&self) -> Option<usize> {
        let i = self.dominant_config();
        ((self.amps[i].norm_sqr() - 1.0).abs() < 1e-12).then_some(i)
    }
}

pub fn check_evolvable(cells: CellCount) -> Result<()> {
    if cells.get() < 3 {
        return Err(QcaError::TooFewCells {
            cells: cells.get(),
            min: 3,
        });
    }
    if cells.get().is_multiple_of(3) {
        return Err(QcaError::NonUnitaryConfiguration { cells: cells.get() });
    }
    Ok(())
}

/// Local factor `g(f; p)`: cos when the cell agrees with its rule-150 value,
/// `+sin` for `f=1, p=0`, `-sin` for `f=0, p=1`.
#[inline]
fn local_factor(f: bool, p: bool, c: f64, s: f64) -> f64 {
    match (f, p) {
        (false, false) | (true, true) => c,
        (false, true) => -s,
        (true, false) => s,
    }
}

#[derive(Clone, Debug)]
pub struct EvolutionOperator {
    cells: CellCount,
    theta: MixingAngle,
    cos: f64,
    sin: f64,
    caps: Caps,
}

impl EvolutionOperator {
    pub fn new(cells: CellCount, theta: MixingAngle) -> Result<Self> {
        Self::with_caps(cells, theta, Caps::default())
    }

    pub fn with_caps(cells: CellCount, theta: MixingAngle, caps: Caps) -> Result<Self> {
        check_evolvable(cells)?;
        if cells.get() > caps.matrix_free {
            return Err(QcaError::CapExceeded {
                what: "matrix-free evolution",
                cells: cells.get(),
                cap: caps.matrix_free,
            });
        }
        let t = theta.radians();
        Ok(Self {
            cells,
            theta,
            cos: t.cos(),
            sin: t.sin(),
            caps,
        })
    }

    pub fn cells(&self) -> CellCount {
        self.cells
    }

    pub fn theta(&self) -> MixingAngle {
        self.theta
    }

    pub fn caps(&self) -> Caps {
        self.caps
    }

    pub fn check_dense(&self) -> Result<()> {
        if self.cells.get() > self.caps.dense {
            return Err(QcaError::CapExceeded {
                what: "dense operator",
                cells: self.cells.get(),
                cap: self.caps.dense,
            });
        }
        Ok(())
    }

    /// Single matrix element from the product formula.
    pub fn element(&self, i: usize, j: usize) -> f64 {
        let f = rule150_step(j, self.cells);
        (0..self.cells.get()).fold(1.0, |acc, k| {
            acc * local_factor((f >> k) & 1 == 1, (i >> k) & 1 == 1, self.cos, self.sin)
        })
    }

    /// The full `N x N` real orthogonal matrix.
    pub fn dense(&self) -> Result<DMatrix<f64>> {
        self.check_dense()?;
        let n = self.cells.dim();
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            for i in 0..n {
                m[(i, j)] = self.element(i, j);
            }
        }
        Ok(m)
    }

    pub fn dense_complex(&self) -> Result<DMatrix<Complex64>> {
        Ok(self.dense()?.map(|x| Complex64::new(x, 0.0)))
    }

    /// `M φ` without forming `M`: permute by rule 150, then rotate each
    /// cell's bit pair by `[[cos, sin], [-sin, cos]]`.
    pub fn step(&self, phi: &StateVector) -> Result<StateVector> {
        if phi.cells != self.cells {
            return Err(QcaError::DimensionMismatch {
                len: phi.amps.len(),
                cells: self.cells.get(),
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.cells.dim()];
        self.step_into(&phi.amps, &mut out);
        Ok(StateVector {
            cells: self.cells,
            amps: out,
        })
    }

    fn step_into(&self, input: &[Complex64], out: &mut [Complex64]) {
        for (j, a) in input.iter().enumerate() {
            out[rule150_step(j, self.cells)] = *a;
        }
        let (c, s) = (self.cos, self.sin);
        for k in 0..self.cells.get() {
            let bit = 1usize << k;
            for lo in (0..out.len()).filter(|i| i & bit == 0) {
                let hi = lo | bit;
                let (a0, a1) = (out[lo], out[hi]);
                out[lo] = a0 * c + a1 * s;
                out[hi] = a1 * c - a0 * s;
            }
        }
    }

    /// Stream of `φ(0), φ(1), ...` without keeping history.
    pub fn iter_states(&self, phi0: StateVector) -> Result<StateIter<'_>> {
        if phi0.cells != self.cells {
            return Err(QcaError::DimensionMismatch {
                len: phi0.amps.len(),
                cells: self.cells.get(),
            });
        }
        Ok(StateIter {
            op: self,
            next: Some(phi0),
        })
    }

    /// `[φ(0), ..., φ(steps)]`.
    pub fn evolve(&self, phi0: StateVector, steps: usize) -> Result<Vec<StateVector>> {
        Ok(self.iter_states(phi0)?.take(steps + 1).collect())
    }
}

pub struct StateIter<'a> {
    op: &'a EvolutionOperator,
    next: Option<StateVector>,
}

impl Iterator for StateIter<'_> {
    type Item = StateVector;

    fn next(&mut self) -> Option<StateVector> {
        let cur = self.next.take()?;
        let mut amps = vec![Complex64::new(0.0, 0.0); cur.amps.len()];
        self.op.step_into(&cur.amps, &mut amps);
        self.next = Some(StateVector {
            cells: cur.cells,
            amps,
        });
        Some(cur)
    }
}

/// Dense constructor with default caps.
pub fn build_dense(cells: CellCount, theta: MixingAngle) -> Result<DMatrix<f64>> {
    EvolutionOperator::new(cells, theta)?.dense()
}

/// `|M_ij| = cos^{K-d} θ sin^d θ` with `d = mismatch_count(i, F(j))`.
pub fn amplitude_magnitude(
    i: usize,
    j: usize,
    cells: CellCount,
    theta: MixingAngle,
) -> Result<f64> {
    check_evolvable(cells)?;
    cells.check_index(i)?;
    cells.check_index(j)?;
    let d = mismatch_count(i, rule150_step(j, cells), cells) as i32;
    let t = theta.radians();
    Ok(t.cos().powi(cells.get() as i32 - d) * t.sin().powi(d))
}

/// Markov matrix `U_ij = M_ij^2`.
#[derive(Clone, Debug)]
pub struct StochasticOperator {
    pub cells: CellCount,
    pub theta: MixingAngle,
    pub matrix: DMatrix<f64>,
}

impl StochasticOperator {
    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        let v = nalgebra::DVector::from_column_slice(p);
        (&self.matrix * v).iter().copied().collect()
    }

    /// Largest deviation of any row or column sum from 1.
    pub fn stochasticity_defect(&self) -> f64 {
        let rows = self.matrix.row_iter().map(|r| (r.sum() - 1.0).abs());
        let cols = self.matrix.column_iter().map(|c| (c.sum() - 1.0).abs());
        rows.chain(cols).fold(0.0, f64::max)
    }
}

pub fn build_stochastic(cells: CellCount, theta: MixingAngle) -> Result<StochasticOperator> {
    let m = build_dense(cells, theta)?;
    Ok(StochasticOperator {
        cells,
        theta,
        matrix: m.map(|x| x * x),
    })
}

/// `max |Mᵀ M - I|`
pub fn orthogonality_defect(m: &DMatrix<f64>) -> f64 {
    let g = m.transpose() * m;
    let n = g.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).abs());
        }
    }
    worst
}
