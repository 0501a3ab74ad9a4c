//! Spectral analysis of the evolution operator.
//!
//! With `M = V Λ V†` and eigenvalues grouped into classes of equal value, the
//! amplitude of configuration `i` is `φ_i(t) = Σ_n a_in λ_n^t` and the
//! infinite-time average of `|φ_i(t)|^2` is `Σ_n |a_in|^2`: cross terms
//! between distinct unit-modulus eigenvalues average to zero.

mod eigen;
mod symmetric;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::bitconfig::{complement, parity_sign, CellCount};
use crate::error::{QcaError, Result};
use crate::evolution::{EvolutionOperator, StateVector};

pub use eigen::{eigen_residual, normal_eigen, orthonormalize_columns, unitarity_defect};
pub use symmetric::{build_symmetric_basis, c_coefficients, SymmetricBasis};

/// Default phase tolerance for treating two eigenvalues as equal.
pub const GROUPING_TOLERANCE: f64 = 1e-8;
/// Distinct classes must be at least this many tolerances apart.
pub const GAP_FACTOR: f64 = 10.0;

#[derive(Clone, Debug)]
pub struct SpectralData {
    pub cells: CellCount,
    pub eigenvalues: Vec<Complex64>,
    /// Eigenvectors as columns.
    pub vectors: DMatrix<Complex64>,
    /// Column indices partitioned by (numerically) equal eigenvalue, ordered
    /// by phase.
    pub classes: Vec<Vec<usize>>,
}

impl SpectralData {
    pub fn phases(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|z| z.arg()).collect()
    }

    /// Class index of every eigenvalue column.
    pub fn class_of(&self) -> Vec<usize> {
        let mut out = vec![0; self.eigenvalues.len()];
        for (c, members) in self.classes.iter().enumerate() {
            for &m in members {
                out[m] = c;
            }
        }
        out
    }
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Partition unit-modulus values by phase. Values within `tol` of a
/// neighbour share a class; a class gap smaller than `10 tol` is rejected as
/// ambiguous.
pub fn group_eigenvalues(values: &[Complex64], tol: f64) -> Result<Vec<Vec<usize>>> {
    let n = values.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let phases: Vec<f64> = values.iter().map(|z| z.arg()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| phases[a].total_cmp(&phases[b]).then(a.cmp(&b)));

    // gaps[g] sits between order[g] and order[g + 1] (cyclically)
    let gap = |g: usize| circular_distance(phases[order[(g + 1) % n]], phases[order[g]]);
    let ambiguous = |g: usize| QcaError::AmbiguousDegeneracy {
        a: phases[order[g]],
        b: phases[order[(g + 1) % n]],
        gap: gap(g),
        tol,
        guard: GAP_FACTOR * tol,
    };
    let cuts: Vec<usize> = if n == 1 {
        Vec::new()
    } else {
        let mut cuts = Vec::new();
        for g in 0..n {
            let d = gap(g);
            if d > tol {
                if d < GAP_FACTOR * tol {
                    return Err(ambiguous(g));
                }
                cuts.push(g);
            }
        }
        cuts
    };

    let mut classes: Vec<Vec<usize>> = if cuts.is_empty() {
        vec![order.clone()]
    } else {
        // classes run from just after one cut to the next cut, wrapping
        let mut out = Vec::with_capacity(cuts.len());
        for w in 0..cuts.len() {
            let start = (cuts[w] + 1) % n;
            let end = cuts[(w + 1) % cuts.len()];
            let mut members = Vec::new();
            let mut p = start;
            loop {
                members.push(order[p]);
                if p == end {
                    break;
                }
                p = (p + 1) % n;
            }
            out.push(members);
        }
        out
    };

    // a chain of small steps must not span more than tol
    for members in &classes {
        let first = phases[members[0]];
        if let Some(&far) = members
            .iter()
            .find(|&&m| circular_distance(phases[m], first) > tol)
        {
            return Err(QcaError::AmbiguousDegeneracy {
                a: first,
                b: phases[far],
                gap: circular_distance(phases[far], first),
                tol,
                guard: GAP_FACTOR * tol,
            });
        }
    }
    for members in classes.iter_mut() {
        members.sort_unstable();
    }
    classes.sort_by(|a, b| phases[a[0]].total_cmp(&phases[b[0]]).then(a[0].cmp(&b[0])));
    Ok(classes)
}

pub fn eigendecompose(op: &EvolutionOperator) -> Result<SpectralData> {
    eigendecompose_with_tolerance(op, GROUPING_TOLERANCE)
}

pub fn eigendecompose_with_tolerance(op: &EvolutionOperator, tol: f64) -> Result<SpectralData> {
    let m = op.dense_complex()?;
    let (eigenvalues, mut vectors) = normal_eigen(&m)?;
    let n = eigenvalues.len();

    if let Some(bad) = eigenvalues.iter().find(|z| (z.norm() - 1.0).abs() > 1e-10) {
        return Err(QcaError::Decomposition(format!(
            "eigenvalue {bad} is off the unit circle"
        )));
    }
    let classes = group_eigenvalues(&eigenvalues, tol)?;
    for members in classes.iter().filter(|c| c.len() > 1) {
        orthonormalize_columns(&mut vectors, members);
    }
    let defect = unitarity_defect(&vectors);
    if defect > 1e-10 {
        return Err(QcaError::Decomposition(format!(
            "eigenvector matrix not unitary (defect {defect:e})"
        )));
    }
    let residual = eigen_residual(&m, &eigenvalues, &vectors);
    if residual > 1e-10 * n as f64 {
        return Err(QcaError::Decomposition(format!(
            "residual {residual:e} exceeds tolerance"
        )));
    }
    Ok(SpectralData {
        cells: op.cells(),
        eigenvalues,
        vectors,
        classes,
    })
}

/// `a_in(φ0)`: the coefficient of the `n`-th distinct eigenvalue in
/// `φ_i(t)`. Rows are configurations, columns are eigenvalue classes.
#[derive(Clone, Debug)]
pub struct CoefficientTable {
    pub a: DMatrix<Complex64>,
}

impl CoefficientTable {
    pub fn new(spec: &SpectralData, phi0: &StateVector) -> Result<Self> {
        if phi0.cells() != spec.cells {
            return Err(QcaError::DimensionMismatch {
                len: phi0.amplitudes().len(),
                cells: spec.cells.get(),
            });
        }
        let v = &spec.vectors;
        let beta = v.adjoint() * DVector::from_column_slice(phi0.amplitudes());
        let n = v.nrows();
        let mut a = DMatrix::zeros(n, spec.classes.len());
        for (c, members) in spec.classes.iter().enumerate() {
            for &m in members {
                for i in 0..n {
                    a[(i, c)] += v[(i, m)] * beta[m];
                }
            }
        }
        Ok(Self { a })
    }

    /// `⟨|φ_i|^2⟩ = Σ_n |a_in|^2`
    pub fn time_averages(&self) -> Vec<f64> {
        self.a
            .row_iter()
            .map(|row| row.iter().map(|z| z.norm_sqr()).sum())
            .collect()
    }

    /// `φ_i(t)` reconstructed from the table.
    pub fn amplitudes_at(&self, spec: &SpectralData, t: u32) -> Vec<Complex64> {
        let powers: Vec<Complex64> = spec
            .classes
            .iter()
            .map(|members| spec.eigenvalues[members[0]].powu(t))
            .collect();
        self.a
            .row_iter()
            .map(|row| row.iter().zip(&powers).map(|(a, p)| a * p).sum())
            .collect()
    }
}

/// Exact infinite-time average of `|φ_i(t)|^2` for every configuration.
pub fn time_averaged_probabilities(spec: &SpectralData, phi0: &StateVector) -> Result<Vec<f64>> {
    Ok(CoefficientTable::new(spec, phi0)?.time_averages())
}

/// Convenience wrapper that decomposes `op` first.
pub fn time_averaged_probabilities_for(
    op: &EvolutionOperator,
    phi0: &StateVector,
) -> Result<Vec<f64>> {
    time_averaged_probabilities(&eigendecompose(op)?, phi0)
}

/// `Σ_i (#i / K) ⟨|φ_i|^2⟩`
pub fn exact_mean_density(spec: &SpectralData, phi0: &StateVector) -> Result<f64> {
    let k = spec.cells.get() as f64;
    Ok(time_averaged_probabilities(spec, phi0)?
        .iter()
        .enumerate()
        .map(|(i, p)| i.count_ones() as f64 / k * p)
        .sum())
}

/// Exact time average and time-averaged standard deviation of the mean
/// density `ρ(t)`.
///
/// `ρ(t) = Σ_{p,q} R_pq (λ_q / λ_p)^t` with `R_pq = Σ_i conj(a_ip) (#i/K) a_iq`.
/// Collecting terms by frequency `arg λ_q - arg λ_p` gives `ρ(t) = Σ_ω c_ω e^{iωt}`,
/// so `⟨ρ⟩ = c_0` and `σ^2 = Σ_{ω≠0} |c_ω|^2`. Frequencies closer than `tol`
/// are merged.
pub fn exact_density_statistics(
    spec: &SpectralData,
    phi0: &StateVector,
    tol: f64,
) -> Result<(f64, f64)> {
    let table = CoefficientTable::new(spec, phi0)?;
    let a = &table.a;
    let k = spec.cells.get() as f64;
    let weights: Vec<f64> = (0..a.nrows()).map(|i| i.count_ones() as f64 / k).collect();
    let classes = spec.classes.len();
    let phase: Vec<f64> = spec
        .classes
        .iter()
        .map(|members| spec.eigenvalues[members[0]].arg())
        .collect();

    let mut terms: Vec<(f64, Complex64)> = Vec::with_capacity(classes * classes);
    for p in 0..classes {
        for q in 0..classes {
            let r: Complex64 = (0..a.nrows())
                .map(|i| a[(i, p)].conj() * a[(i, q)] * weights[i])
                .sum();
            if r.norm() > 0.0 {
                // frequency in [-π, π)
                let w = (phase[q] - phase[p] + PI).rem_euclid(2.0 * PI) - PI;
                terms.push((w, r));
            }
        }
    }
    terms.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut groups: Vec<(f64, Complex64)> = Vec::new();
    for (w, r) in terms {
        match groups.last_mut() {
            Some((w0, acc)) if w - *w0 <= tol => *acc += r,
            _ => groups.push((w, r)),
        }
    }
    // -π and π are the same frequency
    if groups.len() > 1 {
        let last = groups.len() - 1;
        if circular_distance(groups[0].0, groups[last].0) <= tol {
            let (_, r) = groups.pop().unwrap();
            groups[0].1 += r;
        }
    }

    let mut mean = 0.0;
    let mut var = 0.0;
    for (w, c) in &groups {
        if circular_distance(*w, 0.0) <= tol {
            mean += c.re;
        } else {
            var += c.norm_sqr();
        }
    }
    Ok((mean, var.sqrt()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymmetryCheck {
    pub holds: bool,
    pub max_deviation: f64,
}

impl SymmetryCheck {
    fn from_deviation(max_deviation: f64, tol: f64) -> Self {
        Self {
            holds: max_deviation < tol,
            max_deviation,
        }
    }
}

/// Checks `M_{î ĵ} = (-1)^{#i + #j} M_ij` over all entries.
pub fn verify_element_symmetry(op: &EvolutionOperator) -> Result<SymmetryCheck> {
    let m = op.dense()?;
    let cells = op.cells();
    let mut worst = 0.0f64;
    for j in cells.configs() {
        let jc = complement(j, cells);
        for i in cells.configs() {
            let ic = complement(i, cells);
            let want = parity_sign(i) * parity_sign(j) * m[(i, j)];
            worst = worst.max((m[(ic, jc)] - want).abs());
        }
    }
    Ok(SymmetryCheck::from_deviation(worst, 1e-12))
}

/// Largest `|p_i - p_î|` over a probability vector.
pub fn complement_asymmetry(probs: &[f64], cells: CellCount) -> f64 {
    cells
        .configs()
        .map(|i| (probs[i] - probs[complement(i, cells)]).abs())
        .fold(0.0, f64::max)
}

/// Checks `⟨|φ_i|^2⟩ = ⟨|φ_î|^2⟩` for every configuration.
pub fn verify_probability_symmetry(
    spec: &SpectralData,
    phi0: &StateVector,
) -> Result<SymmetryCheck> {
    let p = time_averaged_probabilities(spec, phi0)?;
    Ok(SymmetryCheck::from_deviation(
        complement_asymmetry(&p, spec.cells),
        1e-10,
    ))
}

/// One-step stationarity of the configuration distribution:
/// `max_i ||(Mφ)_i|^2 - |φ_i|^2| < tol`.
pub fn is_stationary(phi: &StateVector, op: &EvolutionOperator, tol: f64) -> Result<bool> {
    stationary_over(phi, op, tol, 1)
}

/// Like [`is_stationary`] but compares every step up to `steps` against the
/// initial distribution.
pub fn stationary_over(
    phi: &StateVector,
    op: &EvolutionOperator,
    tol: f64,
    steps: usize,
) -> Result<bool> {
    let p0 = phi.probabilities();
    for state in op.iter_states(phi.clone())?.skip(1).take(steps) {
        let drift = state
            .probabilities()
            .iter()
            .zip(&p0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if drift >= tol {
            return Ok(false);
        }
    }
    Ok(true)
}
