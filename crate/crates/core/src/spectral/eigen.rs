//! Eigendecomposition of normal (here: unitary) matrices.
//!
//! The complex Schur form `A = Q T Q†` of a normal matrix is diagonal, so the
//! Schur vectors are an orthonormal eigenbasis and `diag(T)` holds the
//! eigenvalues. This sidesteps the ill-conditioned back-substitution a
//! general eigensolver performs inside degenerate clusters.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{QcaError, Result};

/// Deflation thresholds tried in turn. The shifted QR iteration can stall on
/// tightly clustered unit-circle spectra at the strictest setting; accuracy
/// is enforced afterwards by the off-diagonal and residual checks.
const SCHUR_EPS_LADDER: [f64; 4] = [1e-15, 1e-14, 1e-13, 1e-12];
const SCHUR_MAX_ITER: usize = 10_000;

/// Off-diagonal Schur mass above which the input is not treated as normal.
const NORMALITY_TOLERANCE: f64 = 1e-9;

/// Eigenvalues and orthonormal eigenvectors (as columns) of a normal matrix.
pub fn normal_eigen(a: &DMatrix<Complex64>) -> Result<(Vec<Complex64>, DMatrix<Complex64>)> {
    if !a.is_square() {
        return Err(QcaError::Decomposition(format!(
            "matrix is {}x{}, not square",
            a.nrows(),
            a.ncols()
        )));
    }
    let schur = SCHUR_EPS_LADDER
        .iter()
        .find_map(|&eps| a.clone().try_schur(eps, SCHUR_MAX_ITER))
        .ok_or_else(|| QcaError::Decomposition("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();
    let n = t.nrows();
    let mut off = 0.0f64;
    for j in 0..n {
        for i in 0..j {
            off = off.max(t[(i, j)].norm());
        }
    }
    if off > NORMALITY_TOLERANCE {
        return Err(QcaError::Decomposition(format!(
            "Schur form not diagonal (largest off-diagonal {off:e}); matrix is not normal"
        )));
    }
    Ok((t.diagonal().iter().copied().collect(), q))
}

/// Modified Gram-Schmidt on the given columns, in place.
pub fn orthonormalize_columns(v: &mut DMatrix<Complex64>, cols: &[usize]) {
    for (a, &ca) in cols.iter().enumerate() {
        for &cb in &cols[..a] {
            let proj: Complex64 = (0..v.nrows()).map(|r| v[(r, cb)].conj() * v[(r, ca)]).sum();
            for r in 0..v.nrows() {
                let sub = v[(r, cb)] * proj;
                v[(r, ca)] -= sub;
            }
        }
        let norm = v.column(ca).norm();
        for r in 0..v.nrows() {
            v[(r, ca)] /= norm;
        }
    }
}

/// `max |V† V - I|`
pub fn unitarity_defect(v: &DMatrix<Complex64>) -> f64 {
    let g = v.adjoint() * v;
    let mut worst = 0.0f64;
    for j in 0..g.ncols() {
        for i in 0..g.nrows() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

/// Frobenius norm of `A V - V Λ`.
pub fn eigen_residual(a: &DMatrix<Complex64>, values: &[Complex64], v: &DMatrix<Complex64>) -> f64 {
    let mut av = a * v;
    for (j, lambda) in values.iter().enumerate() {
        for i in 0..v.nrows() {
            av[(i, j)] -= v[(i, j)] * lambda;
        }
    }
    av.norm()
}
