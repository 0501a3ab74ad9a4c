//! Constructive eigenbasis whose vectors satisfy `|v_i| = |v_î|`.
//!
//! Writing an eigenvector as `v_i = b_i` on the lower half of the index range
//! and `v_i = c_i b_î` on the upper half reduces `M v = λ v` to an eigenproblem
//! for the `N/2 x N/2` unitary matrix `H_ij = M_ij + c_ĵ M_iĵ`. Lifting the
//! eigenvectors of `H` with `+c` and those of the companion matrix built with
//! `-c` gives a full orthonormal eigenbasis of `M`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::bitconfig::{complement, parity_sign, CellCount};
use crate::error::{QcaError, Result};
use crate::evolution::EvolutionOperator;

use super::eigen::{normal_eigen, unitarity_defect};

/// `c_i = (-1)^{#i}` for even K and `(-1)^{#i} √-1` for odd K.
pub fn c_coefficients(cells: CellCount) -> Vec<Complex64> {
    let unit = if cells.get().is_multiple_of(2) {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(0.0, 1.0)
    };
    cells.configs().map(|i| unit * parity_sign(i)).collect()
}

#[derive(Clone, Debug)]
pub struct SymmetricBasis {
    pub cells: CellCount,
    pub c: Vec<Complex64>,
    /// `H_ij = M_ij + c_ĵ M_iĵ` for `i, j < N/2`.
    pub h: DMatrix<Complex64>,
    /// The companion `M_ij - c_ĵ M_iĵ` whose eigenvectors lift with `-c`.
    pub h_tilde: DMatrix<Complex64>,
    /// Eigenvalue of each lifted column.
    pub eigenvalues: Vec<Complex64>,
    /// `N x N`; columns `0..N/2` are the `v_j`, columns `N/2..N` the `ṽ_j`.
    pub vectors: DMatrix<Complex64>,
}

impl SymmetricBasis {
    pub fn half(&self) -> usize {
        self.cells.dim() / 2
    }

    /// `max |H† H - I|` over both reduced matrices.
    pub fn reduced_unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.h).max(unitarity_defect(&self.h_tilde))
    }

    /// Largest `‖M v - λ v‖` over the lifted vectors.
    pub fn max_residual(&self, m: &DMatrix<Complex64>) -> f64 {
        (0..self.vectors.ncols())
            .map(|j| {
                let v = self.vectors.column(j);
                (m * v - v * self.eigenvalues[j]).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Largest `||v_ij| - |v_îj||`.
    pub fn max_mirror_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.vectors.ncols() {
            for i in self.cells.configs() {
                let a = self.vectors[(i, j)].norm();
                let b = self.vectors[(complement(i, self.cells), j)].norm();
                worst = worst.max((a - b).abs());
            }
        }
        worst
    }

    /// `max |G - I|` for the Gram matrix of all lifted vectors.
    pub fn gram_defect(&self) -> f64 {
        unitarity_defect(&self.vectors)
    }
}

fn reduced_matrix(
    m: &DMatrix<f64>,
    c: &[Complex64],
    cells: CellCount,
    sign: f64,
) -> DMatrix<Complex64> {
    let n = cells.dim() / 2;
    DMatrix::from_fn(n, n, |i, j| {
        let jc = complement(j, cells);
        Complex64::new(m[(i, j)], 0.0) + c[jc] * (sign * m[(i, jc)])
    })
}

fn lift(
    s: &DMatrix<Complex64>,
    c: &[Complex64],
    cells: CellCount,
    sign: f64,
) -> DMatrix<Complex64> {
    let n = cells.dim() / 2;
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(cells.dim(), n, |i, j| {
        if i < n {
            s[(i, j)] * scale
        } else {
            c[i] * s[(complement(i, cells), j)] * (sign * scale)
        }
    })
}

pub fn build_symmetric_basis(op: &EvolutionOperator) -> Result<SymmetricBasis> {
    let cells = op.cells();
    let m = op.dense()?;
    let c = c_coefficients(cells);
    let n = cells.dim() / 2;

    let h = reduced_matrix(&m, &c, cells, 1.0);
    let h_tilde = reduced_matrix(&m, &c, cells, -1.0);
    for (name, mat) in [("H", &h), ("H~", &h_tilde)] {
        let defect = unitarity_defect(mat);
        if defect > 1e-10 {
            return Err(QcaError::ConstructionInconsistency(format!(
                "{name} is not unitary (defect {defect:e})"
            )));
        }
    }

    let (vals, s) = normal_eigen(&h)?;
    let (vals_tilde, s_tilde) = normal_eigen(&h_tilde)?;

    let mut vectors = DMatrix::zeros(cells.dim(), cells.dim());
    vectors
        .columns_mut(0, n)
        .copy_from(&lift(&s, &c, cells, 1.0));
    vectors
        .columns_mut(n, n)
        .copy_from(&lift(&s_tilde, &c, cells, -1.0));
    let eigenvalues: Vec<Complex64> = vals.into_iter().chain(vals_tilde).collect();

    let basis = SymmetricBasis {
        cells,
        c,
        h,
        h_tilde,
        eigenvalues,
        vectors,
    };
    let residual = basis.max_residual(&m.map(|x| Complex64::new(x, 0.0)));
    if residual > 1e-8 {
        return Err(QcaError::ConstructionInconsistency(format!(
            "lifted vector is not an eigenvector of M (residual {residual:e})"
        )));
    }
    Ok(basis)
}
