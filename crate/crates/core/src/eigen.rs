//! Eigendecomposition of the normal operators this crate works with:
//! symmetric graph Laplacians, circulant cycle Laplacians, and the unitary
//! transform matrices whose fractional powers we take.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{max_abs, max_abs_diff, CMat, ONE, ZERO};

/// Normality tolerance on `||A Aᴴ - Aᴴ A||_max`.
pub const NORMALITY_TOL: f64 = 1e-8;

/// Eigenvalue ordering resolution: real parts closer than this are ties.
const ORDER_RESOLUTION: f64 = 1e-9;

/// Orthonormal eigenbasis `U` and eigenvalues `Λ` with `A = U Λ Uᴴ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    basis: CMat,
    eigenvalues: Vec<Complex64>,
}

impl SpectralDecomposition {
    pub fn new(basis: CMat, eigenvalues: Vec<Complex64>) -> Result<Self> {
        if !basis.is_square() || basis.nrows() != eigenvalues.len() {
            return Err(Error::param(format!(
                "basis {:?} does not match {} eigenvalues",
                basis.shape(),
                eigenvalues.len()
            )));
        }
        Ok(Self { basis, eigenvalues })
    }

    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `U diag(Λ) Uᴴ`.
    pub fn reconstruct(&self) -> CMat {
        let mut scaled = self.basis.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            for z in scaled.column_mut(j).iter_mut() {
                *z *= l;
            }
        }
        scaled * self.basis.adjoint()
    }

    pub fn orthonormality_error(&self) -> f64 {
        crate::linalg::unitarity_error(&self.basis)
    }
}

/// Decomposes a normal operator.
///
/// With `hermitian_hint` and a Hermitian input the symmetric solver is used.
/// Circulant inputs are diagonalized analytically by the unitary DFT basis,
/// keeping frequency order `k = 0..T-1` so the basis is the DFT matrix
/// itself. Everything else goes through a complex Schur factorization, whose
/// triangular factor is diagonal for normal input.
///
/// Eigenvector phases are fixed so the first nonzero component is real
/// and positive.
pub fn eigendecompose(op: &CMat, hermitian_hint: bool) -> Result<SpectralDecomposition> {
    if !op.is_square() || op.nrows() == 0 {
        return Err(Error::param(format!("operator must be square and nonempty, got {:?}", op.shape())));
    }
    if !crate::linalg::is_finite(op) {
        return Err(Error::input("operator contains non-finite entries"));
    }
    let scale = max_abs(op).max(1.0);
    let deviation = max_abs_diff(&(op * op.adjoint()), &(op.adjoint() * op));
    if deviation > NORMALITY_TOL * scale * scale {
        return Err(Error::UnsupportedOperator {
            deviation,
            tolerance: NORMALITY_TOL,
        });
    }

    if hermitian_hint && max_abs_diff(op, &op.adjoint()) <= 1e-12 * scale {
        return Ok(hermitian_path(op));
    }
    if is_circulant(op) {
        return Ok(circulant_path(op));
    }
    Ok(schur_path(op))
}

/// Convenience for real symmetric matrices such as graph Laplacians.
pub fn eigendecompose_symmetric(op: &DMatrix<f64>) -> Result<SpectralDecomposition> {
    eigendecompose(&crate::linalg::to_complex(op), true)
}

fn hermitian_path(op: &CMat) -> SpectralDecomposition {
    let n = op.nrows();
    let (vectors, values): (CMat, Vec<f64>) = if op.iter().all(|z| z.im == 0.0) {
        let real = op.map(|z| z.re);
        let real = (&real + real.transpose()) * 0.5;
        let eig = real.symmetric_eigen();
        (
            eig.eigenvectors.map(|x| Complex64::new(x, 0.0)),
            eig.eigenvalues.iter().copied().collect(),
        )
    } else {
        let herm = (op + op.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = herm.symmetric_eigen();
        (eig.eigenvectors, eig.eigenvalues.iter().copied().collect())
    };
    let eigenvalues: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    finish(vectors, eigenvalues, n)
}

fn is_circulant(op: &CMat) -> bool {
    let n = op.nrows();
    (1..n).all(|i| (0..n).all(|j| op[(i, j)] == op[(0, (j + n - i) % n)]))
}

fn circulant_path(op: &CMat) -> SpectralDecomposition {
    let n = op.nrows();
    let basis = crate::transform::dft_matrix(n);
    // For C[j][t] = c[(t - j) mod n], column k of the DFT is an eigenvector
    // with eigenvalue Σ_m c_m e^{-2πi mk/n}.
    let eigenvalues = (0..n)
        .map(|k| {
            (0..n).fold(ZERO, |acc, m| {
                let phase = -2.0 * PI * ((m * k) % n) as f64 / n as f64;
                acc + op[(0, m)] * Complex64::from_polar(1.0, phase)
            })
        })
        .collect();
    SpectralDecomposition { basis, eigenvalues }
}

fn schur_path(op: &CMat) -> SpectralDecomposition {
    let n = op.nrows();
    let (q, t) = nalgebra::linalg::Schur::new(op.clone()).unpack();
    let eigenvalues = (0..n).map(|i| t[(i, i)]).collect();
    finish(q, eigenvalues, n)
}

fn finish(mut vectors: CMat, eigenvalues: Vec<Complex64>, n: usize) -> SpectralDecomposition {
    let key = |z: Complex64| {
        (
            (z.re / ORDER_RESOLUTION).round() as i64,
            (z.im / ORDER_RESOLUTION).round() as i64,
        )
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (key(eigenvalues[i]), i));
    let mut sorted = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        sorted.set_column(dst, &vectors.column(src));
    }
    vectors = sorted;
    fix_phases(&mut vectors);
    SpectralDecomposition {
        basis: vectors,
        eigenvalues: order.iter().map(|&i| eigenvalues[i]).collect(),
    }
}

fn fix_phases(vectors: &mut CMat) {
    for mut col in vectors.column_iter_mut() {
        let scale = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if let Some(first) = col.iter().copied().find(|z| z.norm() > 1e-10 * scale) {
            let rot = first.conj() / first.norm();
            if rot != ONE {
                for z in col.iter_mut() {
                    *z *= rot;
                }
            }
            // Make the pivot exactly real.
            if let Some(p) = col.iter_mut().find(|z| z.norm() > 1e-10 * scale) {
                p.im = 0.0;
            }
        }
    }
}
