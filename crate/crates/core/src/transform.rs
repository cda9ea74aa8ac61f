//! Ordinary spectral transforms: the unitary DFT and the joint time-vertex
//! Fourier transform.
//!
//! Convention: the joint synthesis operator is `U_J = U_T ⊗ U_G` and the
//! forward (analysis) transform applies `U_Jᴴ` to `vec(X)`. In matrix form
//! this is `U_Gᴴ · X · conj(U_T)`. Under this convention the joint filter
//! `Σ c_pq L_T^p ⊗ L_G^q` is diagonal in the transformed domain.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{apply_kron, real_part, to_complex, unvec, vec_of, CMat, CVec};

/// Real `N x T` time-vertex signal. Row `n` is vertex `n`'s time series.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeVertexSignal {
    values: DMatrix<f64>,
}

impl TimeVertexSignal {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::param("signal must have at least one vertex and one time step"));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!(
                "non-finite entry at vertex {}, time {}",
                pos % values.nrows(),
                pos / values.nrows()
            )));
        }
        Ok(Self { values })
    }

    /// From a column-stacked vector of length `n*t`.
    pub fn from_vec(v: &[f64], n: usize, t: usize) -> Result<Self> {
        if v.len() != n * t {
            return Err(Error::param(format!("vector of length {} is not {n}x{t}", v.len())));
        }
        Self::new(DMatrix::from_column_slice(n, t, v))
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_values(self) -> DMatrix<f64> {
        self.values
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn t(&self) -> usize {
        self.values.ncols()
    }

    /// `vec(X)`: time steps stacked as contiguous blocks of `N` values.
    pub fn vec(&self) -> Vec<f64> {
        self.values.as_slice().to_vec()
    }
}

/// Joint spectrum of a time-vertex signal, tagged with the fractional orders
/// `(a, b)` of the transform that produced it (`(1, 1)` for the plain JFT).
#[derive(Debug, Clone, PartialEq)]
pub struct JointSpectrum {
    pub values: CVec,
    pub n: usize,
    pub t: usize,
    pub orders: (f64, f64),
}

/// Unitary DFT matrix, entry `(j, k) = e^{-2πi jk/T} / √T`.
pub fn dft_matrix(t: usize) -> CMat {
    let scale = 1.0 / (t as f64).sqrt();
    CMat::from_fn(t, t, |j, k| {
        let phase = -2.0 * PI * ((j * k) % t) as f64 / t as f64;
        Complex64::from_polar(scale, phase)
    })
}

fn check_bases(n: usize, t: usize, u_g: &CMat, u_t: &CMat) -> Result<()> {
    if u_g.shape() != (n, n) || u_t.shape() != (t, t) {
        return Err(Error::param(format!(
            "signal is {n}x{t} but bases are {:?} and {:?}",
            u_g.shape(),
            u_t.shape()
        )));
    }
    Ok(())
}

/// Forward joint transform `(U_T ⊗ U_G)ᴴ vec(X)`.
pub fn jft(sig: &TimeVertexSignal, u_g: &CMat, u_t: &CMat) -> Result<JointSpectrum> {
    check_bases(sig.n(), sig.t(), u_g, u_t)?;
    let x = to_complex(sig.values());
    let spec = u_g.adjoint() * x * u_t.conjugate();
    Ok(JointSpectrum {
        values: vec_of(&spec),
        n: sig.n(),
        t: sig.t(),
        orders: (1.0, 1.0),
    })
}

/// Inverse joint transform `(U_T ⊗ U_G) x̂`; the real part is returned.
pub fn ijft(spec: &JointSpectrum, u_g: &CMat, u_t: &CMat) -> Result<TimeVertexSignal> {
    check_bases(spec.n, spec.t, u_g, u_t)?;
    if spec.values.len() != spec.n * spec.t {
        return Err(Error::param("spectrum length does not match its dimensions"));
    }
    let s = unvec(&spec.values, spec.n, spec.t);
    let x = apply_kron(u_t, u_g, &s);
    TimeVertexSignal::new(real_part(&x))
}
