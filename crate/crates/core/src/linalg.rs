//! Dense complex matrix helpers shared by the transforms and the solver.
//!
//! Signals are stored as `N x T` matrices and vectorized column by column, so
//! time step `t` occupies the contiguous block `t*N .. (t+1)*N`. This is the
//! same layout nalgebra uses for `DMatrix` storage, and the one under which
//! `(A ⊗ B) vec(X) = vec(B X Aᵀ)` holds.

use nalgebra::{DMatrix, DVector, Dim, Matrix, RawStorage};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn to_complex(m: &DMatrix<f64>) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn real_part(m: &CMat) -> DMatrix<f64> {
    m.map(|z| z.re)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff<R: Dim, C: Dim, S1, S2>(
    a: &Matrix<Complex64, R, C, S1>,
    b: &Matrix<Complex64, R, C, S2>,
) -> f64
where
    S1: RawStorage<Complex64, R, C>,
    S2: RawStorage<Complex64, R, C>,
{
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Max-entry deviation of `m mᴴ` from the identity.
pub fn unitarity_error(m: &CMat) -> f64 {
    let gram = m * m.adjoint();
    max_abs_diff(&gram, &CMat::identity(m.nrows(), m.ncols()))
}

/// Dense Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMat::from_fn(ar * br, ac * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// Applies `a_time ⊗ b_vertex` to `vec(x)` without forming the Kronecker
/// product: returns the `N x T` matrix `b_vertex · x · a_timeᵀ`.
pub fn apply_kron(a_time: &CMat, b_vertex: &CMat, x: &CMat) -> CMat {
    b_vertex * x * a_time.transpose()
}

pub fn unvec(v: &CVec, n: usize, t: usize) -> CMat {
    assert_eq!(v.len(), n * t, "vector length does not match {n}x{t}");
    CMat::from_column_slice(n, t, v.as_slice())
}

pub fn vec_of(m: &CMat) -> CVec {
    CVec::from_column_slice(m.as_slice())
}

/// Euclidean norm of a complex slice.
pub fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}
