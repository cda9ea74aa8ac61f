//! Fractional powers of transforms and shift operators.
//!
//! Given a shift `L = U Λ Uᴴ`, the order-`a` transform `F^(a)` is the
//! principal fractional power of `Uᴴ`, computed from an eigendecomposition
//! `Uᴴ = P J Pᴴ` as `P J^a Pᴴ`. The order-`a` fractional shift is
//! `L^(a) = F^(a)ᴴ Λ^a F^(a)`, which is `I` at `a = 0` and `L` at `a = 1`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigen::{eigendecompose, SpectralDecomposition};
use crate::error::{Error, Result};
use crate::linalg::{kron, CMat, ONE, ZERO};

/// Imaginary parts this small on the negative real axis are treated as zero,
/// so eigenvalues at `-1` always take the `+iπ` branch.
const BRANCH_SNAP: f64 = 1e-10;

/// Eigenvalues of a shift smaller than this (relative to the largest) are
/// set to exactly zero before taking fractional powers.
const ZERO_SNAP: f64 = 1e-12;

/// How the fractional shift is assembled from `F^(a)` and `Λ^a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ShiftConvention {
    /// `F^(a)ᴴ Λ^a F^(a)`; reduces to `L` at `a = 1`.
    #[default]
    Reducing,
    /// `F^(a) Λ^a F^(a)ᴴ`, the product written in the other orientation.
    Literal,
}

fn check_order(a: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::param(format!("fractional order {a} outside [0, 1]")));
    }
    Ok(())
}

/// `z^a` on the principal branch, `Im log z ∈ (-π, π]`, with `z^0 = 1` and
/// `0^a = 0` for `a > 0`.
pub fn principal_power(z: Complex64, a: f64) -> Complex64 {
    if a == 0.0 {
        return ONE;
    }
    let r = z.norm();
    if r == 0.0 {
        return ZERO;
    }
    let arg = if z.re < 0.0 && z.im.abs() <= BRANCH_SNAP * r {
        PI
    } else {
        z.im.atan2(z.re)
    };
    Complex64::from_polar(r.powf(a), a * arg)
}

/// `F^(a) = P J^a Pᴴ` from the decomposition of the transform matrix `Uᴴ`.
pub fn fractional_transform(transform: &SpectralDecomposition, a: f64) -> Result<CMat> {
    check_order(a)?;
    let n = transform.len();
    if a == 0.0 {
        return Ok(CMat::identity(n, n));
    }
    let p = transform.basis();
    let mut scaled = p.clone();
    for (j, &l) in transform.eigenvalues().iter().enumerate() {
        let f = principal_power(l, a);
        for z in scaled.column_mut(j).iter_mut() {
            *z *= f;
        }
    }
    Ok(scaled * p.adjoint())
}

/// Order-`a` transform together with the fractional shift eigenvalues `Λ^a`.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalBasis {
    pub order: f64,
    pub transform: CMat,
    pub frac_eigenvalues: Vec<Complex64>,
}

impl FractionalBasis {
    pub fn len(&self) -> usize {
        self.frac_eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frac_eigenvalues.is_empty()
    }

    /// Matrix whose rows diagonalize the fractional shift built under
    /// `convention`.
    pub fn analysis(&self, convention: ShiftConvention) -> CMat {
        match convention {
            ShiftConvention::Reducing => self.transform.clone(),
            ShiftConvention::Literal => self.transform.adjoint(),
        }
    }

    /// The fractional shift `L^(a)` under `convention`.
    pub fn shift(&self, convention: ShiftConvention) -> CMat {
        let f = self.analysis(convention);
        let mut scaled = f.adjoint();
        for (j, &l) in self.frac_eigenvalues.iter().enumerate() {
            for z in scaled.column_mut(j).iter_mut() {
                *z *= l;
            }
        }
        scaled * f
    }
}

/// A shift operator together with the eigendecomposition of its transform
/// matrix `Uᴴ`. Building this once lets many orders share the work.
#[derive(Debug, Clone)]
pub struct FractionalDomain {
    shift: SpectralDecomposition,
    transform: SpectralDecomposition,
}

impl FractionalDomain {
    pub fn new(shift: &SpectralDecomposition) -> Result<Self> {
        let max = shift.eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
        let snapped = shift
            .eigenvalues()
            .iter()
            .map(|&z| if z.norm() <= ZERO_SNAP * max { ZERO } else { z })
            .collect();
        let shift = SpectralDecomposition::new(shift.basis().clone(), snapped)?;
        let transform = eigendecompose(&shift.basis().adjoint(), false)?;
        Ok(Self { shift, transform })
    }

    pub fn shift_decomposition(&self) -> &SpectralDecomposition {
        &self.shift
    }

    pub fn transform_decomposition(&self) -> &SpectralDecomposition {
        &self.transform
    }

    pub fn len(&self) -> usize {
        self.shift.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shift.is_empty()
    }

    pub fn basis(&self, a: f64) -> Result<FractionalBasis> {
        let transform = fractional_transform(&self.transform, a)?;
        let frac_eigenvalues = self
            .shift
            .eigenvalues()
            .iter()
            .map(|&l| principal_power(l, a))
            .collect();
        Ok(FractionalBasis {
            order: a,
            transform,
            frac_eigenvalues,
        })
    }
}

/// The graph fractional shift operator `L^(a)` of a decomposed Laplacian.
pub fn gfso(decomp: &SpectralDecomposition, a: f64, convention: ShiftConvention) -> Result<CMat> {
    check_order(a)?;
    if a == 0.0 {
        return Ok(CMat::identity(decomp.len(), decomp.len()));
    }
    Ok(FractionalDomain::new(decomp)?.basis(a)?.shift(convention))
}

/// Joint fractional transform `V^(a,b) = U_T^(a) ⊗ U_G^(b)`.
#[derive(Debug, Clone)]
pub struct JointFractionalBasis {
    pub orders: (f64, f64),
    pub joint_transform: CMat,
    /// `diag(Λ_T^a ⊗ Λ_G^b)`, index `t*N + n`.
    pub joint_frac_eigenvalues: Vec<Complex64>,
}

pub fn jfrft(basis_t: &FractionalBasis, basis_g: &FractionalBasis) -> JointFractionalBasis {
    let joint_frac_eigenvalues = basis_t
        .frac_eigenvalues
        .iter()
        .flat_map(|&lt| basis_g.frac_eigenvalues.iter().map(move |&lg| lt * lg))
        .collect();
    JointFractionalBasis {
        orders: (basis_t.order, basis_g.order),
        joint_transform: kron(&basis_t.transform, &basis_g.transform),
        joint_frac_eigenvalues,
    }
}

/// Divides a fractional shift and its eigenvalues by the largest eigenvalue
/// modulus, so every spectral magnitude is at most one. An all-zero spectrum
/// is returned unchanged.
pub fn normalize_energy_preserving(l_frac: &CMat, frac_eigs: &[Complex64]) -> (CMat, Vec<Complex64>) {
    let max = frac_eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return (l_frac.clone(), frac_eigs.to_vec());
    }
    let s = 1.0 / max;
    (l_frac * Complex64::new(s, 0.0), frac_eigs.iter().map(|z| z * s).collect())
}
