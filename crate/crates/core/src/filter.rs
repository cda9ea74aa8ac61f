//! Polynomial joint filters and their optimal (Wiener-Hopf) coefficients.
//!
//! A joint filter of degrees `(P, Q)` is `H = Σ_{p<P, q<Q} c_pq L_T^p ⊗ L_G^q`.
//! Coefficients are ordered `p`-major: index `p*Q + q`, which is the
//! column-stacking of the `Q x P` grid `C[q, p] = c_pq`.
//!
//! In the transformed domain `H` is diagonal with response `Ψ c`, where
//! `Ψ = Ψ_T ⊗ Ψ_G` stacks Vandermonde matrices of the (fractional) shift
//! eigenvalues. Minimizing `||H y - x||²` then gives the normal equations
//! `R c = r` with `R = Ψᴴ diag(|y_F|²) Ψ` and `r = Ψᴴ diag(conj y_F) x_F`.

use nalgebra::Cholesky;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{is_finite, kron, unvec, vec_of, CMat, CVec, ZERO};

/// Solutions with an estimated condition number above this use the
/// minimum-norm least-squares path and are flagged.
pub const ILL_CONDITION_LIMIT: f64 = 1e12;

/// Relative scale of the default ridge, `RIDGE_SCALE * trace(R) / PQ`.
pub const RIDGE_SCALE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct FilterCoefficients {
    p: usize,
    q: usize,
    vector: CVec,
    ill_conditioned: bool,
    condition_estimate: f64,
}

impl FilterCoefficients {
    pub fn from_vector(p: usize, q: usize, vector: CVec) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::param("filter degrees P and Q must be at least 1"));
        }
        if vector.len() != p * q {
            return Err(Error::param(format!(
                "{} coefficients for P={p}, Q={q}",
                vector.len()
            )));
        }
        Ok(Self {
            p,
            q,
            vector,
            ill_conditioned: false,
            condition_estimate: f64::NAN,
        })
    }

    /// `c_00 = 1`, everything else zero.
    pub fn identity(p: usize, q: usize) -> Result<Self> {
        let mut v = CVec::zeros(p * q);
        if !v.is_empty() {
            v[0] = Complex64::new(1.0, 0.0);
        }
        Self::from_vector(p, q, v)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn get(&self, p: usize, q: usize) -> Complex64 {
        self.vector[p * self.q + q]
    }

    pub fn vector(&self) -> &CVec {
        &self.vector
    }

    /// `Q x P` grid with `grid[(q, p)] = c_pq`.
    pub fn grid(&self) -> CMat {
        unvec(&self.vector, self.q, self.p)
    }

    pub fn ill_conditioned(&self) -> bool {
        self.ill_conditioned
    }

    /// Condition estimate of the system that produced these coefficients
    /// (`NaN` if they were not solved for).
    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }
}

/// `D x K` matrix whose column `k` holds the `k`-th powers of `eigs`.
pub fn build_vandermonde(eigs: &[Complex64], degree: usize) -> Result<CMat> {
    if degree == 0 {
        return Err(Error::param("Vandermonde degree must be at least 1"));
    }
    let mut v = CMat::zeros(eigs.len(), degree);
    for (i, &l) in eigs.iter().enumerate() {
        let mut pow = Complex64::new(1.0, 0.0);
        for k in 0..degree {
            v[(i, k)] = pow;
            pow *= l;
        }
    }
    Ok(v)
}

fn check_square(name: &str, m: &CMat, size: usize) -> Result<()> {
    if m.shape() != (size, size) {
        return Err(Error::param(format!(
            "{name} is {:?}, expected {size}x{size}",
            m.shape()
        )));
    }
    Ok(())
}

fn dims(l_t: &CMat, l_g: &CMat, len: usize) -> Result<(usize, usize)> {
    let (t, n) = (l_t.nrows(), l_g.nrows());
    check_square("temporal shift", l_t, t)?;
    check_square("graph shift", l_g, n)?;
    if n * t != len {
        return Err(Error::param(format!(
            "signal length {len} does not match N={n}, T={t}"
        )));
    }
    Ok((n, t))
}

/// Regression matrix `B` whose column `p*Q + q` is `(L_T^p ⊗ L_G^q) y`.
pub fn build_regression_matrix(
    y: &CVec,
    l_t: &CMat,
    l_g: &CMat,
    p: usize,
    q: usize,
) -> Result<CMat> {
    if p == 0 || q == 0 {
        return Err(Error::param("filter degrees P and Q must be at least 1"));
    }
    let (n, t) = dims(l_t, l_g, y.len())?;
    let mut b = CMat::zeros(n * t, p * q);
    let l_t_tr = l_t.transpose();
    let mut y_p = unvec(y, n, t);
    for pi in 0..p {
        let mut cur = y_p.clone();
        for qi in 0..q {
            b.set_column(pi * q + qi, &vec_of(&cur));
            if qi + 1 < q {
                cur = l_g * cur;
            }
        }
        if pi + 1 < p {
            y_p *= &l_t_tr;
        }
    }
    Ok(b)
}

/// Which weighting the cross-correlation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CrossCorrelationForm {
    /// `r = Ψᴴ diag(conj y_F) x_F`, equal to `Bᴴ x`.
    #[default]
    Conjugate,
    /// `r = Ψᴴ diag(|y_F|²) x_F`.
    PowerWeighted,
}

/// Assembled normal equations `R c = r`.
#[derive(Debug, Clone)]
pub struct WienerSystem {
    pub autocorrelation: CMat,
    pub cross_correlation: CVec,
    pub psi: CMat,
    pub noisy_spectrum: CVec,
    pub reference_spectrum: CVec,
    pub degrees: (usize, usize),
}

fn cross_weights(y_f: &CVec, x_f: &CVec, form: CrossCorrelationForm) -> CVec {
    CVec::from_iterator(
        y_f.len(),
        y_f.iter().zip(x_f.iter()).map(|(y, x)| match form {
            CrossCorrelationForm::Conjugate => y.conj() * x,
            CrossCorrelationForm::PowerWeighted => x * y.norm_sqr(),
        }),
    )
}

fn hermitize(m: &mut CMat) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)].im = 0.0;
        for j in (i + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// Dense assembly from an explicit `Ψ`. `degrees` is `(P, Q)`.
pub fn assemble_wiener_system(
    y_f: &CVec,
    x_f: &CVec,
    psi: &CMat,
    degrees: (usize, usize),
    form: CrossCorrelationForm,
) -> Result<WienerSystem> {
    if y_f.len() != x_f.len() || psi.nrows() != y_f.len() {
        return Err(Error::param(format!(
            "spectra of length {} and {} with Ψ of {:?}",
            y_f.len(),
            x_f.len(),
            psi.shape()
        )));
    }
    if psi.ncols() != degrees.0 * degrees.1 {
        return Err(Error::param("Ψ column count must equal PQ"));
    }
    let mut weighted = psi.clone();
    for (i, y) in y_f.iter().enumerate() {
        let w = y.norm_sqr();
        for z in weighted.row_mut(i).iter_mut() {
            *z *= w;
        }
    }
    let mut r_mat = psi.adjoint() * weighted;
    hermitize(&mut r_mat);
    let cross = psi.adjoint() * cross_weights(y_f, x_f, form);
    Ok(WienerSystem {
        autocorrelation: r_mat,
        cross_correlation: cross,
        psi: psi.clone(),
        noisy_spectrum: y_f.clone(),
        reference_spectrum: x_f.clone(),
        degrees,
    })
}

/// Assembly exploiting `Ψ = Ψ_T ⊗ Ψ_G`; never forms an `NT x PQ` product.
pub fn assemble_wiener_system_kron(
    y_f: &CVec,
    x_f: &CVec,
    psi_t: &CMat,
    psi_g: &CMat,
    form: CrossCorrelationForm,
) -> Result<WienerSystem> {
    let (t, p) = psi_t.shape();
    let (n, q) = psi_g.shape();
    if y_f.len() != n * t || x_f.len() != n * t {
        return Err(Error::param(format!(
            "spectra of length {} and {} for N={n}, T={t}",
            y_f.len(),
            x_f.len()
        )));
    }
    // Per time-frequency Gram blocks G_t = Ψ_Gᴴ diag(|y_F(t, ·)|²) Ψ_G.
    let psi_g_h = psi_g.adjoint();
    let blocks: Vec<CMat> = (0..t)
        .map(|ti| {
            let mut w = psi_g.clone();
            for ni in 0..n {
                let wt = y_f[ti * n + ni].norm_sqr();
                for z in w.row_mut(ni).iter_mut() {
                    *z *= wt;
                }
            }
            &psi_g_h * w
        })
        .collect();
    let mut r_mat = CMat::zeros(p * q, p * q);
    for pi in 0..p {
        for pj in 0..p {
            for (ti, g) in blocks.iter().enumerate() {
                let s = psi_t[(ti, pi)].conj() * psi_t[(ti, pj)];
                if s == ZERO {
                    continue;
                }
                for qi in 0..q {
                    for qj in 0..q {
                        r_mat[(pi * q + qi, pj * q + qj)] += s * g[(qi, qj)];
                    }
                }
            }
        }
    }
    hermitize(&mut r_mat);
    let v = unvec(&cross_weights(y_f, x_f, form), n, t);
    let cross = vec_of(&(psi_g_h * v * psi_t.conjugate()));
    Ok(WienerSystem {
        autocorrelation: r_mat,
        cross_correlation: cross,
        psi: kron(psi_t, psi_g),
        noisy_spectrum: y_f.clone(),
        reference_spectrum: x_f.clone(),
        degrees: (p, q),
    })
}

impl WienerSystem {
    pub fn size(&self) -> usize {
        self.cross_correlation.len()
    }

    /// Mean of per-realization systems, for Monte-Carlo estimates of the
    /// expectations. Spectra and `Ψ` are taken from the first system.
    pub fn average(systems: &[WienerSystem]) -> Result<WienerSystem> {
        let first = systems
            .first()
            .ok_or_else(|| Error::param("cannot average zero systems"))?;
        if systems.iter().any(|s| s.degrees != first.degrees) {
            return Err(Error::param("systems have different filter degrees"));
        }
        let k = Complex64::new(1.0 / systems.len() as f64, 0.0);
        let mut out = first.clone();
        out.autocorrelation = systems.iter().skip(1).fold(first.autocorrelation.clone(), |acc, s| {
            acc + &s.autocorrelation
        }) * k;
        out.cross_correlation = systems
            .iter()
            .skip(1)
            .fold(first.cross_correlation.clone(), |acc, s| acc + &s.cross_correlation)
            * k;
        Ok(out)
    }
}

/// `RIDGE_SCALE · trace(R) / PQ`.
pub fn default_ridge(sys: &WienerSystem) -> f64 {
    let tr: f64 = sys.autocorrelation.diagonal().iter().map(|z| z.re).sum();
    RIDGE_SCALE * tr / sys.size().max(1) as f64
}

/// Solves `(R + ridge·I) c = r`.
///
/// A Cholesky factorization is tried first; its pivot spread gives the
/// condition estimate. If that fails or the estimate exceeds
/// [`ILL_CONDITION_LIMIT`], a Hermitian eigendecomposition yields the
/// minimum-norm least-squares solution with eigenvalues below
/// `λ_max / ILL_CONDITION_LIMIT` discarded, and the result is flagged.
pub fn solve_coefficients(sys: &WienerSystem, ridge: f64) -> Result<FilterCoefficients> {
    if !ridge.is_finite() || ridge < 0.0 {
        return Err(Error::param(format!("ridge must be a nonnegative real, got {ridge}")));
    }
    if !is_finite(&sys.autocorrelation)
        || sys.cross_correlation.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(Error::input("Wiener system contains NaN or infinite entries"));
    }
    let (p, q) = sys.degrees;
    let size = sys.size();
    let mut a = sys.autocorrelation.clone();
    for i in 0..size {
        a[(i, i)] += ridge;
    }

    if let Some(chol) = Cholesky::new(a.clone()) {
        let diag = chol.l_dirty().diagonal();
        let (lo, hi) = diag
            .iter()
            .map(|z| z.re)
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), d| (lo.min(d), hi.max(d)));
        let estimate = (hi / lo).powi(2);
        if lo > 0.0 && estimate <= ILL_CONDITION_LIMIT {
            let c = chol.solve(&sys.cross_correlation);
            let mut out = FilterCoefficients::from_vector(p, q, c)?;
            out.condition_estimate = estimate;
            return Ok(out);
        }
    }

    let eig = a.symmetric_eigen();
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let mut c = CVec::zeros(size);
    if top > 0.0 {
        let cutoff = top / ILL_CONDITION_LIMIT;
        for (j, &mu) in eig.eigenvalues.iter().enumerate() {
            if mu > cutoff {
                let v = eig.eigenvectors.column(j);
                let coeff = v.dotc(&sys.cross_correlation) / mu;
                c.axpy(coeff, &v, Complex64::new(1.0, 0.0));
            }
        }
    }
    let min_abs = eig.eigenvalues.iter().fold(f64::INFINITY, |m, &v| m.min(v.abs()));
    let mut out = FilterCoefficients::from_vector(p, q, c)?;
    out.ill_conditioned = true;
    out.condition_estimate = if min_abs > 0.0 { top / min_abs } else { f64::INFINITY };
    Ok(out)
}

/// `H y` evaluated in matrix form as a Horner scheme in both shifts.
pub fn apply_joint_filter(c: &FilterCoefficients, l_t: &CMat, l_g: &CMat, y: &CVec) -> Result<CVec> {
    let (n, t) = dims(l_t, l_g, y.len())?;
    let y_mat = unvec(y, n, t);
    let graph_poly = |pi: usize| -> CMat {
        let mut acc = &y_mat * c.get(pi, c.q - 1);
        for qi in (0..c.q - 1).rev() {
            acc = l_g * acc + &y_mat * c.get(pi, qi);
        }
        acc
    };
    let l_t_tr = l_t.transpose();
    let mut acc = graph_poly(c.p - 1);
    for pi in (0..c.p - 1).rev() {
        acc = acc * &l_t_tr + graph_poly(pi);
    }
    Ok(vec_of(&acc))
}

/// Joint response `Σ c_pq λ_T^p λ_G^q` at every eigenvalue pair, index
/// `t*N + n`; equal to `Ψ c`.
pub fn frequency_response(
    c: &FilterCoefficients,
    eigs_t: &[Complex64],
    eigs_g: &[Complex64],
) -> Result<CVec> {
    let psi_t = build_vandermonde(eigs_t, c.p)?;
    let psi_g = build_vandermonde(eigs_g, c.q)?;
    Ok(vec_of(&(psi_g * c.grid() * psi_t.transpose())))
}
