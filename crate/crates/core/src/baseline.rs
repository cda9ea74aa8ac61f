//! First-stage denoisers: Tikhonov smoothing on the time-vertex product
//! graph, and a recursive median filter over graph (and optionally
//! temporal) neighbourhoods.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigen::SpectralDecomposition;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{real_part, to_complex};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TikhonovConfig {
    pub gamma: f64,
}

impl Default for TikhonovConfig {
    fn default() -> Self {
        Self { gamma: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MedianConfig {
    pub iterations: usize,
    pub include_temporal_neighbors: bool,
}

impl Default for MedianConfig {
    fn default() -> Self {
        Self {
            iterations: 2,
            include_temporal_neighbors: true,
        }
    }
}

/// Decompositions of the cycle Laplacian `L_T` and the graph Laplacian `L_G`.
#[derive(Debug, Clone)]
pub struct JointLaplacianSpectra {
    pub temporal: SpectralDecomposition,
    pub graph: SpectralDecomposition,
}

impl JointLaplacianSpectra {
    /// Eigenvalues of the Cartesian-product Laplacian `L_T ⊗ I + I ⊗ L_G`,
    /// index `t*N + n`.
    pub fn joint_eigenvalues(&self) -> Vec<Complex64> {
        self.temporal
            .eigenvalues()
            .iter()
            .flat_map(|&lt| self.graph.eigenvalues().iter().map(move |&lg| lt + lg))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct TikhonovOutput {
    pub values: DMatrix<f64>,
    /// Largest imaginary part discarded on synthesis.
    pub imaginary_residue: f64,
}

/// Solves `(I + γ L_J) z = y` in the joint spectral domain:
/// `ẑ = ŷ / (1 + γ λ_J)`.
pub fn tikhonov_denoise(
    y: &DMatrix<f64>,
    spectra: &JointLaplacianSpectra,
    cfg: &TikhonovConfig,
) -> Result<TikhonovOutput> {
    if !(cfg.gamma >= 0.0) || !cfg.gamma.is_finite() {
        return Err(Error::param(format!("gamma must be nonnegative, got {}", cfg.gamma)));
    }
    let (n, t) = y.shape();
    if spectra.graph.len() != n || spectra.temporal.len() != t {
        return Err(Error::param(format!(
            "signal is {n}x{t} but spectra are {}x{}",
            spectra.graph.len(),
            spectra.temporal.len()
        )));
    }
    let u_g = spectra.graph.basis();
    let u_t = spectra.temporal.basis();
    let mut s = u_g.adjoint() * to_complex(y) * u_t.conjugate();
    for (ti, &lt) in spectra.temporal.eigenvalues().iter().enumerate() {
        for (ni, &lg) in spectra.graph.eigenvalues().iter().enumerate() {
            s[(ni, ti)] /= Complex64::new(1.0, 0.0) + (lt + lg) * cfg.gamma;
        }
    }
    let z = u_g * s * u_t.transpose();
    let imaginary_residue = z.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    Ok(TikhonovOutput {
        values: real_part(&z),
        imaginary_residue,
    })
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    }
}

/// Each pass replaces `Y(v, t)` by the median of `Y(v, t)`, its graph
/// neighbours at time `t`, and optionally `Y(v, t±1)` (clamped at the
/// ends). Each pass consumes the previous pass's output.
pub fn recursive_median_filter(y: &DMatrix<f64>, g: &Graph, cfg: &MedianConfig) -> Result<DMatrix<f64>> {
    if cfg.iterations == 0 {
        return Err(Error::param("median filter needs at least one iteration"));
    }
    let (n, t) = y.shape();
    if g.n_vertices() != n {
        return Err(Error::param(format!(
            "signal has {n} vertices, graph has {}",
            g.n_vertices()
        )));
    }
    let neighbors: Vec<Vec<usize>> = (0..n).map(|v| g.neighbors(v).collect()).collect();
    let mut cur = y.clone();
    let mut buf = Vec::new();
    for _ in 0..cfg.iterations {
        let prev = cur.clone();
        for ti in 0..t {
            for v in 0..n {
                buf.clear();
                buf.push(prev[(v, ti)]);
                buf.extend(neighbors[v].iter().map(|&u| prev[(u, ti)]));
                if cfg.include_temporal_neighbors && t > 1 {
                    buf.push(prev[(v, ti.saturating_sub(1))]);
                    buf.push(prev[(v, (ti + 1).min(t - 1))]);
                }
                cur[(v, ti)] = median(&mut buf);
            }
        }
    }
    Ok(cur)
}
