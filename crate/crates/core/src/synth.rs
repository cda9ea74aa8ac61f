//! Desk-scale synthetic data: sensor coordinates in a lat/lon box and
//! signals that are smooth on the time-vertex product graph.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::eigen::{eigendecompose, eigendecompose_symmetric};
use crate::error::{Error, Result};
use crate::graph::{cycle_laplacian, Graph};
use crate::linalg::to_complex;

pub const LAT_RANGE: (f64, f64) = (0.0, 30.0);
pub const LON_RANGE: (f64, f64) = (110.0, 170.0);

const COORD_STREAM: u64 = 0;
const SIGNAL_STREAM: u64 = 1;

/// `n` uniform points `(lat, lon)` in degrees.
pub fn random_coordinates(n: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(COORD_STREAM);
    (0..n)
        .map(|_| {
            (
                rng.random_range(LAT_RANGE.0..LAT_RANGE.1),
                rng.random_range(LON_RANGE.0..LON_RANGE.1),
            )
        })
        .collect()
}

/// Joint eigenpairs `(k_T, k_G)` ordered by `|λ_T|/max|λ_T| + λ_G/max λ_G`,
/// ties by index.
pub fn smoothest_pairs(eigs_t: &[Complex64], eigs_g: &[Complex64], count: usize) -> Vec<(usize, usize)> {
    let mt = eigs_t.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mg = eigs_g.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    let scale = |v: f64, m: f64| if m > 0.0 { v / m } else { 0.0 };
    let mut pairs: Vec<(f64, usize, usize)> = eigs_t
        .iter()
        .enumerate()
        .flat_map(|(kt, lt)| {
            eigs_g
                .iter()
                .enumerate()
                .map(move |(kg, lg)| (scale(lt.norm(), mt) + scale(lg.re.max(0.0), mg), kt, kg))
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    pairs.into_iter().take(count).map(|(_, kt, kg)| (kt, kg)).collect()
}

/// Real part of a random complex combination of the `smoothness` smoothest
/// joint eigenvectors of `g` and the `t`-cycle.
pub fn smooth_signal(g: &Graph, t: usize, smoothness: usize, seed: u64) -> Result<DMatrix<f64>> {
    let n = g.n_vertices();
    if n < 2 || t < 2 {
        return Err(Error::param(format!("need n, t >= 2, got n={n}, t={t}")));
    }
    if smoothness == 0 || smoothness > n * t {
        return Err(Error::param(format!("smoothness must lie in 1..={}", n * t)));
    }
    let dg = eigendecompose_symmetric(&g.laplacian())?;
    let dt = eigendecompose(&to_complex(&cycle_laplacian(t)?), false)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(SIGNAL_STREAM);
    let mut x = DMatrix::<f64>::zeros(n, t);
    for (kt, kg) in smoothest_pairs(dt.eigenvalues(), dg.eigenvalues(), smoothness) {
        let w = Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
        let ut = dt.basis().column(kt);
        let ug = dg.basis().column(kg);
        for ti in 0..t {
            for v in 0..n {
                x[(v, ti)] += (w * ut[ti] * ug[v]).re;
            }
        }
    }
    Ok(x)
}
