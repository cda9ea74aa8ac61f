#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tvfrac_core::eigen::{eigendecompose, eigendecompose_symmetric};
use tvfrac_core::fractional::{normalize_energy_preserving, FractionalDomain, ShiftConvention};
use tvfrac_core::graph::{build_knn_graph, cycle_laplacian, Graph, KnnConfig};
use tvfrac_core::linalg::{kron, to_complex, CMat, CVec};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn random_cvec(len: usize, r: &mut ChaCha8Rng) -> CVec {
    CVec::from_fn(len, |_, _| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
}

pub fn random_rvec(len: usize, r: &mut ChaCha8Rng) -> CVec {
    CVec::from_fn(len, |_, _| c(r.random_range(-1.0..1.0)))
}

pub fn path_graph(n: usize) -> Graph {
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n.saturating_sub(1) {
        a[(i, i + 1)] = 1.0;
        a[(i + 1, i)] = 1.0;
    }
    Graph::from_adjacency(a).unwrap()
}

/// k-NN graph on random points; `k` is capped at `n - 1`.
pub fn random_knn_graph(n: usize, k: usize, seed: u64) -> Graph {
    let mut r = rng(seed);
    let coords: Vec<(f64, f64)> = (0..n)
        .map(|_| (r.random_range(0.0..30.0), r.random_range(110.0..170.0)))
        .collect();
    let cfg = KnnConfig {
        k: k.min(n - 1),
        ..Default::default()
    };
    build_knn_graph(&coords, &cfg).unwrap()
}

/// Everything needed to build the order-`(a, b)` joint filter, computed the
/// long way: normalized fractional shifts, their analysis matrices and
/// normalized eigenvalues.
pub struct FracSetup {
    pub l_t: CMat,
    pub l_g: CMat,
    pub a_t: CMat,
    pub a_g: CMat,
    pub eig_t: Vec<Complex64>,
    pub eig_g: Vec<Complex64>,
}

pub fn frac_setup(g: &Graph, t: usize, a: f64, b: f64) -> FracSetup {
    let dg = eigendecompose_symmetric(&g.laplacian()).unwrap();
    let dt = eigendecompose(&to_complex(&cycle_laplacian(t).unwrap()), false).unwrap();
    let bt = FractionalDomain::new(&dt).unwrap().basis(a).unwrap();
    let bg = FractionalDomain::new(&dg).unwrap().basis(b).unwrap();
    let conv = ShiftConvention::Reducing;
    let (l_t, eig_t) = normalize_energy_preserving(&bt.shift(conv), &bt.frac_eigenvalues);
    let (l_g, eig_g) = normalize_energy_preserving(&bg.shift(conv), &bg.frac_eigenvalues);
    FracSetup {
        l_t,
        l_g,
        a_t: bt.analysis(conv),
        a_g: bg.analysis(conv),
        eig_t,
        eig_g,
    }
}

pub fn mat_pow(m: &CMat, k: usize) -> CMat {
    (0..k).fold(CMat::identity(m.nrows(), m.ncols()), |acc, _| acc * m)
}

/// Dense `B` with column `p*Q + q` equal to `(L_T^p ⊗ L_G^q) y`.
pub fn dense_b(y: &CVec, l_t: &CMat, l_g: &CMat, p: usize, q: usize) -> CMat {
    let mut b = CMat::zeros(y.len(), p * q);
    for pi in 0..p {
        for qi in 0..q {
            let h = kron(&mat_pow(l_t, pi), &mat_pow(l_g, qi));
            b.set_column(pi * q + qi, &(h * y));
        }
    }
    b
}

/// Minimum-norm least squares through a complete orthogonal decomposition:
/// column-pivoted QR `B Π = Q R`, rank from `|R_ii| > rel · |R_00|`, then a
/// QR of the leading rows' adjoint. Checks its own factorization and the
/// normal equations.
pub fn pinv_solve(b: &CMat, x: &CVec, rel: f64) -> CVec {
    let n = b.ncols();
    let (q, r, perm) = b.clone().col_piv_qr().unpack();
    let mut qr = &q * &r;
    perm.inv_permute_columns(&mut qr);
    assert!(max_diff(&qr, b) < 1e-12 * b.norm().max(1.0), "oracle QR failed");
    let top = r[(0, 0)].norm();
    let rank = (0..r.nrows().min(n)).take_while(|&i| r[(i, i)].norm() > rel * top).count();
    let mut z = CVec::zeros(n);
    if rank > 0 {
        let rhs = (q.adjoint() * x).rows(0, rank).into_owned();
        let (q2, r2) = r.rows(0, rank).adjoint().qr().unpack();
        let w = r2.adjoint().solve_lower_triangular(&rhs).expect("oracle triangular solve");
        z = q2 * w;
    }
    perm.inv_permute_rows(&mut z);
    let normal = b.adjoint() * (b * &z - x);
    assert!(normal.norm() < 1e-9 * (b.norm().powi(2) * z.norm() + b.norm() * x.norm()).max(1e-300), "oracle normal equations");
    z
}

pub fn max_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_vdiff(a: &CVec, b: &CVec) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
