//! Property-based invariants.

mod common;

use common::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

use tvfrac_core::baseline::*;
use tvfrac_core::eigen::{eigendecompose, eigendecompose_symmetric};
use tvfrac_core::filter::*;
use tvfrac_core::fractional::*;
use tvfrac_core::graph::{build_knn_graph, cycle_laplacian, CycleShift, Graph, KnnConfig};
use tvfrac_core::linalg::{kron, to_complex, unitarity_error, unvec, vec_of, CMat};
use tvfrac_core::pipeline::*;
use tvfrac_core::transform::{dft_matrix, jft, TimeVertexSignal};

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 24,
        ..ProptestConfig::default()
    }
}

fn permute_graph(g: &Graph, perm: &[usize]) -> Graph {
    let n = g.n_vertices();
    let a = g.adjacency();
    Graph::from_adjacency(DMatrix::from_fn(n, n, |i, j| a[(perm[i], perm[j])])).unwrap()
}

fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut r = rng(seed);
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        p.swap(i, r.random_range(0..=i));
    }
    p
}

fn rmat(n: usize, t: usize, seed: u64) -> DMatrix<f64> {
    let mut r = rng(seed);
    DMatrix::from_fn(n, t, |_, _| r.random_range(-1.0..1.0))
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn laplacian_psd_and_reconstructs(n in 3usize..=64, seed in any::<u64>()) {
        let g = random_knn_graph(n, 5, seed);
        let l = g.laplacian();
        let d = eigendecompose_symmetric(&l).unwrap();
        prop_assert!(d.eigenvalues().iter().all(|z| z.re >= -1e-10));
        prop_assert!(max_diff(&d.reconstruct(), &to_complex(&l)) < 1e-9);
        prop_assert!(d.orthonormality_error() < 1e-10);
        let ones = DMatrix::from_element(n, 1, 1.0);
        prop_assert!((l * ones).amax() < 1e-12);
    }

    #[test]
    fn cycle_laplacian_commutes_with_shift(t in 1usize..=32) {
        let l = cycle_laplacian(t).unwrap();
        let shift = CycleShift::new(t).unwrap();
        let a = shift.adjacency();
        prop_assert_eq!(&l * a, a * &l);
    }

    #[test]
    fn knn_permutation_equivariant(n in 4usize..=30, seed in any::<u64>()) {
        let mut r = rng(seed);
        let coords: Vec<(f64, f64)> = (0..n).map(|_| (r.random_range(0.0..30.0), r.random_range(110.0..170.0))).collect();
        let cfg = KnnConfig { k: 3, ..Default::default() };
        let g = build_knn_graph(&coords, &cfg).unwrap();
        let perm = permutation(n, seed ^ 1);
        let pc: Vec<(f64, f64)> = perm.iter().map(|&i| coords[i]).collect();
        let gp = build_knn_graph(&pc, &cfg).unwrap();
        let expect = permute_graph(&g, &perm);
        prop_assert!((gp.adjacency() - expect.adjacency()).amax() < 1e-12);
        for v in 0..n {
            prop_assert!(g.degree_count(v) >= 3);
        }
    }

    #[test]
    fn jft_parseval_kronecker_and_linearity(n in 2usize..=32, t in 1usize..=16, seed in any::<u64>()) {
        let g = random_knn_graph(n, 5, seed);
        let ug = eigendecompose_symmetric(&g.laplacian()).unwrap().basis().clone();
        let ut = dft_matrix(t);
        let x = rmat(n, t, seed);
        let y = rmat(n, t, seed ^ 7);
        let sx = jft(&TimeVertexSignal::new(x.clone()).unwrap(), &ug, &ut).unwrap();
        let nx = x.norm();
        prop_assert!((sx.values.norm() - nx).abs() <= 1e-9 * nx.max(1.0));
        if n * t <= 96 {
            let dense = kron(&ut, &ug).adjoint() * vec_of(&to_complex(&x));
            prop_assert!(max_vdiff(&sx.values, &dense) < 1e-10);
        }
        let (al, be) = (0.7, -1.3);
        let sy = jft(&TimeVertexSignal::new(y.clone()).unwrap(), &ug, &ut).unwrap();
        let sc = jft(&TimeVertexSignal::new(&x * al + &y * be).unwrap(), &ug, &ut).unwrap();
        prop_assert!(max_vdiff(&sc.values, &(sx.values * c(al) + sy.values * c(be))) < 1e-10);
    }

    #[test]
    fn fractional_semigroup_and_inverse(n in 2usize..=16, a in 0.0f64..=1.0, frac in 0.0f64..=1.0, seed in any::<u64>()) {
        let b = (1.0 - a) * frac;
        let g = random_knn_graph(n, 5, seed);
        let dom = FractionalDomain::new(&eigendecompose_symmetric(&g.laplacian()).unwrap()).unwrap();
        let fa = dom.basis(a).unwrap().transform;
        let fb = dom.basis(b).unwrap().transform;
        let fab = dom.basis(a + b).unwrap().transform;
        prop_assert!(max_diff(&(&fa * &fb), &fab) < 1e-8);
        prop_assert!(max_diff(&(fa.adjoint() * &fa), &CMat::identity(n, n)) < 1e-8);
    }

    #[test]
    fn gfso_endpoints(n in 2usize..=32, t in 1usize..=16, seed in any::<u64>()) {
        let g = random_knn_graph(n, 5, seed);
        let lg = g.laplacian();
        let dg = eigendecompose_symmetric(&lg).unwrap();
        prop_assert_eq!(gfso(&dg, 0.0, ShiftConvention::Reducing).unwrap(), CMat::identity(n, n));
        prop_assert!(max_diff(&gfso(&dg, 1.0, ShiftConvention::Reducing).unwrap(), &to_complex(&lg)) < 1e-8);
        let lt = to_complex(&cycle_laplacian(t).unwrap());
        let dt = eigendecompose(&lt, false).unwrap();
        prop_assert!(max_diff(&gfso(&dt, 1.0, ShiftConvention::Reducing).unwrap(), &lt) < 1e-8);
    }

    #[test]
    fn normalization_commutes(n in 2usize..=20, a in 0.0f64..=1.0, seed in any::<u64>()) {
        let g = random_knn_graph(n, 5, seed);
        let dom = FractionalDomain::new(&eigendecompose_symmetric(&g.laplacian()).unwrap()).unwrap();
        let b = dom.basis(a).unwrap();
        let l = b.shift(ShiftConvention::Reducing);
        let (ln, en) = normalize_energy_preserving(&l, &b.frac_eigenvalues);
        prop_assert!(max_diff(&(&ln * &l), &(&l * &ln)) < 1e-8);
        prop_assert!(en.iter().all(|z| z.norm() <= 1.0 + 1e-12));
    }

    #[test]
    fn jfrft_parseval(n in 2usize..=10, t in 1usize..=8, a in 0.0f64..=1.0, b in 0.0f64..=1.0, seed in any::<u64>()) {
        let g = random_knn_graph(n, 5, seed);
        let dg = FractionalDomain::new(&eigendecompose_symmetric(&g.laplacian()).unwrap()).unwrap();
        let dt = FractionalDomain::new(&eigendecompose(&to_complex(&cycle_laplacian(t).unwrap()), false).unwrap()).unwrap();
        let j = jfrft(&dt.basis(a).unwrap(), &dg.basis(b).unwrap());
        let mut r = rng(seed);
        let x = random_cvec(n * t, &mut r);
        prop_assert!(((&j.joint_transform * &x).norm() - x.norm()).abs() < 1e-9 * x.norm().max(1.0));
        prop_assert!(unitarity_error(&j.joint_transform) < 1e-8);
    }

    #[test]
    fn autocorrelation_hermitian(n in 2usize..=8, t in 1usize..=6, p in 1usize..=3, q in 1usize..=3, seed in any::<u64>()) {
        let mut r = rng(seed);
        let et: Vec<Complex64> = (0..t).map(|_| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))).collect();
        let eg: Vec<Complex64> = (0..n).map(|_| c(r.random_range(0.0..1.0))).collect();
        let yf = random_cvec(n * t, &mut r);
        let xf = random_cvec(n * t, &mut r);
        let sys = assemble_wiener_system_kron(&yf, &xf, &build_vandermonde(&et, p).unwrap(), &build_vandermonde(&eg, q).unwrap(), CrossCorrelationForm::Conjugate).unwrap();
        prop_assert!(max_diff(&sys.autocorrelation, &sys.autocorrelation.adjoint()) < 1e-9);
    }

    #[test]
    fn solution_is_stationary(n in 3usize..=6, t in 2usize..=4, a in 0.0f64..=1.0, b in 0.0f64..=1.0, seed in any::<u64>()) {
        let g = random_knn_graph(n, 2, seed);
        let s = frac_setup(&g, t, a, b);
        let mut r = rng(seed);
        let y = random_rvec(n * t, &mut r);
        let x = random_rvec(n * t, &mut r);
        let (p, q) = (2, 2);
        let yf = vec_of(&(&s.a_g * unvec(&y, n, t) * s.a_t.transpose()));
        let xf = vec_of(&(&s.a_g * unvec(&x, n, t) * s.a_t.transpose()));
        let sys = assemble_wiener_system_kron(&yf, &xf, &build_vandermonde(&s.eig_t, p).unwrap(), &build_vandermonde(&s.eig_g, q).unwrap(), CrossCorrelationForm::Conjugate).unwrap();
        let coef = solve_coefficients(&sys, 0.0).unwrap();
        let bm = dense_b(&y, &s.l_t, &s.l_g, p, q);
        let base = (&bm * coef.vector() - &x).norm();
        for _ in 0..20 {
            let dir = random_cvec(p * q, &mut r).normalize() * c(1e-3);
            for sign in [1.0, -1.0] {
                let moved = (&bm * (coef.vector() + &dir * c(sign)) - &x).norm();
                prop_assert!(moved >= base - 1e-9);
            }
        }
    }

    #[test]
    fn filter_diagonal_in_fractional_domain(n in 2usize..=6, t in 1usize..=4, a in 0.0f64..=1.0, b in 0.0f64..=1.0, seed in any::<u64>()) {
        let g = random_knn_graph(n, 2, seed);
        let s = frac_setup(&g, t, a, b);
        let mut r = rng(seed);
        let coef = FilterCoefficients::from_vector(2, 2, random_cvec(4, &mut r)).unwrap();
        let y = random_cvec(n * t, &mut r);
        let hy = apply_joint_filter(&coef, &s.l_t, &s.l_g, &y).unwrap();
        let v = kron(&s.a_t, &s.a_g);
        let resp = frequency_response(&coef, &s.eig_t, &s.eig_g).unwrap();
        prop_assert!(max_vdiff(&(&v * hy), &resp.component_mul(&(&v * y))) < 1e-8);
    }

    #[test]
    fn tikhonov_contracts_and_is_linear(n in 2usize..=10, t in 1usize..=8, gamma in 0.0f64..50.0, seed in any::<u64>()) {
        let g = random_knn_graph(n, 3, seed);
        let spectra = JointLaplacianSpectra {
            temporal: eigendecompose(&to_complex(&cycle_laplacian(t).unwrap()), false).unwrap(),
            graph: eigendecompose_symmetric(&g.laplacian()).unwrap(),
        };
        let cfg = TikhonovConfig { gamma };
        let y = rmat(n, t, seed);
        let z = rmat(n, t, seed ^ 3);
        let fy = tikhonov_denoise(&y, &spectra, &cfg).unwrap().values;
        prop_assert!(fy.norm() <= y.norm() + 1e-9);
        let fz = tikhonov_denoise(&z, &spectra, &cfg).unwrap().values;
        let fc = tikhonov_denoise(&(&y * 2.0 - &z * 0.5), &spectra, &cfg).unwrap().values;
        prop_assert!((fc - (fy * 2.0 - fz * 0.5)).amax() < 1e-10);
    }

    #[test]
    fn median_bounded_by_input_range(n in 3usize..=20, t in 1usize..=10, iters in 1usize..=4, temporal in any::<bool>(), seed in any::<u64>()) {
        let g = random_knn_graph(n, 3, seed);
        let y = rmat(n, t, seed) * 10.0;
        let cfg = MedianConfig { iterations: iters, include_temporal_neighbors: temporal };
        let out = recursive_median_filter(&y, &g, &cfg).unwrap();
        prop_assert!(out.min() >= y.min() && out.max() <= y.max());
    }

    #[test]
    fn baselines_permutation_equivariant(n in 3usize..=12, t in 1usize..=6, seed in any::<u64>()) {
        let g = random_knn_graph(n, 3, seed);
        let perm = permutation(n, seed ^ 5);
        let gp = permute_graph(&g, &perm);
        let y = rmat(n, t, seed);
        let yp = DMatrix::from_fn(n, t, |i, j| y[(perm[i], j)]);
        let unperm = |m: &DMatrix<f64>| DMatrix::from_fn(n, t, |i, j| m[(perm[i], j)]);

        let med = recursive_median_filter(&y, &g, &MedianConfig::default()).unwrap();
        let medp = recursive_median_filter(&yp, &gp, &MedianConfig::default()).unwrap();
        prop_assert_eq!(medp, unperm(&med));

        let spectra = |g: &Graph| JointLaplacianSpectra {
            temporal: eigendecompose(&to_complex(&cycle_laplacian(t).unwrap()), false).unwrap(),
            graph: eigendecompose_symmetric(&g.laplacian()).unwrap(),
        };
        let cfg = TikhonovConfig { gamma: 0.8 };
        let tk = tikhonov_denoise(&y, &spectra(&g), &cfg).unwrap().values;
        let tkp = tikhonov_denoise(&yp, &spectra(&gp), &cfg).unwrap().values;
        prop_assert!((tkp - unperm(&tk)).amax() < 1e-10);
    }

    #[test]
    fn noise_hits_target_snr(n in 1usize..=20, t in 1usize..=20, target in -10.0f64..20.0, seed in any::<u64>()) {
        let x = rmat(n, t, seed).add_scalar(0.1);
        for conv in [SnrConvention::Paper, SnrConvention::Conventional] {
            let y = add_noise(&x, target, conv, seed, 3).unwrap();
            prop_assert!((snr_db(&x, &y, conv).unwrap() - target).abs() < 1e-9);
            prop_assert_eq!(&y, &add_noise(&x, target, conv, seed, 3).unwrap());
        }
    }

    #[test]
    fn segment_concatenate_round_trip(n in 1usize..=6, s in 1usize..=8, m in 1usize..=8, seed in any::<u64>()) {
        let x = rmat(n, s * m, seed);
        let parts = segment(&x, m).unwrap();
        prop_assert_eq!(parts.len(), s);
        prop_assert_eq!(concatenate(&parts).unwrap(), x);
    }

    #[test]
    fn csv_round_trip_bit_exact(vals in proptest::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 6)) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        let x = DMatrix::from_row_slice(2, 3, &vals);
        tvfrac_core::io::write_signal(&p, &x).unwrap();
        let back = tvfrac_core::io::load_signal(&p).unwrap();
        for (a, b) in back.values().iter().zip(x.iter()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}

#[test]
fn ordinary_domain_matches_plain_transform_solution() {
    // (a, b) = (1, 1) is the ordinary time-vertex filter: diagonal in U_T ⊗ U_G.
    let g = random_knn_graph(5, 2, 12);
    let s = frac_setup(&g, 3, 1.0, 1.0);
    let ug = eigendecompose_symmetric(&g.laplacian()).unwrap().basis().clone();
    let v = kron(&dft_matrix(3), &ug).adjoint();
    assert!(max_diff(&kron(&s.a_t, &s.a_g), &v) < 1e-9);
}
