//! Experiment engine: noise injection, temporal segmentation, two-stage
//! denoising and the `(a, b)` grid search.
//!
//! Each segment of `M` time steps is modelled on the product of the graph
//! with an `M`-cycle. The first stage (Tikhonov or median) gives a
//! reference `x̃`; the second stage fits the polynomial joint filter in the
//! fractional domain of orders `(a, b)` so that `H y ≈ x̃`, and applies it
//! spectrally.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::{
    recursive_median_filter, tikhonov_denoise, JointLaplacianSpectra, MedianConfig, TikhonovConfig,
};
use crate::eigen::{eigendecompose, eigendecompose_symmetric};
use crate::error::{Error, Result};
use crate::filter::{
    assemble_wiener_system_kron, build_vandermonde, default_ridge, solve_coefficients,
    CrossCorrelationForm, FilterCoefficients,
};
use crate::fractional::{FractionalDomain, ShiftConvention};
use crate::graph::{cycle_laplacian, Graph, KnnConfig};
use crate::linalg::{real_part, to_complex, vec_of, CMat, CVec};

/// Stand-in for `+∞` dB when the estimate equals the reference exactly.
pub const SNR_CAP_DB: f64 = 300.0;

/// Imaginary residue above this on synthesis is reported as a warning.
pub const IMAG_WARN: f64 = 1e-8;

/// Noise stream reserved for the held-out realization used to pick `γ`.
const HELD_OUT_STREAM: u64 = 1 << 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FirstStage {
    #[default]
    Tikhonov,
    Median,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Clean signal known; rank by true output SNR.
    #[default]
    Experiment,
    /// No clean signal; rank by residual against the first stage.
    Blind,
}

/// `10·log10` of the Frobenius ratio (`Paper`) or `20·log10` of it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SnrConvention {
    #[default]
    Paper,
    Conventional,
}

impl SnrConvention {
    fn factor(self) -> f64 {
        match self {
            SnrConvention::Paper => 10.0,
            SnrConvention::Conventional => 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub p: usize,
    pub q: usize,
    /// Segment length `M`; must divide `T`.
    pub group_len: usize,
    pub orders_grid: Vec<(f64, f64)>,
    pub input_snr_db: f64,
    pub trials: usize,
    pub seed: u64,
    pub first_stage: FirstStage,
    pub mode: Mode,
    pub snr_convention: SnrConvention,
    /// `None`: swept on a held-out realization (experiment) or 1 (blind).
    pub tikhonov_gamma: Option<f64>,
    pub median: MedianConfig,
    /// `None`: [`default_ridge`].
    pub ridge: Option<f64>,
    pub shift_convention: ShiftConvention,
    pub cross_correlation: CrossCorrelationForm,
    pub knn: KnnConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            p: 5,
            q: 42,
            group_len: 6,
            orders_grid: order_grid(0.1).expect("0.1 is a valid step"),
            input_snr_db: -2.0,
            trials: 50,
            seed: 0,
            first_stage: FirstStage::default(),
            mode: Mode::default(),
            snr_convention: SnrConvention::default(),
            tikhonov_gamma: None,
            median: MedianConfig::default(),
            ridge: None,
            shift_convention: ShiftConvention::default(),
            cross_correlation: CrossCorrelationForm::default(),
            knn: KnnConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Checks everything that does not depend on the data.
    pub fn validate(&self) -> Result<()> {
        if self.p == 0 || self.q == 0 {
            return Err(Error::param("filter degrees P and Q must be at least 1"));
        }
        if self.group_len == 0 {
            return Err(Error::param("group length must be at least 1"));
        }
        if self.p > self.group_len {
            return Err(Error::param(format!(
                "P={} exceeds the group length M={}",
                self.p, self.group_len
            )));
        }
        if self.orders_grid.is_empty() {
            return Err(Error::param("orders grid is empty"));
        }
        if let Some(&(a, b)) = self
            .orders_grid
            .iter()
            .find(|(a, b)| !(0.0..=1.0).contains(a) || !(0.0..=1.0).contains(b))
        {
            return Err(Error::param(format!("orders ({a}, {b}) outside [0, 1]")));
        }
        if self.trials == 0 {
            return Err(Error::param("trials must be at least 1"));
        }
        if !self.input_snr_db.is_finite() {
            return Err(Error::param("input SNR must be finite"));
        }
        if let Some(g) = self.tikhonov_gamma {
            if !(g >= 0.0) || !g.is_finite() {
                return Err(Error::param(format!("gamma must be nonnegative, got {g}")));
            }
        }
        if let Some(r) = self.ridge {
            if !(r >= 0.0) || !r.is_finite() {
                return Err(Error::param(format!("ridge must be nonnegative, got {r}")));
            }
        }
        if self.median.iterations == 0 {
            return Err(Error::param("median filter needs at least one iteration"));
        }
        Ok(())
    }

    /// Validation against a concrete `N x T` signal.
    pub fn validate_for(&self, n: usize, t: usize) -> Result<()> {
        self.validate()?;
        if t % self.group_len != 0 {
            return Err(Error::param(format!(
                "group length M={} does not divide T={t}",
                self.group_len
            )));
        }
        if self.q > n {
            return Err(Error::param(format!("Q={} exceeds N={n}", self.q)));
        }
        Ok(())
    }
}

/// Closed grid `{0, step, 2·step, ..., 1}²`, `a`-major. When `step` does
/// not divide 1 the last point is still 1.
pub fn order_grid(step: f64) -> Result<Vec<(f64, f64)>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::param(format!("grid step must lie in (0, 1], got {step}")));
    }
    let k = (1.0 / step).round();
    let axis: Vec<f64> = if (k * step - 1.0).abs() < 1e-9 {
        let k = k as usize;
        (0..=k).map(|i| i as f64 / k as f64).collect()
    } else {
        let mut v: Vec<f64> = (0..)
            .map(|i| i as f64 * step)
            .take_while(|&x| x < 1.0 - 1e-9)
            .collect();
        v.push(1.0);
        v
    };
    Ok(axis
        .iter()
        .flat_map(|&a| axis.iter().map(move |&b| (a, b)))
        .collect())
}

fn frobenius(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `factor · log10(||X||_F / ||X − X̃||_F)`; capped at [`SNR_CAP_DB`].
pub fn snr_db(x_ref: &DMatrix<f64>, x_est: &DMatrix<f64>, convention: SnrConvention) -> Result<f64> {
    if x_ref.shape() != x_est.shape() {
        return Err(Error::param(format!(
            "shapes {:?} and {:?} differ",
            x_ref.shape(),
            x_est.shape()
        )));
    }
    let num = frobenius(x_ref);
    if num == 0.0 {
        return Err(Error::input("SNR undefined for an all-zero reference"));
    }
    let den = frobenius(&(x_ref - x_est));
    if den == 0.0 {
        return Ok(SNR_CAP_DB);
    }
    Ok((convention.factor() * (num / den).log10()).min(SNR_CAP_DB))
}

/// `X + E` with Gaussian `E` rescaled so that `snr_db(X, X + E)` hits the
/// target. Trials draw from separate streams of the same seed.
pub fn add_noise(
    x: &DMatrix<f64>,
    target_snr_db: f64,
    convention: SnrConvention,
    seed: u64,
    stream: u64,
) -> Result<DMatrix<f64>> {
    if !target_snr_db.is_finite() {
        return Err(Error::param("target SNR must be finite"));
    }
    let norm_x = frobenius(x);
    if norm_x == 0.0 {
        return Err(Error::input("SNR undefined for an all-zero signal"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let e = DMatrix::from_fn(x.nrows(), x.ncols(), |_, _| {
        StandardNormal.sample(&mut rng)
    });
    let norm_e: f64 = frobenius(&e);
    let want = norm_x * 10f64.powf(-target_snr_db / convention.factor());
    Ok(x + e * (want / norm_e))
}

/// Splits `X` into `T / M` contiguous blocks of `M` columns.
pub fn segment(x: &DMatrix<f64>, m: usize) -> Result<Vec<DMatrix<f64>>> {
    if m == 0 || x.ncols() % m != 0 {
        return Err(Error::param(format!(
            "group length {m} does not divide T={}",
            x.ncols()
        )));
    }
    Ok((0..x.ncols() / m)
        .map(|s| x.columns(s * m, m).into_owned())
        .collect())
}

/// Inverse of [`segment`].
pub fn concatenate(parts: &[DMatrix<f64>]) -> Result<DMatrix<f64>> {
    let first = parts.first().ok_or_else(|| Error::param("nothing to concatenate"))?;
    let n = first.nrows();
    if parts.iter().any(|p| p.nrows() != n) {
        return Err(Error::param("segments have different vertex counts"));
    }
    let t: usize = parts.iter().map(|p| p.ncols()).sum();
    let mut out = DMatrix::zeros(n, t);
    let mut col = 0;
    for p in parts {
        out.columns_mut(col, p.ncols()).copy_from(p);
        col += p.ncols();
    }
    Ok(out)
}

/// Analysis matrix and normalized Vandermonde matrix at one order.
#[derive(Debug, Clone)]
struct OrderBasis {
    analysis: CMat,
    psi: CMat,
}

fn order_key(x: f64) -> u64 {
    x.to_bits()
}

/// What the second stage produced on a whole signal.
#[derive(Debug, Clone)]
pub struct SecondStage {
    pub output: DMatrix<f64>,
    pub coefficients: Vec<FilterCoefficients>,
    pub ill_conditioned: usize,
    pub imaginary_residue: f64,
}

/// Shared read-only context for one graph, group length and config: the
/// spectra of both shifts and the fractional bases at every order the grid
/// needs.
#[derive(Debug)]
pub struct Denoiser {
    graph: Graph,
    cfg: ExperimentConfig,
    spectra: JointLaplacianSpectra,
    temporal: BTreeMap<u64, OrderBasis>,
    vertex: BTreeMap<u64, OrderBasis>,
}

impl Denoiser {
    pub fn new(graph: &Graph, cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let n = graph.n_vertices();
        if cfg.q > n {
            return Err(Error::param(format!("Q={} exceeds N={n}", cfg.q)));
        }
        let l_g = eigendecompose_symmetric(&graph.laplacian())?;
        let l_t = eigendecompose(&to_complex(&cycle_laplacian(cfg.group_len)?), false)?;
        let dom_g = FractionalDomain::new(&l_g)?;
        let dom_t = FractionalDomain::new(&l_t)?;

        let build = |dom: &FractionalDomain, order: f64, degree: usize| -> Result<OrderBasis> {
            let basis = dom.basis(order)?;
            let max = basis.frac_eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let eigs: Vec<Complex64> = if max > 0.0 {
                basis.frac_eigenvalues.iter().map(|z| z / max).collect()
            } else {
                basis.frac_eigenvalues.clone()
            };
            Ok(OrderBasis {
                analysis: basis.analysis(cfg.shift_convention),
                psi: build_vandermonde(&eigs, degree)?,
            })
        };
        let mut temporal = BTreeMap::new();
        let mut vertex = BTreeMap::new();
        for &(a, b) in &cfg.orders_grid {
            if !temporal.contains_key(&order_key(a)) {
                temporal.insert(order_key(a), build(&dom_t, a, cfg.p)?);
            }
            if !vertex.contains_key(&order_key(b)) {
                vertex.insert(order_key(b), build(&dom_g, b, cfg.q)?);
            }
        }
        Ok(Self {
            graph: graph.clone(),
            cfg: cfg.clone(),
            spectra: JointLaplacianSpectra {
                temporal: l_t,
                graph: l_g,
            },
            temporal,
            vertex,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    fn check_signal(&self, y: &DMatrix<f64>) -> Result<()> {
        if y.nrows() != self.graph.n_vertices() {
            return Err(Error::param(format!(
                "signal has {} vertices, graph has {}",
                y.nrows(),
                self.graph.n_vertices()
            )));
        }
        if y.ncols() % self.cfg.group_len != 0 {
            return Err(Error::param(format!(
                "group length M={} does not divide T={}",
                self.cfg.group_len,
                y.ncols()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("signal contains non-finite values"));
        }
        Ok(())
    }

    /// Segment-wise first stage. Returns the estimate and the largest
    /// imaginary residue discarded by the Tikhonov synthesis.
    pub fn first_stage(&self, y: &DMatrix<f64>, gamma: f64) -> Result<(DMatrix<f64>, f64)> {
        self.check_signal(y)?;
        let mut residue = 0.0f64;
        let parts = segment(y, self.cfg.group_len)?
            .iter()
            .map(|s| match self.cfg.first_stage {
                FirstStage::Tikhonov => {
                    let out = tikhonov_denoise(s, &self.spectra, &TikhonovConfig { gamma })?;
                    residue = residue.max(out.imaginary_residue);
                    Ok(out.values)
                }
                FirstStage::Median => recursive_median_filter(s, &self.graph, &self.cfg.median),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((concatenate(&parts)?, residue))
    }

    /// Fits and applies the order-`(a, b)` filter to every segment of `y`
    /// using the matching segment of `reference` as the target.
    pub fn second_stage(&self, y: &DMatrix<f64>, reference: &DMatrix<f64>, orders: (f64, f64)) -> Result<SecondStage> {
        self.check_signal(y)?;
        if reference.shape() != y.shape() {
            return Err(Error::param("reference and signal shapes differ"));
        }
        let bt = self
            .temporal
            .get(&order_key(orders.0))
            .ok_or_else(|| Error::param(format!("order a={} is not in the grid", orders.0)))?;
        let bg = self
            .vertex
            .get(&order_key(orders.1))
            .ok_or_else(|| Error::param(format!("order b={} is not in the grid", orders.1)))?;
        let a_t_tr = bt.analysis.transpose();
        let a_g_h = bg.analysis.adjoint();
        let a_t_conj = bt.analysis.conjugate();

        let m = self.cfg.group_len;
        let mut parts = Vec::new();
        let mut coefficients = Vec::new();
        let mut ill = 0;
        let mut residue = 0.0f64;
        for (ys, xs) in segment(y, m)?.iter().zip(segment(reference, m)?.iter()) {
            let y_f = &bg.analysis * to_complex(ys) * &a_t_tr;
            let x_f = &bg.analysis * to_complex(xs) * &a_t_tr;
            let sys = assemble_wiener_system_kron(
                &vec_of(&y_f),
                &vec_of(&x_f),
                &bt.psi,
                &bg.psi,
                self.cfg.cross_correlation,
            )?;
            let ridge = self.cfg.ridge.unwrap_or_else(|| default_ridge(&sys));
            let c = solve_coefficients(&sys, ridge)?;
            if c.ill_conditioned() {
                ill += 1;
            }
            let response = &bg.psi * c.grid() * bt.psi.transpose();
            let z = &a_g_h * y_f.component_mul(&response) * &a_t_conj;
            residue = residue.max(z.iter().map(|v| v.im.abs()).fold(0.0, f64::max));
            parts.push(real_part(&z));
            coefficients.push(c);
        }
        Ok(SecondStage {
            output: concatenate(&parts)?,
            coefficients,
            ill_conditioned: ill,
            imaginary_residue: residue,
        })
    }

    /// `γ` maximizing first-stage SNR over a 10-point log sweep on
    /// `[1e-2, 1e3]`, scored against `clean` on `noisy`. Ties go to the
    /// smaller `γ`.
    pub fn sweep_gamma(&self, clean: &DMatrix<f64>, noisy: &DMatrix<f64>) -> Result<f64> {
        let mut best = (f64::NEG_INFINITY, 1.0);
        for g in gamma_sweep_points() {
            let (est, _) = self.first_stage(noisy, g)?;
            let s = snr_db(clean, &est, self.cfg.snr_convention)?;
            if s > best.0 {
                best = (s, g);
            }
        }
        Ok(best.1)
    }
}

/// Ten log-spaced points from `1e-2` to `1e3`.
pub fn gamma_sweep_points() -> Vec<f64> {
    (0..10).map(|i| 10f64.powf(-2.0 + 5.0 * i as f64 / 9.0)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub a: f64,
    pub b: f64,
    /// Output SNR in experiment mode, residual `||H y − x̃||` in blind mode.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub trial: usize,
    pub input_snr_db: f64,
    pub first_stage_snr_db: f64,
    /// At the overall best orders.
    pub second_stage_snr_db: f64,
    /// Best orders for this trial alone.
    pub trial_best_orders: (f64, f64),
    pub trial_best_snr_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenoiseReport {
    pub mode: Mode,
    pub snr_convention: SnrConvention,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_snr_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_stage_snr_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub second_stage_snr_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_residual: Option<f64>,
    pub best_orders: (f64, f64),
    /// `"snr_db"` or `"residual"`.
    pub surface_metric: String,
    pub surface: Vec<SurfacePoint>,
    pub trials: Vec<TrialReport>,
    pub gamma: Option<f64>,
    pub ill_conditioned_solves: usize,
    pub warnings: Vec<String>,
    pub config: ExperimentConfig,
}

impl DenoiseReport {
    pub fn best_index(&self) -> usize {
        self.surface
            .iter()
            .position(|p| (p.a, p.b) == self.best_orders)
            .unwrap_or(0)
    }
}

/// Index of the best surface value. `larger_is_better` picks max, otherwise
/// min; exact ties go to the orders nearest `(1, 1)`, then the
/// lexicographically smaller pair.
pub fn select_best(points: &[SurfacePoint], larger_is_better: bool) -> Option<usize> {
    let better = |x: f64, y: f64| if larger_is_better { x > y } else { x < y };
    let dist = |p: &SurfacePoint| (1.0 - p.a).hypot(1.0 - p.b);
    let mut best: Option<usize> = None;
    for (i, p) in points.iter().enumerate() {
        let Some(j) = best else {
            best = Some(i);
            continue;
        };
        let q = &points[j];
        let wins = if p.value == q.value {
            let (dp, dq) = (dist(p), dist(q));
            dp < dq || (dp == dq && (p.a, p.b) < (q.a, q.b))
        } else {
            better(p.value, q.value) || q.value.is_nan()
        };
        if wins {
            best = Some(i);
        }
    }
    best
}

/// One noisy realization pushed through both stages at a single order pair.
pub fn two_stage_denoise(
    y: &DMatrix<f64>,
    g: &Graph,
    orders: (f64, f64),
    cfg: &ExperimentConfig,
    x_clean: Option<&DMatrix<f64>>,
) -> Result<(DMatrix<f64>, DenoiseReport)> {
    let mut cfg = cfg.clone();
    cfg.orders_grid = vec![orders];
    let (report, out) = grid_search(y, g, &cfg, x_clean)?;
    Ok((out.output, report))
}

/// Runs both stages at every grid point on the given realization `y`.
/// Returns the report and the second stage at the best orders.
pub fn grid_search(
    y: &DMatrix<f64>,
    g: &Graph,
    cfg: &ExperimentConfig,
    x_clean: Option<&DMatrix<f64>>,
) -> Result<(DenoiseReport, SecondStage)> {
    cfg.validate_for(y.nrows(), y.ncols())?;
    let den = Denoiser::new(g, cfg)?;
    // Blind when asked to be, or when there is nothing to score against.
    match x_clean.filter(|_| cfg.mode == Mode::Experiment) {
        Some(x) => {
            if x.shape() != y.shape() {
                return Err(Error::param("clean and noisy signals differ in shape"));
            }
            run_trials(&den, x, &[y.clone()])
        }
        None => run_blind(&den, y),
    }
}

/// Monte-Carlo experiment: `cfg.trials` noisy realizations of `clean` at
/// `cfg.input_snr_db`, surface averaged over trials. The second stage
/// returned is trial 0 at the best orders.
pub fn run_experiment(g: &Graph, clean: &DMatrix<f64>, cfg: &ExperimentConfig) -> Result<(DenoiseReport, SecondStage)> {
    cfg.validate_for(clean.nrows(), clean.ncols())?;
    let den = Denoiser::new(g, cfg)?;
    let noisy = (0..cfg.trials as u64)
        .map(|t| add_noise(clean, cfg.input_snr_db, cfg.snr_convention, cfg.seed, t))
        .collect::<Result<Vec<_>>>()?;
    run_trials(&den, clean, &noisy)
}

fn pick_gamma(den: &Denoiser, clean: Option<&DMatrix<f64>>) -> Result<Option<f64>> {
    let cfg = den.config();
    if cfg.first_stage != FirstStage::Tikhonov {
        return Ok(None);
    }
    if let Some(g) = cfg.tikhonov_gamma {
        return Ok(Some(g));
    }
    match clean {
        Some(x) => {
            let held_out = add_noise(x, cfg.input_snr_db, cfg.snr_convention, cfg.seed, HELD_OUT_STREAM)?;
            Ok(Some(den.sweep_gamma(x, &held_out)?))
        }
        None => Ok(Some(1.0)),
    }
}

fn residue_warning(warnings: &mut Vec<String>, what: &str, residue: f64) {
    if residue > IMAG_WARN {
        warnings.push(format!("{what}: discarded imaginary part up to {residue:.3e}"));
    }
}

fn run_trials(den: &Denoiser, clean: &DMatrix<f64>, noisy: &[DMatrix<f64>]) -> Result<(DenoiseReport, SecondStage)> {
    let cfg = den.config();
    let conv = cfg.snr_convention;
    let gamma = pick_gamma(den, Some(clean))?;
    let mut warnings = Vec::new();
    let grid = &cfg.orders_grid;

    let mut per_trial: Vec<(f64, f64, Vec<f64>)> = Vec::with_capacity(noisy.len());
    let mut ill = 0;
    let mut residue = 0.0f64;
    for y in noisy {
        let input = snr_db(clean, y, conv)?;
        let (first, r1) = den.first_stage(y, gamma.unwrap_or(1.0))?;
        residue_warning(&mut warnings, "first stage", r1);
        let first_snr = snr_db(clean, &first, conv)?;
        let results = grid
            .par_iter()
            .map(|&orders| {
                let s = den.second_stage(y, &first, orders)?;
                Ok((snr_db(clean, &s.output, conv)?, s.ill_conditioned, s.imaginary_residue))
            })
            .collect::<Result<Vec<_>>>()?;
        ill += results.iter().map(|r| r.1).sum::<usize>();
        residue = results.iter().map(|r| r.2).fold(residue, f64::max);
        per_trial.push((input, first_snr, results.into_iter().map(|r| r.0).collect()));
    }
    residue_warning(&mut warnings, "second stage", residue);
    if ill > 0 {
        warnings.push(format!("{ill} segment solves were ill-conditioned"));
    }

    let k = per_trial.len() as f64;
    let surface: Vec<SurfacePoint> = grid
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| SurfacePoint {
            a,
            b,
            value: per_trial.iter().map(|t| t.2[i]).sum::<f64>() / k,
        })
        .collect();
    let best = select_best(&surface, true).expect("grid is nonempty");
    let best_orders = (surface[best].a, surface[best].b);

    let trials = per_trial
        .iter()
        .enumerate()
        .map(|(i, (input, first, snrs))| {
            let pts: Vec<SurfacePoint> = grid
                .iter()
                .zip(snrs)
                .map(|(&(a, b), &value)| SurfacePoint { a, b, value })
                .collect();
            let tb = select_best(&pts, true).expect("grid is nonempty");
            TrialReport {
                trial: i,
                input_snr_db: *input,
                first_stage_snr_db: *first,
                second_stage_snr_db: snrs[best],
                trial_best_orders: (pts[tb].a, pts[tb].b),
                trial_best_snr_db: pts[tb].value,
            }
        })
        .collect::<Vec<_>>();

    let first0 = den.first_stage(&noisy[0], gamma.unwrap_or(1.0))?.0;
    let output = den.second_stage(&noisy[0], &first0, best_orders)?;
    let report = DenoiseReport {
        mode: Mode::Experiment,
        snr_convention: conv,
        input_snr_db: Some(trials.iter().map(|t| t.input_snr_db).sum::<f64>() / k),
        first_stage_snr_db: Some(trials.iter().map(|t| t.first_stage_snr_db).sum::<f64>() / k),
        second_stage_snr_db: Some(surface[best].value),
        best_residual: None,
        best_orders,
        surface_metric: "snr_db".into(),
        surface,
        trials,
        gamma,
        ill_conditioned_solves: ill,
        warnings,
        config: cfg.clone(),
    };
    Ok((report, output))
}

fn run_blind(den: &Denoiser, y: &DMatrix<f64>) -> Result<(DenoiseReport, SecondStage)> {
    let cfg = den.config();
    let gamma = pick_gamma(den, None)?;
    let mut warnings = Vec::new();
    let (first, r1) = den.first_stage(y, gamma.unwrap_or(1.0))?;
    residue_warning(&mut warnings, "first stage", r1);
    let results = cfg
        .orders_grid
        .par_iter()
        .map(|&orders| {
            let s = den.second_stage(y, &first, orders)?;
            Ok((frobenius(&(&s.output - &first)), s.ill_conditioned, s.imaginary_residue))
        })
        .collect::<Result<Vec<_>>>()?;
    let ill: usize = results.iter().map(|r| r.1).sum();
    residue_warning(&mut warnings, "second stage", results.iter().map(|r| r.2).fold(0.0, f64::max));
    if ill > 0 {
        warnings.push(format!("{ill} segment solves were ill-conditioned"));
    }
    let surface: Vec<SurfacePoint> = cfg
        .orders_grid
        .iter()
        .zip(&results)
        .map(|(&(a, b), r)| SurfacePoint { a, b, value: r.0 })
        .collect();
    let best = select_best(&surface, false).expect("grid is nonempty");
    let best_orders = (surface[best].a, surface[best].b);
    let output = den.second_stage(y, &first, best_orders)?;
    let report = DenoiseReport {
        mode: Mode::Blind,
        snr_convention: cfg.snr_convention,
        input_snr_db: None,
        first_stage_snr_db: None,
        second_stage_snr_db: None,
        best_residual: Some(surface[best].value),
        best_orders,
        surface_metric: "residual".into(),
        surface,
        trials: Vec::new(),
        gamma,
        ill_conditioned_solves: ill,
        warnings,
        config: cfg.clone(),
    };
    Ok((report, output))
}

/// `vec` of a real matrix as a complex vector; handy for oracle checks.
pub fn complex_vec(m: &DMatrix<f64>) -> CVec {
    vec_of(&to_complex(m))
}
