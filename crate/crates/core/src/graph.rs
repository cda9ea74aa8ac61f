//! Undirected weighted graphs, k-nearest-neighbour construction from
//! geographic coordinates, and the graph / cycle Laplacians.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean Earth radius in kilometres. Kernel weights are scale invariant, so
/// this only affects the units of reported distances.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMetric {
    /// Great-circle distance on (latitude, longitude) in degrees.
    #[default]
    Haversine,
    /// Plain Euclidean distance on the raw coordinate pairs.
    Euclidean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EdgeWeighting {
    /// `exp(-d²/σ²)` with σ the mean selected neighbour distance.
    #[default]
    Gaussian,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnConfig {
    pub k: usize,
    pub metric: DistanceMetric,
    pub weighting: EdgeWeighting,
}

impl Default for KnnConfig {
    fn default() -> Self {
        Self {
            k: 5,
            metric: DistanceMetric::Haversine,
            weighting: EdgeWeighting::Gaussian,
        }
    }
}

/// Undirected graph with a dense symmetric, nonnegative, loop-free adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    adjacency: DMatrix<f64>,
    coordinates: Option<Vec<(f64, f64)>>,
}

impl Graph {
    /// Validates and wraps an adjacency matrix.
    pub fn from_adjacency(adjacency: DMatrix<f64>) -> Result<Self> {
        let (r, c) = adjacency.shape();
        if r != c || r == 0 {
            return Err(Error::param(format!(
                "adjacency must be square and nonempty, got {r}x{c}"
            )));
        }
        for i in 0..r {
            if adjacency[(i, i)] != 0.0 {
                return Err(Error::input(format!("self-loop at vertex {i}")));
            }
            for j in 0..r {
                let w = adjacency[(i, j)];
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::input(format!("invalid weight {w} at ({i}, {j})")));
                }
                if w != adjacency[(j, i)] {
                    return Err(Error::input(format!("adjacency not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self {
            adjacency,
            coordinates: None,
        })
    }

    pub fn with_coordinates(mut self, coords: Vec<(f64, f64)>) -> Result<Self> {
        if coords.len() != self.n_vertices() {
            return Err(Error::param(format!(
                "{} coordinates for {} vertices",
                coords.len(),
                self.n_vertices()
            )));
        }
        self.coordinates = Some(coords);
        Ok(self)
    }

    pub fn n_vertices(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    pub fn coordinates(&self) -> Option<&[(f64, f64)]> {
        self.coordinates.as_deref()
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_vertices()).filter(move |&u| self.adjacency[(v, u)] > 0.0)
    }

    pub fn degree_count(&self, v: usize) -> usize {
        self.neighbors(v).count()
    }

    /// Each undirected edge once, `src < dst`, in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n_vertices();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let w = self.adjacency[(i, j)];
                if w > 0.0 {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    /// Combinatorial Laplacian `D - A`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        laplacian(self)
    }
}

pub fn haversine_km(p: (f64, f64), q: (f64, f64)) -> f64 {
    // Differences are taken in degrees first so that equally spaced inputs
    // produce bit-identical distances.
    let dlat = (q.0 - p.0).to_radians();
    let dlon = (q.1 - p.1).to_radians();
    let h = (dlat / 2.0).sin().powi(2)
        + p.0.to_radians().cos() * q.0.to_radians().cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

fn distance(metric: DistanceMetric, p: (f64, f64), q: (f64, f64)) -> f64 {
    match metric {
        DistanceMetric::Haversine => haversine_km(p, q),
        DistanceMetric::Euclidean => ((q.0 - p.0).powi(2) + (q.1 - p.1).powi(2)).sqrt(),
    }
}

/// Builds a k-NN graph. Each vertex selects its `k` nearest neighbours (ties
/// go to the lower index) and the edge set is the union of all selections.
pub fn build_knn_graph(coords: &[(f64, f64)], cfg: &KnnConfig) -> Result<Graph> {
    let n = coords.len();
    let k = cfg.k;
    if k == 0 {
        return Err(Error::param("k must be positive"));
    }
    if k >= n {
        return Err(Error::param(format!("k = {k} requires at least {} points, got {n}", k + 1)));
    }
    if let Some(i) = coords.iter().position(|c| !c.0.is_finite() || !c.1.is_finite()) {
        return Err(Error::input(format!("non-finite coordinate at vertex {i}")));
    }

    let mut selected: Vec<(usize, usize, f64)> = Vec::with_capacity(n * k);
    let mut cand: Vec<(f64, usize)> = Vec::with_capacity(n - 1);
    for i in 0..n {
        cand.clear();
        cand.extend(
            (0..n)
                .filter(|&j| j != i)
                .map(|j| (distance(cfg.metric, coords[i], coords[j]), j)),
        );
        cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        selected.extend(cand[..k].iter().map(|&(d, j)| (i, j, d)));
    }

    // σ is summed in sorted order so that it does not depend on vertex labels.
    let mut dists: Vec<f64> = selected.iter().map(|s| s.2).collect();
    dists.sort_by(f64::total_cmp);
    let sigma = dists.iter().sum::<f64>() / dists.len() as f64;

    let mut adjacency = DMatrix::zeros(n, n);
    for &(i, j, d) in &selected {
        let w = match cfg.weighting {
            EdgeWeighting::Binary => 1.0,
            EdgeWeighting::Gaussian if sigma > 0.0 => (-(d * d) / (sigma * sigma)).exp(),
            EdgeWeighting::Gaussian => 1.0,
        };
        adjacency[(i, j)] = w;
        adjacency[(j, i)] = w;
    }
    Graph::from_adjacency(adjacency)?.with_coordinates(coords.to_vec())
}

pub fn laplacian(g: &Graph) -> DMatrix<f64> {
    let a = g.adjacency();
    let n = a.nrows();
    let mut l = -a.clone();
    for i in 0..n {
        l[(i, i)] = a.row(i).iter().sum::<f64>();
    }
    l
}

/// Directed cyclic shift on `T` time steps: entry `(t, t+1 mod T)` is one.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleShift {
    order: usize,
    adjacency: DMatrix<f64>,
}

impl CycleShift {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::param("cycle length must be at least 1"));
        }
        let mut adjacency = DMatrix::zeros(order, order);
        for t in 0..order {
            adjacency[(t, (t + 1) % order)] = 1.0;
        }
        Ok(Self { order, adjacency })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    /// `I - A_T`. Circulant, not symmetric for `T > 2`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        DMatrix::identity(self.order, self.order) - &self.adjacency
    }
}

pub fn cycle_laplacian(t: usize) -> Result<DMatrix<f64>> {
    Ok(CycleShift::new(t)?.laplacian())
}
