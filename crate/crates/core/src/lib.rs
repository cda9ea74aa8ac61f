//! Optimal time-vertex graph filtering in fractional Fourier domains.
//!
//! Graph and cycle shifts, their (fractional) Fourier transforms, the
//! Wiener-Hopf polynomial filter, first-stage baselines and the two-stage
//! denoising experiment built on top of them.

pub mod baseline;
pub mod eigen;
pub mod error;
pub mod filter;
pub mod fractional;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod pipeline;
pub mod synth;
pub mod transform;

pub use baseline::{MedianConfig, TikhonovConfig};
pub use eigen::SpectralDecomposition;
pub use error::{Error, Result};
pub use filter::{CrossCorrelationForm, FilterCoefficients, WienerSystem};
pub use fractional::{FractionalBasis, FractionalDomain, JointFractionalBasis, ShiftConvention};
pub use graph::{Graph, KnnConfig};
pub use linalg::{CMat, CVec};
pub use pipeline::{DenoiseReport, ExperimentConfig, FirstStage, Mode, SnrConvention};
pub use transform::{JointSpectrum, TimeVertexSignal};
