//! Threshold contagions on noisy geometric networks embedded in a flat torus.
//!
//! The crate covers the whole analysis pipeline:
//!
//! * [`network`] builds Kleinberg-like small-world networks on an `n x n`
//!   periodic lattice (geometric edges within a radius plus randomly matched
//!   non-geometric stubs).
//! * [`contagion`] runs the synchronous Watts threshold model from cluster
//!   seeds and collects activation times into an [`ActivationMatrix`].
//! * [`map`] turns activation times into point clouds (contagion maps).
//! * [`geometry`], [`dimension`] and [`tda`] score those clouds against the
//!   torus: Pearson correlation of pairwise distances, PCA embedding
//!   dimension, and Wasserstein distance between calibrated Vietoris-Rips
//!   barcodes.
//! * [`bifurcation`] evaluates the analytic wavefront / new-cluster
//!   thresholds the numerical results are compared against.
//!
//! Numerical code is generic over the scalar type ([`Real`] for `f32`/`f64`,
//! and exact rationals for the `d_in` distribution); the aliases below fix the
//! common `f64` instantiations.

pub mod bifurcation;
pub mod contagion;
pub mod dimension;
pub mod distance;
pub mod error;
pub mod geometry;
pub mod map;
pub mod network;
pub mod rng;
pub mod scalar;
pub mod tda;

#[cfg(any(test, feature = "oracle"))]
pub mod oracle;

pub use contagion::{ActivationMatrix, ContagionConfig, Threshold};
pub use error::{Error, Result};
pub use map::MapVariant;
pub use network::{Network, NodeId, Radius};
pub use scalar::Real;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exact rational used by the exact `d_in` distribution.
pub type Rational = num_rational::BigRational;

pub type PointCloud64 = map::PointCloud<f64>;
pub type PointCloud32 = map::PointCloud<f32>;
pub type DistanceMatrix64 = distance::DistanceMatrix<f64>;
pub type DistanceMatrix32 = distance::DistanceMatrix<f32>;
pub type Barcode64 = tda::Barcode<f64>;
pub type Barcode32 = tda::Barcode<f32>;
pub type PersistencePair64 = tda::PersistencePair<f64>;
pub type EmbeddingReport64 = dimension::EmbeddingReport<f64>;
