//! Size-shape decomposition of positive and monotone functional data.
//!
//! A positive trajectory `Y` splits into a size `tau = int Y` and a density
//! shape `f = Y / tau`; a monotone trajectory splits into a range, a minimum
//! and a distribution-function shape. Sizes are compared in Euclidean
//! distance and shapes in 2-Wasserstein distance, which makes Frechet means
//! and global/local Frechet regression separable: ordinary weighted means for
//! the sizes and projected weighted means of quantile functions for the
//! shapes.
//!
//! The numerical modules are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`, with `*32` variants for
//! `f32`. Simulation and benchmarking run in `f64`.

// `!(x > 0)` style guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod bench;
pub mod decomp;
pub mod domain;
pub mod error;
pub mod io;
pub mod isotonic;
pub(crate) mod linalg;
pub mod metric;
pub mod quantile;
pub mod recovery;
pub mod regress;
pub mod scalar;
pub mod simgen;

pub use domain::{Constraint, DEFAULT_SHAPE_LEN};
pub use error::{Error, Result};
pub use scalar::Scalar;

pub type TimeGrid = domain::TimeGrid<f64>;
pub type Trajectory = domain::SampledTrajectory<f64>;
pub type DensityGrid = domain::DensityGrid<f64>;
pub type CdfGrid = domain::CdfGrid<f64>;
pub type QuantileGrid = domain::QuantileGrid<f64>;
pub type PositiveDecomposition = domain::PositiveDecomposition<f64>;
pub type MonotoneDecomposition = domain::MonotoneDecomposition<f64>;
pub type MetricWeights = domain::MetricWeights<f64>;
pub type RawObservations = recovery::RawObservations<f64>;
pub type BinSpec = recovery::BinSpec<f64>;
pub type CovariateMatrix = regress::CovariateMatrix<f64>;
pub type KernelSpec = regress::KernelSpec<f64>;

pub type TimeGrid32 = domain::TimeGrid<f32>;
pub type Trajectory32 = domain::SampledTrajectory<f32>;
pub type DensityGrid32 = domain::DensityGrid<f32>;
pub type CdfGrid32 = domain::CdfGrid<f32>;
pub type QuantileGrid32 = domain::QuantileGrid<f32>;
pub type PositiveDecomposition32 = domain::PositiveDecomposition<f32>;
pub type MonotoneDecomposition32 = domain::MonotoneDecomposition<f32>;
pub type RawObservations32 = recovery::RawObservations<f32>;
pub type CovariateMatrix32 = regress::CovariateMatrix<f32>;
