//! Cell adjacency graphs from labeled 3D segmentations.
//!
//! The crate turns a labeled voxel volume into a geo-referenced graph (one
//! node per cell, one edge per touching pair), estimates global and per-cell
//! reference frames, extracts geometric and graph features, serializes them
//! as feature bundles, and ships evaluation metrics, split generation and a
//! small graph-convolutional baseline.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the scalar for the common cases.

pub mod baseline;
pub mod error;
pub mod evalkit;
pub mod features;
pub mod frames;
pub mod graph;
pub mod homogenize;
pub mod kv;
pub mod linalg;
pub mod pipeline;
pub mod scalar;
pub mod synth;
pub mod volume;

pub use error::{Error, Result};
pub use scalar::Real;

pub type CellGraph64 = graph::CellGraph<f64>;
pub type CellGraph32 = graph::CellGraph<f32>;
pub type ReferenceFrame64 = frames::ReferenceFrame<f64>;
pub type LocalAxes64 = frames::LocalAxes<f64>;
pub type RawFeatureBlock64 = features::RawFeatureBlock<f64>;
pub type GcnParams64 = baseline::GcnParams<f64>;
pub type GcnParams32 = baseline::GcnParams<f32>;
pub type Vec3f = linalg::Vec3<f64>;
