//! Global (per-specimen) and local (per-cell) reference systems.

mod global;
mod hops;
mod local;

pub use global::{global_frame, tissue_com, FrameMethod};
pub use hops::hops_to_surface;
pub use local::{growth_axes, local_axes, surface_axes, third_axis, LocalAxes, LocalFrame};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{mat3_det, mat3_identity, mat3_mul_vec, Mat3, Vec3};
use crate::scalar::Real;

/// Origin plus a right-handed orthonormal basis (rows of `axes`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ReferenceFrame<T> {
    pub origin: Vec3<T>,
    pub axes: Mat3<T>,
}

impl<T: Real> ReferenceFrame<T> {
    /// Orthonormality tolerance: 1e-10 for `f64`, scaled up for lower precision.
    pub fn tolerance() -> T {
        T::lit(1e-10).max(T::epsilon() * T::lit(100.0))
    }

    pub fn new(origin: Vec3<T>, axes: Mat3<T>) -> Result<Self> {
        let frame = Self { origin, axes };
        let err = frame.orthonormality_error();
        if !(err <= Self::tolerance()) {
            return Err(Error::Degenerate(format!("axes not orthonormal (error {err})")));
        }
        if mat3_det(&axes) <= T::zero() {
            return Err(Error::Degenerate("axes are left-handed".into()));
        }
        Ok(frame)
    }

    pub fn identity(origin: Vec3<T>) -> Self {
        Self {
            origin,
            axes: mat3_identity(),
        }
    }

    /// ‖A·Aᵀ − I‖∞ (max-abs entry).
    pub fn orthonormality_error(&self) -> T {
        let mut worst = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                let d = Vec3(self.axes[i]).dot(Vec3(self.axes[j]));
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((d - target).abs());
            }
        }
        worst
    }

    pub fn axis(&self, k: usize) -> Vec3<T> {
        Vec3(self.axes[k])
    }

    /// Coordinates of a point in this frame.
    pub fn to_local(&self, p: Vec3<T>) -> Vec3<T> {
        mat3_mul_vec(&self.axes, p - self.origin)
    }

    /// Components of a direction in this frame.
    pub fn direction_to_local(&self, v: Vec3<T>) -> Vec3<T> {
        mat3_mul_vec(&self.axes, v)
    }
}
