//! Labeled 3D volumes, ground-truth label tables and their on-disk containers.

mod connectivity;
mod io;
mod labels;

pub use connectivity::{validate_connectivity, ConnectivityReport};
pub use io::{read_volume, write_volume, VOLUME_FORMAT_VERSION};
pub use labels::{
    merge_labels, read_label_table, write_label_table, CellClass, LabelTable, MAX_CLASS,
    MAX_RAW_CLASS,
};

use crate::error::{Error, Result};

/// Cell id reserved for background voxels.
pub const BACKGROUND: u32 = 0;

/// Developmental stage names used to stratify specimens.
pub const STAGES: [&str; 9] = [
    "2-III", "2-IV", "2-V", "3-I", "3-II", "3-III", "3-IV", "3-V", "3-VI",
];

/// Dense voxel grid of cell instance ids.
///
/// `dims = [nx, ny, nz]`, `spacing = [sx, sy, sz]` in µm per voxel. The payload
/// is row-major with z slowest: `index = x + nx * (y + ny * z)`. Voxel centers
/// sit at `((x + ½)·sx, (y + ½)·sy, (z + ½)·sz)`. Everything outside the grid
/// counts as background.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledVolume {
    dims: [usize; 3],
    spacing: [f64; 3],
    data: Vec<u32>,
    pub specimen_id: String,
    pub stage: String,
}

impl LabeledVolume {
    pub fn new(
        dims: [usize; 3],
        spacing: [f64; 3],
        data: Vec<u32>,
        specimen_id: impl Into<String>,
        stage: impl Into<String>,
    ) -> Result<Self> {
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::Invalid(format!("dims must be positive, got {dims:?}")));
        }
        let expected = dims[0]
            .checked_mul(dims[1])
            .and_then(|v| v.checked_mul(dims[2]))
            .ok_or_else(|| Error::Invalid("dims overflow".into()))?;
        if data.len() != expected {
            return Err(Error::SizeMismatch {
                what: "voxel payload".into(),
                expected,
                found: data.len(),
            });
        }
        if spacing.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidSpacing(spacing));
        }
        let specimen_id = specimen_id.into();
        let stage = stage.into();
        for (what, s) in [("specimen_id", &specimen_id), ("stage", &stage)] {
            if s.contains(['\n', '\r', '=']) {
                return Err(Error::Invalid(format!("{what} must not contain newlines or '='")));
            }
        }
        Ok(Self {
            dims,
            spacing,
            data,
            specimen_id,
            stage,
        })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn voxel_volume(&self) -> f64 {
        self.spacing[0] * self.spacing[1] * self.spacing[2]
    }

    /// Area of a voxel face whose normal points along `axis`.
    pub fn face_area(&self, axis: usize) -> f64 {
        match axis {
            0 => self.spacing[1] * self.spacing[2],
            1 => self.spacing[0] * self.spacing[2],
            _ => self.spacing[0] * self.spacing[1],
        }
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    #[inline]
    pub fn coords(&self, index: usize) -> [usize; 3] {
        let x = index % self.dims[0];
        let yz = index / self.dims[0];
        [x, yz % self.dims[1], yz / self.dims[1]]
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> u32 {
        self.data[self.index(x, y, z)]
    }

    /// Id of the face neighbour of `c` along `axis` in direction `dir` (±1),
    /// with out-of-grid positions reported as background.
    #[inline]
    pub fn neighbor(&self, c: [usize; 3], axis: usize, positive: bool) -> Option<[usize; 3]> {
        let mut n = c;
        if positive {
            if c[axis] + 1 >= self.dims[axis] {
                return None;
            }
            n[axis] += 1;
        } else {
            if c[axis] == 0 {
                return None;
            }
            n[axis] -= 1;
        }
        Some(n)
    }

    /// Physical center of a voxel in µm.
    pub fn voxel_center(&self, c: [usize; 3]) -> [f64; 3] {
        [
            (c[0] as f64 + 0.5) * self.spacing[0],
            (c[1] as f64 + 0.5) * self.spacing[1],
            (c[2] as f64 + 0.5) * self.spacing[2],
        ]
    }

    /// Sorted distinct non-background cell ids.
    pub fn cell_ids(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self.data.iter().copied().filter(|&v| v != BACKGROUND).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// True when some background voxel lies on the bounding-box boundary.
    pub fn has_boundary_background(&self) -> bool {
        let [nx, ny, nz] = self.dims;
        (0..self.data.len()).any(|i| {
            let [x, y, z] = self.coords(i);
            self.data[i] == BACKGROUND
                && (x == 0 || y == 0 || z == 0 || x + 1 == nx || y + 1 == ny || z + 1 == nz)
        })
    }

    /// Copy with ids remapped through `f` (background stays background).
    pub fn relabeled(&self, f: impl Fn(u32) -> u32) -> Self {
        let mut out = self.clone();
        for v in out.data.iter_mut() {
            if *v != BACKGROUND {
                *v = f(*v);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_grid_has_two_cells() {
        let v = LabeledVolume::new([2, 2, 2], [1.0; 3], vec![1, 1, 1, 1, 2, 2, 2, 2], "s", "2-III")
            .unwrap();
        assert_eq!(v.cell_ids(), vec![1, 2]);
        assert_eq!(v.coords(v.index(1, 0, 1)), [1, 0, 1]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            LabeledVolume::new([2, 2, 2], [1.0; 3], vec![0; 7], "s", "x"),
            Err(Error::SizeMismatch { expected: 8, found: 7, .. })
        ));
        assert!(matches!(
            LabeledVolume::new([1, 1, 1], [1.0, 0.0, 1.0], vec![0], "s", "x"),
            Err(Error::InvalidSpacing(_))
        ));
    }
}
