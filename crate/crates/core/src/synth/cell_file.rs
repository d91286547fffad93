use std::collections::BTreeMap;

use super::{CellTruth, SynthOrgan};
use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::volume::{LabelTable, LabeledVolume, CellClass};

/// A straight file of `n` equal box-shaped cells along an arbitrary direction.
#[derive(Clone, Debug, PartialEq)]
pub struct CellFileSpec {
    pub cells: usize,
    pub direction: [f64; 3],
    /// Isotropic voxel edge, µm.
    pub voxel_size: f64,
    /// Cell length along the file, in voxels.
    pub cell_length: f64,
    /// Cross-section edge, in voxels.
    pub width: f64,
    pub specimen_id: String,
    pub stage: String,
}

impl CellFileSpec {
    pub fn new(cells: usize, direction: [f64; 3], voxel_size: f64) -> Self {
        Self {
            cells,
            direction,
            voxel_size,
            cell_length: 6.0,
            width: 4.0,
            specimen_id: "file".into(),
            stage: "2-IV".into(),
        }
    }
}

/// Builds the file; every cell gets class L1 and layer 1.
pub fn make_cell_file(spec: &CellFileSpec) -> Result<SynthOrgan> {
    if spec.cells < 3 {
        return Err(Error::Invalid(format!("a cell file needs at least 3 cells, got {}", spec.cells)));
    }
    if spec.cell_length < 4.0 || spec.width < 3.0 || !(spec.voxel_size > 0.0) {
        return Err(Error::Invalid("cells must be at least 4 voxels long and 3 wide".into()));
    }
    let d: Vec3<f64> = Vec3::from_f64(spec.direction)
        .try_normalize(1e-12)
        .ok_or_else(|| Error::Invalid("file direction is zero".into()))?;
    // orthonormal cross-section axes
    let helper = if d[0].abs() < 0.9 { Vec3::unit(0) } else { Vec3::unit(1) };
    let u = d.cross(helper).try_normalize(0.0).expect("non-parallel helper");
    let v = d.cross(u);

    let half_len = spec.cells as f64 * spec.cell_length / 2.0;
    let half_w = spec.width / 2.0;
    let reach: [f64; 3] =
        std::array::from_fn(|k| half_len * d[k].abs() + half_w * (u[k].abs() + v[k].abs()));
    let dims: [usize; 3] = std::array::from_fn(|k| (2.0 * reach[k]).ceil() as usize + 4);
    let center: [f64; 3] = std::array::from_fn(|k| dims[k] as f64 / 2.0);

    let mut data = vec![0u32; dims[0] * dims[1] * dims[2]];
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                let p = Vec3::new(x as f64 + 0.5 - center[0], y as f64 + 0.5 - center[1], z as f64 + 0.5 - center[2]);
                let t = p.dot(d) + half_len;
                if t < 0.0 || t >= 2.0 * half_len || p.dot(u).abs() > half_w || p.dot(v).abs() > half_w {
                    continue;
                }
                let cell = (t / spec.cell_length).floor() as u32 + 1;
                data[x + dims[0] * (y + dims[1] * z)] = cell;
            }
        }
    }
    let n = spec.cells as u32;
    let layer_of: BTreeMap<u32, u32> = (1..=n).map(|c| (c, 1)).collect();
    super::enforce_connectivity(&mut data, dims, &layer_of)?;
    let truth = (1..=n)
        .map(|c| CellTruth {
            cell_id: c,
            layer: 1,
            radial: [0.0; 3],
            file_direction: Some(d.0),
        })
        .collect();
    let labels = LabelTable::new((1..=n).map(|c| (c, CellClass::L1.id())).collect())?;
    let volume = LabeledVolume::new(
        dims,
        [spec.voxel_size; 3],
        data,
        spec.specimen_id.clone(),
        spec.stage.clone(),
    )?;
    Ok(SynthOrgan { volume, labels, truth })
}
