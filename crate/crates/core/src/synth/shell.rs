use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{enforce_connectivity, CellTruth, SynthOrgan};
use crate::error::{Error, Result};
use crate::features::fibonacci_directions;
use crate::linalg::{mat3_mul_vec, Mat3, Vec3};
use crate::volume::{LabelTable, LabeledVolume, MAX_CLASS};

/// Concentric-layer organ. Layer 1 is the outermost shell; the innermost
/// layer is a ball. Each layer is cut into cells by a spherical Voronoi
/// partition of evenly spread, randomly rotated seed directions.
#[derive(Clone, Debug, PartialEq)]
pub struct ShellSpec {
    /// Cells per layer, outermost first.
    pub cells_per_layer: Vec<usize>,
    /// Outer radius, µm.
    pub radius: f64,
    /// Isotropic voxel edge, µm.
    pub voxel_size: f64,
    pub seed: u64,
    /// Per-axis stretch turning the sphere into an ellipsoid.
    pub stretch: [f64; 3],
    pub specimen_id: String,
    pub stage: String,
}

impl Default for ShellSpec {
    fn default() -> Self {
        Self {
            cells_per_layer: vec![100, 45, 10],
            radius: 24.0,
            voxel_size: 1.0,
            seed: 0,
            stretch: [1.0; 3],
            specimen_id: "shell".into(),
            stage: "2-IV".into(),
        }
    }
}

impl ShellSpec {
    pub fn layers(&self) -> usize {
        self.cells_per_layer.len()
    }

    pub fn total_cells(&self) -> usize {
        self.cells_per_layer.iter().sum()
    }

    fn validate(&self) -> Result<()> {
        let l = self.layers();
        if l == 0 || l > MAX_CLASS as usize {
            return Err(Error::Invalid(format!("layer count must be 1..={MAX_CLASS}, got {l}")));
        }
        if self.cells_per_layer.contains(&0) {
            return Err(Error::Invalid("every layer needs at least one cell".into()));
        }
        if !(self.radius > 0.0 && self.voxel_size > 0.0) || self.stretch.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::Invalid("radius, voxel size and stretch must be positive".into()));
        }
        let thickness = self.radius / l as f64 / self.voxel_size;
        if thickness < 3.0 {
            return Err(Error::Invalid(format!(
                "layers are {thickness:.2} voxels thick; need at least 3"
            )));
        }
        Ok(())
    }
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Mat3<f64> {
    let mut q = [0.0f64; 4];
    loop {
        for v in &mut q {
            *v = StandardNormal.sample(rng);
        }
        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 1e-6 {
            q.iter_mut().for_each(|v| *v /= n);
            break;
        }
    }
    let [w, x, y, z] = q;
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

pub fn make_shell_organ(spec: &ShellSpec) -> Result<SynthOrgan> {
    spec.validate()?;
    let layers = spec.layers();
    let vox = spec.voxel_size;
    let dims: [usize; 3] =
        std::array::from_fn(|k| (2.0 * spec.radius * spec.stretch[k] / vox).ceil() as usize + 4);
    let center: [f64; 3] = std::array::from_fn(|k| dims[k] as f64 * vox / 2.0);

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut seeds: Vec<Vec<Vec3<f64>>> = Vec::with_capacity(layers);
    let mut first_id = Vec::with_capacity(layers);
    let mut layer_of = BTreeMap::new();
    let mut next = 1u32;
    for (l, &n) in spec.cells_per_layer.iter().enumerate() {
        let rot = random_rotation(&mut rng);
        seeds.push(fibonacci_directions::<f64>(n).into_iter().map(|d| mat3_mul_vec(&rot, d)).collect());
        first_id.push(next);
        for _ in 0..n {
            layer_of.insert(next, l as u32 + 1);
            next += 1;
        }
    }

    let shell = spec.radius / layers as f64;
    let mut data = vec![0u32; dims[0] * dims[1] * dims[2]];
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                let p = [x, y, z].map(|c| c as f64);
                let q: Vec3<f64> = Vec3::from_f64(std::array::from_fn(|k| ((p[k] + 0.5) * vox - center[k]) / spec.stretch[k]));
                let r = q.norm();
                if r > spec.radius {
                    continue;
                }
                let l = (((spec.radius - r) / shell).floor() as usize).min(layers - 1);
                let dir = q.try_normalize(0.0).unwrap_or(Vec3::unit(2));
                let mut best = 0;
                let mut best_dot = f64::NEG_INFINITY;
                for (s, &d) in seeds[l].iter().enumerate() {
                    let dot = dir.dot(d);
                    if dot > best_dot {
                        best_dot = dot;
                        best = s;
                    }
                }
                data[x + dims[0] * (y + dims[1] * z)] = first_id[l] + best as u32;
            }
        }
    }
    enforce_connectivity(&mut data, dims, &layer_of)?;

    let mut sums: BTreeMap<u32, ([f64; 3], usize)> = BTreeMap::new();
    for (i, &c) in data.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let p = [i % dims[0], (i / dims[0]) % dims[1], i / (dims[0] * dims[1])];
        let e = sums.entry(c).or_insert(([0.0; 3], 0));
        for k in 0..3 {
            e.0[k] += (p[k] as f64 + 0.5) * vox;
        }
        e.1 += 1;
    }
    let truth = sums
        .iter()
        .map(|(&cell, (s, n))| {
            let com: [f64; 3] = std::array::from_fn(|k| s[k] / *n as f64);
            // gradient of Σ (x_k / s_k)²
            let g: Vec3<f64> = Vec3::from_f64(std::array::from_fn(|k| (com[k] - center[k]) / (spec.stretch[k] * spec.stretch[k])));
            CellTruth {
                cell_id: cell,
                layer: layer_of[&cell],
                radial: g.try_normalize(0.0).unwrap_or(Vec3::unit(2)).0,
                file_direction: None,
            }
        })
        .collect();
    let labels = LabelTable::new(layer_of.iter().map(|(&c, &l)| (c, l as u8)).collect())?;
    let volume = LabeledVolume::new(dims, [vox; 3], data, spec.specimen_id.clone(), spec.stage.clone())?;
    Ok(SynthOrgan { volume, labels, truth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::validate_connectivity;

    fn small() -> ShellSpec {
        ShellSpec {
            cells_per_layer: vec![20, 6],
            radius: 10.0,
            ..ShellSpec::default()
        }
    }

    #[test]
    fn counts_and_connectivity() {
        let o = make_shell_organ(&small()).unwrap();
        assert_eq!(o.volume.cell_ids().len(), 26);
        assert_eq!(o.labels.len(), 26);
        assert!(validate_connectivity(&o.volume).passed());
        assert!(o.volume.has_boundary_background());
        assert_eq!(o.truth.len(), 26);
    }

    #[test]
    fn deterministic() {
        let a = make_shell_organ(&small()).unwrap();
        let b = make_shell_organ(&small()).unwrap();
        assert_eq!(a.volume, b.volume);
        let c = make_shell_organ(&ShellSpec { seed: 9, ..small() }).unwrap();
        assert_ne!(a.volume, c.volume);
    }

    #[test]
    fn rejects_thin_layers() {
        let s = ShellSpec {
            cells_per_layer: vec![4; 5],
            radius: 10.0,
            ..ShellSpec::default()
        };
        assert!(make_shell_organ(&s).is_err());
        assert!(make_shell_organ(&ShellSpec { cells_per_layer: vec![], ..small() }).is_err());
    }
}
