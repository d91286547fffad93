use std::collections::{BTreeMap, HashMap};

use super::{boundary_normal, fps_sample, BoundaryPatch, CellEdge, CellGraph, CellNode};
use crate::error::{Error, Result};
use crate::linalg::{mean3, Vec3};
use crate::scalar::Real;
use crate::volume::{LabeledVolume, BACKGROUND};

/// Samples drawn per node and per edge unless configured otherwise.
pub const DEFAULT_SAMPLES: usize = 500;

#[derive(Default)]
struct FaceSet {
    /// Face counts per normal axis.
    counts: [u64; 3],
    centers: Vec<[f64; 3]>,
}

impl FaceSet {
    fn push(&mut self, axis: usize, center: [f64; 3]) {
        self.counts[axis] += 1;
        self.centers.push(center);
    }

    fn area(&self, vol: &LabeledVolume) -> f64 {
        (0..3).map(|a| self.counts[a] as f64 * vol.face_area(a)).sum()
    }
}

fn to_points<T: Real>(centers: &[[f64; 3]]) -> Vec<Vec3<T>> {
    centers.iter().map(|&c| Vec3::from_f64(c)).collect()
}

/// Outward normal of a cell/background patch.
pub(super) fn background_normal<T: Real>(samples: &[Vec3<T>], com: Vec3<T>) -> (Vec3<T>, bool) {
    let outward = mean3(samples);
    boundary_normal(samples, com, outward)
}

/// Builds the cell adjacency graph of `vol`, sampling `k` points per node and edge.
///
/// Cells are adjacent when a voxel of one shares a face with a voxel of the
/// other. Contacts with background voxels or with the outside of the grid
/// are recorded on the node, never as edges.
pub fn build_adjacency<T: Real>(vol: &LabeledVolume, k: usize) -> Result<CellGraph<T>> {
    if k == 0 {
        return Err(Error::Invalid("samples per entity must be >= 1".into()));
    }
    let ids = vol.cell_ids();
    if ids.len() < 2 {
        return Err(Error::Invalid(format!(
            "volume has {} cell(s); at least 2 required",
            ids.len()
        )));
    }
    let index: HashMap<u32, usize> = ids.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let n = ids.len();
    let mut voxel_count = vec![0u64; n];
    let mut com_sum = vec![[0f64; 3]; n];
    let mut surface: Vec<FaceSet> = (0..n).map(|_| FaceSet::default()).collect();
    let mut background: Vec<FaceSet> = (0..n).map(|_| FaceSet::default()).collect();
    let mut contacts: BTreeMap<(usize, usize), FaceSet> = BTreeMap::new();
    let spacing = vol.spacing();
    let data = vol.data();

    for (vi, &id) in data.iter().enumerate() {
        if id == BACKGROUND {
            continue;
        }
        let a = index[&id];
        let c = vol.coords(vi);
        let center = vol.voxel_center(c);
        voxel_count[a] += 1;
        for k in 0..3 {
            com_sum[a][k] += center[k];
        }
        for axis in 0..3 {
            for positive in [false, true] {
                let other = vol
                    .neighbor(c, axis, positive)
                    .map(|nc| vol.get(nc[0], nc[1], nc[2]))
                    .unwrap_or(BACKGROUND);
                if other == id {
                    continue;
                }
                let mut face = center;
                let half = 0.5 * spacing[axis];
                face[axis] += if positive { half } else { -half };
                surface[a].push(axis, face);
                if other == BACKGROUND {
                    background[a].push(axis, face);
                } else {
                    let b = index[&other];
                    if a < b {
                        contacts.entry((a, b)).or_default().push(axis, face);
                    }
                }
            }
        }
    }

    let voxel_volume = vol.voxel_volume();
    let coms: Vec<Vec3<T>> = (0..n)
        .map(|i| {
            let inv = 1.0 / voxel_count[i] as f64;
            Vec3::from_f64([com_sum[i][0] * inv, com_sum[i][1] * inv, com_sum[i][2] * inv])
        })
        .collect();

    let mut edges = Vec::with_capacity(contacts.len());
    for ((a, b), faces) in &contacts {
        let samples = fps_sample(&to_points::<T>(&faces.centers), k)?;
        let (normal, degenerate) = boundary_normal(&samples, coms[*a], coms[*b]);
        edges.push(CellEdge {
            a: *a,
            b: *b,
            patch: BoundaryPatch {
                area: T::lit(faces.area(vol)),
                samples,
                normal,
                degenerate,
            },
        });
    }

    let mut nodes = Vec::with_capacity(n);
    for i in 0..n {
        let bg = &background[i];
        let bg_patch = if bg.centers.is_empty() {
            None
        } else {
            let samples = fps_sample(&to_points::<T>(&bg.centers), k)?;
            let (normal, degenerate) = background_normal(&samples, coms[i]);
            Some(BoundaryPatch {
                area: T::lit(bg.area(vol)),
                samples,
                normal,
                degenerate,
            })
        };
        nodes.push(CellNode {
            cell_id: ids[i],
            com: coms[i],
            volume: T::lit(voxel_count[i] as f64 * voxel_volume),
            surface_area: T::zero(),
            surface_samples: fps_sample(&to_points::<T>(&surface[i].centers), k)?,
            background: bg_patch,
        });
    }

    let mut graph = CellGraph::from_parts(vol.specimen_id.clone(), vol.stage.clone(), k, nodes, edges)?;
    graph.topology().ensure_connected()?;
    // surface area = Σ neighbour contacts (in adjacency order) + background contact
    let areas: Vec<T> = (0..n)
        .map(|i| {
            let mut s = T::zero();
            for &(_, e) in graph.topology().neighbors(i) {
                s += graph.edges()[e].patch.area;
            }
            if let Some(bg) = &graph.nodes()[i].background {
                s += bg.area;
            }
            s
        })
        .collect();
    for (node, area) in graph.nodes_mut().iter_mut().zip(areas) {
        node.surface_area = area;
    }
    Ok(graph)
}

/// Contact area in µm² between cell `i` and cell `j` (`j = 0` for background,
/// which includes the outside of the grid). Zero when they do not touch.
pub fn contact_area(vol: &LabeledVolume, i: u32, j: u32) -> Result<f64> {
    if i == j {
        return Err(Error::Invalid("contact area needs two distinct ids".into()));
    }
    if i == BACKGROUND {
        return Err(Error::Invalid("first id must be a cell".into()));
    }
    let data = vol.data();
    let mut found_i = false;
    let mut found_j = j == BACKGROUND;
    let mut counts = [0u64; 3];
    for (vi, &id) in data.iter().enumerate() {
        if id == j {
            found_j = true;
        }
        if id != i {
            continue;
        }
        found_i = true;
        let c = vol.coords(vi);
        for axis in 0..3 {
            for positive in [false, true] {
                let other = vol
                    .neighbor(c, axis, positive)
                    .map(|nc| vol.get(nc[0], nc[1], nc[2]))
                    .unwrap_or(BACKGROUND);
                if other == j {
                    counts[axis] += 1;
                }
            }
        }
    }
    if !found_i {
        return Err(Error::UnknownCell(i));
    }
    if !found_j {
        return Err(Error::UnknownCell(j));
    }
    Ok((0..3).map(|a| counts[a] as f64 * vol.face_area(a)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vol(dims: [usize; 3], spacing: [f64; 3], data: Vec<u32>) -> LabeledVolume {
        LabeledVolume::new(dims, spacing, data, "t", "2-III").unwrap()
    }

    #[test]
    fn two_abutting_voxels_one_edge() {
        let g = build_adjacency::<f64>(&vol([2, 1, 1], [1.0; 3], vec![1, 2]), 500).unwrap();
        assert_eq!(g.num_edges(), 1);
        let e = &g.edges()[0];
        assert_eq!((e.a, e.b), (0, 1));
        assert_eq!(e.patch.area, 1.0);
        // 1 face shared, 5 faces on background each
        assert_eq!(g.nodes()[0].surface_area, 6.0);
        assert_eq!(g.nodes()[0].surface_samples.len(), 6);
        assert_eq!(g.nodes()[0].background.as_ref().unwrap().area, 5.0);
        assert_eq!(g.nodes()[1].com, Vec3::new(1.5, 0.5, 0.5));
    }

    #[test]
    fn row_of_five_is_a_path() {
        let g = build_adjacency::<f64>(&vol([1, 1, 5], [1.0; 3], vec![1, 2, 3, 4, 5]), 10).unwrap();
        let pairs: Vec<_> = g.topology().edges().to_vec();
        assert_eq!(pairs, vec![(0, 1), (1, 2), (2, 3), (3, 4)]);
        // every cell touches the outside of the grid
        assert_eq!(g.background_adjacency(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn anisotropic_contact_area() {
        let v = vol([2, 1, 1], [0.5, 0.5, 2.0], vec![1, 2]);
        assert_eq!(contact_area(&v, 1, 2).unwrap(), 1.0);
        let g = build_adjacency::<f64>(&v, 8).unwrap();
        assert_eq!(g.edges()[0].patch.area, 1.0);
        assert_eq!(g.nodes()[0].volume, 0.5);
        assert!(matches!(contact_area(&v, 1, 9), Err(Error::UnknownCell(9))));
    }

    #[test]
    fn errors_on_single_cell_and_disconnected() {
        assert!(build_adjacency::<f64>(&vol([2, 1, 1], [1.0; 3], vec![1, 1]), 4).is_err());
        let r = build_adjacency::<f64>(&vol([3, 1, 1], [1.0; 3], vec![1, 0, 2]), 4);
        assert!(matches!(r, Err(Error::Disconnected { components: 2 })));
    }

    #[test]
    fn background_normal_points_outward() {
        let g = build_adjacency::<f64>(&vol([1, 1, 2], [1.0; 3], vec![1, 2]), 50).unwrap();
        let e = &g.edges()[0];
        assert!((e.patch.normal - Vec3::new(0., 0., 1.)).norm() < 1e-12);
        let bg = g.nodes()[0].background.as_ref().unwrap();
        assert!(bg.normal.dot(Vec3::new(0., 0., -1.)) > 0.5);
    }
}
