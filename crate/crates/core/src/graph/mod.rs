//! Cell adjacency graph construction and surface sampling.

mod build;
mod fps;
mod normal;
mod topology;

pub use build::{build_adjacency, contact_area, DEFAULT_SAMPLES};
pub use fps::{fps_indices, fps_sample};
pub use normal::boundary_normal;
pub use topology::Topology;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{mat3_mul_vec, Mat3, Vec3};
use crate::scalar::Real;

/// A shared cell wall (or the wall between a cell and the background).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BoundaryPatch<T> {
    /// Contact area in µm².
    pub area: T,
    /// Farthest-point samples of the voxel-face centers, µm.
    pub samples: Vec<Vec3<T>>,
    /// Unit normal. Edges: from the lower to the higher node index.
    /// Background patches: pointing out of the cell.
    pub normal: Vec3<T>,
    /// The normal came from the fallback rule.
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CellNode<T> {
    pub cell_id: u32,
    /// Center of mass, µm.
    pub com: Vec3<T>,
    /// µm³
    pub volume: T,
    /// µm², sum of all contact areas including the background one.
    pub surface_area: T,
    pub surface_samples: Vec<Vec3<T>>,
    pub background: Option<BoundaryPatch<T>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CellEdge<T> {
    /// Node indices with `a < b`.
    pub a: usize,
    pub b: usize,
    pub patch: BoundaryPatch<T>,
}

/// Cell adjacency graph: one node per cell, one edge per pair of face-touching cells.
///
/// Nodes are ordered by ascending cell id, edges by `(a, b)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CellGraph<T> {
    pub specimen_id: String,
    pub stage: String,
    /// Requested samples per node/edge.
    pub k: usize,
    nodes: Vec<CellNode<T>>,
    edges: Vec<CellEdge<T>>,
    topology: Topology,
}

impl<T: Real> CellGraph<T> {
    pub fn from_parts(
        specimen_id: impl Into<String>,
        stage: impl Into<String>,
        k: usize,
        nodes: Vec<CellNode<T>>,
        mut edges: Vec<CellEdge<T>>,
    ) -> Result<Self> {
        for w in nodes.windows(2) {
            if w[0].cell_id >= w[1].cell_id {
                return Err(Error::Invalid("nodes must be sorted by unique cell id".into()));
            }
        }
        if edges.iter().any(|e| e.a >= e.b) {
            return Err(Error::Invalid("edges must satisfy a < b".into()));
        }
        edges.sort_by_key(|e| (e.a, e.b));
        let pairs: Vec<(usize, usize)> = edges.iter().map(|e| (e.a, e.b)).collect();
        let surface = nodes.iter().map(|n| n.background.is_some()).collect();
        let topology = Topology::new(nodes.len(), &pairs, surface)?;
        Ok(Self {
            specimen_id: specimen_id.into(),
            stage: stage.into(),
            k,
            nodes,
            edges,
            topology,
        })
    }

    /// A geometry-free graph (unit volumes, zero positions) for graph-only computations.
    pub fn from_topology(n: usize, edges: &[(usize, usize)], surface: &[usize]) -> Result<Self> {
        let nodes = (0..n)
            .map(|i| CellNode {
                cell_id: i as u32 + 1,
                com: Vec3::zero(),
                volume: T::one(),
                surface_area: T::zero(),
                surface_samples: Vec::new(),
                background: surface.contains(&i).then(|| BoundaryPatch {
                    area: T::zero(),
                    samples: Vec::new(),
                    normal: Vec3::zero(),
                    degenerate: true,
                }),
            })
            .collect();
        let edges = edges
            .iter()
            .map(|&(a, b)| CellEdge {
                a: a.min(b),
                b: a.max(b),
                patch: BoundaryPatch {
                    area: T::zero(),
                    samples: Vec::new(),
                    normal: Vec3::zero(),
                    degenerate: true,
                },
            })
            .collect();
        Self::from_parts("synthetic", "", 0, nodes, edges)
    }

    pub fn nodes(&self) -> &[CellNode<T>] {
        &self.nodes
    }

    pub fn nodes_mut(&mut self) -> &mut [CellNode<T>] {
        &mut self.nodes
    }

    pub fn edges(&self) -> &[CellEdge<T>] {
        &self.edges
    }

    pub fn edges_mut(&mut self) -> &mut [CellEdge<T>] {
        &mut self.edges
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Node index of a cell id.
    pub fn node_index(&self, cell_id: u32) -> Option<usize> {
        self.nodes.binary_search_by_key(&cell_id, |n| n.cell_id).ok()
    }

    /// Node indices touching the background.
    pub fn background_adjacency(&self) -> Vec<usize> {
        self.topology.surface_nodes().collect()
    }

    pub fn coms(&self) -> Vec<Vec3<T>> {
        self.nodes.iter().map(|n| n.com).collect()
    }

    /// Normal of edge `e` oriented from node `from` toward the other endpoint.
    pub fn oriented_normal(&self, e: usize, from: usize) -> Vec3<T> {
        let edge = &self.edges[e];
        if edge.a == from {
            edge.patch.normal
        } else {
            -edge.patch.normal
        }
    }

    /// Applies `p ↦ R·p + t` to every position and re-derives all normals
    /// from the transformed samples. Areas and volumes are unchanged.
    pub fn rigid_transformed(&self, rotation: &Mat3<T>, translation: Vec3<T>) -> Self {
        let map = |p: Vec3<T>| mat3_mul_vec(rotation, p) + translation;
        let mut out = self.clone();
        for node in out.nodes.iter_mut() {
            node.com = map(node.com);
            node.surface_samples.iter_mut().for_each(|p| *p = map(*p));
            let com = node.com;
            if let Some(bg) = node.background.as_mut() {
                bg.samples.iter_mut().for_each(|p| *p = map(*p));
                let (n, deg) = build::background_normal(&bg.samples, com);
                bg.normal = n;
                bg.degenerate = deg;
            }
        }
        let coms = out.coms();
        for edge in out.edges.iter_mut() {
            edge.patch.samples.iter_mut().for_each(|p| *p = map(*p));
            let (n, deg) = boundary_normal(&edge.patch.samples, coms[edge.a], coms[edge.b]);
            edge.patch.normal = n;
            edge.patch.degenerate = deg;
        }
        out
    }
}
