//! Node and edge feature catalog.
//!
//! Every block has a canonical name, an entity (node or edge), a kind
//! (invariant under rigid motions of the specimen, or dependent on the
//! reference frame) and a fixed width. Covariant vectors are expressed in
//! the global reference frame. All "angles" are cosines in [-1, 1].

mod catalog;
mod centrality;
mod edge;
mod node;
mod optional;

pub use catalog::{
    block_spec, default_blocks, BlockCategory, BlockSpec, FeatureSelection, CATALOG,
    DEFAULT_EDGE_WIDTH, DEFAULT_NODE_WIDTH,
};
pub use centrality::{current_flow_closeness, degree_centrality};
pub use edge::edge_features;
pub use node::{node_geometry_features, node_graph_features};
pub use optional::{fibonacci_directions, local_degree_profile, optional_features, UNIFORM_DIRECTIONS};

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::frames::{LocalAxes, ReferenceFrame};
use crate::graph::CellGraph;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlockKind {
    Invariant,
    Covariant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Entity {
    Node,
    Edge,
}

impl BlockKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BlockKind::Invariant => "invariant",
            BlockKind::Covariant => "covariant",
        }
    }
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BlockKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "invariant" => Ok(BlockKind::Invariant),
            "covariant" => Ok(BlockKind::Covariant),
            _ => Err(Error::Invalid(format!("unknown block kind {s}"))),
        }
    }
}

impl Entity {
    pub fn as_str(self) -> &'static str {
        match self {
            Entity::Node => "node",
            Entity::Edge => "edge",
        }
    }
}

/// One named feature matrix (rows = nodes or edges).
#[derive(Clone, Debug, PartialEq)]
pub struct RawFeatureBlock<T> {
    pub name: &'static str,
    pub kind: BlockKind,
    pub entity: Entity,
    pub units: &'static str,
    pub values: Array2<T>,
    /// Rows whose value came from a degenerate-case fallback.
    pub flags: Vec<bool>,
}

impl<T: Real> RawFeatureBlock<T> {
    /// Builds a block, checking its width against the catalog.
    pub fn new(entity: Entity, name: &'static str, values: Array2<T>, flags: Vec<bool>) -> Result<Self> {
        let spec = block_spec(entity, name).ok_or_else(|| Error::UnknownBlock(name.into()))?;
        if values.ncols() != spec.width {
            return Err(Error::Shape(format!(
                "block {name}: width {} != catalog width {}",
                values.ncols(),
                spec.width
            )));
        }
        if flags.len() != values.nrows() {
            return Err(Error::Shape(format!("block {name}: flag count mismatch")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("block {name} contains non-finite values")));
        }
        Ok(Self {
            name,
            kind: spec.kind,
            entity,
            units: spec.units,
            values,
            flags,
        })
    }

    pub(crate) fn from_rows(entity: Entity, name: &'static str, rows: Vec<Vec<T>>, flags: Vec<bool>) -> Result<Self> {
        let width = block_spec(entity, name)
            .ok_or_else(|| Error::UnknownBlock(name.into()))?
            .width;
        let n = rows.len();
        let flat: Vec<T> = rows.into_iter().flatten().collect();
        let values = Array2::from_shape_vec((n, width), flat)
            .map_err(|e| Error::Shape(format!("block {name}: {e}")))?;
        Self::new(entity, name, values, flags)
    }

    pub fn width(&self) -> usize {
        self.values.ncols()
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }
}

/// Every catalog block for one specimen (node and edge), in catalog order.
pub fn compute_all_blocks<T: Real>(
    g: &CellGraph<T>,
    frame: &ReferenceFrame<T>,
    local: &LocalAxes<T>,
    hops: &[u32],
) -> Result<Vec<RawFeatureBlock<T>>> {
    let mut blocks = node_geometry_features(g, frame, local)?;
    blocks.extend(node_graph_features(g, hops)?);
    blocks.extend(optional_features(g, frame)?);
    blocks.extend(edge_features(g, frame, local)?);
    let order = |b: &RawFeatureBlock<T>| {
        CATALOG
            .iter()
            .position(|s| s.entity == b.entity && s.name == b.name)
            .unwrap_or(usize::MAX)
    };
    blocks.sort_by_key(order);
    Ok(blocks)
}
