use std::fmt;
use std::str::FromStr;

use super::{BlockKind, Entity};
use crate::error::{Error, Result};

/// How a block is treated by the default normalization policy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockCategory {
    /// Physical or graph scalars: z-scored.
    Scalar,
    /// Cosines and [0, 1] scores: left as is.
    Angle,
    /// Triples of unit axes: embedded as orientations (3 → 6 per axis).
    Axis,
    /// Hop counts: clipped, then z-scored.
    Hops,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockSpec {
    pub entity: Entity,
    pub name: &'static str,
    pub kind: BlockKind,
    pub width: usize,
    pub units: &'static str,
    pub category: BlockCategory,
    /// Part of the default feature set.
    pub default: bool,
}

const fn spec(
    entity: Entity,
    name: &'static str,
    kind: BlockKind,
    width: usize,
    units: &'static str,
    category: BlockCategory,
    default: bool,
) -> BlockSpec {
    BlockSpec {
        entity,
        name,
        kind,
        width,
        units,
        category,
        default,
    }
}

use BlockCategory::*;
use BlockKind::*;
use Entity::*;

/// Canonical block vocabulary in manifest order.
pub const CATALOG: &[BlockSpec] = &[
    spec(Node, "center_of_mass", Covariant, 3, "um", Scalar, true),
    spec(Node, "com_grs_angles", Covariant, 3, "cos", Angle, false),
    spec(Node, "lrs_axes", Covariant, 9, "unit", Axis, true),
    spec(Node, "lrs_grs_angles", Covariant, 9, "cos", Angle, true),
    spec(Node, "growth_surface_angle", Invariant, 1, "cos", Angle, true),
    spec(Node, "growth_alignment", Invariant, 1, "score", Angle, true),
    spec(Node, "lrs_lengths", Invariant, 3, "um", Scalar, true),
    spec(Node, "pca_axes", Covariant, 9, "unit", Axis, true),
    spec(Node, "pca_grs_angles", Covariant, 9, "cos", Angle, true),
    spec(Node, "pca_explained_variance", Invariant, 3, "um2", Scalar, true),
    spec(Node, "surface_area", Invariant, 1, "um2", Scalar, true),
    spec(Node, "volume", Invariant, 1, "um3", Scalar, true),
    spec(Node, "lengths_uniform", Covariant, 64, "um", Scalar, false),
    spec(Node, "hops_to_surface", Invariant, 1, "hops", Hops, true),
    spec(Node, "degree_centrality", Invariant, 1, "1", Scalar, true),
    spec(Node, "cfc_centrality", Invariant, 1, "1", Scalar, true),
    spec(Node, "local_degree_profile", Invariant, 5, "degree", Scalar, false),
    spec(Edge, "boundary_com", Covariant, 3, "um", Scalar, true),
    spec(Edge, "com_distance", Invariant, 1, "um", Scalar, true),
    spec(Edge, "com_grs_angles", Covariant, 3, "cos", Angle, true),
    spec(Edge, "lrs_projection", Invariant, 3, "cos", Angle, true),
    spec(Edge, "contact_area", Invariant, 1, "um2", Scalar, true),
];

/// Node width of the default feature set after orientation embedding.
pub const DEFAULT_NODE_WIDTH: usize = 70;
/// Edge width of the default feature set.
pub const DEFAULT_EDGE_WIDTH: usize = 11;

pub fn block_spec(entity: Entity, name: &str) -> Option<&'static BlockSpec> {
    CATALOG.iter().find(|s| s.entity == entity && s.name == name)
}

pub fn default_blocks(entity: Entity) -> impl Iterator<Item = &'static BlockSpec> {
    CATALOG.iter().filter(move |s| s.entity == entity && s.default)
}

/// Which node blocks enter a bundle. Edge blocks always use the default set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FeatureSelection {
    /// The default set.
    All,
    InvariantOnly,
    CovariantOnly,
    DegreeProfileOnly,
    /// Explicit block names, in catalog order.
    Named(Vec<String>),
}

impl FeatureSelection {
    /// Node blocks selected, in catalog order.
    pub fn node_blocks(&self) -> Result<Vec<&'static BlockSpec>> {
        let nodes = CATALOG.iter().filter(|s| s.entity == Node);
        Ok(match self {
            FeatureSelection::All => nodes.filter(|s| s.default).collect(),
            FeatureSelection::InvariantOnly => {
                nodes.filter(|s| s.default && s.kind == Invariant).collect()
            }
            FeatureSelection::CovariantOnly => {
                nodes.filter(|s| s.default && s.kind == Covariant).collect()
            }
            FeatureSelection::DegreeProfileOnly => {
                nodes.filter(|s| s.name == "local_degree_profile").collect()
            }
            FeatureSelection::Named(names) => {
                for n in names {
                    if block_spec(Node, n).is_none() {
                        return Err(Error::UnknownBlock(n.clone()));
                    }
                }
                nodes.filter(|s| names.iter().any(|n| n == s.name)).collect()
            }
        })
    }

    pub fn edge_blocks(&self) -> Vec<&'static BlockSpec> {
        default_blocks(Edge).collect()
    }
}

impl fmt::Display for FeatureSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureSelection::All => f.write_str("all"),
            FeatureSelection::InvariantOnly => f.write_str("invariant-only"),
            FeatureSelection::CovariantOnly => f.write_str("covariant-only"),
            FeatureSelection::DegreeProfileOnly => f.write_str("degree-profile-only"),
            FeatureSelection::Named(v) => f.write_str(&v.join("+")),
        }
    }
}

impl FromStr for FeatureSelection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let sel = match s {
            "all" => FeatureSelection::All,
            "invariant-only" => FeatureSelection::InvariantOnly,
            "covariant-only" => FeatureSelection::CovariantOnly,
            "degree-profile-only" => FeatureSelection::DegreeProfileOnly,
            other => FeatureSelection::Named(other.split('+').map(str::to_string).collect()),
        };
        sel.node_blocks()?;
        Ok(sel)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn embedded_width(s: &BlockSpec) -> usize {
        if s.category == Axis {
            s.width * 2
        } else {
            s.width
        }
    }

    #[test]
    fn default_widths() {
        let node: usize = default_blocks(Node).map(embedded_width).sum();
        let edge: usize = default_blocks(Edge).map(|s| s.width).sum();
        assert_eq!(node, DEFAULT_NODE_WIDTH);
        assert_eq!(edge, DEFAULT_EDGE_WIDTH);
    }

    #[test]
    fn selections_resolve() {
        let inv = FeatureSelection::InvariantOnly.node_blocks().unwrap();
        assert!(inv.iter().all(|s| s.kind == Invariant));
        assert_eq!(
            FeatureSelection::DegreeProfileOnly.node_blocks().unwrap()[0].name,
            "local_degree_profile"
        );
        assert!("volume+hops_to_surface".parse::<FeatureSelection>().is_ok());
        assert!(matches!("nonsense".parse::<FeatureSelection>(), Err(Error::UnknownBlock(_))));
    }
}
