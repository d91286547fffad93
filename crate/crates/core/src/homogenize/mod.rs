//! Normalization of raw feature blocks and the on-disk feature bundle.

mod bundle;
mod ops;

pub use bundle::{read_bundle, write_bundle, BUNDLE_FORMAT_VERSION};
pub use ops::{
    clip_hops, mean_std, one_hot_hops, rp2_embed, unit_norm, zscore, zscore_with, DEFAULT_HOP_CAP,
    ZSCORE_EPS,
};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::features::{block_spec, BlockCategory, BlockKind, BlockSpec, Entity, FeatureSelection, RawFeatureBlock};
use crate::graph::Topology;
use crate::linalg::Vec3;
use crate::scalar::Real;

/// Transformation applied to one block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    None,
    ZScore,
    /// Each consecutive unit 3-vector replaced by its orientation embedding.
    Rp2,
    UnitNorm,
    /// Hop counts clipped at the cap, then z-scored.
    ClipZScore,
    /// Hop counts clipped and one-hot encoded over `1..=cap`.
    OneHot,
}

impl Normalization {
    pub fn as_str(self) -> &'static str {
        match self {
            Normalization::None => "none",
            Normalization::ZScore => "zscore",
            Normalization::Rp2 => "rp2",
            Normalization::UnitNorm => "unit_norm",
            Normalization::ClipZScore => "clip_zscore",
            Normalization::OneHot => "one_hot",
        }
    }

    pub fn default_for(category: BlockCategory) -> Self {
        match category {
            BlockCategory::Scalar => Normalization::ZScore,
            BlockCategory::Angle => Normalization::None,
            BlockCategory::Axis => Normalization::Rp2,
            BlockCategory::Hops => Normalization::ClipZScore,
        }
    }

    /// Output width for a block of raw width `width`.
    pub fn output_width(self, width: usize, hop_cap: u32) -> usize {
        match self {
            Normalization::Rp2 => width / 3 * 6,
            Normalization::OneHot => width * hop_cap.max(1) as usize,
            _ => width,
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Normalization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "none" => Normalization::None,
            "zscore" => Normalization::ZScore,
            "rp2" => Normalization::Rp2,
            "unit_norm" => Normalization::UnitNorm,
            "clip_zscore" => Normalization::ClipZScore,
            "one_hot" => Normalization::OneHot,
            _ => return Err(Error::Invalid(format!("unknown normalization {s}"))),
        })
    }
}

/// Where z-score statistics come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum StatsScope {
    #[default]
    Specimen,
    Dataset,
}

impl StatsScope {
    pub fn as_str(self) -> &'static str {
        match self {
            StatsScope::Specimen => "specimen",
            StatsScope::Dataset => "dataset",
        }
    }
}

impl FromStr for StatsScope {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "specimen" => Ok(StatsScope::Specimen),
            "dataset" => Ok(StatsScope::Dataset),
            _ => Err(Error::Invalid(format!("unknown stats scope {s}"))),
        }
    }
}

/// Per-block normalization choices. Blocks without an override use the
/// default for their category.
#[derive(Clone, Debug, PartialEq)]
pub struct NormPolicy {
    pub overrides: BTreeMap<(Entity, String), Normalization>,
    pub scope: StatsScope,
    pub hop_cap: u32,
}

impl Default for NormPolicy {
    fn default() -> Self {
        Self {
            overrides: BTreeMap::new(),
            scope: StatsScope::Specimen,
            hop_cap: DEFAULT_HOP_CAP,
        }
    }
}

impl NormPolicy {
    pub fn with(mut self, entity: Entity, name: &str, norm: Normalization) -> Result<Self> {
        let spec = block_spec(entity, name).ok_or_else(|| Error::UnknownBlock(name.into()))?;
        check_applicable(spec, norm)?;
        self.overrides.insert((entity, name.to_string()), norm);
        Ok(self)
    }

    pub fn for_block(&self, spec: &BlockSpec) -> Normalization {
        self.overrides
            .get(&(spec.entity, spec.name.to_string()))
            .copied()
            .unwrap_or_else(|| Normalization::default_for(spec.category))
    }
}

fn check_applicable(spec: &BlockSpec, norm: Normalization) -> Result<()> {
    let ok = match norm {
        Normalization::Rp2 => spec.category == BlockCategory::Axis,
        Normalization::ClipZScore | Normalization::OneHot => spec.category == BlockCategory::Hops,
        _ => true,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Invalid(format!("normalization {norm} does not apply to block {}", spec.name)))
    }
}

/// One manifest line: a block as it appears in the bundle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub name: String,
    /// Width after normalization.
    pub width: usize,
    pub kind: BlockKind,
    pub normalization: Normalization,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BundleMeta {
    pub specimen_id: String,
    pub stage: String,
    pub frame_method: String,
    pub k: usize,
    pub selection: String,
    pub scope: StatsScope,
}

/// Normalized node and edge matrices of one specimen.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureBundle {
    pub meta: BundleMeta,
    pub node_manifest: Vec<ManifestEntry>,
    pub edge_manifest: Vec<ManifestEntry>,
    /// N × F
    pub nodes: Array2<f32>,
    /// Undirected edges `(a, b)` with `a < b`, stored once.
    pub edge_index: Vec<[u32; 2]>,
    /// E × F_e
    pub edges: Array2<f32>,
    pub labels: Option<Vec<u8>>,
}

impl FeatureBundle {
    pub fn num_nodes(&self) -> usize {
        self.nodes.nrows()
    }

    pub fn num_edges(&self) -> usize {
        self.edge_index.len()
    }

    pub fn node_width(&self) -> usize {
        self.nodes.ncols()
    }

    pub fn edge_width(&self) -> usize {
        self.edges.ncols()
    }

    /// Checks the container invariants.
    pub fn validate(&self) -> Result<()> {
        let fw: usize = self.node_manifest.iter().map(|m| m.width).sum();
        let ew: usize = self.edge_manifest.iter().map(|m| m.width).sum();
        if fw != self.node_width() || ew != self.edge_width() {
            return Err(Error::Shape(format!(
                "manifest widths {fw}/{ew} vs matrices {}/{}",
                self.node_width(),
                self.edge_width()
            )));
        }
        if self.edges.nrows() != self.num_edges() {
            return Err(Error::Shape("edge matrix rows != edge count".into()));
        }
        let n = self.num_nodes() as u32;
        let mut seen = std::collections::BTreeSet::new();
        for &[a, b] in &self.edge_index {
            if a >= n || b >= n || a >= b || !seen.insert((a, b)) {
                return Err(Error::Invalid(format!("bad edge ({a}, {b})")));
            }
        }
        if let Some(l) = &self.labels {
            if l.len() != self.num_nodes() {
                return Err(Error::Shape("label count != node count".into()));
            }
        }
        if self.nodes.iter().chain(self.edges.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Invalid("non-finite feature value".into()));
        }
        Ok(())
    }

    /// Same feature layout (names, widths, normalizations) as `other`.
    pub fn same_manifest(&self, other: &FeatureBundle) -> bool {
        self.node_manifest == other.node_manifest && self.edge_manifest == other.edge_manifest
    }

    /// Columns of the node matrix belonging to blocks of `kind`.
    pub fn node_columns_of(&self, kind: BlockKind) -> Vec<usize> {
        let mut cols = Vec::new();
        let mut at = 0;
        for m in &self.node_manifest {
            if m.kind == kind {
                cols.extend(at..at + m.width);
            }
            at += m.width;
        }
        cols
    }
}

/// Pooled per-column statistics for dataset-scope z-scoring, keyed by block.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DatasetStats {
    pub columns: BTreeMap<(Entity, String), Vec<(f64, f64)>>,
}

fn selected<'a, T: Real>(
    blocks: &'a [RawFeatureBlock<T>],
    specs: &[&'static BlockSpec],
) -> Result<Vec<(&'static BlockSpec, &'a RawFeatureBlock<T>)>> {
    specs
        .iter()
        .map(|&s| {
            blocks
                .iter()
                .find(|b| b.entity == s.entity && b.name == s.name)
                .map(|b| (s, b))
                .ok_or_else(|| Error::UnknownBlock(format!("{} block {} missing", s.entity.as_str(), s.name)))
        })
        .collect()
}

fn pre_zscore<T: Real>(norm: Normalization, column: Vec<T>, cap: u32) -> Vec<T> {
    if norm == Normalization::ClipZScore {
        let cap = T::from_u32(cap).unwrap();
        column.into_iter().map(|h| h.min(cap)).collect()
    } else {
        column
    }
}

/// Pools z-score statistics over several specimens (dataset scope).
pub fn fit_dataset_stats<T: Real>(
    specimens: &[&[RawFeatureBlock<T>]],
    selection: &FeatureSelection,
    policy: &NormPolicy,
) -> Result<DatasetStats> {
    let mut specs = selection.node_blocks()?;
    specs.extend(selection.edge_blocks());
    let mut stats = DatasetStats::default();
    for spec in specs {
        let norm = policy.for_block(spec);
        if !matches!(norm, Normalization::ZScore | Normalization::ClipZScore) {
            continue;
        }
        let mut cols = Vec::with_capacity(spec.width);
        for c in 0..spec.width {
            let mut pooled = Vec::new();
            for blocks in specimens {
                let (_, b) = selected(blocks, &[spec])?[0];
                pooled.extend(pre_zscore(norm, b.values.column(c).to_vec(), policy.hop_cap));
            }
            let (m, s) = mean_std(&pooled);
            cols.push((m.as_f64(), s.as_f64()));
        }
        stats.columns.insert((spec.entity, spec.name.to_string()), cols);
    }
    Ok(stats)
}

/// Applies `norm` to a raw block and returns the output matrix (rows × output width).
pub fn normalize_block<T: Real>(
    block: &RawFeatureBlock<T>,
    norm: Normalization,
    hop_cap: u32,
    stats: Option<&[(f64, f64)]>,
) -> Result<Array2<T>> {
    let (rows, width) = block.values.dim();
    let out_w = norm.output_width(width, hop_cap);
    let mut out = Array2::zeros((rows, out_w));
    match norm {
        Normalization::None => out.assign(&block.values),
        Normalization::ZScore | Normalization::ClipZScore => {
            for c in 0..width {
                let col = pre_zscore(norm, block.values.column(c).to_vec(), hop_cap);
                let (m, s) = match stats {
                    Some(st) => (T::lit(st[c].0), T::lit(st[c].1)),
                    None => mean_std(&col),
                };
                for (r, v) in zscore_with(&col, m, s).into_iter().enumerate() {
                    out[[r, c]] = v;
                }
            }
        }
        Normalization::Rp2 => {
            if width % 3 != 0 {
                return Err(Error::Shape(format!("block {} width {width} not a multiple of 3", block.name)));
            }
            for r in 0..rows {
                for a in 0..width / 3 {
                    let v = Vec3::new(
                        block.values[[r, 3 * a]],
                        block.values[[r, 3 * a + 1]],
                        block.values[[r, 3 * a + 2]],
                    );
                    for (k, e) in rp2_embed(v).into_iter().enumerate() {
                        out[[r, 6 * a + k]] = e;
                    }
                }
            }
        }
        Normalization::UnitNorm => {
            for r in 0..rows {
                let (v, _) = unit_norm(&block.values.row(r).to_vec());
                out.row_mut(r).assign(&ndarray::ArrayView1::from(&v));
            }
        }
        Normalization::OneHot => {
            let cap = hop_cap.max(1) as usize;
            for r in 0..rows {
                for c in 0..width {
                    let h = block.values[[r, c]].to_u32().unwrap_or(0);
                    for (k, e) in one_hot_hops::<T>(h, hop_cap).into_iter().enumerate() {
                        out[[r, c * cap + k]] = e;
                    }
                }
            }
        }
    }
    Ok(out)
}

fn assemble_side<T: Real>(
    blocks: &[RawFeatureBlock<T>],
    specs: &[&'static BlockSpec],
    rows: usize,
    policy: &NormPolicy,
    stats: Option<&DatasetStats>,
) -> Result<(Vec<ManifestEntry>, Array2<f32>)> {
    let mut manifest = Vec::new();
    let mut parts = Vec::new();
    for (spec, block) in selected(blocks, specs)? {
        if block.rows() != rows {
            return Err(Error::Shape(format!("block {} has {} rows, expected {rows}", spec.name, block.rows())));
        }
        if block.width() != spec.width {
            return Err(Error::Shape(format!("block {} has width {}", spec.name, block.width())));
        }
        let norm = policy.for_block(spec);
        check_applicable(spec, norm)?;
        let col_stats = match (policy.scope, norm) {
            (StatsScope::Dataset, Normalization::ZScore | Normalization::ClipZScore) => Some(
                stats
                    .and_then(|s| s.columns.get(&(spec.entity, spec.name.to_string())))
                    .ok_or_else(|| Error::Invalid(format!("no dataset statistics for block {}", spec.name)))?
                    .as_slice(),
            ),
            _ => None,
        };
        let m = normalize_block(block, norm, policy.hop_cap, col_stats)?;
        manifest.push(ManifestEntry {
            name: spec.name.to_string(),
            width: m.ncols(),
            kind: spec.kind,
            normalization: norm,
        });
        parts.push(m);
    }
    let width: usize = parts.iter().map(|p| p.ncols()).sum();
    let mut out = Array2::<f32>::zeros((rows, width));
    let mut at = 0;
    for p in parts {
        for ((r, c), &v) in p.indexed_iter() {
            out[[r, at + c]] = v.to_f32().unwrap_or(f32::NAN);
        }
        at += p.ncols();
    }
    Ok((manifest, out))
}

/// Normalizes the selected blocks and concatenates them into a bundle.
///
/// Node blocks follow `selection`; edge blocks are always the default edge
/// set. Dataset-scope policies need `stats` from [`fit_dataset_stats`].
pub fn assemble<T: Real>(
    blocks: &[RawFeatureBlock<T>],
    topology: &Topology,
    selection: &FeatureSelection,
    policy: &NormPolicy,
    stats: Option<&DatasetStats>,
    meta: BundleMeta,
    labels: Option<Vec<u8>>,
) -> Result<FeatureBundle> {
    let (node_manifest, nodes) =
        assemble_side(blocks, &selection.node_blocks()?, topology.num_nodes(), policy, stats)?;
    let (edge_manifest, edges) =
        assemble_side(blocks, &selection.edge_blocks(), topology.num_edges(), policy, stats)?;
    let bundle = FeatureBundle {
        meta,
        node_manifest,
        edge_manifest,
        nodes,
        edge_index: topology.edges().iter().map(|&(a, b)| [a as u32, b as u32]).collect(),
        edges,
        labels,
    };
    bundle.validate()?;
    Ok(bundle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{default_blocks, DEFAULT_EDGE_WIDTH, DEFAULT_NODE_WIDTH};

    fn fake_blocks(t: &Topology) -> Vec<RawFeatureBlock<f64>> {
        let mut out = Vec::new();
        for s in crate::features::CATALOG {
            let rows = match s.entity {
                Entity::Node => t.num_nodes(),
                Entity::Edge => t.num_edges(),
            };
            let vals = Array2::from_shape_fn((rows, s.width), |(r, c)| ((r * 7 + c * 3) % 5) as f64 / 5.0 + 1.0);
            out.push(RawFeatureBlock::new(s.entity, s.name, vals, vec![false; rows]).unwrap());
        }
        out
    }

    fn meta() -> BundleMeta {
        BundleMeta {
            specimen_id: "s".into(),
            stage: "2-IV".into(),
            frame_method: "trivial".into(),
            k: 500,
            selection: "all".into(),
            scope: StatsScope::Specimen,
        }
    }

    #[test]
    fn default_manifest_matches_catalog() {
        let t = Topology::new(4, &[(0, 1), (1, 2), (2, 3)], vec![true, false, false, true]).unwrap();
        let b = assemble(&fake_blocks(&t), &t, &FeatureSelection::All, &NormPolicy::default(), None, meta(), None)
            .unwrap();
        assert_eq!(b.node_width(), DEFAULT_NODE_WIDTH);
        assert_eq!(b.edge_width(), DEFAULT_EDGE_WIDTH);
        let names: Vec<_> = b.node_manifest.iter().map(|m| m.name.as_str()).collect();
        let expected: Vec<_> = default_blocks(Entity::Node).map(|s| s.name).collect();
        assert_eq!(names, expected);
        assert_eq!(b.edge_index, vec![[0, 1], [1, 2], [2, 3]]);
    }

    #[test]
    fn missing_block_is_reported() {
        let t = Topology::new(2, &[(0, 1)], vec![true, true]).unwrap();
        let mut blocks = fake_blocks(&t);
        blocks.retain(|b| b.name != "volume");
        let r = assemble(&blocks, &t, &FeatureSelection::All, &NormPolicy::default(), None, meta(), None);
        assert!(matches!(r, Err(Error::UnknownBlock(_))));
    }

    #[test]
    fn policy_rejects_inapplicable() {
        assert!(NormPolicy::default().with(Entity::Node, "volume", Normalization::Rp2).is_err());
        assert!(NormPolicy::default().with(Entity::Node, "hops_to_surface", Normalization::OneHot).is_ok());
        assert!(NormPolicy::default().with(Entity::Node, "nope", Normalization::None).is_err());
    }

    #[test]
    fn one_hot_hops_widens() {
        let t = Topology::new(3, &[(0, 1), (1, 2)], vec![true, false, true]).unwrap();
        let mut blocks = fake_blocks(&t);
        for b in &mut blocks {
            if b.name == "hops_to_surface" {
                b.values = Array2::from_shape_vec((3, 1), vec![1.0, 2.0, 5.0]).unwrap();
            }
        }
        let policy = NormPolicy::default()
            .with(Entity::Node, "hops_to_surface", Normalization::OneHot)
            .unwrap();
        let sel = FeatureSelection::Named(vec!["hops_to_surface".into()]);
        let b = assemble(&blocks, &t, &sel, &policy, None, meta(), None).unwrap();
        assert_eq!(b.nodes.as_slice().unwrap(), &[1., 0., 0., 0., 1., 0., 0., 0., 1.]);
    }

    #[test]
    fn dataset_scope_uses_pooled_stats() {
        let t = Topology::new(2, &[(0, 1)], vec![true, true]).unwrap();
        let mut a = fake_blocks(&t);
        let mut b = fake_blocks(&t);
        for (blocks, vals) in [(&mut a, [0.0, 2.0]), (&mut b, [4.0, 6.0])] {
            for x in blocks.iter_mut().filter(|x| x.name == "volume") {
                x.values = Array2::from_shape_vec((2, 1), vals.to_vec()).unwrap();
            }
        }
        let sel = FeatureSelection::Named(vec!["volume".into()]);
        let policy = NormPolicy {
            scope: StatsScope::Dataset,
            ..NormPolicy::default()
        };
        let stats = fit_dataset_stats(&[&a, &b], &sel, &policy).unwrap();
        let (m, s) = stats.columns[&(Entity::Node, "volume".to_string())][0];
        assert_eq!(m, 3.0);
        assert!((s - 5f64.sqrt()).abs() < 1e-12);
        let bundle = assemble(&a, &t, &sel, &policy, Some(&stats), meta(), None).unwrap();
        assert!((bundle.nodes[[0, 0]] as f64 + 3.0 / 5f64.sqrt()).abs() < 1e-6);
        assert!(assemble(&a, &t, &sel, &policy, None, meta(), None).is_err());
    }
}
