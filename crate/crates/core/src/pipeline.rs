//! End-to-end processing of one specimen: volume → graph → frames → features → bundle.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::features::{compute_all_blocks, FeatureSelection, RawFeatureBlock};
use crate::frames::{global_frame, hops_to_surface, local_axes, FrameMethod, LocalAxes, ReferenceFrame};
use crate::graph::{build_adjacency, CellGraph, DEFAULT_SAMPLES};
use crate::homogenize::{assemble, BundleMeta, DatasetStats, FeatureBundle, NormPolicy};
use crate::scalar::Real;
use crate::volume::{merge_labels, CellClass, LabelTable, LabeledVolume};

/// Settings shared by every specimen of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineOptions {
    pub k: usize,
    pub frame: FrameMethod,
    pub selection: FeatureSelection,
    pub policy: NormPolicy,
    /// Class merge applied to label tables before use.
    pub merge: BTreeMap<u8, u8>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            k: DEFAULT_SAMPLES,
            frame: FrameMethod::LabelSurf,
            selection: FeatureSelection::All,
            policy: NormPolicy::default(),
            merge: CellClass::default_merge(),
        }
    }
}

/// Everything derived from one graph before normalization.
#[derive(Clone, Debug)]
pub struct SpecimenFeatures<T> {
    pub frame: ReferenceFrame<T>,
    pub hops: Vec<u32>,
    pub local: LocalAxes<T>,
    pub blocks: Vec<RawFeatureBlock<T>>,
}

/// Frames, hops, local axes and every raw feature block of a graph.
pub fn compute_features<T: Real>(
    g: &CellGraph<T>,
    labels: Option<&LabelTable>,
    method: FrameMethod,
) -> Result<SpecimenFeatures<T>> {
    let frame = global_frame(g, labels, method)?;
    let hops = hops_to_surface(g.topology())?;
    let local = local_axes(g, &hops);
    let blocks = compute_all_blocks(g, &frame, &local, &hops)?;
    Ok(SpecimenFeatures {
        frame,
        hops,
        local,
        blocks,
    })
}

/// Class id of every node, in node order.
pub fn node_labels<T: Real>(g: &CellGraph<T>, labels: &LabelTable) -> Result<Vec<u8>> {
    g.nodes()
        .iter()
        .map(|n| {
            labels
                .get(n.cell_id)
                .ok_or_else(|| Error::Invalid(format!("cell {} has no label", n.cell_id)))
        })
        .collect()
}

pub fn bundle_meta<T>(g: &CellGraph<T>, opts: &PipelineOptions) -> BundleMeta {
    BundleMeta {
        specimen_id: g.specimen_id.clone(),
        stage: g.stage.clone(),
        frame_method: opts.frame.to_string(),
        k: opts.k,
        selection: opts.selection.to_string(),
        scope: opts.policy.scope,
    }
}

/// Normalizes computed features into a bundle; labels are attached when given.
pub fn bundle_specimen<T: Real>(
    g: &CellGraph<T>,
    features: &SpecimenFeatures<T>,
    labels: Option<&LabelTable>,
    opts: &PipelineOptions,
    stats: Option<&DatasetStats>,
) -> Result<FeatureBundle> {
    let node_classes = labels.map(|l| node_labels(g, l)).transpose()?;
    assemble(
        &features.blocks,
        g.topology(),
        &opts.selection,
        &opts.policy,
        stats,
        bundle_meta(g, opts),
        node_classes,
    )
}

/// Applies the configured class merge.
pub fn prepare_labels(labels: &LabelTable, opts: &PipelineOptions) -> Result<LabelTable> {
    merge_labels(labels, &opts.merge)
}

/// Volume (plus optional labels) straight to a bundle with per-specimen statistics.
pub fn process_specimen<T: Real>(
    vol: &LabeledVolume,
    labels: Option<&LabelTable>,
    opts: &PipelineOptions,
) -> Result<FeatureBundle> {
    let labels = labels.map(|l| prepare_labels(l, opts)).transpose()?;
    let g = build_adjacency::<T>(vol, opts.k)?;
    let f = compute_features(&g, labels.as_ref(), opts.frame)?;
    bundle_specimen(&g, &f, labels.as_ref(), opts, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{make_shell_organ, ShellSpec};

    #[test]
    fn shell_to_bundle() {
        let o = make_shell_organ(&ShellSpec {
            cells_per_layer: vec![20, 6],
            radius: 10.0,
            ..ShellSpec::default()
        })
        .unwrap();
        let opts = PipelineOptions {
            frame: FrameMethod::Trivial,
            k: 100,
            ..PipelineOptions::default()
        };
        let b = process_specimen::<f64>(&o.volume, Some(&o.labels), &opts).unwrap();
        assert_eq!(b.num_nodes(), 26);
        assert_eq!(b.node_width(), crate::features::DEFAULT_NODE_WIDTH);
        assert_eq!(b.edge_width(), crate::features::DEFAULT_EDGE_WIDTH);
        assert_eq!(b.labels.as_ref().unwrap().iter().filter(|&&c| c == 2).count(), 6);
        let again = process_specimen::<f64>(&o.volume, Some(&o.labels), &opts).unwrap();
        assert_eq!(b, again);
    }

    #[test]
    fn label_frame_without_tissues_fails() {
        let o = make_shell_organ(&ShellSpec {
            cells_per_layer: vec![20, 6],
            radius: 10.0,
            ..ShellSpec::default()
        })
        .unwrap();
        let r = process_specimen::<f64>(&o.volume, Some(&o.labels), &PipelineOptions::default());
        assert!(matches!(r, Err(Error::MissingTissue(_))));
    }
}
