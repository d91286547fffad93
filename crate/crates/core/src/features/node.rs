use super::{centrality, Entity, RawFeatureBlock};
use crate::error::{Error, Result};
use crate::frames::{LocalAxes, ReferenceFrame};
use crate::graph::CellGraph;
use crate::linalg::{pca3, Vec3};
use crate::scalar::Real;

/// Extent (max − min) of the projections of `points` on `axis`; zero for a zero axis.
pub(super) fn extent<T: Real>(points: &[Vec3<T>], axis: Vec3<T>) -> T {
    if axis.is_zero() || points.is_empty() {
        return T::zero();
    }
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for &p in points {
        let t = p.dot(axis);
        lo = lo.min(t);
        hi = hi.max(t);
    }
    hi - lo
}

fn cosines_to_frame<T: Real>(frame: &ReferenceFrame<T>, v: Vec3<T>) -> [T; 3] {
    [v.cos_to(frame.axis(0)), v.cos_to(frame.axis(1)), v.cos_to(frame.axis(2))]
}

/// Morphological and orientation blocks per node:
/// `center_of_mass, com_grs_angles, lrs_axes, lrs_grs_angles,
/// growth_surface_angle, growth_alignment, lrs_lengths, pca_axes,
/// pca_grs_angles, pca_explained_variance, surface_area, volume`.
pub fn node_geometry_features<T: Real>(
    g: &CellGraph<T>,
    frame: &ReferenceFrame<T>,
    local: &LocalAxes<T>,
) -> Result<Vec<RawFeatureBlock<T>>> {
    let n = g.num_nodes();
    if local.len() != n {
        return Err(Error::Shape(format!("local axes for {} nodes, graph has {n}", local.len())));
    }
    let mut com = Vec::with_capacity(n);
    let mut com_angles = Vec::with_capacity(n);
    let mut com_flags = Vec::with_capacity(n);
    let mut lrs_axes = Vec::with_capacity(n);
    let mut lrs_angles = Vec::with_capacity(n);
    let mut lrs_flags = Vec::with_capacity(n);
    let mut gs_angle = Vec::with_capacity(n);
    let mut alignment = Vec::with_capacity(n);
    let mut lengths = Vec::with_capacity(n);
    let mut pca_axes = Vec::with_capacity(n);
    let mut pca_angles = Vec::with_capacity(n);
    let mut pca_var = Vec::with_capacity(n);
    let mut pca_flags = Vec::with_capacity(n);
    let mut surface = Vec::with_capacity(n);
    let mut volume = Vec::with_capacity(n);

    for (node, lf) in g.nodes().iter().zip(&local.frames) {
        let c = frame.to_local(node.com);
        com.push(c.0.to_vec());
        com_flags.push(c.is_zero());
        com_angles.push(
            c.try_normalize(T::zero())
                .map(|u| u.0.to_vec())
                .unwrap_or_else(|| vec![T::zero(); 3]),
        );

        let axes = [lf.growth, lf.surface, lf.third];
        let mut ax_row = Vec::with_capacity(9);
        let mut ang_row = Vec::with_capacity(9);
        for a in axes {
            ax_row.extend_from_slice(&frame.direction_to_local(a).0);
            ang_row.extend_from_slice(&cosines_to_frame(frame, a));
        }
        lrs_axes.push(ax_row);
        lrs_angles.push(ang_row);
        lrs_flags.push(lf.growth_flagged || lf.surface_flagged || lf.third_flagged);
        gs_angle.push(vec![lf.growth_surface_cos]);
        alignment.push(vec![lf.alignment]);
        lengths.push(axes.iter().map(|&a| extent(&node.surface_samples, a)).collect());

        if node.surface_samples.len() < 4 {
            pca_axes.push(vec![T::zero(); 9]);
            pca_angles.push(vec![T::zero(); 9]);
            pca_var.push(vec![T::zero(); 3]);
            pca_flags.push(true);
        } else {
            let pca = pca3(&node.surface_samples);
            let mut ax_row = Vec::with_capacity(9);
            let mut ang_row = Vec::with_capacity(9);
            for k in 0..3 {
                let mut a = Vec3(pca.axes[k]);
                if a.dot(frame.axis(k)) < T::zero() {
                    a = -a;
                }
                ax_row.extend_from_slice(&frame.direction_to_local(a).0);
                ang_row.extend_from_slice(&cosines_to_frame(frame, a));
            }
            pca_axes.push(ax_row);
            pca_angles.push(ang_row);
            pca_var.push(pca.variances.to_vec());
            pca_flags.push(false);
        }
        surface.push(vec![node.surface_area]);
        volume.push(vec![node.volume]);
    }

    let none = vec![false; n];
    let e = Entity::Node;
    Ok(vec![
        RawFeatureBlock::from_rows(e, "center_of_mass", com, none.clone())?,
        RawFeatureBlock::from_rows(e, "com_grs_angles", com_angles, com_flags)?,
        RawFeatureBlock::from_rows(e, "lrs_axes", lrs_axes, lrs_flags.clone())?,
        RawFeatureBlock::from_rows(e, "lrs_grs_angles", lrs_angles, lrs_flags)?,
        RawFeatureBlock::from_rows(
            e,
            "growth_surface_angle",
            gs_angle,
            local.frames.iter().map(|f| f.growth_flagged || f.surface_flagged).collect(),
        )?,
        RawFeatureBlock::from_rows(
            e,
            "growth_alignment",
            alignment,
            local.frames.iter().map(|f| f.growth_flagged).collect(),
        )?,
        RawFeatureBlock::from_rows(e, "lrs_lengths", lengths, none.clone())?,
        RawFeatureBlock::from_rows(e, "pca_axes", pca_axes, pca_flags.clone())?,
        RawFeatureBlock::from_rows(e, "pca_grs_angles", pca_angles, pca_flags.clone())?,
        RawFeatureBlock::from_rows(e, "pca_explained_variance", pca_var, pca_flags)?,
        RawFeatureBlock::from_rows(e, "surface_area", surface, none.clone())?,
        RawFeatureBlock::from_rows(e, "volume", volume, none)?,
    ])
}

/// `hops_to_surface`, `degree_centrality` and `cfc_centrality` per node.
pub fn node_graph_features<T: Real>(g: &CellGraph<T>, hops: &[u32]) -> Result<Vec<RawFeatureBlock<T>>> {
    let topo = g.topology();
    let n = g.num_nodes();
    if hops.len() != n {
        return Err(Error::Shape(format!("hops for {} nodes, graph has {n}", hops.len())));
    }
    let degree = centrality::degree_centrality::<T>(topo);
    let cfc = centrality::current_flow_closeness::<T>(topo)?;
    let none = vec![false; n];
    let e = Entity::Node;
    Ok(vec![
        RawFeatureBlock::from_rows(
            e,
            "hops_to_surface",
            hops.iter().map(|&h| vec![T::from_u32(h).unwrap()]).collect(),
            none.clone(),
        )?,
        RawFeatureBlock::from_rows(e, "degree_centrality", degree.into_iter().map(|d| vec![d]).collect(), none.clone())?,
        RawFeatureBlock::from_rows(e, "cfc_centrality", cfc.into_iter().map(|c| vec![c]).collect(), none)?,
    ])
}
