use super::{Entity, RawFeatureBlock};
use crate::error::{Error, Result};
use crate::frames::{LocalAxes, ReferenceFrame};
use crate::graph::CellGraph;
use crate::linalg::{mean3, Vec3};
use crate::scalar::Real;

/// Edge blocks `boundary_com(3), com_distance(1), com_grs_angles(3),
/// lrs_projection(3), contact_area(1)`. Directions run from the lower to the
/// higher cell id.
pub fn edge_features<T: Real>(
    g: &CellGraph<T>,
    frame: &ReferenceFrame<T>,
    local: &LocalAxes<T>,
) -> Result<Vec<RawFeatureBlock<T>>> {
    if local.len() != g.num_nodes() {
        return Err(Error::Shape("local axes do not match graph".into()));
    }
    let m = g.num_edges();
    let mut bcom = Vec::with_capacity(m);
    let mut dist = Vec::with_capacity(m);
    let mut angles = Vec::with_capacity(m);
    let mut angle_flags = Vec::with_capacity(m);
    let mut proj = Vec::with_capacity(m);
    let mut proj_flags = Vec::with_capacity(m);
    let mut area = Vec::with_capacity(m);
    let mut bcom_flags = Vec::with_capacity(m);
    let nodes = g.nodes();
    for e in g.edges() {
        let (ca, cb) = (nodes[e.a].com, nodes[e.b].com);
        let center = if e.patch.samples.is_empty() {
            (ca + cb).scale(T::lit(0.5))
        } else {
            mean3(&e.patch.samples)
        };
        bcom.push(frame.to_local(center).0.to_vec());
        bcom_flags.push(e.patch.samples.is_empty());
        let d: Vec3<T> = cb - ca;
        dist.push(vec![d.norm()]);
        angles.push((0..3).map(|k| d.cos_to(frame.axis(k))).collect());
        angle_flags.push(d.is_zero());
        let (la, lb) = (&local.frames[e.a], &local.frames[e.b]);
        let pairs = [(la.growth, lb.growth), (la.surface, lb.surface), (la.third, lb.third)];
        proj.push(pairs.iter().map(|(u, v)| u.cos_to(*v).abs()).collect());
        proj_flags.push(pairs.iter().any(|(u, v)| u.is_zero() || v.is_zero()));
        area.push(vec![e.patch.area]);
    }
    let none = vec![false; m];
    let e = Entity::Edge;
    Ok(vec![
        RawFeatureBlock::from_rows(e, "boundary_com", bcom, bcom_flags)?,
        RawFeatureBlock::from_rows(e, "com_distance", dist, none.clone())?,
        RawFeatureBlock::from_rows(e, "com_grs_angles", angles, angle_flags)?,
        RawFeatureBlock::from_rows(e, "lrs_projection", proj, proj_flags)?,
        RawFeatureBlock::from_rows(e, "contact_area", area, none)?,
    ])
}
