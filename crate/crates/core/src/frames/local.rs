use serde::{Deserialize, Serialize};

use crate::graph::CellGraph;
use crate::linalg::Vec3;
use crate::scalar::Real;

/// Per-cell local reference system. Axes carry orientation only; any of
/// them may be the zero vector when the estimate is undefined.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LocalFrame<T> {
    pub growth: Vec3<T>,
    /// Surface axis after Gram-Schmidt against the growth axis.
    pub surface: Vec3<T>,
    pub third: Vec3<T>,
    /// Fit quality of the growth axis in [0, 1]; 1 = perfectly collinear neighbours.
    pub alignment: T,
    /// |cos| between growth and the raw (pre-orthogonalization) surface axis.
    pub growth_surface_cos: T,
    pub hops: u32,
    pub surface_flagged: bool,
    pub growth_flagged: bool,
    pub third_flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LocalAxes<T> {
    pub frames: Vec<LocalFrame<T>>,
}

impl<T: Real> LocalAxes<T> {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

fn small<T: Real>() -> T {
    T::epsilon() * T::lit(1e3)
}

/// Surface axis per node.
///
/// Surface cells (hops = 1) take the normal of their background wall.
/// Other cells average the normals of the walls shared with every strictly
/// closer-to-surface neighbour, each oriented toward that neighbour, then
/// renormalize. Returns the axes and a per-node flag set when the result is
/// the zero vector.
pub fn surface_axes<T: Real>(g: &CellGraph<T>, hops: &[u32]) -> (Vec<Vec3<T>>, Vec<bool>) {
    let topo = g.topology();
    let mut axes = Vec::with_capacity(g.num_nodes());
    let mut flags = Vec::with_capacity(g.num_nodes());
    for i in 0..g.num_nodes() {
        let raw = if hops[i] == 1 {
            g.nodes()[i]
                .background
                .as_ref()
                .map(|bg| bg.normal)
                .unwrap_or_else(Vec3::zero)
        } else {
            let mut sum = Vec3::zero();
            let mut count = 0usize;
            for &(j, e) in topo.neighbors(i) {
                if hops[j] < hops[i] {
                    sum = sum + g.oriented_normal(e, i);
                    count += 1;
                }
            }
            if count > 0 {
                sum.scale(T::one() / T::from_usize_lossy(count))
            } else {
                sum
            }
        };
        match raw.try_normalize(small()) {
            Some(v) => {
                axes.push(v);
                flags.push(false);
            }
            None => {
                axes.push(Vec3::zero());
                flags.push(true);
            }
        }
    }
    (axes, flags)
}

/// Growth axis and alignment score per node.
///
/// Over all unordered pairs of distinct neighbours sharing the node's hop
/// count, picks the pair whose center-of-mass directions have the smallest
/// cosine (the most anti-parallel, i.e. most collinear through the node).
/// The axis points to the first neighbour of the pair and the score is
/// `(1 - cos_min) / 2`. Nodes with fewer than two such neighbours get the
/// zero vector and score 0.
pub fn growth_axes<T: Real>(g: &CellGraph<T>, hops: &[u32]) -> Vec<(Vec3<T>, T)> {
    let topo = g.topology();
    let coms = g.coms();
    (0..g.num_nodes())
        .map(|i| {
            let same: Vec<Vec3<T>> = topo
                .neighbors(i)
                .iter()
                .filter(|&&(j, _)| hops[j] == hops[i])
                .map(|&(j, _)| coms[j] - coms[i])
                .collect();
            let mut best: Option<(T, Vec3<T>)> = None;
            for (a, &vj) in same.iter().enumerate() {
                for &vk in &same[a + 1..] {
                    let cos = vj.cos_to(vk);
                    if best.is_none_or(|(b, _)| cos < b) {
                        best = Some((cos, vj));
                    }
                }
            }
            match best.and_then(|(cos, v)| v.try_normalize(T::zero()).map(|u| (cos, u))) {
                Some((cos, u)) => (u, (T::one() - cos) / T::lit(2.0)),
                None => (Vec3::zero(), T::zero()),
            }
        })
        .collect()
}

/// `normalize(growth × surface)`; zero and flagged when either input is zero
/// or the two are nearly parallel (|cos| > 0.999).
pub fn third_axis<T: Real>(growth: Vec3<T>, surface: Vec3<T>) -> (Vec3<T>, bool) {
    if growth.is_zero() || surface.is_zero() || growth.cos_to(surface).abs() > T::lit(0.999) {
        return (Vec3::zero(), true);
    }
    match growth.cross(surface).try_normalize(T::zero()) {
        Some(v) => (v, false),
        None => (Vec3::zero(), true),
    }
}

/// Full local frames: growth, orthogonalized surface, third axis and scores.
pub fn local_axes<T: Real>(g: &CellGraph<T>, hops: &[u32]) -> LocalAxes<T> {
    let (surface, surface_flags) = surface_axes(g, hops);
    let growth = growth_axes(g, hops);
    let frames = (0..g.num_nodes())
        .map(|i| {
            let (gaxis, alignment) = growth[i];
            let s = surface[i];
            let growth_surface_cos = gaxis.cos_to(s).abs();
            let (third, third_flagged) = third_axis(gaxis, s);
            let mut surface_flagged = surface_flags[i];
            let surface_ortho = if gaxis.is_zero() || s.is_zero() {
                s
            } else {
                match (s - gaxis.scale(s.dot(gaxis))).try_normalize(small()) {
                    Some(v) => v,
                    None => {
                        surface_flagged = true;
                        Vec3::zero()
                    }
                }
            };
            LocalFrame {
                growth: gaxis,
                surface: surface_ortho,
                third,
                alignment,
                growth_surface_cos,
                hops: hops[i],
                surface_flagged,
                growth_flagged: gaxis.is_zero(),
                third_flagged,
            }
        })
        .collect();
    LocalAxes { frames }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::CellGraph;

    fn star_with_coms(coms: &[[f64; 3]]) -> CellGraph<f64> {
        let edges: Vec<_> = (1..coms.len()).map(|j| (0, j)).collect();
        let mut g = CellGraph::from_topology(coms.len(), &edges, &[]).unwrap();
        for (n, c) in g.nodes_mut().iter_mut().zip(coms) {
            n.com = Vec3(*c);
        }
        g
    }

    #[test]
    fn third_axis_cases() {
        let (t, f) = third_axis(Vec3::new(1.0, 0., 0.), Vec3::new(0., 1.0, 0.));
        assert_eq!(t, Vec3::new(0., 0., 1.));
        assert!(!f);
        let (t, f) = third_axis(Vec3::new(1.0, 0., 0.), Vec3::new(-2.0, 0., 0.));
        assert!(t.is_zero() && f);
        assert!(third_axis(Vec3::zero(), Vec3::new(0., 1., 0.)).1);
    }

    #[test]
    fn growth_picks_most_collinear_pair() {
        let g = star_with_coms(&[
            [0., 0., 0.],
            [1., 0., 0.],
            [0., 1., 0.],
            [-1., 0.1, 0.],
        ]);
        let out = growth_axes(&g, &[1, 1, 1, 1]);
        let (axis, score) = out[0];
        assert!((axis - Vec3::new(1., 0., 0.)).norm() < 1e-12);
        let cos = Vec3::new(1.0, 0., 0.).cos_to(Vec3::new(-1., 0.1, 0.));
        assert!((score - (1.0 - cos) / 2.0).abs() < 1e-15);
        // leaves have a single neighbour
        assert_eq!(out[1], (Vec3::zero(), 0.0));
    }

    #[test]
    fn growth_ignores_other_hop_levels() {
        let g = star_with_coms(&[[0., 0., 0.], [1., 0., 0.], [-1., 0., 0.], [0., 1., 0.]]);
        let out = growth_axes(&g, &[2, 2, 1, 2]);
        let (axis, _) = out[0];
        assert!((axis - Vec3::new(1., 0., 0.)).norm() < 1e-12);
        assert!(out[0].1 < 1.0);
    }

    #[test]
    fn interior_surface_axis_single_neighbour_is_its_normal() {
        let mut g = star_with_coms(&[[0., 0., 0.], [0., 0., 1.], [1., 0., 0.]]);
        let n = Vec3::new(0.0, 0.6, 0.8);
        g.edges_mut()[0].patch.normal = n;
        let (axes, flags) = surface_axes(&g, &[2, 1, 2]);
        assert_eq!(axes[0], n);
        assert!(!flags[0]);
    }

    #[test]
    fn cancelling_normals_give_zero_and_flag() {
        let mut g = star_with_coms(&[[0., 0., 0.], [0., 0., 1.], [0., 0., -1.]]);
        g.edges_mut()[0].patch.normal = Vec3::new(0., 0., 1.);
        g.edges_mut()[1].patch.normal = Vec3::new(0., 0., -1.);
        let (axes, flags) = surface_axes(&g, &[2, 1, 1]);
        assert!(axes[0].is_zero());
        assert!(flags[0]);
    }

    #[test]
    fn local_frame_is_orthogonal() {
        let mut g = star_with_coms(&[[0., 0., 0.], [1., 0., 0.], [-1., 0., 0.], [0.3, 1., 0.]]);
        for e in g.edges_mut() {
            e.patch.normal = Vec3::new(0.2, 1.0, 0.0).try_normalize(0.0).unwrap();
        }
        let la = local_axes(&g, &[2, 2, 2, 1]);
        let f = la.frames[0];
        assert!(f.growth.dot(f.surface).abs() <= 1e-12);
        assert!(f.third.dot(f.surface).abs() <= 1e-12);
        assert!(f.third.dot(f.growth).abs() <= 1e-12);
        assert!(f.growth_surface_cos > 0.0);
    }
}
