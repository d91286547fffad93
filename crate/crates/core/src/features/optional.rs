use super::node::extent;
use super::{Entity, RawFeatureBlock};
use crate::error::Result;
use crate::frames::ReferenceFrame;
use crate::graph::{CellGraph, Topology};
use crate::linalg::Vec3;
use crate::scalar::Real;

/// Number of directions used by `lengths_uniform`.
pub const UNIFORM_DIRECTIONS: usize = 64;

/// Evenly spread unit vectors on the sphere (Fibonacci lattice).
pub fn fibonacci_directions<T: Real>(n: usize) -> Vec<Vec3<T>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            Vec3::from_f64([r * phi.cos(), r * phi.sin(), z])
        })
        .collect()
}

/// `(degree, min, max, mean, std)` of the neighbours' degrees (population std).
pub fn local_degree_profile<T: Real>(topology: &Topology) -> Vec<[T; 5]> {
    (0..topology.num_nodes())
        .map(|i| {
            let degs: Vec<T> = topology
                .neighbors(i)
                .iter()
                .map(|&(j, _)| T::from_usize_lossy(topology.degree(j)))
                .collect();
            let d = T::from_usize_lossy(degs.len());
            if degs.is_empty() {
                return [T::zero(); 5];
            }
            let min = degs.iter().copied().fold(T::infinity(), T::min);
            let max = degs.iter().copied().fold(T::neg_infinity(), T::max);
            let mean = degs.iter().copied().sum::<T>() / d;
            let var = degs.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / d;
            [d, min, max, mean, var.sqrt()]
        })
        .collect()
}

/// `lengths_uniform(64)` (extents of the surface samples along fixed
/// directions of the global frame) and `local_degree_profile(5)`.
pub fn optional_features<T: Real>(
    g: &CellGraph<T>,
    frame: &ReferenceFrame<T>,
) -> Result<Vec<RawFeatureBlock<T>>> {
    let dirs = fibonacci_directions::<T>(UNIFORM_DIRECTIONS);
    let n = g.num_nodes();
    let lengths: Vec<Vec<T>> = g
        .nodes()
        .iter()
        .map(|node| {
            let pts: Vec<Vec3<T>> = node.surface_samples.iter().map(|&p| frame.to_local(p)).collect();
            dirs.iter().map(|&d| extent(&pts, d)).collect()
        })
        .collect();
    let flags: Vec<bool> = g.nodes().iter().map(|n| n.surface_samples.is_empty()).collect();
    let profile = local_degree_profile::<T>(g.topology())
        .into_iter()
        .map(|p| p.to_vec())
        .collect();
    Ok(vec![
        RawFeatureBlock::from_rows(Entity::Node, "lengths_uniform", lengths, flags)?,
        RawFeatureBlock::from_rows(Entity::Node, "local_degree_profile", profile, vec![false; n])?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_interior_profile() {
        let t = Topology::new(5, &[(0, 1), (1, 2), (2, 3), (3, 4)], vec![false; 5]).unwrap();
        let p = local_degree_profile::<f64>(&t);
        assert_eq!(p[2], [2.0, 2.0, 2.0, 2.0, 0.0]);
        assert_eq!(p[0], [1.0, 2.0, 2.0, 2.0, 0.0]);
        assert_eq!(p[1], [2.0, 1.0, 2.0, 1.5, 0.5]);
    }

    #[test]
    fn unit_sphere_lengths_near_two() {
        // dense Fibonacci cloud on the unit sphere
        let pts = fibonacci_directions::<f64>(4000);
        for d in fibonacci_directions::<f64>(UNIFORM_DIRECTIONS) {
            let l = extent(&pts, d);
            assert!((l - 2.0).abs() <= 0.1, "length {l}");
        }
    }

    #[test]
    fn directions_are_unit() {
        for d in fibonacci_directions::<f64>(UNIFORM_DIRECTIONS) {
            assert!((d.norm() - 1.0).abs() < 1e-12);
        }
    }
}
