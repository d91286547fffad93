use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::scalar::Real;

/// Index of the lexicographically largest `(x, y, z)`; first one on ties.
fn seed_index<T: Real>(points: &[Vec3<T>]) -> usize {
    let mut best = 0;
    for (i, p) in points.iter().enumerate().skip(1) {
        let q = &points[best];
        let greater = p.0
            .iter()
            .zip(q.0.iter())
            .find(|(a, b)| a != b)
            .map(|(a, b)| a > b)
            .unwrap_or(false);
        if greater {
            best = i;
        }
    }
    best
}

/// Farthest point sampling; returns indices into `points`.
///
/// The first index is the lexicographically maximal point. Each following
/// pick maximizes the Euclidean distance to the already chosen set (lowest
/// index wins ties). When `k >= points.len()` every point is returned, the
/// seed first and the rest in input order.
pub fn fps_indices<T: Real>(points: &[Vec3<T>], k: usize) -> Result<Vec<usize>> {
    if points.is_empty() {
        return Err(Error::Invalid("farthest point sampling on an empty point set".into()));
    }
    if k == 0 {
        return Err(Error::Invalid("farthest point sampling needs k >= 1".into()));
    }
    let seed = seed_index(points);
    if k >= points.len() {
        let mut out = Vec::with_capacity(points.len());
        out.push(seed);
        out.extend((0..points.len()).filter(|&i| i != seed));
        return Ok(out);
    }
    let mut chosen = Vec::with_capacity(k);
    chosen.push(seed);
    let mut dist: Vec<T> = points.iter().map(|&p| (p - points[seed]).norm_sq()).collect();
    while chosen.len() < k {
        let mut best = 0;
        let mut best_d = -T::one();
        for (i, &d) in dist.iter().enumerate() {
            if d > best_d {
                best_d = d;
                best = i;
            }
        }
        chosen.push(best);
        let c = points[best];
        for (d, &p) in dist.iter_mut().zip(points) {
            let nd = (p - c).norm_sq();
            if nd < *d {
                *d = nd;
            }
        }
    }
    Ok(chosen)
}

/// Farthest point sampling returning the selected points.
pub fn fps_sample<T: Real>(points: &[Vec3<T>], k: usize) -> Result<Vec<Vec3<T>>> {
    Ok(fps_indices(points, k)?
        .into_iter()
        .map(|i| points[i])
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64, z: f64) -> Vec3<f64> {
        Vec3::new(x, y, z)
    }

    #[test]
    fn all_points_when_k_large() {
        let pts = vec![p(0., 0., 0.), p(2., 0., 0.), p(1., 5., 0.), p(-1., 0., 0.)];
        let idx = fps_indices(&pts, 10).unwrap();
        assert_eq!(idx, vec![1, 0, 2, 3]);
    }

    #[test]
    fn two_extremes_on_a_line() {
        let pts: Vec<_> = [3.0, -4.0, 0.5, 7.0, 1.0].iter().map(|&x| p(x, 0., 0.)).collect();
        let s = fps_sample(&pts, 2).unwrap();
        assert_eq!(s, vec![p(7., 0., 0.), p(-4., 0., 0.)]);
    }

    #[test]
    fn empty_input_errors() {
        assert!(fps_indices::<f64>(&[], 3).is_err());
    }

    #[test]
    fn lexicographic_seed_prefers_x_then_y() {
        let pts = vec![p(1., 0., 9.), p(1., 2., 0.), p(0., 9., 9.)];
        assert_eq!(fps_indices(&pts, 1).unwrap(), vec![1]);
    }
}
