use crate::linalg::{pca3, Vec3};
use crate::scalar::Real;

/// Plane normal of a boundary patch oriented from cell `i` toward cell `j`.
///
/// The normal is the smallest-variance principal direction of the samples,
/// flipped so that `dot(n, com_j - com_i) >= 0`. With fewer than three
/// samples or (numerically) collinear samples it falls back to
/// `normalize(com_j - com_i)` and reports `degenerate = true`.
pub fn boundary_normal<T: Real>(
    samples: &[Vec3<T>],
    com_i: Vec3<T>,
    com_j: Vec3<T>,
) -> (Vec3<T>, bool) {
    let toward = com_j - com_i;
    let fallback = || {
        (
            toward.try_normalize(T::zero()).unwrap_or_else(Vec3::zero),
            true,
        )
    };
    if samples.len() < 3 {
        return fallback();
    }
    let pca = pca3(samples);
    let [l0, l1, _] = pca.variances;
    if !(l0 > T::zero()) || l1 <= T::lit(1e-10) * l0 {
        return fallback();
    }
    let mut n = Vec3(pca.axes[2]);
    n = n.try_normalize(T::zero()).unwrap_or(n);
    if n.dot(toward) < T::zero() {
        n = -n;
    }
    (n, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane(z: f64) -> Vec<Vec3<f64>> {
        let mut v = Vec::new();
        for i in 0..5 {
            for j in 0..4 {
                v.push(Vec3::new(i as f64, j as f64 * 1.3, z));
            }
        }
        v
    }

    #[test]
    fn plane_normal_points_toward_j() {
        let (n, deg) = boundary_normal(&plane(0.0), Vec3::new(0., 0., -1.), Vec3::new(1., 1., 2.));
        assert!(!deg);
        assert!((n - Vec3::new(0., 0., 1.)).norm() < 1e-12);
        let (n, _) = boundary_normal(&plane(0.0), Vec3::new(0., 0., 1.), Vec3::new(1., 1., -2.));
        assert!((n - Vec3::new(0., 0., -1.)).norm() < 1e-12);
    }

    #[test]
    fn collinear_samples_fall_back() {
        let line: Vec<_> = (0..6).map(|i| Vec3::new(i as f64, 0., 0.)).collect();
        let (n, deg) = boundary_normal(&line, Vec3::zero(), Vec3::new(0., 3., 4.));
        assert!(deg);
        assert!((n - Vec3::new(0., 0.6, 0.8)).norm() < 1e-12);
    }
}
