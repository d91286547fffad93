//! Small fixed-size and dense linear algebra used by the geometry modules.

use std::ops::{Add, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A 3-vector in physical (µm) coordinates, components in (x, y, z) order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vec3<T>(pub [T; 3]);

impl<T: Real> Vec3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Vec3([x, y, z])
    }

    pub fn zero() -> Self {
        Vec3([T::zero(); 3])
    }

    /// Unit vector along axis `k`.
    pub fn unit(k: usize) -> Self {
        let mut v = [T::zero(); 3];
        v[k] = T::one();
        Vec3(v)
    }

    pub fn from_f64(v: [f64; 3]) -> Self {
        Vec3([T::lit(v[0]), T::lit(v[1]), T::lit(v[2])])
    }

    pub fn to_f64(self) -> [f64; 3] {
        [self.0[0].as_f64(), self.0[1].as_f64(), self.0[2].as_f64()]
    }

    pub fn dot(self, o: Self) -> T {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn cross(self, o: Self) -> Self {
        let [a0, a1, a2] = self.0;
        let [b0, b1, b2] = o.0;
        Vec3([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0])
    }

    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    pub fn norm(self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn scale(self, s: T) -> Self {
        Vec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    pub fn is_zero(self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    /// Normalized copy, or `None` when the norm is not above `eps`.
    pub fn try_normalize(self, eps: T) -> Option<Self> {
        let n = self.norm();
        if n > eps && n.is_finite() {
            Some(self.scale(T::one() / n))
        } else {
            None
        }
    }

    /// Cosine of the angle to `o`; 0 when either vector is (numerically) zero.
    pub fn cos_to(self, o: Self) -> T {
        let d = self.norm() * o.norm();
        if d > T::zero() {
            (self.dot(o) / d).max(-T::one()).min(T::one())
        } else {
            T::zero()
        }
    }

    pub fn is_finite(self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Vec3([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

impl<T> Index<usize> for Vec3<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

/// 3×3 matrix stored as rows.
pub type Mat3<T> = [[T; 3]; 3];

pub fn mat3_identity<T: Real>() -> Mat3<T> {
    let mut m = [[T::zero(); 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = T::one();
    }
    m
}

pub fn mat3_mul_vec<T: Real>(m: &Mat3<T>, v: Vec3<T>) -> Vec3<T> {
    Vec3([
        Vec3(m[0]).dot(v),
        Vec3(m[1]).dot(v),
        Vec3(m[2]).dot(v),
    ])
}

pub fn mat3_det<T: Real>(m: &Mat3<T>) -> T {
    Vec3(m[0]).dot(Vec3(m[1]).cross(Vec3(m[2])))
}

/// Eigen-decomposition of a symmetric 3×3 matrix.
#[derive(Clone, Copy, Debug)]
pub struct SymEigen3<T> {
    /// Eigenvalues, descending.
    pub values: [T; 3],
    /// Unit eigenvectors as rows, in the order of `values`.
    pub vectors: Mat3<T>,
}

/// Cyclic Jacobi iteration on a symmetric 3×3 matrix.
///
/// Only the upper triangle of `a` is read.
pub fn sym_eigen3<T: Real>(a: &Mat3<T>) -> SymEigen3<T> {
    let mut m = *a;
    m[1][0] = m[0][1];
    m[2][0] = m[0][2];
    m[2][1] = m[1][2];
    // columns of v accumulate the rotations
    let mut v = mat3_identity::<T>();
    let scale = m
        .iter()
        .flat_map(|r| r.iter())
        .fold(T::zero(), |acc, x| acc.max(x.abs()));
    if scale > T::zero() {
        for _sweep in 0..64 {
            let off = m[0][1].abs() + m[0][2].abs() + m[1][2].abs();
            if off <= T::epsilon() * T::epsilon() * scale {
                break;
            }
            for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
                let apq = m[p][q];
                if apq.abs() <= T::min_positive_value() {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..3 {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..3 {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| m[j][j].partial_cmp(&m[i][i]).unwrap_or(std::cmp::Ordering::Equal));
    let mut values = [T::zero(); 3];
    let mut vectors = [[T::zero(); 3]; 3];
    for (slot, &i) in order.iter().enumerate() {
        values[slot] = m[i][i];
        for k in 0..3 {
            vectors[slot][k] = v[k][i];
        }
    }
    SymEigen3 { values, vectors }
}

/// Principal components of a point cloud (population covariance).
#[derive(Clone, Copy, Debug)]
pub struct Pca3<T> {
    pub mean: Vec3<T>,
    /// Unit axes as rows, variance-descending. Signs are whatever the solver returns.
    pub axes: Mat3<T>,
    pub variances: [T; 3],
}

pub fn mean3<T: Real>(points: &[Vec3<T>]) -> Vec3<T> {
    if points.is_empty() {
        return Vec3::zero();
    }
    let sum = points.iter().fold(Vec3::zero(), |acc, &p| acc + p);
    sum.scale(T::one() / T::from_usize_lossy(points.len()))
}

pub fn covariance3<T: Real>(points: &[Vec3<T>]) -> (Vec3<T>, Mat3<T>) {
    let mean = mean3(points);
    let mut c = [[T::zero(); 3]; 3];
    for &p in points {
        let d = p - mean;
        for i in 0..3 {
            for j in i..3 {
                c[i][j] += d[i] * d[j];
            }
        }
    }
    let inv = if points.is_empty() {
        T::zero()
    } else {
        T::one() / T::from_usize_lossy(points.len())
    };
    for i in 0..3 {
        for j in i..3 {
            c[i][j] *= inv;
            c[j][i] = c[i][j];
        }
    }
    (mean, c)
}

pub fn pca3<T: Real>(points: &[Vec3<T>]) -> Pca3<T> {
    let (mean, cov) = covariance3(points);
    let eig = sym_eigen3(&cov);
    Pca3 {
        mean,
        axes: eig.vectors,
        variances: eig.values.map(|v| v.max(T::zero())),
    }
}

/// Diagonal of the inverse of a dense symmetric positive definite matrix (row-major, n×n).
///
/// Uses a Cholesky factor `A = L·Lᵀ`; `diag(A⁻¹)_i = Σ_k (L⁻¹)_{ki}²`.
pub fn spd_inverse_diagonal<T: Real>(a: &[T], n: usize) -> Result<Vec<T>> {
    if a.len() != n * n {
        return Err(Error::Shape(format!("expected {}x{} matrix", n, n)));
    }
    let mut l = vec![T::zero(); n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d <= T::zero() || !d.is_finite() {
            return Err(Error::Degenerate("matrix is not positive definite".into()));
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    // forward substitution for each column of L⁻¹ (lower triangular)
    let mut diag = vec![T::zero(); n];
    let mut col = vec![T::zero(); n];
    for c in 0..n {
        col.iter_mut().for_each(|x| *x = T::zero());
        col[c] = T::one() / l[c * n + c];
        for i in (c + 1)..n {
            let mut s = T::zero();
            for k in c..i {
                s += l[i * n + k] * col[k];
            }
            col[i] = -s / l[i * n + i];
        }
        diag[c] = col[c..].iter().map(|&x| x * x).sum();
    }
    Ok(diag)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_diagonal_matrix_sorted() {
        let e = sym_eigen3::<f64>(&[[1.0, 0.0, 0.0], [0.0, 3.0, 0.0], [0.0, 0.0, 2.0]]);
        assert_eq!(e.values, [3.0, 2.0, 1.0]);
        assert_eq!(e.vectors[0][1].abs(), 1.0);
        assert_eq!(e.vectors[2][0].abs(), 1.0);
    }

    #[test]
    fn jacobi_matches_nalgebra() {
        let a = [[4.0, 1.0, -2.0], [1.0, 2.0, 0.5], [-2.0, 0.5, 3.0]];
        let e = sym_eigen3(&a);
        let na = nalgebra::Matrix3::new(4.0, 1.0, -2.0, 1.0, 2.0, 0.5, -2.0, 0.5, 3.0);
        let mut ref_vals: Vec<f64> = na.symmetric_eigen().eigenvalues.iter().copied().collect();
        ref_vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for k in 0..3 {
            assert!((e.values[k] - ref_vals[k]).abs() < 1e-12);
            let v = Vec3(e.vectors[k]);
            let av = mat3_mul_vec(&a, v);
            assert!((av - v.scale(e.values[k])).norm() < 1e-12);
        }
    }

    #[test]
    fn spd_inverse_diagonal_small() {
        // [[4,2],[2,3]]^-1 = 1/8 [[3,-2],[-2,4]]
        let d = spd_inverse_diagonal::<f64>(&[4.0, 2.0, 2.0, 3.0], 2).unwrap();
        assert!((d[0] - 3.0 / 8.0).abs() < 1e-15);
        assert!((d[1] - 0.5).abs() < 1e-15);
        assert!(spd_inverse_diagonal(&[1.0, 2.0, 2.0, 1.0], 2).is_err());
    }

    #[test]
    fn cross_is_right_handed() {
        let x = Vec3::<f64>::unit(0);
        let y = Vec3::<f64>::unit(1);
        assert_eq!(x.cross(y), Vec3::unit(2));
    }
}
