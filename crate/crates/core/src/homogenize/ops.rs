use crate::linalg::Vec3;
use crate::scalar::Real;

/// Guard on the standard deviation used by [`zscore`].
pub const ZSCORE_EPS: f64 = 1e-8;
/// Default saturation of the hop count.
pub const DEFAULT_HOP_CAP: u32 = 3;

/// Orientation embedding `(x, y, z) -> (x², y², z², xy, xz, yz)`; `v` and `-v` map to the same point.
pub fn rp2_embed<T: Real>(v: Vec3<T>) -> [T; 6] {
    let [x, y, z] = v.0;
    [x * x, y * y, z * z, x * y, x * z, y * z]
}

/// Population mean and standard deviation.
pub fn mean_std<T: Real>(column: &[T]) -> (T, T) {
    if column.is_empty() {
        return (T::zero(), T::zero());
    }
    let n = T::from_usize_lossy(column.len());
    let mean = column.iter().copied().sum::<T>() / n;
    let var = column.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / n;
    (mean, var.sqrt())
}

/// `(x - mean) / max(std, 1e-8)` with the given statistics.
pub fn zscore_with<T: Real>(column: &[T], mean: T, std: T) -> Vec<T> {
    let s = std.max(T::lit(ZSCORE_EPS));
    column.iter().map(|&x| (x - mean) / s).collect()
}

/// Z-score of a column against its own population statistics.
pub fn zscore<T: Real>(column: &[T]) -> Vec<T> {
    let (m, s) = mean_std(column);
    zscore_with(column, m, s)
}

pub fn clip_hops(h: u32, cap: u32) -> u32 {
    h.min(cap)
}

/// One-hot over `{1, 2, ..., cap}` after clipping (hop 0 maps to the first slot).
pub fn one_hot_hops<T: Real>(h: u32, cap: u32) -> Vec<T> {
    let cap = cap.max(1);
    let slot = (clip_hops(h, cap).max(1) - 1) as usize;
    (0..cap as usize).map(|i| if i == slot { T::one() } else { T::zero() }).collect()
}

/// `v / ‖v‖`; a zero vector is returned unchanged with the flag set.
pub fn unit_norm<T: Real>(v: &[T]) -> (Vec<T>, bool) {
    let n = v.iter().map(|&x| x * x).sum::<T>().sqrt();
    if n == T::zero() || !n.is_finite() {
        return (v.to_vec(), true);
    }
    (v.iter().map(|&x| x / n).collect(), false)
}
