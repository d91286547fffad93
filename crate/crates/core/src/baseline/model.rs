use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_distr::{Distribution, Uniform};

use super::NormalizedAdjacency;
use crate::error::{Error, Result};
use crate::scalar::Real;

const LAYER_NORM_EPS: f64 = 1e-5;

/// Two-layer graph convolution weights.
#[derive(Clone, Debug, PartialEq)]
pub struct GcnParams<T> {
    /// F × H
    pub w1: Array2<T>,
    pub b1: Array1<T>,
    /// H × C
    pub w2: Array2<T>,
    pub b2: Array1<T>,
}

impl<T: Real> GcnParams<T> {
    pub fn zeros(f: usize, h: usize, c: usize) -> Self {
        Self {
            w1: Array2::zeros((f, h)),
            b1: Array1::zeros(h),
            w2: Array2::zeros((h, c)),
            b2: Array1::zeros(c),
        }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn glorot<R: Rng + ?Sized>(f: usize, h: usize, c: usize, rng: &mut R) -> Self {
        let mut p = Self::zeros(f, h, c);
        for w in [&mut p.w1, &mut p.w2] {
            let (fan_in, fan_out) = w.dim();
            let limit = (6.0 / (fan_in + fan_out).max(1) as f64).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit).expect("finite limit");
            w.mapv_inplace(|_| T::lit(dist.sample(rng)));
        }
        p
    }

    pub fn input_width(&self) -> usize {
        self.w1.nrows()
    }

    pub fn hidden_width(&self) -> usize {
        self.w1.ncols()
    }

    pub fn num_classes(&self) -> usize {
        self.w2.ncols()
    }

    pub fn validate(&self) -> Result<()> {
        let (f, h) = self.w1.dim();
        let ok = self.b1.len() == h && self.w2.nrows() == h && self.b2.len() == self.w2.ncols() && f > 0;
        if !ok {
            return Err(Error::Shape("inconsistent parameter shapes".into()));
        }
        if self.tensors().iter().any(|t| t.iter().any(|v| !v.is_finite())) {
            return Err(Error::Invalid("non-finite parameter".into()));
        }
        Ok(())
    }

    /// Flat views in the order w1, b1, w2, b2.
    pub fn tensors(&self) -> [&[T]; 4] {
        [
            self.w1.as_slice().expect("standard layout"),
            self.b1.as_slice().expect("standard layout"),
            self.w2.as_slice().expect("standard layout"),
            self.b2.as_slice().expect("standard layout"),
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut [T]; 4] {
        [
            self.w1.as_slice_mut().expect("standard layout"),
            self.b1.as_slice_mut().expect("standard layout"),
            self.w2.as_slice_mut().expect("standard layout"),
            self.b2.as_slice_mut().expect("standard layout"),
        ]
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    fn weight_sq_norm(&self) -> T {
        self.w1.iter().chain(self.w2.iter()).map(|&v| v * v).sum()
    }
}

/// Forward-pass switches.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct ForwardOptions {
    /// Parameter-free per-node normalization of the hidden layer.
    pub layer_norm: bool,
}

/// Intermediate values kept for the backward pass.
#[derive(Clone, Debug)]
pub struct ForwardCache<T> {
    /// Â·X
    ax: Array2<T>,
    /// pre-activation of layer 1
    z1: Array2<T>,
    /// hidden after ReLU (and normalization)
    hidden: Array2<T>,
    /// 1/σ per row when layer norm is on
    inv_std: Option<Array1<T>>,
    /// inverted-dropout multipliers (None at inference)
    mask: Option<Array2<T>>,
    /// Â·(dropped hidden)
    ad: Array2<T>,
    pub probs: Array2<T>,
}

fn softmax_rows<T: Real>(z: &mut Array2<T>) {
    for mut row in z.rows_mut() {
        let m = row.iter().copied().fold(T::neg_infinity(), T::max);
        row.mapv_inplace(|v| (v - m).exp());
        let s: T = row.iter().copied().sum();
        row.mapv_inplace(|v| v / s);
    }
}

fn layer_norm_rows<T: Real>(h: &mut Array2<T>) -> Array1<T> {
    let w = T::from_usize_lossy(h.ncols());
    let mut inv = Array1::zeros(h.nrows());
    for (i, mut row) in h.rows_mut().into_iter().enumerate() {
        let mean = row.sum() / w;
        let var = row.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / w;
        let s = T::one() / (var + T::lit(LAYER_NORM_EPS)).sqrt();
        row.mapv_inplace(|v| (v - mean) * s);
        inv[i] = s;
    }
    inv
}

/// Inverted-dropout mask: entries are `0` with probability `rate`, else `1/(1-rate)`.
pub fn dropout_mask<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, rate: f64, rng: &mut R) -> Array2<T> {
    let keep = T::lit(1.0 / (1.0 - rate));
    Array2::from_shape_simple_fn((rows, cols), || {
        if rng.random::<f64>() < rate {
            T::zero()
        } else {
            keep
        }
    })
}

/// `softmax(Â·drop(norm(ReLU(Â·X·W1 + b1)))·W2 + b2)`.
pub fn forward<T: Real>(
    params: &GcnParams<T>,
    adj: &NormalizedAdjacency<T>,
    x: &Array2<T>,
    opts: ForwardOptions,
    mask: Option<Array2<T>>,
) -> Result<ForwardCache<T>> {
    if x.ncols() != params.input_width() || x.nrows() != adj.len() {
        return Err(Error::Shape(format!(
            "features {:?} vs params F={} and graph N={}",
            x.dim(),
            params.input_width(),
            adj.len()
        )));
    }
    if let Some(m) = &mask {
        if m.dim() != (x.nrows(), params.hidden_width()) {
            return Err(Error::Shape("dropout mask shape".into()));
        }
    }
    let ax = adj.apply(x);
    let z1 = ax.dot(&params.w1) + &params.b1;
    let mut hidden = z1.mapv(|v| v.max(T::zero()));
    let inv_std = opts.layer_norm.then(|| layer_norm_rows(&mut hidden));
    let dropped = match &mask {
        Some(m) => &hidden * m,
        None => hidden.clone(),
    };
    let ad = adj.apply(&dropped);
    let mut probs = ad.dot(&params.w2) + &params.b2;
    softmax_rows(&mut probs);
    Ok(ForwardCache {
        ax,
        z1,
        hidden,
        inv_std,
        mask,
        ad,
        probs,
    })
}

/// Class probabilities at inference (no dropout).
pub fn predict_proba<T: Real>(
    params: &GcnParams<T>,
    adj: &NormalizedAdjacency<T>,
    x: &Array2<T>,
    opts: ForwardOptions,
) -> Result<Array2<T>> {
    Ok(forward(params, adj, x, opts, None)?.probs)
}

/// Arg-max class per node (lowest class on ties).
pub fn argmax_rows<T: Real>(probs: &Array2<T>) -> Vec<u8> {
    probs
        .rows()
        .into_iter()
        .map(|r| {
            let mut best = 0;
            for (k, &v) in r.iter().enumerate() {
                if v > r[best] {
                    best = k;
                }
            }
            best as u8
        })
        .collect()
}

/// Mean cross-entropy of cached probabilities.
pub fn cross_entropy<T: Real>(probs: &Array2<T>, labels: &[u8]) -> T {
    let tiny = T::min_positive_value();
    let n = T::from_usize_lossy(labels.len().max(1));
    labels
        .iter()
        .enumerate()
        .map(|(i, &c)| -probs[[i, c as usize]].max(tiny).ln())
        .sum::<T>()
        / n
}

/// Mean cross-entropy plus `(wd/2)·(‖W1‖² + ‖W2‖²)` and its analytic gradient.
pub fn loss_and_grads<T: Real>(
    params: &GcnParams<T>,
    adj: &NormalizedAdjacency<T>,
    x: &Array2<T>,
    labels: &[u8],
    weight_decay: T,
    opts: ForwardOptions,
    mask: Option<Array2<T>>,
) -> Result<(T, GcnParams<T>)> {
    let n = x.nrows();
    if labels.len() != n {
        return Err(Error::Shape(format!("{} labels for {n} nodes", labels.len())));
    }
    let c = params.num_classes();
    if let Some(&bad) = labels.iter().find(|&&l| l as usize >= c) {
        return Err(Error::InvalidClass(bad, (c - 1) as u8));
    }
    let cache = forward(params, adj, x, opts, mask)?;
    let loss = cross_entropy(&cache.probs, labels) + weight_decay * params.weight_sq_norm() / T::lit(2.0);

    let inv_n = T::one() / T::from_usize_lossy(n);
    let mut dz2 = cache.probs.clone();
    for (i, &l) in labels.iter().enumerate() {
        dz2[[i, l as usize]] -= T::one();
    }
    dz2.mapv_inplace(|v| v * inv_n);

    let w2 = cache.ad.t().dot(&dz2) + &params.w2.mapv(|v| v * weight_decay);
    let b2 = dz2.sum_axis(Axis(0));
    // Â is symmetric
    let mut dh = adj.apply(&dz2.dot(&params.w2.t()));
    if let Some(m) = &cache.mask {
        dh *= m;
    }
    if let Some(inv) = &cache.inv_std {
        let w = T::from_usize_lossy(dh.ncols());
        for i in 0..n {
            let y = cache.hidden.row(i);
            let mut g = dh.row_mut(i);
            let mean_g = g.sum() / w;
            let mean_gy = g.iter().zip(y.iter()).map(|(&a, &b)| a * b).sum::<T>() / w;
            for (gk, &yk) in g.iter_mut().zip(y.iter()) {
                *gk = inv[i] * (*gk - mean_g - yk * mean_gy);
            }
        }
    }
    let dz1 = ndarray::Zip::from(&dh)
        .and(&cache.z1)
        .map_collect(|&g, &z| if z > T::zero() { g } else { T::zero() });
    let w1 = cache.ax.t().dot(&dz1) + &params.w1.mapv(|v| v * weight_decay);
    let b1 = dz1.sum_axis(Axis(0));
    Ok((loss, GcnParams { w1, b1, w2, b2 }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (GcnParams<f64>, NormalizedAdjacency<f64>, Array2<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = GcnParams::glorot(4, 5, 3, &mut rng);
        let adj = NormalizedAdjacency::new(5, &[[0, 1], [1, 2], [2, 3], [3, 4], [0, 4]]).unwrap();
        let x = Array2::from_shape_fn((5, 4), |(i, j)| ((i * 5 + j * 3) % 7) as f64 / 3.0 - 1.0);
        (p, adj, x)
    }

    #[test]
    fn zero_output_weights_give_uniform_rows() {
        let (mut p, adj, x) = setup();
        p.w2.fill(0.0);
        let probs = predict_proba(&p, &adj, &x, ForwardOptions::default()).unwrap();
        assert!(probs.iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-15));
        let (loss, _) = loss_and_grads(&p, &adj, &x, &[0, 1, 2, 0, 1], 0.0, ForwardOptions::default(), None).unwrap();
        assert!((loss - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn rows_sum_to_one() {
        let (p, adj, x) = setup();
        for opts in [ForwardOptions::default(), ForwardOptions { layer_norm: true }] {
            let probs = predict_proba(&p, &adj, &x, opts).unwrap();
            for r in probs.rows() {
                assert!((r.sum() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn shape_errors() {
        let (p, adj, _) = setup();
        let x = Array2::zeros((5, 3));
        assert!(predict_proba(&p, &adj, &x, ForwardOptions::default()).is_err());
        let x = Array2::zeros((5, 4));
        assert!(loss_and_grads(&p, &adj, &x, &[0, 1, 2, 0, 3], 0.0, ForwardOptions::default(), None).is_err());
    }

    #[test]
    fn argmax_lowest_on_ties() {
        let p = Array2::from_shape_vec((2, 3), vec![0.2, 0.4, 0.4, 0.5, 0.3, 0.2]).unwrap();
        assert_eq!(argmax_rows(&p), vec![1, 0]);
    }
}
