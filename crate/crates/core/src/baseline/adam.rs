use super::GcnParams;
use crate::scalar::Real;

/// Adam moments for a [`GcnParams`] set.
#[derive(Clone, Debug)]
pub struct Adam<T> {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: GcnParams<T>,
    v: GcnParams<T>,
    t: i32,
}

impl<T: Real> Adam<T> {
    pub fn new(like: &GcnParams<T>) -> Self {
        Self::with_constants(like, 0.9, 0.999, 1e-8)
    }

    pub fn with_constants(like: &GcnParams<T>, beta1: f64, beta2: f64, eps: f64) -> Self {
        let z = GcnParams::zeros(like.input_width(), like.hidden_width(), like.num_classes());
        Self {
            beta1,
            beta2,
            eps,
            m: z.clone(),
            v: z,
            t: 0,
        }
    }

    pub fn steps(&self) -> i32 {
        self.t
    }

    /// One bias-corrected update of `params` along `grads`.
    pub fn step(&mut self, params: &mut GcnParams<T>, grads: &GcnParams<T>, lr: T) {
        self.t += 1;
        let (b1, b2) = (T::lit(self.beta1), T::lit(self.beta2));
        let c1 = T::one() - b1.powi(self.t);
        let c2 = T::one() - b2.powi(self.t);
        let eps = T::lit(self.eps);
        let ps = params.tensors_mut();
        let gs = grads.tensors();
        let ms = self.m.tensors_mut();
        let vs = self.v.tensors_mut();
        for (((p, g), m), v) in ps.into_iter().zip(gs).zip(ms).zip(vs) {
            for i in 0..p.len() {
                m[i] = b1 * m[i] + (T::one() - b1) * g[i];
                v[i] = b2 * v[i] + (T::one() - b2) * g[i] * g[i];
                let mh = m[i] / c1;
                let vh = v[i] / c2;
                p[i] -= lr * mh / (vh.sqrt() + eps);
            }
        }
    }
}
