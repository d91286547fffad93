use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `D^-1/2 (A + I) D^-1/2` in CSR form, with `D` the degree of `A + I`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedAdjacency<T> {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Real> NormalizedAdjacency<T> {
    /// `edges` are undirected pairs, each listed once.
    pub fn new(n: usize, edges: &[[u32; 2]]) -> Result<Self> {
        let mut nbrs: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for &[a, b] in edges {
            let (a, b) = (a as usize, b as usize);
            if a >= n || b >= n || a == b {
                return Err(Error::Invalid(format!("bad edge ({a}, {b}) for {n} nodes")));
            }
            nbrs[a].push(b);
            nbrs[b].push(a);
        }
        let inv_sqrt: Vec<T> = nbrs
            .iter()
            .map(|v| T::one() / T::from_usize_lossy(v.len()).sqrt())
            .collect();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for (i, v) in nbrs.iter_mut().enumerate() {
            v.sort_unstable();
            for &j in v.iter() {
                cols.push(j);
                vals.push(inv_sqrt[i] * inv_sqrt[j]);
            }
            row_ptr.push(cols.len());
        }
        Ok(Self { n, row_ptr, cols, vals })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `Â · X`
    pub fn apply(&self, x: &Array2<T>) -> Array2<T> {
        let mut out = Array2::zeros(x.dim());
        for i in 0..self.n {
            let mut row = out.row_mut(i);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                row.scaled_add(self.vals[k], &x.row(self.cols[k]));
            }
        }
        out
    }

    pub fn to_dense(&self) -> Array2<T> {
        let mut d = Array2::zeros((self.n, self.n));
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                d[[i, self.cols[k]]] = self.vals[k];
            }
        }
        d
    }
}
