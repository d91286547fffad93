use crate::error::Result;
use crate::graph::Topology;
use crate::linalg::spd_inverse_diagonal;
use crate::scalar::Real;

/// `degree / (N - 1)`; zero for a single-node graph.
pub fn degree_centrality<T: Real>(topology: &Topology) -> Vec<T> {
    let n = topology.num_nodes();
    if n < 2 {
        return vec![T::zero(); n];
    }
    let denom = T::from_usize_lossy(n - 1);
    (0..n)
        .map(|i| T::from_usize_lossy(topology.degree(i)) / denom)
        .collect()
}

/// Current-flow closeness (information centrality) with unit edge weights:
/// `c(v) = (N - 1) / Σ_t R(v, t)`, where `R(v, t) = L⁺_vv + L⁺_tt − 2 L⁺_vt`
/// is the effective resistance.
///
/// Row sums of `L⁺` vanish, so `Σ_t R(v, t) = N·L⁺_vv + tr(L⁺)`. The
/// diagonal comes from one Cholesky factorization of `L + J/N`, whose
/// inverse is `L⁺ + J/N` on a connected graph.
pub fn current_flow_closeness<T: Real>(topology: &Topology) -> Result<Vec<T>> {
    topology.ensure_connected()?;
    let n = topology.num_nodes();
    if n < 2 {
        return Ok(vec![T::zero(); n]);
    }
    let inv_n = T::one() / T::from_usize_lossy(n);
    let mut m = vec![inv_n; n * n];
    for i in 0..n {
        m[i * n + i] += T::from_usize_lossy(topology.degree(i));
        for &(j, _) in topology.neighbors(i) {
            m[i * n + j] -= T::one();
        }
    }
    let diag: Vec<T> = spd_inverse_diagonal(&m, n)?
        .into_iter()
        .map(|d| d - inv_n)
        .collect();
    let trace: T = diag.iter().copied().sum();
    let nn = T::from_usize_lossy(n);
    let numer = T::from_usize_lossy(n - 1);
    Ok(diag.iter().map(|&d| numer / (nn * d + trace)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_center_degree_one() {
        let t = Topology::new(5, &[(0, 1), (0, 2), (0, 3), (0, 4)], vec![false; 5]).unwrap();
        let d: Vec<f64> = degree_centrality(&t);
        assert_eq!(d[0], 1.0);
        assert_eq!(d[1], 0.25);
    }

    #[test]
    fn complete_graph_is_uniform() {
        let mut e = Vec::new();
        for i in 0..4 {
            for j in i + 1..4 {
                e.push((i, j));
            }
        }
        let t = Topology::new(4, &e, vec![false; 4]).unwrap();
        let c: Vec<f64> = current_flow_closeness(&t).unwrap();
        // K4: R(v,t) = 2/4, so c = 3 / (3 * 0.5) = 2
        for v in c {
            assert!((v - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_nodes_and_path() {
        let t = Topology::new(2, &[(0, 1)], vec![false; 2]).unwrap();
        let c: Vec<f64> = current_flow_closeness(&t).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-12);
        // P3: resistances are path lengths; center: 2/(1+1), ends: 2/(1+2)
        let t = Topology::new(3, &[(0, 1), (1, 2)], vec![false; 3]).unwrap();
        let c: Vec<f64> = current_flow_closeness(&t).unwrap();
        assert!((c[1] - 1.0).abs() < 1e-12);
        assert!((c[0] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn disconnected_errors() {
        let t = Topology::new(3, &[(0, 1)], vec![false; 3]).unwrap();
        assert!(current_flow_closeness::<f64>(&t).is_err());
    }
}
