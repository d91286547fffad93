//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use cellgraph::graph::Topology;
use nalgebra::DMatrix;
use rand::Rng;

/// Random connected graph: a random spanning tree plus `extra` random edges.
pub fn random_connected<R: Rng>(rng: &mut R, n: usize, extra: usize) -> Vec<(usize, usize)> {
    let mut edges = BTreeSet::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        edges.insert((u, v));
    }
    if n >= 2 {
        for _ in 0..extra {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a != b {
                edges.insert((a.min(b), a.max(b)));
            }
        }
    }
    edges.into_iter().collect()
}

pub fn topology(n: usize, edges: &[(usize, usize)], surface: &[usize]) -> Topology {
    let mut flags = vec![false; n];
    for &s in surface {
        flags[s] = true;
    }
    Topology::new(n, edges, flags).unwrap()
}

/// All-pairs unit-weight distances (Floyd–Warshall).
pub fn all_pairs(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    const INF: usize = usize::MAX / 4;
    let mut d = vec![vec![INF; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for &(a, b) in edges {
        d[a][b] = 1;
        d[b][a] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Hops to surface: 1 + distance to the nearest surface node.
pub fn hops_oracle(n: usize, edges: &[(usize, usize)], surface: &[usize]) -> Vec<u32> {
    let d = all_pairs(n, edges);
    (0..n)
        .map(|i| surface.iter().map(|&s| d[i][s]).min().unwrap() as u32 + 1)
        .collect()
}

/// Current-flow closeness from the Moore–Penrose pseudo-inverse of the
/// Laplacian: `(n - 1) / Σ_u R(u, v)` with effective resistance
/// `R(u, v) = L⁺uu + L⁺vv - 2 L⁺uv`.
pub fn cfc_oracle(n: usize, edges: &[(usize, usize)]) -> Vec<f64> {
    let mut l = DMatrix::<f64>::zeros(n, n);
    for &(a, b) in edges {
        l[(a, a)] += 1.0;
        l[(b, b)] += 1.0;
        l[(a, b)] -= 1.0;
        l[(b, a)] -= 1.0;
    }
    let p = l.pseudo_inverse(1e-10).unwrap();
    (0..n)
        .map(|v| {
            let total: f64 = (0..n).map(|u| p[(u, u)] + p[(v, v)] - 2.0 * p[(u, v)]).sum();
            (n as f64 - 1.0) / total
        })
        .collect()
}

/// Confusion-matrix tally of one specimen: `m[gt][pred]`.
pub fn confusion(pred: &[u8], gt: &[u8]) -> [[u64; 9]; 9] {
    let mut m = [[0u64; 9]; 9];
    for (&p, &g) in pred.iter().zip(gt) {
        m[g as usize][p as usize] += 1;
    }
    m
}

/// Top-1 and class-average (recall, class 7 excluded) from a confusion tally.
pub fn scores_oracle(pred: &[u8], gt: &[u8]) -> (f64, Option<f64>) {
    let m = confusion(pred, gt);
    let total: u64 = m.iter().flatten().sum();
    let diag: u64 = (0..9).map(|c| m[c][c]).sum();
    let mut recalls = Vec::new();
    for c in 0..9 {
        if c == 7 {
            continue;
        }
        let row: u64 = m[c].iter().sum();
        if row > 0 {
            recalls.push(m[c][c] as f64 / row as f64);
        }
    }
    let ca = if recalls.is_empty() {
        None
    } else {
        Some(recalls.iter().sum::<f64>() / recalls.len() as f64)
    };
    (diag as f64 / total as f64, ca)
}
