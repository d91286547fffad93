use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Combinatorial part of a cell graph: undirected edges plus the set of
/// nodes that touch the background.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<(usize, usize)>>,
    surface: Vec<bool>,
}

impl Topology {
    /// Edges are stored with `a < b`, sorted; self loops and duplicates are rejected.
    pub fn new(n: usize, edges: &[(usize, usize)], surface: Vec<bool>) -> Result<Self> {
        if surface.len() != n {
            return Err(Error::Shape(format!(
                "surface flags: expected {n}, got {}",
                surface.len()
            )));
        }
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a == b {
                return Err(Error::Invalid(format!("self edge on node {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::Invalid(format!("edge ({a},{b}) out of range for {n} nodes")));
            }
            if !set.insert((a.min(b), a.max(b))) {
                return Err(Error::Invalid(format!("duplicate edge ({a},{b})")));
            }
        }
        let edges: Vec<(usize, usize)> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); n];
        for (e, &(a, b)) in edges.iter().enumerate() {
            adjacency[a].push((b, e));
            adjacency[b].push((a, e));
        }
        for list in adjacency.iter_mut() {
            list.sort_unstable();
        }
        Ok(Self {
            n,
            edges,
            adjacency,
            surface,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// `(neighbor, edge index)` pairs sorted by neighbor.
    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn touches_background(&self, i: usize) -> bool {
        self.surface[i]
    }

    pub fn surface_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(|&i| self.surface[i])
    }

    /// Number of connected components (isolated nodes count as components).
    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.n];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for &(v, _) in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        count
    }

    pub fn ensure_connected(&self) -> Result<()> {
        match self.component_count() {
            0 | 1 => Ok(()),
            components => Err(Error::Disconnected { components }),
        }
    }
}
