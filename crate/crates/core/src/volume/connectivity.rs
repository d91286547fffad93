use std::collections::BTreeMap;

use super::{LabeledVolume, BACKGROUND};

/// Per-cell count of 6-connected components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectivityReport {
    pub components: BTreeMap<u32, usize>,
    /// Informational: some background voxel lies on the grid boundary.
    pub boundary_background: bool,
}

impl ConnectivityReport {
    pub fn passed(&self) -> bool {
        self.components.values().all(|&c| c == 1)
    }

    pub fn failing(&self) -> impl Iterator<Item = (u32, usize)> + '_ {
        self.components
            .iter()
            .filter(|(_, &c)| c != 1)
            .map(|(&k, &c)| (k, c))
    }
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

/// Counts the face-connected components of every cell.
pub fn validate_connectivity(vol: &LabeledVolume) -> ConnectivityReport {
    let data = vol.data();
    let [nx, ny, _] = vol.dims();
    let mut uf = UnionFind::new(data.len());
    for (i, &id) in data.iter().enumerate() {
        if id == BACKGROUND {
            continue;
        }
        let [x, y, z] = vol.coords(i);
        if x + 1 < nx && data[i + 1] == id {
            uf.union(i as u32, (i + 1) as u32);
        }
        if y + 1 < ny && data[i + nx] == id {
            uf.union(i as u32, (i + nx) as u32);
        }
        if z + 1 < vol.dims()[2] && data[i + nx * ny] == id {
            uf.union(i as u32, (i + nx * ny) as u32);
        }
    }
    let mut components: BTreeMap<u32, usize> = BTreeMap::new();
    for (i, &id) in data.iter().enumerate() {
        if id == BACKGROUND {
            continue;
        }
        let entry = components.entry(id).or_insert(0);
        if uf.find(i as u32) == i as u32 {
            *entry += 1;
        }
    }
    ConnectivityReport {
        components,
        boundary_background: vol.has_boundary_background(),
    }
}
