use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::Topology;

/// Unit-weight distance to a virtual background node linked to every
/// surface cell; surface cells get 1.
pub fn hops_to_surface(topology: &Topology) -> Result<Vec<u32>> {
    let n = topology.num_nodes();
    let mut hops = vec![u32::MAX; n];
    let mut queue = VecDeque::new();
    for i in topology.surface_nodes() {
        hops[i] = 1;
        queue.push_back(i);
    }
    if queue.is_empty() {
        return Err(Error::NoSurface);
    }
    while let Some(u) = queue.pop_front() {
        for &(v, _) in topology.neighbors(u) {
            if hops[v] == u32::MAX {
                hops[v] = hops[u] + 1;
                queue.push_back(v);
            }
        }
    }
    if hops.contains(&u32::MAX) {
        return Err(Error::Disconnected {
            components: topology.component_count(),
        });
    }
    Ok(hops)
}
