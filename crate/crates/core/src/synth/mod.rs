//! Synthetic organs with analytic ground truth: concentric cell layers and
//! straight cell files.

mod cell_file;
mod shell;

pub use cell_file::{make_cell_file, CellFileSpec};
pub use shell::{make_shell_organ, ShellSpec};

use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};
use crate::volume::{LabelTable, LabeledVolume, BACKGROUND};

/// Analytic ground truth for one generated cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellTruth {
    pub cell_id: u32,
    /// 1 = outermost layer.
    pub layer: u32,
    /// Outward unit normal of the layer surface at the cell's center of mass.
    pub radial: [f64; 3],
    /// Direction of the cell file (cell files only).
    pub file_direction: Option<[f64; 3]>,
}

/// A generated specimen.
#[derive(Clone, Debug)]
pub struct SynthOrgan {
    pub volume: LabeledVolume,
    /// Class id = layer index.
    pub labels: LabelTable,
    pub truth: Vec<CellTruth>,
}

impl SynthOrgan {
    pub fn truth_of(&self, cell_id: u32) -> Option<&CellTruth> {
        self.truth.iter().find(|t| t.cell_id == cell_id)
    }
}

const FACE_OFFSETS: [[i64; 3]; 6] = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]];

fn face_neighbors(dims: [usize; 3], i: usize) -> impl Iterator<Item = usize> {
    let x = (i % dims[0]) as i64;
    let y = ((i / dims[0]) % dims[1]) as i64;
    let z = (i / (dims[0] * dims[1])) as i64;
    FACE_OFFSETS.iter().filter_map(move |o| {
        let (a, b, c) = (x + o[0], y + o[1], z + o[2]);
        let inside = a >= 0 && b >= 0 && c >= 0 && a < dims[0] as i64 && b < dims[1] as i64 && c < dims[2] as i64;
        inside.then(|| a as usize + dims[0] * (b as usize + dims[1] * c as usize))
    })
}

/// Face-connected components of every labeled voxel: component id per voxel
/// (`u32::MAX` for background) and the size of each component.
fn components(data: &[u32], dims: [usize; 3]) -> (Vec<u32>, Vec<usize>) {
    let mut comp = vec![u32::MAX; data.len()];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..data.len() {
        if data[start] == BACKGROUND || comp[start] != u32::MAX {
            continue;
        }
        let id = sizes.len() as u32;
        let label = data[start];
        comp[start] = id;
        queue.push_back(start);
        let mut size = 0;
        while let Some(v) = queue.pop_front() {
            size += 1;
            for w in face_neighbors(dims, v) {
                if data[w] == label && comp[w] == u32::MAX {
                    comp[w] = id;
                    queue.push_back(w);
                }
            }
        }
        sizes.push(size);
    }
    (comp, sizes)
}

/// Merges every cell fragment other than the largest piece into the
/// neighbouring cell it shares most faces with (cells of the same layer
/// first). Fragments touching only background become background.
/// Fails when a cell disappears or fragments keep reappearing.
pub(crate) fn enforce_connectivity(data: &mut [u32], dims: [usize; 3], layer_of: &BTreeMap<u32, u32>) -> Result<()> {
    for _ in 0..64 {
        let (comp, sizes) = components(data, dims);
        let mut main: BTreeMap<u32, u32> = BTreeMap::new();
        for (i, &c) in comp.iter().enumerate() {
            if c == u32::MAX {
                continue;
            }
            let e = main.entry(data[i]).or_insert(c);
            if sizes[c as usize] > sizes[*e as usize] || (sizes[c as usize] == sizes[*e as usize] && c < *e) {
                *e = c;
            }
        }
        let mut fragments: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (i, &c) in comp.iter().enumerate() {
            if c != u32::MAX && main[&data[i]] != c {
                fragments.entry(c).or_default().push(i);
            }
        }
        if fragments.is_empty() {
            for &cell in layer_of.keys() {
                if !main.contains_key(&cell) {
                    return Err(Error::Degenerate(format!(
                        "cell {cell} vanished; resolution too coarse for the requested cell count"
                    )));
                }
            }
            return Ok(());
        }
        let mut assign = Vec::new();
        for voxels in fragments.values() {
            let own = data[voxels[0]];
            let own_layer = layer_of.get(&own).copied();
            let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
            for &v in voxels {
                for w in face_neighbors(dims, v) {
                    let l = data[w];
                    if l != BACKGROUND && l != own {
                        *counts.entry(l).or_default() += 1;
                    }
                }
            }
            let pick = |same: bool| {
                counts
                    .iter()
                    .filter(|(l, _)| !same || layer_of.get(l).copied() == own_layer)
                    .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                    .map(|(&l, _)| l)
            };
            let target = pick(true).or_else(|| pick(false)).unwrap_or(BACKGROUND);
            assign.push((voxels.clone(), target));
        }
        for (voxels, target) in assign {
            for v in voxels {
                data[v] = target;
            }
        }
    }
    Err(Error::Degenerate("could not make every generated cell connected".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fragment_joins_neighbour() {
        // 1 1 2 1  -> the isolated 1 at the end joins cell 2
        let mut data = vec![1, 1, 2, 1];
        let layers = BTreeMap::from([(1, 1), (2, 1)]);
        enforce_connectivity(&mut data, [4, 1, 1], &layers).unwrap();
        assert_eq!(data, vec![1, 1, 2, 2]);
    }

    #[test]
    fn vanished_cell_is_an_error() {
        let mut data = vec![1, 1, 0, 1];
        let layers = BTreeMap::from([(1, 1), (2, 1)]);
        assert!(enforce_connectivity(&mut data, [4, 1, 1], &layers).is_err());
    }
}
