use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

/// Largest class id of the merged (benchmark) class set.
pub const MAX_CLASS: u8 = 8;
/// Largest class id accepted in raw annotations (`L5` before merging).
pub const MAX_RAW_CLASS: u8 = 9;

/// Tissue classes. Integument layers use their layer index as id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum CellClass {
    Nu = 0,
    L1 = 1,
    L2 = 2,
    L3 = 3,
    /// Inner layer of the inner integument, `L4/L5` after merging.
    L4 = 4,
    Fu = 5,
    AnteriorChalaza = 6,
    /// Embryo sac; excluded from the class-average accuracy.
    Es = 7,
    PosteriorChalaza = 8,
    /// Raw-only id, merged into `L4` by the default preprocessing.
    L5 = 9,
}

impl CellClass {
    pub const fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<Self> {
        use CellClass::*;
        Some(match id {
            0 => Nu,
            1 => L1,
            2 => L2,
            3 => L3,
            4 => L4,
            5 => Fu,
            6 => AnteriorChalaza,
            7 => Es,
            8 => PosteriorChalaza,
            9 => L5,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        use CellClass::*;
        match self {
            Nu => "nu",
            L1 => "L1",
            L2 => "L2",
            L3 => "L3",
            L4 => "L4",
            Fu => "fu",
            AnteriorChalaza => "a-ch",
            Es => "es",
            PosteriorChalaza => "p-ch",
            L5 => "L5",
        }
    }

    /// The `L5 → L4` merge applied before benchmarking.
    pub fn default_merge() -> BTreeMap<u8, u8> {
        BTreeMap::from([(CellClass::L5.id(), CellClass::L4.id())])
    }
}

/// Map from cell id to class id.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabelTable {
    map: BTreeMap<u32, u8>,
}

impl LabelTable {
    pub fn new(map: BTreeMap<u32, u8>) -> Result<Self> {
        if let Some((_, &c)) = map.iter().find(|(_, &c)| c > MAX_RAW_CLASS) {
            return Err(Error::InvalidClass(c, MAX_RAW_CLASS));
        }
        if map.contains_key(&0) {
            return Err(Error::Invalid("cell id 0 is background and cannot be labeled".into()));
        }
        Ok(Self { map })
    }

    pub fn get(&self, cell: u32) -> Option<u8> {
        self.map.get(&cell).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u8)> + '_ {
        self.map.iter().map(|(&k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// True when every class is inside the merged benchmark range.
    pub fn is_canonical(&self) -> bool {
        self.map.values().all(|&c| c <= MAX_CLASS)
    }

    /// Cell ids of `cells` that have no entry.
    pub fn missing(&self, cells: &[u32]) -> Vec<u32> {
        cells.iter().copied().filter(|c| !self.map.contains_key(c)).collect()
    }

    /// Cells labelled with `class`.
    pub fn cells_of(&self, class: CellClass) -> impl Iterator<Item = u32> + '_ {
        self.map
            .iter()
            .filter(move |(_, &c)| c == class.id())
            .map(|(&k, _)| k)
    }
}

/// Replaces every class that is a key of `merge_map` by its value.
pub fn merge_labels(labels: &LabelTable, merge_map: &BTreeMap<u8, u8>) -> Result<LabelTable> {
    for (&from, &to) in merge_map {
        if from > MAX_RAW_CLASS {
            return Err(Error::InvalidClass(from, MAX_RAW_CLASS));
        }
        if to > MAX_CLASS {
            return Err(Error::InvalidClass(to, MAX_CLASS));
        }
    }
    let map = labels
        .map
        .iter()
        .map(|(&cell, &c)| (cell, merge_map.get(&c).copied().unwrap_or(c)))
        .collect();
    Ok(LabelTable { map })
}

pub fn read_label_table(path: &Path) -> Result<LabelTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    match lines.next().map(str::trim) {
        Some("cell_id,class_id") => {}
        _ => return Err(Error::header(path, "expected header line cell_id,class_id")),
    }
    let mut map = BTreeMap::new();
    for (n, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = || Error::header(path, format!("line {}: expected cell_id,class_id", n + 2));
        let (a, b) = line.split_once(',').ok_or_else(bad)?;
        let cell: u32 = a.trim().parse().map_err(|_| bad())?;
        let class: u8 = b.trim().parse().map_err(|_| bad())?;
        if map.insert(cell, class).is_some() {
            return Err(Error::header(path, format!("duplicate cell id {cell}")));
        }
    }
    LabelTable::new(map)
}

pub fn write_label_table(labels: &LabelTable, path: &Path) -> Result<()> {
    let mut out = String::from("cell_id,class_id\n");
    for (cell, class) in labels.iter() {
        out.push_str(&format!("{cell},{class}\n"));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> LabelTable {
        LabelTable::new(BTreeMap::from([(1, 9), (2, 4), (3, 7), (4, 1)])).unwrap()
    }

    #[test]
    fn l5_merge_removes_l5_and_is_idempotent() {
        let merge = CellClass::default_merge();
        let once = merge_labels(&table(), &merge).unwrap();
        assert!(once.iter().all(|(_, c)| c != CellClass::L5.id()));
        assert!(once.is_canonical());
        assert_eq!(merge_labels(&once, &merge).unwrap(), once);
        let ids: Vec<u32> = once.iter().map(|(k, _)| k).collect();
        assert_eq!(ids, vec![1, 2, 3, 4]);
    }

    #[test]
    fn empty_merge_is_identity() {
        assert_eq!(merge_labels(&table(), &BTreeMap::new()).unwrap(), table());
    }

    #[test]
    fn merge_into_out_of_range_class_fails() {
        let bad = BTreeMap::from([(1u8, 9u8)]);
        assert!(matches!(merge_labels(&table(), &bad), Err(Error::InvalidClass(9, 8))));
    }

    #[test]
    fn csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("labels.csv");
        write_label_table(&table(), &p).unwrap();
        assert_eq!(read_label_table(&p).unwrap(), table());
        std::fs::write(&p, "cell,class\n1,2\n").unwrap();
        assert!(read_label_table(&p).is_err());
    }
}
