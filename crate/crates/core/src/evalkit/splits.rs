use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kv::KvDoc;

pub const SPLIT_FORMAT_VERSION: u32 = 1;
/// Name recorded in split files for the shuffling generator.
pub const SPLIT_RNG: &str = "chacha8";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitMode {
    CrossValidation,
    TrainValTest,
}

impl SplitMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitMode::CrossValidation => "cv",
            SplitMode::TrainValTest => "train-val-test",
        }
    }
}

impl FromStr for SplitMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cv" | "cv5" => Ok(SplitMode::CrossValidation),
            "train-val-test" => Ok(SplitMode::TrainValTest),
            _ => Err(Error::Invalid(format!("unknown split mode {s}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Partition {
    Fold(u32),
    Train,
    Val,
    Test,
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Partition::Fold(k) => write!(f, "fold{k}"),
            Partition::Train => f.write_str("train"),
            Partition::Val => f.write_str("val"),
            Partition::Test => f.write_str("test"),
        }
    }
}

impl FromStr for Partition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Partition::Train),
            "val" => Ok(Partition::Val),
            "test" => Ok(Partition::Test),
            _ => s
                .strip_prefix("fold")
                .and_then(|k| k.parse().ok())
                .map(Partition::Fold)
                .ok_or_else(|| Error::Invalid(format!("unknown partition {s}"))),
        }
    }
}

/// Assignment of every specimen to a fold or a named partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitSpec {
    pub mode: SplitMode,
    pub k: u32,
    pub seed: u64,
    /// specimen id → (stage, partition)
    pub assignment: BTreeMap<String, (String, Partition)>,
    /// Some stage had fewer than `k` specimens, so per-stage folds cannot all be filled.
    pub unbalanced: bool,
}

const TVT_PATTERN: [Partition; 5] = [
    Partition::Train,
    Partition::Train,
    Partition::Train,
    Partition::Val,
    Partition::Test,
];

/// Stage-stratified split. Within each stage (in name order) specimens are
/// sorted by id, shuffled with a ChaCha8 generator seeded by `seed`, and dealt
/// round-robin; the dealing cursor carries over from one stage to the next so
/// totals stay balanced too. Cross-validation deals to `k` folds;
/// train-val-test deals the cycle train, train, train, val, test (60/20/20).
pub fn make_splits(specimens: &[(String, String)], mode: SplitMode, k: u32, seed: u64) -> Result<SplitSpec> {
    if specimens.is_empty() {
        return Err(Error::Invalid("no specimens to split".into()));
    }
    if mode == SplitMode::CrossValidation && k < 2 {
        return Err(Error::Invalid(format!("need at least 2 folds, got {k}")));
    }
    let mut by_stage: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (id, stage) in specimens {
        by_stage.entry(stage).or_default().push(id);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = BTreeMap::new();
    let mut cursor = 0usize;
    let mut unbalanced = false;
    let period = match mode {
        SplitMode::CrossValidation => k as usize,
        SplitMode::TrainValTest => TVT_PATTERN.len(),
    };
    for (stage, mut ids) in by_stage {
        ids.sort_unstable();
        ids.shuffle(&mut rng);
        unbalanced |= ids.len() < period;
        for id in ids {
            let part = match mode {
                SplitMode::CrossValidation => Partition::Fold((cursor % period) as u32),
                SplitMode::TrainValTest => TVT_PATTERN[cursor % period],
            };
            if assignment.insert(id.to_string(), (stage.to_string(), part)).is_some() {
                return Err(Error::Invalid(format!("duplicate specimen {id}")));
            }
            cursor += 1;
        }
    }
    Ok(SplitSpec {
        mode,
        k: if mode == SplitMode::CrossValidation { k } else { 0 },
        seed,
        assignment,
        unbalanced,
    })
}

/// Role of each specimen when training on one cross-validation fold.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FoldRoles {
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
}

impl SplitSpec {
    pub fn members(&self, part: Partition) -> Vec<String> {
        self.assignment
            .iter()
            .filter(|(_, (_, p))| *p == part)
            .map(|(id, _)| id.clone())
            .collect()
    }

    pub fn partition_of(&self, id: &str) -> Option<Partition> {
        self.assignment.get(id).map(|(_, p)| *p)
    }

    /// Train/val/test roles. For cross-validation, fold `f` is the test set,
    /// fold `f+1 (mod k)` the validation set and the rest is training data.
    /// `fold` is ignored in train-val-test mode.
    pub fn roles(&self, fold: u32) -> Result<FoldRoles> {
        match self.mode {
            SplitMode::TrainValTest => Ok(FoldRoles {
                train: self.members(Partition::Train),
                val: self.members(Partition::Val),
                test: self.members(Partition::Test),
            }),
            SplitMode::CrossValidation => {
                if fold >= self.k {
                    return Err(Error::Invalid(format!("fold {fold} out of range 0..{}", self.k)));
                }
                let val = (fold + 1) % self.k;
                let mut r = FoldRoles::default();
                for (id, (_, p)) in &self.assignment {
                    match *p {
                        Partition::Fold(f) if f == fold => r.test.push(id.clone()),
                        Partition::Fold(f) if f == val => r.val.push(id.clone()),
                        _ => r.train.push(id.clone()),
                    }
                }
                Ok(r)
            }
        }
    }

    pub fn to_kv(&self) -> KvDoc {
        let mut d = KvDoc::new();
        d.push("format_version", SPLIT_FORMAT_VERSION)
            .push("mode", self.mode.as_str())
            .push("k", self.k)
            .push("seed", self.seed)
            .push("rng", SPLIT_RNG)
            .push("unbalanced", self.unbalanced);
        for (id, (stage, p)) in &self.assignment {
            d.push("specimen", format!("{id},{stage},{p}"));
        }
        d
    }

    pub fn from_kv(d: &KvDoc) -> Result<Self> {
        let version: u32 = d.parse_value("format_version")?;
        if version != SPLIT_FORMAT_VERSION {
            return Err(Error::UnsupportedVersion {
                found: version.to_string(),
                expected: SPLIT_FORMAT_VERSION,
            });
        }
        if d.require("rng")? != SPLIT_RNG {
            return Err(Error::header(d.source(), "unknown split generator"));
        }
        let mut assignment = BTreeMap::new();
        for line in d.get_all("specimen") {
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 3 {
                return Err(Error::header(d.source(), format!("bad specimen line {line:?}")));
            }
            assignment.insert(parts[0].to_string(), (parts[1].to_string(), parts[2].parse()?));
        }
        Ok(Self {
            mode: d.require("mode")?.parse()?,
            k: d.parse_value("k")?,
            seed: d.parse_value("seed")?,
            assignment,
            unbalanced: d.parse_value("unbalanced")?,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        self.to_kv().write(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_kv(&KvDoc::read(path)?)
    }
}
