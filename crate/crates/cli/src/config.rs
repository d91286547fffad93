//! Run settings: a `key=value` file with command-line overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cellgraph::kv::KvDoc;

use crate::fail::{CliError, CliResult};

/// Every key accepted in a config file. Flags use the same names with `-` for `_`.
pub const KNOWN_KEYS: &[&str] = &[
    "reproducible",
    "out",
    "data_dir",
    "graph_dir",
    "bundle_dir",
    "split_file",
    "predictions_dir",
    "seed",
    "count",
    "layers",
    "radius",
    "voxel_size",
    "merge",
    "k_samples",
    "frame",
    "features",
    "norm_scope",
    "norm",
    "hop_cap",
    "split_mode",
    "k_folds",
    "fold",
    "class_score",
    "learning_rate",
    "weight_decay",
    "epochs",
    "hidden",
    "dropout",
    "feature_noise",
    "edge_dropout",
    "layer_norm",
];

/// Name written next to every command's outputs.
pub const RESOLVED_CONFIG: &str = "config.resolved.txt";

/// Explicit values (config file, then flags) plus the record of what was resolved.
pub struct Settings {
    explicit: BTreeMap<String, String>,
    resolved: KvDoc,
    reproducible: bool,
}

impl Settings {
    pub fn load(config: Option<&Path>, flags: Vec<(&'static str, Option<String>)>, reproducible_flag: bool) -> CliResult<Self> {
        let mut explicit = BTreeMap::new();
        if let Some(path) = config {
            if !path.exists() {
                return Err(CliError::missing(format!("config file {} not found", path.display())));
            }
            let doc = KvDoc::read(path)?;
            for (k, v) in doc.entries() {
                if !KNOWN_KEYS.contains(&k.as_str()) {
                    return Err(CliError::config(format!("unknown config key {k} in {}", path.display())));
                }
                explicit.insert(k.clone(), v.clone());
            }
        }
        for (k, v) in flags {
            debug_assert!(KNOWN_KEYS.contains(&k), "{k}");
            if let Some(v) = v {
                explicit.insert(k.to_string(), v);
            }
        }
        let reproducible = reproducible_flag
            || match explicit.remove("reproducible") {
                Some(v) => parse_bool("reproducible", &v)?,
                None => false,
            };
        let mut resolved = KvDoc::new();
        resolved.push("reproducible", reproducible);
        Ok(Self {
            explicit,
            resolved,
            reproducible,
        })
    }

    /// Errors in reproducibility mode when any of `keys` was left to its default.
    pub fn require_explicit(&self, keys: &[&str]) -> CliResult<()> {
        if !self.reproducible {
            return Ok(());
        }
        let missing: Vec<&str> = keys.iter().copied().filter(|k| !self.explicit.contains_key(*k)).collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(CliError::config(format!(
                "reproducible mode requires explicit {}",
                missing.iter().map(|k| format!("--{}", k.replace('_', "-"))).collect::<Vec<_>>().join(", ")
            )))
        }
    }

    fn record(&mut self, key: &str, value: &str) {
        self.resolved.set(key, value);
    }

    pub fn raw(&mut self, key: &str) -> Option<String> {
        let v = self.explicit.get(key).cloned();
        if let Some(v) = &v {
            self.record(key, v);
        }
        v
    }

    pub fn get_or<V: FromStr>(&mut self, key: &str, default: &str) -> CliResult<V> {
        let raw = self.explicit.get(key).cloned().unwrap_or_else(|| default.to_string());
        let v = raw
            .parse()
            .map_err(|_| CliError::config(format!("bad value for {key}: {raw}")))?;
        self.record(key, &raw);
        Ok(v)
    }

    pub fn get_opt<V: FromStr>(&mut self, key: &str) -> CliResult<Option<V>> {
        match self.raw(key) {
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| CliError::config(format!("bad value for {key}: {raw}"))),
            None => Ok(None),
        }
    }

    pub fn flag(&mut self, key: &str, default: bool) -> CliResult<bool> {
        let v = match self.explicit.get(key) {
            Some(raw) => parse_bool(key, raw)?,
            None => default,
        };
        self.record(key, &v.to_string());
        Ok(v)
    }

    /// A path that must be given.
    pub fn path(&mut self, key: &str) -> CliResult<PathBuf> {
        self.raw(key)
            .map(PathBuf::from)
            .ok_or_else(|| CliError::config(format!("--{} is required", key.replace('_', "-"))))
    }

    /// A path that must be given and exist.
    pub fn input(&mut self, key: &str) -> CliResult<PathBuf> {
        let p = self.path(key)?;
        if !p.exists() {
            return Err(CliError::missing(format!("{} does not exist", p.display())));
        }
        Ok(p)
    }

    /// Creates `out` and writes the resolved settings into it.
    pub fn write_resolved(&self, out: &Path) -> CliResult<()> {
        std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
        let mut entries = self.resolved.entries().to_vec();
        entries.sort();
        let mut doc = KvDoc::new();
        for (k, v) in entries {
            doc.push(k, v);
        }
        let path = out.join(RESOLVED_CONFIG);
        doc.write(&path)?;
        Ok(())
    }
}

fn parse_bool(key: &str, raw: &str) -> CliResult<bool> {
    match raw {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(CliError::config(format!("bad value for {key}: {raw}"))),
    }
}
