//! Bundle directory: `header.txt`, `nodes.f32`, `edges_index.u32`,
//! `edges.f32` and optionally `labels.u8`.

use std::path::Path;

use ndarray::Array2;

use super::{BundleMeta, FeatureBundle, ManifestEntry};
use crate::error::{Error, Result};
use crate::kv::{f32s_to_le, le_to_f32s, le_to_u32s, read_bytes, sha256_hex, u32s_to_le, write_bytes, KvDoc};

pub const BUNDLE_FORMAT_VERSION: u32 = 1;

const HEADER: &str = "header.txt";
const NODES: &str = "nodes.f32";
const EDGE_INDEX: &str = "edges_index.u32";
const EDGES: &str = "edges.f32";
const LABELS: &str = "labels.u8";

struct Payloads {
    nodes: Vec<u8>,
    edge_index: Vec<u8>,
    edges: Vec<u8>,
}

fn payloads(b: &FeatureBundle) -> Payloads {
    // edge index stored as a 2×E row-major matrix: sources, then targets
    let mut idx: Vec<u32> = b.edge_index.iter().map(|e| e[0]).collect();
    idx.extend(b.edge_index.iter().map(|e| e[1]));
    Payloads {
        nodes: f32s_to_le(b.nodes.iter().copied()),
        edge_index: u32s_to_le(&idx),
        edges: f32s_to_le(b.edges.iter().copied()),
    }
}

fn manifest_line(m: &ManifestEntry) -> String {
    format!("{},{},{},{}", m.name, m.width, m.kind, m.normalization)
}

fn parse_manifest_line(path: &Path, line: &str) -> Result<ManifestEntry> {
    let parts: Vec<&str> = line.split(',').collect();
    if parts.len() != 4 {
        return Err(Error::header(path, format!("bad manifest line {line:?}")));
    }
    Ok(ManifestEntry {
        name: parts[0].to_string(),
        width: parts[1]
            .parse()
            .map_err(|_| Error::header(path, format!("bad width in {line:?}")))?,
        kind: parts[2].parse()?,
        normalization: parts[3].parse()?,
    })
}

/// Writes the bundle into directory `dir` (created if needed). Layout is
/// row-major little-endian.
pub fn write_bundle(bundle: &FeatureBundle, dir: &Path) -> Result<()> {
    bundle.validate()?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let p = payloads(bundle);
    let m = &bundle.meta;
    let mut h = KvDoc::new();
    h.push("format_version", BUNDLE_FORMAT_VERSION)
        .push("specimen_id", &m.specimen_id)
        .push("stage", &m.stage)
        .push("frame_method", &m.frame_method)
        .push("k", m.k)
        .push("features", &m.selection)
        .push("norm_scope", m.scope.as_str())
        .push("num_nodes", bundle.num_nodes())
        .push("num_edges", bundle.num_edges())
        .push("node_width", bundle.node_width())
        .push("edge_width", bundle.edge_width());
    for e in &bundle.node_manifest {
        h.push("node_block", manifest_line(e));
    }
    for e in &bundle.edge_manifest {
        h.push("edge_block", manifest_line(e));
    }
    h.push("nodes_sha256", sha256_hex(&p.nodes))
        .push("edges_index_sha256", sha256_hex(&p.edge_index))
        .push("edges_sha256", sha256_hex(&p.edges));
    let labels_path = dir.join(LABELS);
    if let Some(l) = &bundle.labels {
        h.push("labels_sha256", sha256_hex(l));
        write_bytes(&labels_path, l)?;
    } else if labels_path.exists() {
        std::fs::remove_file(&labels_path).map_err(|e| Error::io(&labels_path, e))?;
    }
    write_bytes(&dir.join(NODES), &p.nodes)?;
    write_bytes(&dir.join(EDGE_INDEX), &p.edge_index)?;
    write_bytes(&dir.join(EDGES), &p.edges)?;
    h.write(&dir.join(HEADER))
}

fn checked(dir: &Path, name: &str, h: &KvDoc, key: &str, expected_len: usize) -> Result<Vec<u8>> {
    let bytes = read_bytes(&dir.join(name))?;
    if bytes.len() != expected_len {
        return Err(Error::SizeMismatch {
            what: name.into(),
            expected: expected_len,
            found: bytes.len(),
        });
    }
    if sha256_hex(&bytes) != h.require(key)? {
        return Err(Error::ChecksumMismatch { what: name.into() });
    }
    Ok(bytes)
}

/// Reads and verifies a bundle directory.
pub fn read_bundle(dir: &Path) -> Result<FeatureBundle> {
    let hp = dir.join(HEADER);
    let h = KvDoc::read(&hp)?;
    let version: u32 = h.parse_value("format_version")?;
    if version != BUNDLE_FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            found: version.to_string(),
            expected: BUNDLE_FORMAT_VERSION,
        });
    }
    let n: usize = h.parse_value("num_nodes")?;
    let e: usize = h.parse_value("num_edges")?;
    let f: usize = h.parse_value("node_width")?;
    let fe: usize = h.parse_value("edge_width")?;
    let node_manifest = h
        .get_all("node_block")
        .map(|l| parse_manifest_line(&hp, l))
        .collect::<Result<Vec<_>>>()?;
    let edge_manifest = h
        .get_all("edge_block")
        .map(|l| parse_manifest_line(&hp, l))
        .collect::<Result<Vec<_>>>()?;

    let nodes = le_to_f32s(&checked(dir, NODES, &h, "nodes_sha256", n * f * 4)?, NODES)?;
    let idx = le_to_u32s(&checked(dir, EDGE_INDEX, &h, "edges_index_sha256", 2 * e * 4)?, EDGE_INDEX)?;
    let edges = le_to_f32s(&checked(dir, EDGES, &h, "edges_sha256", e * fe * 4)?, EDGES)?;
    let labels = if h.get("labels_sha256").is_some() {
        Some(checked(dir, LABELS, &h, "labels_sha256", n)?)
    } else {
        None
    };
    let meta = BundleMeta {
        specimen_id: h.require("specimen_id")?.to_string(),
        stage: h.require("stage")?.to_string(),
        frame_method: h.require("frame_method")?.to_string(),
        k: h.parse_value("k")?,
        selection: h.require("features")?.to_string(),
        scope: h.require("norm_scope")?.parse()?,
    };
    let bundle = FeatureBundle {
        meta,
        node_manifest,
        edge_manifest,
        nodes: Array2::from_shape_vec((n, f), nodes).map_err(|e| Error::Shape(e.to_string()))?,
        edge_index: (0..e).map(|i| [idx[i], idx[e + i]]).collect(),
        edges: Array2::from_shape_vec((e, fe), edges).map_err(|e| Error::Shape(e.to_string()))?,
        labels,
    };
    bundle.validate()?;
    Ok(bundle)
}

#[cfg(test)]
mod tests {
    use super::super::{Normalization, StatsScope};
    use super::*;
    use crate::features::BlockKind;

    fn small() -> FeatureBundle {
        FeatureBundle {
            meta: BundleMeta {
                specimen_id: "a".into(),
                stage: "3-I".into(),
                frame_method: "es-pca".into(),
                k: 500,
                selection: "all".into(),
                scope: StatsScope::Specimen,
            },
            node_manifest: vec![ManifestEntry {
                name: "volume".into(),
                width: 2,
                kind: BlockKind::Invariant,
                normalization: Normalization::ZScore,
            }],
            edge_manifest: vec![ManifestEntry {
                name: "contact_area".into(),
                width: 1,
                kind: BlockKind::Invariant,
                normalization: Normalization::None,
            }],
            nodes: Array2::from_shape_vec((3, 2), vec![0.5, -1.0, 2.0, 3.25, 1e-7, 0.0]).unwrap(),
            edge_index: vec![[0, 1], [1, 2]],
            edges: Array2::from_shape_vec((2, 1), vec![1.5, 2.5]).unwrap(),
            labels: Some(vec![1, 2, 7]),
        }
    }

    #[test]
    fn round_trip() {
        let d = tempfile::tempdir().unwrap();
        let b = small();
        write_bundle(&b, d.path()).unwrap();
        assert_eq!(read_bundle(d.path()).unwrap(), b);
        let idx = std::fs::read(d.path().join(EDGE_INDEX)).unwrap();
        assert_eq!(le_to_u32s(&idx, "").unwrap(), vec![0, 1, 1, 2]);
    }

    #[test]
    fn corrupted_payload_detected() {
        let d = tempfile::tempdir().unwrap();
        write_bundle(&small(), d.path()).unwrap();
        let p = d.path().join(NODES);
        let mut bytes = std::fs::read(&p).unwrap();
        bytes[0] ^= 1;
        std::fs::write(&p, bytes).unwrap();
        assert!(matches!(read_bundle(d.path()), Err(Error::ChecksumMismatch { .. })));
    }

    #[test]
    fn rewrite_without_labels_drops_file() {
        let d = tempfile::tempdir().unwrap();
        write_bundle(&small(), d.path()).unwrap();
        let mut b = small();
        b.labels = None;
        write_bundle(&b, d.path()).unwrap();
        assert!(!d.path().join(LABELS).exists());
        assert_eq!(read_bundle(d.path()).unwrap().labels, None);
    }
}
