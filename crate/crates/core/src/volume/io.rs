use std::path::{Path, PathBuf};

use super::LabeledVolume;
use crate::error::{Error, Result};
use crate::kv::{self, KvDoc};

pub const VOLUME_FORMAT_VERSION: u32 = 1;

fn stem_paths(path: &Path) -> (PathBuf, PathBuf) {
    let base = match path.extension().and_then(|e| e.to_str()) {
        Some("hdr") | Some("u32") => path.with_extension(""),
        _ => path.to_path_buf(),
    };
    let mut hdr = base.clone().into_os_string();
    hdr.push(".hdr");
    let mut payload = base.into_os_string();
    payload.push(".u32");
    (hdr.into(), payload.into())
}

/// Writes `<stem>.hdr` and `<stem>.u32`. `path` may name either file or the bare stem.
pub fn write_volume(vol: &LabeledVolume, path: &Path) -> Result<()> {
    let (hdr_path, payload_path) = stem_paths(path);
    let bytes = kv::u32s_to_le(vol.data());
    let mut hdr = KvDoc::new();
    hdr.push("format_version", VOLUME_FORMAT_VERSION)
        .push("dims", kv::join_list(&vol.dims()))
        .push("spacing_um", kv::join_list(&vol.spacing()))
        .push("specimen_id", &vol.specimen_id)
        .push("stage", &vol.stage)
        .push("payload_sha256", kv::sha256_hex(&bytes));
    kv::write_bytes(&payload_path, &bytes)?;
    hdr.write(&hdr_path)
}

/// Reads a volume container written by [`write_volume`].
pub fn read_volume(path: &Path) -> Result<LabeledVolume> {
    let (hdr_path, payload_path) = stem_paths(path);
    let hdr = KvDoc::read(&hdr_path)?;
    let version = hdr.require("format_version")?;
    if version != VOLUME_FORMAT_VERSION.to_string() {
        return Err(Error::UnsupportedVersion {
            found: version.to_string(),
            expected: VOLUME_FORMAT_VERSION,
        });
    }
    let dims: Vec<usize> = hdr.parse_list("dims")?;
    let spacing: Vec<f64> = hdr.parse_list("spacing_um")?;
    if dims.len() != 3 || spacing.len() != 3 {
        return Err(Error::header(&hdr_path, "dims and spacing_um need 3 values"));
    }
    let spacing = [spacing[0], spacing[1], spacing[2]];
    if spacing.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(Error::InvalidSpacing(spacing));
    }
    let bytes = kv::read_bytes(&payload_path)?;
    let expected = dims.iter().product::<usize>() * 4;
    if bytes.len() != expected {
        return Err(Error::SizeMismatch {
            what: "voxel payload bytes".into(),
            expected,
            found: bytes.len(),
        });
    }
    if let Some(sum) = hdr.get("payload_sha256") {
        if kv::sha256_hex(&bytes) != sum {
            return Err(Error::ChecksumMismatch {
                what: payload_path.display().to_string(),
            });
        }
    }
    let data = kv::le_to_u32s(&bytes, "voxel payload")?;
    LabeledVolume::new(
        [dims[0], dims[1], dims[2]],
        spacing,
        data,
        hdr.require("specimen_id")?,
        hdr.require("stage")?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> LabeledVolume {
        LabeledVolume::new([2, 2, 2], [1.0, 0.5, 2.25], vec![1, 1, 1, 1, 2, 2, 2, 2], "sp", "3-I")
            .unwrap()
    }

    #[test]
    fn roundtrip_tiny() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sp");
        write_volume(&tiny(), &p).unwrap();
        let back = read_volume(&p.with_extension("hdr")).unwrap();
        assert_eq!(back, tiny());
        assert_eq!(back.cell_ids().len(), 2);
    }

    #[test]
    fn truncated_payload_is_size_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sp");
        write_volume(&tiny(), &p).unwrap();
        let payload = dir.path().join("sp.u32");
        let bytes = std::fs::read(&payload).unwrap();
        std::fs::write(&payload, &bytes[..28]).unwrap();
        assert!(matches!(
            read_volume(&p),
            Err(Error::SizeMismatch { expected: 32, found: 28, .. })
        ));
    }

    #[test]
    fn unknown_version_and_bad_spacing() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sp");
        write_volume(&tiny(), &p).unwrap();
        let hdr_path = dir.path().join("sp.hdr");
        let text = std::fs::read_to_string(&hdr_path).unwrap();
        std::fs::write(&hdr_path, text.replace("format_version=1", "format_version=2")).unwrap();
        assert!(matches!(read_volume(&p), Err(Error::UnsupportedVersion { .. })));
        std::fs::write(&hdr_path, text.replace("spacing_um=1,0.5,2.25", "spacing_um=1,-0.5,2.25"))
            .unwrap();
        assert!(matches!(read_volume(&p), Err(Error::InvalidSpacing(_))));
    }
}
