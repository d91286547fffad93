use std::path::Path;

use ndarray::{Array1, Array2};

use super::{GcnParams, TrainConfig};
use crate::error::{Error, Result};
use crate::kv::{f32s_to_le, le_to_f32s, read_bytes, sha256_hex, write_bytes, KvDoc};
use crate::scalar::Real;

pub const MODEL_FORMAT_VERSION: u32 = 1;

const HEADER: &str = "model.txt";
const PAYLOAD: &str = "params.f32";

/// Writes `model.txt` (shapes, training config, checksum) and `params.f32`
/// (w1, b1, w2, b2 row-major, little-endian) into `dir`.
pub fn write_model<T: Real>(params: &GcnParams<T>, cfg: &TrainConfig, feature_manifest: &str, dir: &Path) -> Result<()> {
    params.validate()?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let payload = f32s_to_le(
        params
            .tensors()
            .into_iter()
            .flat_map(|t| t.iter().map(|v| v.to_f32().unwrap_or(f32::NAN))),
    );
    let mut h = KvDoc::new();
    h.push("format_version", MODEL_FORMAT_VERSION)
        .push("input_width", params.input_width())
        .push("hidden_width", params.hidden_width())
        .push("num_classes", params.num_classes())
        .push("features", feature_manifest);
    for (k, v) in cfg.to_kv().entries() {
        h.push(format!("train.{k}"), v);
    }
    h.push("params_sha256", sha256_hex(&payload));
    write_bytes(&dir.join(PAYLOAD), &payload)?;
    h.write(&dir.join(HEADER))
}

/// Model read back from disk.
#[derive(Clone, Debug)]
pub struct StoredModel<T> {
    pub params: GcnParams<T>,
    pub config: TrainConfig,
    /// Node feature manifest the model was trained on.
    pub features: String,
}

pub fn read_model<T: Real>(dir: &Path) -> Result<StoredModel<T>> {
    let h = KvDoc::read(&dir.join(HEADER))?;
    let version: u32 = h.parse_value("format_version")?;
    if version != MODEL_FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            found: version.to_string(),
            expected: MODEL_FORMAT_VERSION,
        });
    }
    let f: usize = h.parse_value("input_width")?;
    let hd: usize = h.parse_value("hidden_width")?;
    let c: usize = h.parse_value("num_classes")?;
    let bytes = read_bytes(&dir.join(PAYLOAD))?;
    let expected = (f * hd + hd + hd * c + c) * 4;
    if bytes.len() != expected {
        return Err(Error::SizeMismatch {
            what: PAYLOAD.into(),
            expected,
            found: bytes.len(),
        });
    }
    if sha256_hex(&bytes) != h.require("params_sha256")? {
        return Err(Error::ChecksumMismatch { what: PAYLOAD.into() });
    }
    let vals: Vec<T> = le_to_f32s(&bytes, PAYLOAD)?.into_iter().map(|v| T::lit(v as f64)).collect();
    let (w1, rest) = vals.split_at(f * hd);
    let (b1, rest) = rest.split_at(hd);
    let (w2, b2) = rest.split_at(hd * c);
    let shape = |e: ndarray::ShapeError| Error::Shape(e.to_string());
    let params = GcnParams {
        w1: Array2::from_shape_vec((f, hd), w1.to_vec()).map_err(shape)?,
        b1: Array1::from(b1.to_vec()),
        w2: Array2::from_shape_vec((hd, c), w2.to_vec()).map_err(shape)?,
        b2: Array1::from(b2.to_vec()),
    };
    let mut cfg_doc = KvDoc::new();
    for (k, v) in h.entries() {
        if let Some(k) = k.strip_prefix("train.") {
            cfg_doc.push(k, v);
        }
    }
    Ok(StoredModel {
        params,
        config: TrainConfig::from_kv(&cfg_doc)?,
        features: h.require("features")?.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn round_trip_f32() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut p = GcnParams::<f32>::glorot(3, 4, 2, &mut rng);
        p.b2[1] = 0.25;
        let cfg = TrainConfig {
            hidden: 4,
            num_classes: 2,
            layer_norm: true,
            ..TrainConfig::default()
        };
        let d = tempfile::tempdir().unwrap();
        write_model(&p, &cfg, "volume:1", d.path()).unwrap();
        let m = read_model::<f32>(d.path()).unwrap();
        assert_eq!(m.params, p);
        assert_eq!(m.config, cfg);
        assert_eq!(m.features, "volume:1");
    }
}
