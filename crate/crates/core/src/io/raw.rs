//! Raw fixture format: a `.raw` payload of little-endian `f32` voxels in
//! x-fastest order, plus a `.json` sidecar next to it with the same stem.

use std::path::{Path, PathBuf};

use byteorder::{ByteOrder, LittleEndian};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{Alphabet, Dims, GrayImage, LabelMap};

pub const FORMAT: &str = "toposeg-raw";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RawKind {
    Gray,
    Labels,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub format: String,
    pub version: u32,
    pub dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<Vec<f64>>,
    pub kind: RawKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<Alphabet>,
}

pub fn sidecar_path(raw: &Path) -> PathBuf {
    raw.with_extension("json")
}

fn write(path: &Path, sidecar: &Sidecar, values: impl Iterator<Item = f64>) -> Result<()> {
    let mut bytes = Vec::new();
    for v in values {
        let mut buf = [0u8; 4];
        LittleEndian::write_f32(&mut buf, v as f32);
        bytes.extend_from_slice(&buf);
    }
    std::fs::write(path, bytes)?;
    let json = serde_json::to_string_pretty(sidecar).map_err(|e| Error::Fixture(e.to_string()))?;
    std::fs::write(sidecar_path(path), json + "\n")?;
    Ok(())
}

pub fn save_raw(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let sidecar = Sidecar {
        format: FORMAT.into(),
        version: VERSION,
        dims: img.dims().extents().to_vec(),
        spacing: img.spacing().map(|s| s.to_vec()),
        kind: RawKind::Gray,
        alphabet: None,
    };
    write(path.as_ref(), &sidecar, img.data().iter().copied())
}

pub fn save_raw_labels(labels: &LabelMap, path: impl AsRef<Path>) -> Result<()> {
    let sidecar = Sidecar {
        format: FORMAT.into(),
        version: VERSION,
        dims: labels.dims().extents().to_vec(),
        spacing: None,
        kind: RawKind::Labels,
        alphabet: Some(labels.alphabet()),
    };
    write(path.as_ref(), &sidecar, labels.labels().iter().map(|&l| l as f64))
}

pub fn load_raw(path: impl AsRef<Path>) -> Result<(GrayImage, Sidecar)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(sidecar_path(path))?;
    let sidecar: Sidecar =
        serde_json::from_str(&text).map_err(|e| Error::Fixture(format!("sidecar: {e}")))?;
    if sidecar.format != FORMAT || sidecar.version != VERSION {
        return Err(Error::Fixture(format!(
            "unknown format {} v{}",
            sidecar.format, sidecar.version
        )));
    }
    let dims = Dims::new(&sidecar.dims)?;
    let bytes = std::fs::read(path)?;
    if bytes.len() != dims.len() * 4 {
        return Err(Error::Fixture(format!(
            "payload has {} bytes, expected {}",
            bytes.len(),
            dims.len() * 4
        )));
    }
    let data = bytes
        .chunks_exact(4)
        .map(|c| LittleEndian::read_f32(c) as f64)
        .collect();
    let img = GrayImage::new(dims, data)?.with_spacing(sidecar.spacing.clone());
    Ok((img, sidecar))
}
