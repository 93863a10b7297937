//! Minimal NIfTI-1 single-file reader and writer (`.nii`, `.nii.gz`).

use std::fs::File;
use std::io::{BufWriter, Cursor, Read, Write};
use std::path::Path;

use byteorder::{BigEndian, ByteOrder, LittleEndian, ReadBytesExt, WriteBytesExt};
use flate2::read::MultiGzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use crate::error::{Error, Result};
use crate::image::{Alphabet, Dims, GrayImage, LabelMap};

const HEADER_SIZE: i32 = 348;
const NIFTI2_HEADER_SIZE: i32 = 540;
const VOX_OFFSET: usize = 352;

const DT_UINT8: i16 = 2;
const DT_INT16: i16 = 4;
const DT_INT32: i16 = 8;
const DT_FLOAT32: i16 = 16;
const DT_FLOAT64: i16 = 64;

#[derive(Debug, thiserror::Error)]
pub enum NiftiError {
    #[error("malformed header: sizeof_hdr = {0}, expected 348")]
    HeaderSize(i32),
    #[error("NIfTI-2 files are not supported")]
    Nifti2,
    #[error("magic {0:?}: only single-file NIfTI-1 (\"n+1\") is supported")]
    Magic(String),
    #[error("unsupported datatype code {0}")]
    Datatype(i16),
    #[error("bitpix {bitpix} does not match datatype {datatype}")]
    Bitpix { datatype: i16, bitpix: i16 },
    #[error("dim field: {0}")]
    Dim(String),
    #[error("vox_offset {0} is invalid")]
    VoxOffset(f32),
    #[error("voxel data truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("gzip stream: {0}")]
    Gzip(String),
    #[error("file too short for a header ({0} bytes)")]
    ShortFile(usize),
}

/// Header fields carried alongside the image.
#[derive(Debug, Clone, PartialEq)]
pub struct NiftiMeta {
    pub datatype: i16,
    pub scl_slope: f32,
    pub scl_inter: f32,
    pub big_endian: bool,
}

fn is_gzip(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("gz"))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    let raw = std::fs::read(path)?;
    if is_gzip(path) || raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        MultiGzDecoder::new(&raw[..])
            .read_to_end(&mut out)
            .map_err(|e| NiftiError::Gzip(e.to_string()))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

/// Load a scalar volume; label files come back as integer-valued images.
pub fn load_nifti(path: impl AsRef<Path>) -> Result<(GrayImage, NiftiMeta)> {
    let bytes = read_bytes(path.as_ref())?;
    parse(&bytes)
}

/// Load a label map and check it against `alphabet`.
pub fn load_labels(path: impl AsRef<Path>, alphabet: Alphabet) -> Result<LabelMap> {
    let (img, _) = load_nifti(path)?;
    LabelMap::from_image(&img, alphabet)
}

pub fn parse(bytes: &[u8]) -> Result<(GrayImage, NiftiMeta)> {
    if bytes.len() < HEADER_SIZE as usize {
        return Err(NiftiError::ShortFile(bytes.len()).into());
    }
    let le = LittleEndian::read_i32(&bytes[0..4]);
    let be = BigEndian::read_i32(&bytes[0..4]);
    if le == HEADER_SIZE {
        parse_with::<LittleEndian>(bytes, false)
    } else if be == HEADER_SIZE {
        parse_with::<BigEndian>(bytes, true)
    } else if le == NIFTI2_HEADER_SIZE || be == NIFTI2_HEADER_SIZE {
        Err(NiftiError::Nifti2.into())
    } else {
        Err(NiftiError::HeaderSize(le).into())
    }
}

fn parse_with<B: ByteOrder>(bytes: &[u8], big_endian: bool) -> Result<(GrayImage, NiftiMeta)> {
    let magic = &bytes[344..348];
    if magic != b"n+1\0" {
        let shown = String::from_utf8_lossy(&magic[..3]).into_owned();
        return Err(NiftiError::Magic(shown).into());
    }

    let mut dim = [0i16; 8];
    B::read_i16_into(&bytes[40..56], &mut dim);
    let ndim = dim[0];
    if !(1..=7).contains(&ndim) {
        return Err(NiftiError::Dim(format!("dim[0] = {ndim}")).into());
    }
    let mut extents: Vec<usize> = Vec::new();
    for &d in &dim[1..=ndim as usize] {
        if d < 1 {
            return Err(NiftiError::Dim(format!("non-positive extent {d}")).into());
        }
        extents.push(d as usize);
    }
    while extents.len() > 2 && *extents.last().unwrap() == 1 {
        extents.pop();
    }
    if extents.len() == 1 {
        extents.push(1);
    }
    if extents.len() > 3 {
        return Err(NiftiError::Dim(format!("rank {} after squeezing", extents.len())).into());
    }
    let dims = Dims::new(&extents)?;

    let datatype = B::read_i16(&bytes[70..72]);
    let bitpix = B::read_i16(&bytes[72..74]);
    let width = match datatype {
        DT_UINT8 => 1,
        DT_INT16 => 2,
        DT_INT32 | DT_FLOAT32 => 4,
        DT_FLOAT64 => 8,
        other => return Err(NiftiError::Datatype(other).into()),
    };
    if bitpix as usize != width * 8 {
        return Err(NiftiError::Bitpix { datatype, bitpix }.into());
    }

    let mut pixdim = [0f32; 8];
    B::read_f32_into(&bytes[76..108], &mut pixdim);
    let spacing: Vec<f64> = (0..dims.rank()).map(|a| pixdim[a + 1] as f64).collect();

    let vox_offset = B::read_f32(&bytes[108..112]);
    if !(vox_offset >= HEADER_SIZE as f32) || vox_offset.fract() != 0.0 {
        return Err(NiftiError::VoxOffset(vox_offset).into());
    }
    let scl_slope = B::read_f32(&bytes[112..116]);
    let scl_inter = B::read_f32(&bytes[116..120]);

    let start = vox_offset as usize;
    let n = dims.len();
    let expected = n * width;
    let found = bytes.len().saturating_sub(start);
    if found < expected {
        return Err(NiftiError::Truncated { expected, found }.into());
    }
    let mut cur = Cursor::new(&bytes[start..start + expected]);
    let mut data = Vec::with_capacity(n);
    for _ in 0..n {
        let v = match datatype {
            DT_UINT8 => cur.read_u8()? as f64,
            DT_INT16 => cur.read_i16::<B>()? as f64,
            DT_INT32 => cur.read_i32::<B>()? as f64,
            DT_FLOAT32 => cur.read_f32::<B>()? as f64,
            _ => cur.read_f64::<B>()?,
        };
        data.push(v);
    }
    if scl_slope != 0.0 && scl_slope.is_finite() {
        let (s, i) = (scl_slope as f64, scl_inter as f64);
        for v in &mut data {
            *v = *v * s + i;
        }
    }
    let img = GrayImage::new(dims, data)?.with_spacing(Some(spacing));
    Ok((
        img,
        NiftiMeta {
            datatype,
            scl_slope,
            scl_inter,
            big_endian,
        },
    ))
}

fn header(dims: Dims, spacing: Option<&[f64]>, datatype: i16, bitpix: i16) -> Result<Vec<u8>> {
    let mut h = vec![0u8; VOX_OFFSET];
    LittleEndian::write_i32(&mut h[0..4], HEADER_SIZE);
    let mut dim = [1i16; 8];
    dim[0] = dims.rank() as i16;
    for (a, &e) in dims.extents().iter().enumerate() {
        dim[a + 1] = i16::try_from(e)
            .map_err(|_| Error::InvalidDims(format!("extent {e} exceeds NIfTI-1 limit")))?;
    }
    LittleEndian::write_i16_into(&dim, &mut h[40..56]);
    LittleEndian::write_i16(&mut h[70..72], datatype);
    LittleEndian::write_i16(&mut h[72..74], bitpix);
    let mut pixdim = [1f32; 8];
    if let Some(s) = spacing {
        for (a, &v) in s.iter().enumerate().take(dims.rank()) {
            pixdim[a + 1] = v as f32;
        }
    }
    LittleEndian::write_f32_into(&pixdim, &mut h[76..108]);
    LittleEndian::write_f32(&mut h[108..112], VOX_OFFSET as f32);
    LittleEndian::write_f32(&mut h[112..116], 1.0);
    // xyzt_units: mm
    h[123] = 2;
    h[344..348].copy_from_slice(b"n+1\0");
    Ok(h)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let f = File::create(path)?;
    if is_gzip(path) {
        let mut enc = GzEncoder::new(BufWriter::new(f), Compression::default());
        enc.write_all(bytes)?;
        enc.finish()?.flush()?;
    } else {
        let mut w = BufWriter::new(f);
        w.write_all(bytes)?;
        w.flush()?;
    }
    Ok(())
}

/// Write a float32 volume.
pub fn save_gray(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let mut bytes = header(img.dims(), img.spacing(), DT_FLOAT32, 32)?;
    bytes.reserve(img.data().len() * 4);
    for &v in img.data() {
        bytes.write_f32::<LittleEndian>(v as f32)?;
    }
    write_file(path.as_ref(), &bytes)
}

/// Write a uint8 label volume.
pub fn save_labels(labels: &LabelMap, path: impl AsRef<Path>) -> Result<()> {
    let mut bytes = header(labels.dims(), None, DT_UINT8, 8)?;
    bytes.extend(labels.labels().iter().map(|&l| l as u8));
    write_file(path.as_ref(), &bytes)
}
