//! In-memory image model shared by every other module.
//!
//! Voxels are stored in a flat buffer with x varying fastest and z slowest,
//! i.e. the linear index of `(x, y, z)` is `x + nx * (y + ny * z)`. This is the
//! native NIfTI order. Rank-2 images are stored with a trailing extent of 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Extents of a rank-2 or rank-3 grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    shape: [usize; 3],
    rank: usize,
}

impl Dims {
    pub fn new(extents: &[usize]) -> Result<Self> {
        if !(2..=3).contains(&extents.len()) {
            return Err(Error::InvalidDims(format!(
                "rank must be 2 or 3, got {}",
                extents.len()
            )));
        }
        if extents.contains(&0) {
            return Err(Error::InvalidDims(format!("zero extent in {extents:?}")));
        }
        let mut shape = [1; 3];
        shape[..extents.len()].copy_from_slice(extents);
        Ok(Dims {
            shape,
            rank: extents.len(),
        })
    }

    pub fn d2(nx: usize, ny: usize) -> Self {
        Dims::new(&[nx, ny]).expect("valid 2D dims")
    }

    pub fn d3(nx: usize, ny: usize, nz: usize) -> Self {
        Dims::new(&[nx, ny, nz]).expect("valid 3D dims")
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Extents padded to three axes.
    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn extents(&self) -> &[usize] {
        &self.shape[..self.rank]
    }

    pub fn extent(&self, axis: usize) -> usize {
        self.shape[axis]
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.shape[0] * (y + self.shape[1] * z)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let nx = self.shape[0];
        let ny = self.shape[1];
        [idx % nx, (idx / nx) % ny, idx / (nx * ny)]
    }

    /// Neighbour across a face along `axis` in direction `dir` (±1).
    #[inline]
    pub fn step(&self, idx: usize, axis: usize, forward: bool) -> Option<usize> {
        let c = self.coords(idx);
        let stride = self.stride(axis);
        if forward {
            (c[axis] + 1 < self.shape[axis]).then(|| idx + stride)
        } else {
            (c[axis] > 0).then(|| idx - stride)
        }
    }

    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => 1,
            1 => self.shape[0],
            _ => self.shape[0] * self.shape[1],
        }
    }

    /// Face neighbours (4 in 2D, 6 in 3D) of a voxel.
    pub fn face_neighbors(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let c = self.coords(idx);
        (0..3).flat_map(move |axis| {
            let stride = self.stride(axis);
            let lo = (c[axis] > 0).then(|| idx - stride);
            let hi = (c[axis] + 1 < self.shape[axis]).then(|| idx + stride);
            lo.into_iter().chain(hi)
        })
    }

    pub fn on_border(&self, idx: usize) -> bool {
        let c = self.coords(idx);
        (0..self.rank).any(|a| c[a] == 0 || c[a] + 1 == self.shape[a])
    }

    pub fn check_same(&self, other: &Dims) -> Result<()> {
        if self != other {
            return Err(Error::DimMismatch(
                self.extents().to_vec(),
                other.extents().to_vec(),
            ));
        }
        Ok(())
    }

    /// Dims with one axis removed; used by slicing.
    pub fn without_axis(&self, axis: usize) -> Dims {
        let ext: Vec<usize> = (0..self.rank)
            .filter(|&a| a != axis)
            .map(|a| self.shape[a])
            .collect();
        Dims::new(&ext).expect("rank-3 dims")
    }
}

/// Dense scalar field on a 2D or 3D grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    dims: Dims,
    data: Vec<f64>,
    spacing: Option<Vec<f64>>,
}

impl GrayImage {
    pub fn new(dims: Dims, data: Vec<f64>) -> Result<Self> {
        if data.len() != dims.len() {
            return Err(Error::InvalidDims(format!(
                "data length {} does not match {:?}",
                data.len(),
                dims.extents()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(GrayImage {
            dims,
            data,
            spacing: None,
        })
    }

    pub fn filled(dims: Dims, value: f64) -> Self {
        GrayImage {
            dims,
            data: vec![value; dims.len()],
            spacing: None,
        }
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let [nx, ny, nz] = dims.shape();
        let mut data = Vec::with_capacity(dims.len());
        for z in 0..nz {
            for y in 0..ny {
                for x in 0..nx {
                    data.push(f(x, y, z));
                }
            }
        }
        GrayImage {
            dims,
            data,
            spacing: None,
        }
    }

    pub fn with_spacing(mut self, spacing: Option<Vec<f64>>) -> Self {
        self.spacing = spacing;
        self
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn rank(&self) -> usize {
        self.dims.rank()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn spacing(&self) -> Option<&[f64]> {
        self.spacing.as_deref()
    }

    pub fn get(&self, idx: usize) -> f64 {
        self.data[idx]
    }

    pub fn at(&self, x: usize, y: usize, z: usize) -> f64 {
        self.data[self.dims.index(x, y, z)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GrayImage {
        GrayImage {
            dims: self.dims,
            data: self.data.iter().map(|&v| f(v)).collect(),
            spacing: self.spacing.clone(),
        }
    }

    pub fn in_unit_range(&self) -> bool {
        self.data.iter().all(|v| (0.0..=1.0).contains(v))
    }

    /// Affine rescale to [0,1]; a constant image maps to all zeros.
    pub fn normalize01(&self) -> Result<GrayImage> {
        if let Some(i) = self.data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let (lo, hi) = self
            .data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let span = hi - lo;
        Ok(if span > 0.0 {
            self.map(|v| ((v - lo) / span).clamp(0.0, 1.0))
        } else {
            self.map(|_| 0.0)
        })
    }

    /// Copy values onto `mask` and `fill` elsewhere.
    pub fn masked(&self, mask: &BinaryMask, fill: f64) -> Result<GrayImage> {
        self.dims.check_same(&mask.dims())?;
        let data = self
            .data
            .iter()
            .zip(mask.bits())
            .map(|(&v, &m)| if m { v } else { fill })
            .collect();
        Ok(GrayImage {
            dims: self.dims,
            data,
            spacing: self.spacing.clone(),
        })
    }

    /// The rank-2 slice at `index` along `axis`.
    pub fn extract_slice(&self, axis: usize, index: usize) -> Result<GrayImage> {
        let data = slice_values(&self.dims, axis, index, &self.data)?;
        let spacing = self.spacing.as_ref().map(|s| {
            s.iter()
                .enumerate()
                .filter(|(a, _)| *a != axis)
                .map(|(_, &v)| v)
                .collect()
        });
        Ok(GrayImage {
            dims: self.dims.without_axis(axis),
            data,
            spacing,
        })
    }

    /// Overwrite the slice at `index` along `axis`.
    pub fn insert_slice(&mut self, axis: usize, index: usize, slice: &GrayImage) -> Result<()> {
        insert_values(&self.dims, axis, index, &mut self.data, slice.dims, &slice.data)
    }

    /// Stack rank-2 slices along `axis`.
    pub fn stack(slices: &[GrayImage], axis: usize) -> Result<GrayImage> {
        let first = slices
            .first()
            .ok_or_else(|| Error::InvalidDims("no slices".into()))?;
        let dims = stacked_dims(first.dims, slices.len(), axis)?;
        let mut out = GrayImage::filled(dims, 0.0);
        for (i, s) in slices.iter().enumerate() {
            out.insert_slice(axis, i, s)?;
        }
        Ok(out)
    }

    /// Add a zero-valued slice at both ends of `axis`.
    pub fn pad_black_caps(&self, axis: usize) -> Result<GrayImage> {
        let data = pad_values(&self.dims, axis, &self.data, 0.0)?;
        let mut ext = self.dims.shape();
        ext[axis] += 2;
        Ok(GrayImage {
            dims: Dims::new(&ext[..3])?,
            data,
            spacing: self.spacing.clone(),
        })
    }
}

/// Voxel set on a grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    dims: Dims,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(dims: Dims, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != dims.len() {
            return Err(Error::InvalidDims(format!(
                "mask length {} does not match {:?}",
                bits.len(),
                dims.extents()
            )));
        }
        Ok(BinaryMask { dims, bits })
    }

    pub fn empty(dims: Dims) -> Self {
        BinaryMask {
            dims,
            bits: vec![false; dims.len()],
        }
    }

    pub fn full(dims: Dims) -> Self {
        BinaryMask {
            dims,
            bits: vec![true; dims.len()],
        }
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(dims.len());
        let [nx, ny, nz] = dims.shape();
        for z in 0..nz {
            for y in 0..ny {
                for x in 0..nx {
                    bits.push(f(x, y, z));
                }
            }
        }
        BinaryMask { dims, bits }
    }

    pub fn from_indices(dims: Dims, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut m = BinaryMask::empty(dims);
        for i in indices {
            m.bits[i] = true;
        }
        m
    }

    pub fn threshold(img: &GrayImage, pred: impl Fn(f64) -> bool) -> Self {
        BinaryMask {
            dims: img.dims(),
            bits: img.data().iter().map(|&v| pred(v)).collect(),
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, idx: usize) -> bool {
        self.bits[idx]
    }

    pub fn set(&mut self, idx: usize, v: bool) {
        self.bits[idx] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    pub fn first_index(&self) -> Option<usize> {
        self.bits.iter().position(|&b| b)
    }

    fn zip_with(&self, other: &BinaryMask, f: impl Fn(bool, bool) -> bool) -> BinaryMask {
        assert_eq!(self.dims, other.dims, "mask dims differ");
        BinaryMask {
            dims: self.dims,
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn union(&self, other: &BinaryMask) -> BinaryMask {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &BinaryMask) -> BinaryMask {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &BinaryMask) -> BinaryMask {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> BinaryMask {
        BinaryMask {
            dims: self.dims,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    pub fn intersects(&self, other: &BinaryMask) -> bool {
        self.bits.iter().zip(&other.bits).any(|(&a, &b)| a && b)
    }

    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// 0/1 image of the mask.
    pub fn to_image(&self) -> GrayImage {
        GrayImage::new(
            self.dims,
            self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        )
        .expect("matching dims")
    }

    pub fn extract_slice(&self, axis: usize, index: usize) -> Result<BinaryMask> {
        Ok(BinaryMask {
            dims: self.dims.without_axis(axis),
            bits: slice_values(&self.dims, axis, index, &self.bits)?,
        })
    }

    pub fn insert_slice(&mut self, axis: usize, index: usize, slice: &BinaryMask) -> Result<()> {
        insert_values(&self.dims, axis, index, &mut self.bits, slice.dims, &slice.bits)
    }

    pub fn stack(slices: &[BinaryMask], axis: usize) -> Result<BinaryMask> {
        let first = slices
            .first()
            .ok_or_else(|| Error::InvalidDims("no slices".into()))?;
        let dims = stacked_dims(first.dims, slices.len(), axis)?;
        let mut out = BinaryMask::empty(dims);
        for (i, s) in slices.iter().enumerate() {
            out.insert_slice(axis, i, s)?;
        }
        Ok(out)
    }

    pub fn pad(&self, axis: usize, value: bool) -> Result<BinaryMask> {
        let bits = pad_values(&self.dims, axis, &self.bits, value)?;
        let mut ext = self.dims.shape();
        ext[axis] += 2;
        Ok(BinaryMask {
            dims: Dims::new(&ext)?,
            bits,
        })
    }

    /// Inverse of [`BinaryMask::pad`]: drop the first and last slice along `axis`.
    pub fn unpad(&self, axis: usize) -> Result<BinaryMask> {
        let n = self.dims.extent(axis);
        if self.dims.rank() != 3 || n < 3 {
            return Err(Error::InvalidDims("cannot unpad".into()));
        }
        let slices = (1..n - 1)
            .map(|i| self.extract_slice(axis, i))
            .collect::<Result<Vec<_>>>()?;
        BinaryMask::stack(&slices, axis)
    }
}

/// Class alphabets of the three tasks. Serialized as background = 0, then the
/// listed order starting from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alphabet {
    /// ET = 1, TC = 2, ED = 3.
    Brats,
    /// LV = 1, RV = 2, Myo = 3.
    Acdc,
    /// CP = 1.
    Sta,
}

impl Alphabet {
    pub fn class_names(&self) -> &'static [&'static str] {
        match self {
            Alphabet::Brats => &["ET", "TC", "ED"],
            Alphabet::Acdc => &["LV", "RV", "Myo"],
            Alphabet::Sta => &["CP"],
        }
    }

    pub fn num_classes(&self) -> u32 {
        self.class_names().len() as u32
    }

    pub fn label_of(&self, name: &str) -> Option<u32> {
        self.class_names()
            .iter()
            .position(|n| n.eq_ignore_ascii_case(name))
            .map(|p| p as u32 + 1)
    }
}

pub const ET: u32 = 1;
pub const TC: u32 = 2;
pub const ED: u32 = 3;
pub const LV: u32 = 1;
pub const RV: u32 = 2;
pub const MYO: u32 = 3;
pub const CP: u32 = 1;

/// Multi-class segmentation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    dims: Dims,
    labels: Vec<u32>,
    alphabet: Alphabet,
}

impl LabelMap {
    pub fn new(dims: Dims, labels: Vec<u32>, alphabet: Alphabet) -> Result<Self> {
        if labels.len() != dims.len() {
            return Err(Error::InvalidDims(format!(
                "label length {} does not match {:?}",
                labels.len(),
                dims.extents()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l > alphabet.num_classes()) {
            return Err(Error::Alphabet(bad));
        }
        Ok(LabelMap {
            dims,
            labels,
            alphabet,
        })
    }

    pub fn background(dims: Dims, alphabet: Alphabet) -> Self {
        LabelMap {
            dims,
            labels: vec![0; dims.len()],
            alphabet,
        }
    }

    /// Build from per-class masks; later masks overwrite earlier ones.
    pub fn from_masks(dims: Dims, alphabet: Alphabet, masks: &[(u32, &BinaryMask)]) -> Result<Self> {
        let mut out = LabelMap::background(dims, alphabet);
        for &(label, mask) in masks {
            dims.check_same(&mask.dims())?;
            if label == 0 || label > alphabet.num_classes() {
                return Err(Error::Alphabet(label));
            }
            for i in mask.indices() {
                out.labels[i] = label;
            }
        }
        Ok(out)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn class_mask(&self, label: u32) -> BinaryMask {
        BinaryMask {
            dims: self.dims,
            bits: self.labels.iter().map(|&l| l == label).collect(),
        }
    }

    /// Union of all non-background classes.
    pub fn foreground(&self) -> BinaryMask {
        BinaryMask {
            dims: self.dims,
            bits: self.labels.iter().map(|&l| l != 0).collect(),
        }
    }

    pub fn extract_slice(&self, axis: usize, index: usize) -> Result<LabelMap> {
        Ok(LabelMap {
            dims: self.dims.without_axis(axis),
            labels: slice_values(&self.dims, axis, index, &self.labels)?,
            alphabet: self.alphabet,
        })
    }

    pub fn to_image(&self) -> GrayImage {
        GrayImage::new(self.dims, self.labels.iter().map(|&l| l as f64).collect())
            .expect("matching dims")
    }

    /// Interpret integer-valued voxels as labels.
    pub fn from_image(img: &GrayImage, alphabet: Alphabet) -> Result<Self> {
        let labels = img
            .data()
            .iter()
            .map(|&v| {
                let r = v.round();
                if (v - r).abs() > 1e-6 || r < 0.0 {
                    Err(Error::Alphabet(u32::MAX))
                } else {
                    Ok(r as u32)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        LabelMap::new(img.dims(), labels, alphabet)
    }
}

fn check_slice(dims: &Dims, axis: usize, index: usize) -> Result<()> {
    if dims.rank() != 3 {
        return Err(Error::Rank {
            expected: 3,
            got: dims.rank(),
        });
    }
    if axis > 2 {
        return Err(Error::InvalidDims(format!("axis {axis} out of range")));
    }
    if index >= dims.extent(axis) {
        return Err(Error::SliceIndex {
            axis,
            index,
            extent: dims.extent(axis),
        });
    }
    Ok(())
}

fn slice_values<T: Copy>(dims: &Dims, axis: usize, index: usize, data: &[T]) -> Result<Vec<T>> {
    check_slice(dims, axis, index)?;
    let [nx, ny, nz] = dims.shape();
    let mut out = Vec::new();
    match axis {
        0 => {
            for z in 0..nz {
                for y in 0..ny {
                    out.push(data[dims.index(index, y, z)]);
                }
            }
        }
        1 => {
            for z in 0..nz {
                for x in 0..nx {
                    out.push(data[dims.index(x, index, z)]);
                }
            }
        }
        _ => {
            let start = dims.index(0, 0, index);
            out.extend_from_slice(&data[start..start + nx * ny]);
        }
    }
    Ok(out)
}

fn insert_values<T: Copy>(
    dims: &Dims,
    axis: usize,
    index: usize,
    data: &mut [T],
    slice_dims: Dims,
    slice: &[T],
) -> Result<()> {
    check_slice(dims, axis, index)?;
    dims.without_axis(axis).check_same(&slice_dims)?;
    let [nx, ny, nz] = dims.shape();
    let mut it = slice.iter();
    match axis {
        0 => {
            for z in 0..nz {
                for y in 0..ny {
                    data[dims.index(index, y, z)] = *it.next().unwrap();
                }
            }
        }
        1 => {
            for z in 0..nz {
                for x in 0..nx {
                    data[dims.index(x, index, z)] = *it.next().unwrap();
                }
            }
        }
        _ => {
            let start = dims.index(0, 0, index);
            data[start..start + nx * ny].copy_from_slice(slice);
        }
    }
    Ok(())
}

fn stacked_dims(slice: Dims, n: usize, axis: usize) -> Result<Dims> {
    if slice.rank() != 2 {
        return Err(Error::Rank {
            expected: 2,
            got: slice.rank(),
        });
    }
    let e = slice.extents();
    let ext = match axis {
        0 => [n, e[0], e[1]],
        1 => [e[0], n, e[1]],
        2 => [e[0], e[1], n],
        _ => return Err(Error::InvalidDims(format!("axis {axis} out of range"))),
    };
    Dims::new(&ext)
}

fn pad_values<T: Copy>(dims: &Dims, axis: usize, data: &[T], value: T) -> Result<Vec<T>> {
    if dims.rank() != 3 {
        return Err(Error::Rank {
            expected: 3,
            got: dims.rank(),
        });
    }
    let mut ext = dims.shape();
    ext[axis] += 2;
    let out_dims = Dims::new(&ext)?;
    let mut out = vec![value; out_dims.len()];
    for (i, &v) in data.iter().enumerate() {
        let mut c = dims.coords(i);
        c[axis] += 1;
        out[out_dims.index(c[0], c[1], c[2])] = v;
    }
    Ok(out)
}
