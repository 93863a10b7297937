//! File formats. Paths ending in `.raw` use the fixture format, everything
//! else is treated as NIfTI-1.

pub mod nifti;
pub mod raw;

use std::path::Path;

use crate::error::Result;
use crate::image::{Alphabet, GrayImage, LabelMap};

fn is_raw(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("raw"))
}

pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    if is_raw(path) {
        Ok(raw::load_raw(path)?.0)
    } else {
        Ok(nifti::load_nifti(path)?.0)
    }
}

pub fn load_labels(path: impl AsRef<Path>, alphabet: Alphabet) -> Result<LabelMap> {
    LabelMap::from_image(&load_image(path)?, alphabet)
}

pub fn save_image(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if is_raw(path) {
        raw::save_raw(img, path)
    } else {
        nifti::save_gray(img, path)
    }
}

pub fn save_labels(labels: &LabelMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if is_raw(path) {
        raw::save_raw_labels(labels, path)
    } else {
        nifti::save_labels(labels, path)
    }
}
