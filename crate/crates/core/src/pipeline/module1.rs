//! Module 1: the whole object, from the superlevel voxel-count curve.

use serde::{Deserialize, Serialize};

use super::config::{DtThreshold, PipelineConfig};
use super::curve::VoxelCountCurve;
use crate::error::{Error, Result};
use crate::image::{BinaryMask, GrayImage};
use crate::morphology::{fill_holes, largest_component};
use crate::ph::{component_at, Direction, Filtration};

#[derive(Debug, Clone)]
pub struct GlobalResult {
    pub t_star: f64,
    pub threshold: f64,
    pub whole: BinaryMask,
    pub curve: VoxelCountCurve,
}

fn threshold_for(curve: &VoxelCountCurve, mode: DtThreshold) -> f64 {
    match mode {
        DtThreshold::Auto => curve.derivative_area(),
        DtThreshold::Fixed(v) => v,
    }
}

/// Step back one sample from the first exceedance of the threshold, take the
/// largest component of that superlevel frame and fill its holes.
pub fn module1_global(img: &GrayImage, cfg: &PipelineConfig) -> Result<GlobalResult> {
    let filt = Filtration::new(img, Direction::Superlevel)?;
    let curve = VoxelCountCurve::global(&filt, cfg.curve_samples);
    let threshold = threshold_for(&curve, cfg.dt_threshold);
    let no_onset = |curve: VoxelCountCurve| Error::NoOnset {
        threshold,
        curve: Box::new(curve),
    };
    // A jump out of an empty frame is the first activation, not an onset.
    let onset = (1..curve.derivative.len())
        .find(|&i| curve.derivative[i] > threshold && curve.counts[i - 1] > 0);
    let Some(i) = onset else {
        return Err(no_onset(curve));
    };
    let t_star = curve.thresholds[i - 1];
    let whole = fill_holes(&largest_component(&filt.frame(t_star)));
    Ok(GlobalResult {
        t_star,
        threshold,
        whole,
        curve,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalizedInfo {
    pub seed: usize,
    pub t: f64,
    pub threshold: f64,
    /// True when the curve never exceeded the threshold and the component at
    /// the seed's own activation level was returned.
    pub fallback: bool,
}

#[derive(Debug, Clone)]
pub struct LocalizedResult {
    pub mask: BinaryMask,
    pub info: LocalizedInfo,
    pub curve: VoxelCountCurve,
}

/// Module 1 restricted to the superlevel component of `seed`.
pub fn module1_localized(img: &GrayImage, seed: usize, cfg: &PipelineConfig) -> Result<LocalizedResult> {
    if seed >= img.dims().len() {
        return Err(Error::VoxelIndex(seed));
    }
    let filt = Filtration::new(img, Direction::Superlevel)?;
    let curve = VoxelCountCurve::localized(&filt, seed, cfg.curve_samples);
    let threshold = threshold_for(&curve, cfg.dt_threshold);
    let activation = filt.value(seed);
    let (t, fallback) = match curve.first_exceedance(threshold) {
        Some(i) if i > 0 => (curve.thresholds[i - 1], false),
        Some(_) => (activation, false),
        None => (activation, true),
    };
    let mask = component_at(&filt, t, seed)?;
    Ok(LocalizedResult {
        mask,
        info: LocalizedInfo {
            seed,
            t,
            threshold,
            fallback,
        },
        curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Dims;
    use crate::metrics::dice;
    use crate::morphology::{complement_components, count_components, all_axes};

    fn disk(dims: Dims, cx: f64, cy: f64, r: f64) -> BinaryMask {
        BinaryMask::from_fn(dims, |x, y, _| {
            (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2) <= r * r
        })
    }

    #[test]
    fn blob_before_texture() {
        let dims = Dims::d2(64, 64);
        let blob = disk(dims, 20.0, 30.0, 5.0);
        let tissue = disk(dims, 32.0, 32.0, 28.0);
        let img = GrayImage::from_fn(dims, |x, y, _| {
            let i = dims.index(x, y, 0);
            if blob.get(i) {
                0.9
            } else if tissue.get(i) {
                0.4
            } else {
                0.0
            }
        });
        let r = module1_global(&img, &PipelineConfig::default()).unwrap();
        assert!(r.t_star < 0.6);
        assert!(r.whole.is_subset_of(&fill_holes(&r.whole)));
        assert!(blob.is_subset_of(&r.whole));
        assert!(dice(&r.whole, &blob).unwrap() >= 0.95);
        assert_eq!(count_components(&r.whole), 1);
        let (_, touches) = complement_components(&r.whole, &all_axes(dims));
        assert!(touches.iter().all(|&t| t));
    }

    #[test]
    fn cavity_filled() {
        let dims = Dims::d2(64, 64);
        let outer = disk(dims, 32.0, 32.0, 6.0);
        let cavity = disk(dims, 32.0, 32.0, 2.0);
        let tissue = disk(dims, 32.0, 32.0, 28.0);
        let img = GrayImage::from_fn(dims, |x, y, _| {
            let i = dims.index(x, y, 0);
            if cavity.get(i) {
                0.05
            } else if outer.get(i) {
                0.9
            } else if tissue.get(i) {
                0.4
            } else {
                0.0
            }
        });
        let r = module1_global(&img, &PipelineConfig::default()).unwrap();
        assert_eq!(r.whole, outer);
    }

    #[test]
    fn constant_has_no_onset() {
        for v in [0.0, 0.5, 1.0] {
            let img = GrayImage::filled(Dims::d2(16, 16), v);
            assert!(matches!(
                module1_global(&img, &PipelineConfig::default()),
                Err(Error::NoOnset { .. })
            ));
        }
    }

    #[test]
    fn localized_isolated_disk() {
        let dims = Dims::d2(48, 48);
        let d = disk(dims, 24.0, 24.0, 8.0);
        let img = GrayImage::from_fn(dims, |x, y, _| if d.get(dims.index(x, y, 0)) { 0.9 } else { 0.1 });
        let r = module1_localized(&img, dims.index(24, 24, 0), &PipelineConfig::default()).unwrap();
        assert!(!r.info.fallback);
        assert!(dice(&r.mask, &d).unwrap() >= 0.95);
    }

    #[test]
    fn localized_stops_at_dim_bridge() {
        let dims = Dims::d2(64, 32);
        let a = disk(dims, 16.0, 16.0, 8.0);
        let b = disk(dims, 48.0, 16.0, 8.0);
        let img = GrayImage::from_fn(dims, |x, y, _| {
            let i = dims.index(x, y, 0);
            if a.get(i) || b.get(i) {
                0.9
            } else if (14..=18).contains(&y) {
                0.5
            } else {
                0.1
            }
        });
        let r = module1_localized(&img, dims.index(16, 16, 0), &PipelineConfig::default()).unwrap();
        assert_eq!(r.mask, a);
    }

    #[test]
    fn localized_dark_seed_falls_back() {
        let dims = Dims::d2(8, 8);
        let img = GrayImage::from_fn(dims, |x, _, _| if x < 4 { 0.0 } else { 0.8 });
        let r = module1_localized(&img, 0, &PipelineConfig::default()).unwrap();
        assert!(r.info.fallback);
        assert_eq!(r.info.t, 1.0);
        assert_eq!(r.mask.count(), 64);
    }
}
