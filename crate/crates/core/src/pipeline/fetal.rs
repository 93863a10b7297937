//! Cortical plate: dark closed curves enclosing a plausible share of the
//! slice, one or two per slice.

use rayon::prelude::*;

use super::config::{FetalSelector, PipelineConfig};
use super::preprocess::preprocess;
use super::report::{ReportPoint, RunReport, SliceOutcome};
use crate::error::{Error, Result, Stage, StageExt};
use crate::image::{BinaryMask, GrayImage};
use crate::morphology::fill_holes;
use crate::ph::{component_at, persistence, Direction, Filtration, PersistencePoint};

#[derive(Debug, Clone)]
struct Survivor {
    point: PersistencePoint,
    component: BinaryMask,
    enclosed: usize,
}

#[derive(Debug, Clone)]
pub struct SliceResult {
    pub mask: BinaryMask,
    pub outcome: SliceOutcome,
    /// Selected diagram points, first the primary one.
    pub points: Vec<PersistencePoint>,
}

fn pick(survivors: &[Survivor], selector: FetalSelector) -> usize {
    let better = |a: &Survivor, b: &Survivor| -> std::cmp::Ordering {
        let key = match selector {
            FetalSelector::LargestArea => b.enclosed.cmp(&a.enclosed),
            FetalSelector::EarliestBirth => a.point.birth.total_cmp(&b.point.birth),
            FetalSelector::MostPersistent => b.point.persistence().total_cmp(&a.point.persistence()),
        };
        key.then(a.point.birth_pixel.cmp(&b.point.birth_pixel))
    };
    (0..survivors.len())
        .min_by(|&i, &j| better(&survivors[i], &survivors[j]))
        .expect("nonempty")
}

fn plane_distance(a: &PersistencePoint, b: &PersistencePoint) -> f64 {
    ((a.birth - b.birth).powi(2) + (a.death - b.death).powi(2)).sqrt()
}

/// Core of the slice pipeline on an already preprocessed slice.
pub fn fetal_slice_core(img: &GrayImage, index: usize, cfg: &PipelineConfig) -> Result<SliceResult> {
    if img.rank() != 2 {
        return Err(Error::Rank {
            expected: 2,
            got: img.rank(),
        });
    }
    let area = img.dims().len() as f64;
    let [lo, hi] = cfg.fetal_area_bounds;
    let filt = Filtration::new(img, Direction::Sublevel)?;
    let diag = persistence(&filt, 1);
    let mut survivors = Vec::new();
    for p in diag.in_dim(1).filter(|p| !p.is_essential()) {
        let component = component_at(&filt, p.birth, p.birth_pixel)?;
        let enclosed = fill_holes(&component).count() - component.count();
        let frac = enclosed as f64 / area;
        if (lo..=hi).contains(&frac) {
            survivors.push(Survivor {
                point: *p,
                component,
                enclosed,
            });
        }
    }
    let mut outcome = SliceOutcome {
        index,
        kind: "none".into(),
        surviving: survivors.len(),
        voxels: 0,
    };
    if survivors.is_empty() {
        return Ok(SliceResult {
            mask: BinaryMask::empty(img.dims()),
            outcome,
            points: vec![],
        });
    }
    let best = pick(&survivors, cfg.fetal_selector);
    let primary = &survivors[best];
    let partner = survivors
        .iter()
        .enumerate()
        .filter(|&(i, s)| i != best && plane_distance(&s.point, &primary.point) <= cfg.fetal_epsilon)
        .min_by(|(_, a), (_, b)| {
            plane_distance(&a.point, &primary.point)
                .total_cmp(&plane_distance(&b.point, &primary.point))
                .then(a.point.birth_pixel.cmp(&b.point.birth_pixel))
        })
        .map(|(_, s)| s);
    let mut mask = primary.component.clone();
    let mut points = vec![primary.point];
    outcome.kind = "single".into();
    if let Some(s) = partner {
        mask = mask.union(&s.component);
        points.push(s.point);
        outcome.kind = "pair".into();
    }
    outcome.voxels = mask.count();
    Ok(SliceResult { mask, outcome, points })
}

/// One coronal slice, preprocessed with the fetal settings.
pub fn segment_fetal_slice(slice: &GrayImage, cfg: &PipelineConfig) -> Result<SliceResult> {
    let img = preprocess(slice, cfg.preprocessing.fetal).stage(Stage::Preprocess)?;
    fetal_slice_core(&img, 0, cfg).stage(Stage::Module2)
}

#[derive(Debug, Clone)]
pub struct FetalSegmentation {
    pub mask: BinaryMask,
    pub report: RunReport,
}

/// Runs [`segment_fetal_slice`] on every slice along `cfg.fetal_axis` in
/// parallel; each slice is normalised and blurred on its own.
pub fn segment_fetal_volume(vol: &GrayImage, cfg: &PipelineConfig) -> Result<FetalSegmentation> {
    if vol.rank() != 3 {
        return Err(Error::Rank {
            expected: 3,
            got: vol.rank(),
        });
    }
    let axis = cfg.fetal_axis;
    let mut report = RunReport::new("fetal");
    let n = vol.dims().extent(axis);
    let results = report.timed("slices", || {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let slice = preprocess(&vol.extract_slice(axis, i)?, cfg.preprocessing.fetal).stage(Stage::Preprocess)?;
                fetal_slice_core(&slice, i, cfg).stage(Stage::Module2)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut masks = Vec::with_capacity(n);
    for r in results {
        for (k, p) in r.points.iter().enumerate() {
            let role = format!("CP slice {} #{}", r.outcome.index, k + 1);
            report.points.push(ReportPoint::new(role, Direction::Sublevel, p));
        }
        report.slices.push(r.outcome);
        masks.push(r.mask);
    }
    Ok(FetalSegmentation {
        mask: BinaryMask::stack(&masks, axis)?,
        report,
    })
}
