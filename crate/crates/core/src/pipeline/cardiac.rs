//! Cardiac pipelines: LV and RV from bright superlevel components, the
//! myocardium as the dark cycle (2D) or capped tube (3D) between them.

use super::config::PipelineConfig;
use super::glioblastoma::Segmentation;
use super::module1::module1_localized;
use super::module2::module2_detect;
use super::module3::module3_partition;
use super::preprocess::preprocess;
use super::report::{CandidateScore, ReportPoint, RunReport};
use crate::error::{Error, Result, Stage, StageExt};
use crate::image::{Alphabet, BinaryMask, GrayImage, LabelMap, LV, MYO, RV};
use crate::morphology::{binary_dilate, cylindricality, disk_shape_score, grey_erode, StructuringBall};
use crate::ph::{persistence_h0, Direction, Filtration, PersistencePoint};

/// Superlevel H0 points by decreasing persistence (essential first), ties to
/// the smaller birth pixel.
pub fn h0_candidates(img: &GrayImage, n: usize) -> Result<Vec<PersistencePoint>> {
    let filt = Filtration::new(img, Direction::Superlevel)?;
    let mut pts = persistence_h0(&filt).points;
    pts.sort_by(|a, b| {
        b.persistence()
            .total_cmp(&a.persistence())
            .then(a.birth_pixel.cmp(&b.birth_pixel))
    });
    pts.truncate(n);
    Ok(pts)
}

#[derive(Debug, Clone)]
pub struct Candidate {
    pub point: PersistencePoint,
    pub mask: BinaryMask,
    pub score: f64,
    pub centroid: Vec<f64>,
    pub t: f64,
    pub fallback: bool,
}

fn centroid(mask: &BinaryMask) -> Vec<f64> {
    let dims = mask.dims();
    let mut sum = [0.0; 3];
    let mut n = 0.0;
    for i in mask.indices() {
        let c = dims.coords(i);
        for a in 0..3 {
            sum[a] += c[a] as f64;
        }
        n += 1.0;
    }
    sum[..dims.rank()].iter().map(|s| s / n).collect()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Localized Module 1 around each of the `top_n_h0_rv` most persistent
/// bright components, scored for roundness.
pub fn score_candidates(img: &GrayImage, cfg: &PipelineConfig, axis: Option<usize>) -> Result<Vec<Candidate>> {
    let n = cfg.top_n_h0.max(cfg.top_n_h0_rv);
    let mut out = Vec::new();
    for point in h0_candidates(img, n)? {
        let loc = module1_localized(img, point.birth_pixel, cfg)?;
        let score = match axis {
            None => disk_shape_score(&loc.mask)?,
            Some(a) => cylindricality(&loc.mask, a)?,
        };
        out.push(Candidate {
            point,
            centroid: centroid(&loc.mask),
            mask: loc.mask,
            score,
            t: loc.info.t,
            fallback: loc.info.fallback,
        });
    }
    Ok(out)
}

/// LV = best score among the first `top_n_h0`; RV = among the first
/// `top_n_h0_rv`, the candidate not touching LV whose centroid is nearest.
pub fn select_lv_rv(cands: &[Candidate], cfg: &PipelineConfig) -> Result<(usize, Option<usize>)> {
    let lv = cands
        .iter()
        .take(cfg.top_n_h0)
        .enumerate()
        .max_by(|(i, a), (j, b)| a.score.total_cmp(&b.score).then(j.cmp(i)))
        .map(|(i, _)| i)
        .ok_or(Error::NoCandidate)?;
    let lv_c = &cands[lv];
    let rv = cands
        .iter()
        .take(cfg.top_n_h0_rv)
        .enumerate()
        .filter(|&(i, c)| i != lv && !c.mask.intersects(&lv_c.mask))
        .min_by(|(i, a), (j, b)| {
            distance(&a.centroid, &lv_c.centroid)
                .total_cmp(&distance(&b.centroid, &lv_c.centroid))
                .then(i.cmp(j))
        })
        .map(|(i, _)| i);
    Ok((lv, rv))
}

/// Smallest radius at which the dilated LV meets RV, with the dilated mask.
pub fn dilate_to_reach(lv: &BinaryMask, rv: &BinaryMask, max_steps: usize) -> Result<(usize, BinaryMask)> {
    if !rv.is_empty() {
        for k in 1..=max_steps {
            let d = binary_dilate(lv, StructuringBall::new(k, lv.dims().rank()));
            if d.intersects(rv) {
                return Ok((k, d));
            }
        }
    }
    Err(Error::RvUnreachable(max_steps))
}


/// Whole object: LV dilated until it meets RV, together with RV.
fn locate(img: &GrayImage, cfg: &PipelineConfig, axis: Option<usize>, report: &mut RunReport) -> Result<BinaryMask> {
    let cands = report
        .timed("candidates", || score_candidates(img, cfg, axis))
        .stage(Stage::Candidates)?;
    let (lv, rv) = select_lv_rv(&cands, cfg).stage(Stage::Candidates)?;
    for (i, c) in cands.iter().enumerate() {
        let role = if i == lv {
            "LV candidate"
        } else if Some(i) == rv {
            "RV candidate"
        } else {
            "candidate"
        };
        report.points.push(ReportPoint::new(role, Direction::Superlevel, &c.point));
        report.candidates.push(CandidateScore {
            seed: c.point.birth_pixel,
            score: c.score,
            size: c.mask.count(),
            centroid: c.centroid.clone(),
            t: c.t,
            fallback: c.fallback,
        });
        if c.fallback {
            report.flag("localized fallback");
        }
    }
    let lv_mask = cands[lv].mask.clone();
    let rv_mask = rv.map(|i| cands[i].mask.clone()).unwrap_or_else(|| BinaryMask::empty(img.dims()));
    let (steps, dilated) = report
        .timed("dilation", || dilate_to_reach(&lv_mask, &rv_mask, cfg.lv_dilation_max_steps))
        .stage(Stage::Dilation)?;
    report.lv_dilation_steps = Some(steps);
    Ok(dilated.union(&rv_mask))
}

fn labels_from(lv: &BinaryMask, rv: &BinaryMask, myo: &BinaryMask) -> Result<LabelMap> {
    LabelMap::from_masks(myo.dims(), Alphabet::Acdc, &[(RV, rv), (LV, lv), (MYO, myo)])
}

/// Short-axis slice pipeline.
pub fn segment_cardiac_2d(slice: &GrayImage, cfg: &PipelineConfig) -> Result<Segmentation> {
    if slice.rank() != 2 {
        return Err(Error::Rank {
            expected: 2,
            got: slice.rank(),
        });
    }
    let mut report = RunReport::new("cardiac2d");
    let img = report
        .timed("preprocess", || preprocess(slice, cfg.preprocessing.cardiac))
        .stage(Stage::Preprocess)?;
    let whole = locate(&img, cfg, None, &mut report)?;
    let det = report
        .timed("module2", || module2_detect(&img, &whole, 1, Direction::Sublevel))
        .stage(Stage::Module2)?;
    report.points.push(ReportPoint::new("Myo", Direction::Sublevel, &det.point));
    let myo = det.geo.intersection(&whole);
    let part = report
        .timed("module3", || module3_partition(&whole, &myo))
        .stage(Stage::Module3)?;
    if part.no_interior {
        report.flag("no interior");
    }
    let labels = labels_from(&part.inside, &part.outside, &myo)?;
    Ok(Segmentation {
        labels,
        report,
        diagram: det.diagram,
        diagram_dims: whole.dims(),
    })
}

/// Volume pipeline; the long axis is `cfg.cardiac_axis`.
pub fn segment_cardiac_3d(vol: &GrayImage, cfg: &PipelineConfig) -> Result<Segmentation> {
    if vol.rank() != 3 {
        return Err(Error::Rank {
            expected: 3,
            got: vol.rank(),
        });
    }
    let axis = cfg.cardiac_axis;
    let slices = vol.dims().extent(axis);
    if slices < 2 {
        return Err(Error::VolumeTooThin(slices));
    }
    let mut report = RunReport::new("cardiac3d");
    let img = report
        .timed("preprocess", || preprocess(vol, cfg.preprocessing.cardiac))
        .stage(Stage::Preprocess)?;
    let whole = locate(&img, cfg, Some(axis), &mut report)?;

    let mut dark = img.clone();
    if cfg.myo_closing_radius > 0 {
        dark = grey_erode(&dark, StructuringBall::new(cfg.myo_closing_radius, 3));
    }
    let capped = dark.pad_black_caps(axis).stage(Stage::Module2)?;
    let whole_capped = whole.pad(axis, true).stage(Stage::Module2)?;
    let det = report
        .timed("module2", || module2_detect(&capped, &whole_capped, 2, Direction::Sublevel))
        .stage(Stage::Module2)?;
    report.points.push(ReportPoint::new("Myo", Direction::Sublevel, &det.point));
    let myo_capped = det.geo.intersection(&whole_capped);
    let part = report
        .timed("module3", || module3_partition(&whole_capped, &myo_capped))
        .stage(Stage::Module3)?;
    if part.no_interior {
        report.flag("no interior");
    }
    let myo = myo_capped.unpad(axis)?;
    let inside = part.inside.unpad(axis)?;
    let outside = part.outside.unpad(axis)?;
    let labels = labels_from(&inside, &outside, &myo)?;
    Ok(Segmentation {
        labels,
        report,
        diagram: det.diagram,
        diagram_dims: whole_capped.dims(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Dims;
    use crate::metrics::evaluate_labelmap;
    use crate::phantoms::{make_cardiac_phantom, PhantomSpec, Violation};
    use crate::pipeline::config::Preprocessing;

    fn raw_cfg() -> PipelineConfig {
        let mut c = PipelineConfig::default();
        c.preprocessing.cardiac = Preprocessing::NONE;
        c
    }

    #[test]
    fn slice_phantom() {
        let ph = make_cardiac_phantom(&PhantomSpec::cardiac_2d(), false).unwrap();
        let seg = segment_cardiac_2d(&ph.image, &raw_cfg()).unwrap();
        let e = evaluate_labelmap(&seg.labels, &ph.truth).unwrap();
        assert!(e.classes.iter().all(|c| c.dice >= 0.85), "{e:?}");
        assert_eq!(seg.report.candidates.len(), 2);
    }

    #[test]
    fn missing_rv_is_unreachable() {
        let ph = make_cardiac_phantom(&PhantomSpec::cardiac_2d().with_violation(Violation::MissingRv), false).unwrap();
        let err = segment_cardiac_2d(&ph.image, &raw_cfg()).unwrap_err();
        assert!(matches!(err.root(), Error::RvUnreachable(64)));
    }

    #[test]
    fn decoy_disk_pairs_with_nearest() {
        // elliptical "LV" at the left, its neighbour, and a perfect disk far right
        let dims = Dims::d2(96, 48);
        let img = GrayImage::from_fn(dims, |x, y, _| {
            let (fx, fy) = (x as f64, y as f64);
            let ellipse = ((fx - 14.0) / 9.0).powi(2) + ((fy - 24.0) / 4.0).powi(2) <= 1.0;
            let neighbour = (fx - 30.0).powi(2) + (fy - 24.0).powi(2) <= 16.0;
            let decoy = (fx - 80.0).powi(2) + (fy - 24.0).powi(2) <= 36.0;
            if decoy || ellipse {
                0.9
            } else if neighbour {
                0.8
            } else {
                0.1
            }
        });
        let cfg = raw_cfg();
        let cands = score_candidates(&img, &cfg, None).unwrap();
        let (lv, rv) = select_lv_rv(&cands, &cfg).unwrap();
        let decoy_seed = cands[lv].centroid.clone();
        assert!((decoy_seed[0] - 80.0).abs() < 1e-9);
        let rv = rv.unwrap();
        // the neighbour is nearer the decoy than the ellipse is
        assert!((cands[rv].centroid[0] - 30.0).abs() < 1e-9);
    }

    #[test]
    fn thin_volume() {
        let vol = GrayImage::filled(Dims::d3(8, 8, 1), 0.5);
        assert!(matches!(segment_cardiac_3d(&vol, &raw_cfg()), Err(Error::VolumeTooThin(1))));
    }

    #[test]
    fn volume_phantom() {
        let ph = make_cardiac_phantom(&PhantomSpec::cardiac_3d(), true).unwrap();
        let seg = segment_cardiac_3d(&ph.image, &raw_cfg()).unwrap();
        let e = evaluate_labelmap(&seg.labels, &ph.truth).unwrap();
        assert!(e.classes.iter().all(|c| c.dice >= 0.80), "{e:?}");
    }
}
