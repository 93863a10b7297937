//! Brain tumour pipeline: whole tumour from FLAIR, enhancing shell from
//! T1ce, core and oedema from the shell's complement.

use super::config::PipelineConfig;
use super::module1::module1_global;
use super::module2::module2_detect;
use super::module3::module3_partition;
use super::preprocess::preprocess;
use super::report::{ReportPoint, RunReport};
use crate::error::{Error, Result, Stage, StageExt};
use crate::image::{Alphabet, Dims, GrayImage, LabelMap, ED, ET, TC};
use crate::ph::{Direction, PersistenceDiagram};

#[derive(Debug, Clone)]
pub struct Segmentation {
    pub labels: LabelMap,
    pub report: RunReport,
    /// Diagram the geometric object was taken from, with the grid it lives on.
    pub diagram: PersistenceDiagram,
    pub diagram_dims: Dims,
}

pub fn segment_glioblastoma(flair: &GrayImage, t1ce: &GrayImage, cfg: &PipelineConfig) -> Result<Segmentation> {
    flair.dims().check_same(&t1ce.dims()).stage(Stage::Preprocess)?;
    let mut report = RunReport::new("brain");
    let p = cfg.preprocessing.brain;
    let (flair, t1ce) = report.timed("preprocess", || -> Result<_> {
        Ok((preprocess(flair, p)?, preprocess(t1ce, p)?))
    })
    .stage(Stage::Preprocess)?;

    let m1 = report.timed("module1", || module1_global(&flair, cfg)).stage(Stage::Module1)?;
    report.t_star = Some(m1.t_star);
    report.dt_threshold = Some(m1.threshold);
    report.curve = Some(m1.curve);
    let whole = m1.whole;

    // Without a cavity the brightest component stands in for the shell, so
    // an open or solid enhancing region still yields a labelling.
    let det = report.timed("module2", || {
        match module2_detect(&t1ce, &whole, 2, Direction::Superlevel) {
            Err(Error::NoFeature(_)) => module2_detect(&t1ce, &whole, 0, Direction::Superlevel).map(|d| (d, true)),
            other => other.map(|d| (d, false)),
        }
    });
    let (det, fallback) = det.stage(Stage::Module2)?;
    if fallback {
        report.flag("no cavity");
    }
    report.points.push(ReportPoint::new("ET", Direction::Superlevel, &det.point));
    let et = det.geo.intersection(&whole);

    let part = report.timed("module3", || module3_partition(&whole, &et)).stage(Stage::Module3)?;
    if part.no_interior {
        report.flag("no interior");
    }
    let labels = LabelMap::from_masks(
        whole.dims(),
        Alphabet::Brats,
        &[(ED, &part.outside), (TC, &part.inside), (ET, &et)],
    )?;
    Ok(Segmentation {
        labels,
        report,
        diagram: det.diagram,
        diagram_dims: whole.dims(),
    })
}
