//! Structured run reports emitted by every pipeline.

use serde::{Deserialize, Serialize};

use super::curve::VoxelCountCurve;
use crate::ph::{Direction, PersistencePoint};

/// A diagram point in filtration units; `death` is `None` for essential
/// classes so the report stays valid JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportPoint {
    /// What the point was selected for, e.g. `"ET"` or `"candidate"`.
    pub role: String,
    pub direction: Direction,
    pub dim: usize,
    pub birth: f64,
    pub death: Option<f64>,
    pub persistence: Option<f64>,
    pub birth_pixel: usize,
    pub death_pixel: Option<usize>,
}

impl ReportPoint {
    pub fn new(role: impl Into<String>, direction: Direction, p: &PersistencePoint) -> Self {
        let finite = !p.is_essential();
        ReportPoint {
            role: role.into(),
            direction,
            dim: p.dim,
            birth: p.birth,
            death: finite.then_some(p.death),
            persistence: finite.then(|| p.persistence()),
            birth_pixel: p.birth_pixel,
            death_pixel: p.death_pixel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub seed: usize,
    /// Disk-shape score (2D) or cylindricality (3D).
    pub score: f64,
    pub size: usize,
    pub centroid: Vec<f64>,
    /// Level the localized Module 1 stopped at, in filtration units.
    pub t: f64,
    pub fallback: bool,
}

/// Per-slice outcome of the fetal pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceOutcome {
    pub index: usize,
    /// `"none"`, `"single"` or `"pair"`.
    pub kind: String,
    pub surviving: usize,
    pub voxels: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub task: String,
    /// Module 1 level, in superlevel filtration units (`1 - intensity`).
    pub t_star: Option<f64>,
    pub dt_threshold: Option<f64>,
    pub curve: Option<VoxelCountCurve>,
    pub points: Vec<ReportPoint>,
    pub candidates: Vec<CandidateScore>,
    pub slices: Vec<SliceOutcome>,
    pub lv_dilation_steps: Option<usize>,
    pub flags: Vec<String>,
    /// Wall seconds per stage. Not serialized so reports stay byte-identical
    /// across runs; the CLI records timings in the manifest.
    #[serde(skip)]
    pub timing: Vec<(String, f64)>,
}

impl RunReport {
    pub fn new(task: &str) -> Self {
        RunReport {
            task: task.into(),
            ..Default::default()
        }
    }

    pub fn flag(&mut self, f: &str) {
        if !self.flags.iter().any(|x| x == f) {
            self.flags.push(f.into());
        }
    }

    pub fn has_flag(&self, f: &str) -> bool {
        self.flags.iter().any(|x| x == f)
    }

    /// Runs `f`, recording its wall time under `stage`.
    pub fn timed<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = std::time::Instant::now();
        let out = f();
        self.timing.push((stage.into(), start.elapsed().as_secs_f64()));
        out
    }
}
