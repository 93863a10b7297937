//! Crate-wide error type.

use std::fmt;

use crate::pipeline::curve::VoxelCountCurve;

pub type Result<T> = std::result::Result<T, Error>;

/// Pipeline stage a failure originated from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Preprocess,
    Module1,
    Module2,
    Module3,
    Candidates,
    Dilation,
    Io,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Preprocess => "preprocess",
            Stage::Module1 => "module1",
            Stage::Module2 => "module2",
            Stage::Module3 => "module3",
            Stage::Candidates => "candidates",
            Stage::Dilation => "dilation",
            Stage::Io => "io",
        };
        f.write_str(s)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    InvalidDims(String),
    #[error("dimension mismatch: {0:?} vs {1:?}")]
    DimMismatch(Vec<usize>, Vec<usize>),
    #[error("expected a rank-{expected} image, got rank {got}")]
    Rank { expected: usize, got: usize },
    #[error("non-finite value at voxel {0}")]
    NonFinite(usize),
    #[error("value {value} at voxel {index} is outside [0,1]")]
    OutOfRange { index: usize, value: f64 },
    #[error("index {index} out of range for axis {axis} (extent {extent})")]
    SliceIndex { axis: usize, index: usize, extent: usize },
    #[error("voxel index {0} out of range")]
    VoxelIndex(usize),
    #[error("negative sigma {0}")]
    NegativeSigma(f64),
    #[error("empty mask")]
    EmptyMask,
    #[error("label {0} is not in the alphabet")]
    Alphabet(u32),
    #[error("seed voxel {seed} is inactive at t = {t}")]
    InactiveSeed { seed: usize, t: f64 },
    #[error("instance too large: {cells} cells exceeds limit {limit}")]
    TooLarge { cells: usize, limit: usize },
    #[error("no onset detected: derivative never exceeds threshold {threshold}")]
    NoOnset {
        threshold: f64,
        curve: Box<VoxelCountCurve>,
    },
    #[error("no feature in dimension {0}")]
    NoFeature(usize),
    #[error("geometric object covers the whole domain")]
    NoComplement,
    #[error("no valid H0 candidate")]
    NoCandidate,
    #[error("RV unreachable after {0} dilation steps")]
    RvUnreachable(usize),
    #[error("volume too thin: {0} slices along the long axis")]
    VolumeTooThin(usize),
    #[error("config: {0}")]
    Config(String),
    #[error("nifti: {0}")]
    Nifti(#[from] crate::io::nifti::NiftiError),
    #[error("fixture: {0}")]
    Fixture(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("{stage}: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at(self, stage: Stage) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error, stripping stage tags.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: Stage) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: Stage) -> Result<T> {
        self.map_err(|e| e.at(stage))
    }
}
