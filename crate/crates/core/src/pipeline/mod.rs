//! Topology-guided segmentation pipelines.

pub mod cardiac;
pub mod config;
pub mod fetal;
pub mod curve;
pub mod glioblastoma;
pub mod module1;
pub mod module2;
pub mod module3;
pub mod preprocess;
pub mod report;

pub use config::{Config, PipelineConfig};
pub use cardiac::{segment_cardiac_2d, segment_cardiac_3d};
pub use fetal::{segment_fetal_slice, segment_fetal_volume};
pub use glioblastoma::{segment_glioblastoma, Segmentation};
pub use report::RunReport;
