//! Train-free segmentation of grey 2D/3D images with cubical persistent
//! homology.

pub mod cli;
pub mod error;
pub mod image;
pub mod metrics;
pub mod phantoms;
pub mod io;
pub mod morphology;
pub mod ph;
pub mod pipeline;
pub mod validation;

pub use error::{Error, Result, Stage};
pub use image::{Alphabet, BinaryMask, Dims, GrayImage, LabelMap};
