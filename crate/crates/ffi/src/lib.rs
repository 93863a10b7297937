//! C ABI over the toposeg library.
//!
//! Every handle is opaque and owned by the caller once returned; release it
//! with the matching `*_free`. Functions return a [`ToposegStatus`]; on
//! failure [`toposeg_last_error`] describes the error for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use toposeg::ph::{persistence, top_dim, Direction, Filtration, PersistenceDiagram};
use toposeg::pipeline::{self, Config, Segmentation};
use toposeg::{Dims, Error, GrayImage};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToposegStatus {
    Ok = 0,
    /// Null pointer, bad shape, non-UTF-8 string or out-of-range index.
    InvalidArgument = 1,
    /// Configuration could not be parsed or validated.
    Config = 2,
    /// Reading or writing a file failed.
    Io = 3,
    /// The pipeline ran but the image does not fit the model.
    Pipeline = 4,
    /// A Rust panic was caught at the boundary.
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToposegDirection {
    Sublevel = 0,
    Superlevel = 1,
}

/// One diagram point. Values are filtration times; `death` is +infinity and
/// `death_pixel` is -1 for essential classes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToposegPoint {
    pub dim: u32,
    pub birth: f64,
    pub death: f64,
    pub birth_pixel: u64,
    pub death_pixel: i64,
}

pub struct ToposegImage(GrayImage);

pub struct ToposegConfig(Config);

pub struct ToposegDiagram(PersistenceDiagram);

pub struct ToposegSegmentation {
    labels: Vec<u32>,
    dims: Dims,
    report: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("no interior nul"));
}

fn classify(e: &Error) -> ToposegStatus {
    match e.root() {
        Error::Config(_) => ToposegStatus::Config,
        Error::Io(_) | Error::Nifti(_) | Error::Fixture(_) => ToposegStatus::Io,
        Error::NoFeature(_)
        | Error::NoOnset { .. }
        | Error::RvUnreachable(_)
        | Error::VolumeTooThin(_)
        | Error::NoCandidate
        | Error::NoComplement
        | Error::EmptyMask => ToposegStatus::Pipeline,
        _ => ToposegStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), ToposegStatus>) -> ToposegStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ToposegStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            ToposegStatus::Panic
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, ToposegStatus>;
}

impl<T> OrStatus<T> for toposeg::Result<T> {
    fn or_status(self) -> Result<T, ToposegStatus> {
        self.map_err(|e| {
            set_error(e.to_string());
            classify(&e)
        })
    }
}

fn invalid(msg: &str) -> ToposegStatus {
    set_error(msg);
    ToposegStatus::InvalidArgument
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, ToposegStatus> {
    p.as_ref().ok_or_else(|| invalid(&format!("{what} is null")))
}

unsafe fn as_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, ToposegStatus> {
    if p.is_null() {
        return Err(invalid(&format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(&format!("{what} is not UTF-8")))
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), ToposegStatus> {
    if out.is_null() {
        return Err(invalid("output pointer is null"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message of the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn toposeg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn toposeg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies `len` voxel values (x fastest) into a new image of rank
/// `rank` (2 or 3) with extents `dims`. Values must be finite; persistence
/// further requires them in [0, 1].
///
/// # Safety
/// `dims` must point to `rank` values, `data` to their product, and `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn toposeg_image_new(
    dims: *const usize,
    rank: usize,
    data: *const f64,
    len: usize,
    out: *mut *mut ToposegImage,
) -> ToposegStatus {
    guard(|| {
        if dims.is_null() || data.is_null() || !(2..=3).contains(&rank) {
            return Err(invalid("dims/data null or rank not 2 or 3"));
        }
        let dims = Dims::new(std::slice::from_raw_parts(dims, rank)).or_status()?;
        if dims.len() != len {
            return Err(invalid("data length does not match dims"));
        }
        let img = GrayImage::new(dims, std::slice::from_raw_parts(data, len).to_vec()).or_status()?;
        emit(out, ToposegImage(img))
    })
}

/// Loads a NIfTI-1 file (`.nii`, `.nii.gz`) or a raw fixture (`.raw`).
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn toposeg_image_load(path: *const c_char, out: *mut *mut ToposegImage) -> ToposegStatus {
    guard(|| {
        let path = as_str(path, "path")?;
        let img = toposeg::io::load_image(path).or_status()?;
        emit(out, ToposegImage(img))
    })
}

/// Rank of the image (2 or 3).
///
/// # Safety
/// `img` must be a live image handle.
#[no_mangle]
pub unsafe extern "C" fn toposeg_image_rank(img: *const ToposegImage) -> usize {
    img.as_ref().map_or(0, |i| i.0.rank())
}

/// # Safety
/// `img` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn toposeg_image_free(img: *mut ToposegImage) {
    free(img)
}

/// Default configuration.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn toposeg_config_default(out: *mut *mut ToposegConfig) -> ToposegStatus {
    guard(|| emit(out, ToposegConfig(Config::default())))
}

/// Parses a TOML configuration document; absent keys keep their defaults.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn toposeg_config_from_toml(toml: *const c_char, out: *mut *mut ToposegConfig) -> ToposegStatus {
    guard(|| {
        let cfg = Config::from_toml(as_str(toml, "toml")?).or_status()?;
        emit(out, ToposegConfig(cfg))
    })
}

/// # Safety
/// `cfg` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn toposeg_config_free(cfg: *mut ToposegConfig) {
    free(cfg)
}

/// Persistence diagram up to degree `max_dim`, clamped to the top degree the
/// grid carries.
///
/// # Safety
/// `img` must be a live image handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn toposeg_persistence(
    img: *const ToposegImage,
    direction: ToposegDirection,
    max_dim: usize,
    out: *mut *mut ToposegDiagram,
) -> ToposegStatus {
    guard(|| {
        let img = &as_ref(img, "image")?.0;
        let dir = match direction {
            ToposegDirection::Sublevel => Direction::Sublevel,
            ToposegDirection::Superlevel => Direction::Superlevel,
        };
        let filt = Filtration::new(img, dir).or_status()?;
        let diag = persistence(&filt, max_dim.min(top_dim(img.dims())));
        emit(out, ToposegDiagram(diag))
    })
}

/// Number of points in the diagram.
///
/// # Safety
/// `diag` must be a live diagram handle.
#[no_mangle]
pub unsafe extern "C" fn toposeg_diagram_len(diag: *const ToposegDiagram) -> usize {
    diag.as_ref().map_or(0, |d| d.0.points.len())
}

/// Writes point `index` into `out`.
///
/// # Safety
/// `diag` must be a live diagram handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn toposeg_diagram_point(
    diag: *const ToposegDiagram,
    index: usize,
    out: *mut ToposegPoint,
) -> ToposegStatus {
    guard(|| {
        let d = &as_ref(diag, "diagram")?.0;
        let p = d.points.get(index).ok_or_else(|| invalid("point index out of range"))?;
        if out.is_null() {
            return Err(invalid("output pointer is null"));
        }
        *out = ToposegPoint {
            dim: p.dim as u32,
            birth: p.birth,
            death: p.death,
            birth_pixel: p.birth_pixel as u64,
            death_pixel: p.death_pixel.map_or(-1, |v| v as i64),
        };
        Ok(())
    })
}

/// # Safety
/// `diag` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn toposeg_diagram_free(diag: *mut ToposegDiagram) {
    free(diag)
}

fn seg_handle(labels: &toposeg::LabelMap, report: &pipeline::RunReport) -> ToposegSegmentation {
    let json = serde_json::to_string(report).expect("serialisable");
    ToposegSegmentation {
        labels: labels.labels().to_vec(),
        dims: labels.dims(),
        report: CString::new(json).expect("json has no nul"),
    }
}

fn config(cfg: *const ToposegConfig, default: &Config) -> &Config {
    // SAFETY: callers pass null or a live handle
    unsafe { cfg.as_ref().map_or(default, |c| &c.0) }
}

/// Brain pipeline on co-registered FLAIR and T1ce volumes. Labels: 1 ET,
/// 2 TC, 3 ED. `cfg` may be null for defaults.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn toposeg_segment_brain(
    flair: *const ToposegImage,
    t1ce: *const ToposegImage,
    cfg: *const ToposegConfig,
    out: *mut *mut ToposegSegmentation,
) -> ToposegStatus {
    guard(|| {
        let default = Config::default();
        let cfg = config(cfg, &default);
        let seg = pipeline::segment_glioblastoma(&as_ref(flair, "flair")?.0, &as_ref(t1ce, "t1ce")?.0, &cfg.pipeline)
            .or_status()?;
        emit(out, seg_handle(&seg.labels, &seg.report))
    })
}

/// Cardiac pipeline; 2D images use the slice version, volumes the 3D one.
/// Labels: 1 LV, 2 RV, 3 Myo.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn toposeg_segment_cardiac(
    img: *const ToposegImage,
    cfg: *const ToposegConfig,
    out: *mut *mut ToposegSegmentation,
) -> ToposegStatus {
    guard(|| {
        let default = Config::default();
        let cfg = &config(cfg, &default).pipeline;
        let img = &as_ref(img, "image")?.0;
        let seg: Segmentation = if img.rank() == 2 {
            pipeline::segment_cardiac_2d(img, cfg)
        } else {
            pipeline::segment_cardiac_3d(img, cfg)
        }
        .or_status()?;
        emit(out, seg_handle(&seg.labels, &seg.report))
    })
}

/// Cortical plate, per slice for volumes. Label 1 is CP.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn toposeg_segment_fetal(
    img: *const ToposegImage,
    cfg: *const ToposegConfig,
    out: *mut *mut ToposegSegmentation,
) -> ToposegStatus {
    guard(|| {
        let default = Config::default();
        let cfg = &config(cfg, &default).pipeline;
        let img = &as_ref(img, "image")?.0;
        let (mask, report) = if img.rank() == 2 {
            let r = pipeline::segment_fetal_slice(img, cfg).or_status()?;
            let mut report = pipeline::RunReport::new("fetal");
            report.slices.push(r.outcome);
            (r.mask, report)
        } else {
            let r = pipeline::segment_fetal_volume(img, cfg).or_status()?;
            (r.mask, r.report)
        };
        emit(out, seg_handle(&toposeg::phantoms::fetal_truth_labels(&mask), &report))
    })
}

/// Number of voxels in the label map.
///
/// # Safety
/// `seg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn toposeg_segmentation_len(seg: *const ToposegSegmentation) -> usize {
    seg.as_ref().map_or(0, |s| s.labels.len())
}

/// Writes the extents into `dims` (3 slots; the third is 1 for 2D).
///
/// # Safety
/// `seg` must be a live handle and `dims` point to 3 writable values.
#[no_mangle]
pub unsafe extern "C" fn toposeg_segmentation_dims(seg: *const ToposegSegmentation, dims: *mut usize) -> ToposegStatus {
    guard(|| {
        let s = as_ref(seg, "segmentation")?;
        if dims.is_null() {
            return Err(invalid("dims is null"));
        }
        ptr::copy_nonoverlapping(s.dims.shape().as_ptr(), dims, 3);
        Ok(())
    })
}

/// Copies the labels (x fastest) into `buf`, which must hold `len` values.
///
/// # Safety
/// `seg` must be a live handle and `buf` point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn toposeg_segmentation_labels(
    seg: *const ToposegSegmentation,
    buf: *mut u32,
    len: usize,
) -> ToposegStatus {
    guard(|| {
        let s = as_ref(seg, "segmentation")?;
        if buf.is_null() || len != s.labels.len() {
            return Err(invalid("buffer null or of the wrong length"));
        }
        ptr::copy_nonoverlapping(s.labels.as_ptr(), buf, len);
        Ok(())
    })
}

/// Run report as JSON, owned by the handle.
///
/// # Safety
/// `seg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn toposeg_segmentation_report(seg: *const ToposegSegmentation) -> *const c_char {
    seg.as_ref().map_or(ptr::null(), |s| s.report.as_ptr())
}

/// # Safety
/// `seg` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn toposeg_segmentation_free(seg: *mut ToposegSegmentation) {
    free(seg)
}
