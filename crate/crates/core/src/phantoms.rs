//! Synthetic images with exactly known segmentations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{Alphabet, BinaryMask, Dims, GrayImage, LabelMap, CP, ED, ET, LV, MYO, RV, TC};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhantomTask {
    #[default]
    Brain,
    Cardiac2d,
    Cardiac3d,
    Fetal,
}

/// Deliberate departures from the anatomical model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Violation {
    #[default]
    None,
    /// Brain: a disk-shaped opening in the enhancing shell, labelled oedema.
    PerforatedShell,
    /// Cardiac: no right ventricle.
    MissingRv,
    /// Cardiac 3D: a slot through the myocardial wall towards the right
    /// ventricle, this many slices thick, filled with left-ventricle signal.
    AxialGap(usize),
    /// Brain: a core brighter than the enhancing shell in T1ce.
    SolidCore,
    /// Fetal: arcs never close, not even through a dim gap.
    OpenArc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BrainGeometry {
    pub dims: [usize; 3],
    pub tc_radius: f64,
    pub et_radius: f64,
    pub ed_radius: f64,
    pub head_radius: f64,
    pub perforation_radius: f64,
    pub flair_peak: f64,
    pub flair_drop: f64,
    pub flair_brain: f64,
    pub t1ce_et: f64,
    pub t1ce_tc: f64,
    pub t1ce_ed: f64,
    pub t1ce_brain: f64,
    pub t1ce_solid_core: f64,
}

impl Default for BrainGeometry {
    fn default() -> Self {
        BrainGeometry {
            dims: [64, 64, 64],
            tc_radius: 6.0,
            et_radius: 9.0,
            ed_radius: 15.0,
            head_radius: 30.0,
            perforation_radius: 4.0,
            flair_peak: 0.95,
            flair_drop: 0.4,
            flair_brain: 0.4,
            t1ce_et: 0.9,
            t1ce_tc: 0.3,
            t1ce_ed: 0.15,
            t1ce_brain: 0.45,
            t1ce_solid_core: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CardiacGeometry {
    /// In-plane extents.
    pub dims: [usize; 2],
    /// Slices of the 3D variant.
    pub slices: usize,
    pub lv_center: [f64; 2],
    pub lv_radius: f64,
    pub myo_thickness: f64,
    /// Distance from the LV centre to the centre of the disk carving the RV
    /// crescent, along +x.
    pub rv_offset: f64,
    pub rv_radius: f64,
    /// Half-width (voxels, along y) of the axial-gap slot.
    pub gap_half_width: usize,
    pub lv: f64,
    pub rv: f64,
    pub myo: f64,
    pub background: f64,
}

impl Default for CardiacGeometry {
    fn default() -> Self {
        CardiacGeometry {
            dims: [64, 64],
            slices: 10,
            lv_center: [26.0, 32.0],
            lv_radius: 10.0,
            myo_thickness: 4.0,
            rv_offset: 14.0,
            rv_radius: 16.0,
            gap_half_width: 3,
            lv: 0.9,
            rv: 0.8,
            myo: 0.15,
            background: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FetalSlice {
    /// One closed annulus.
    One,
    /// Two disjoint annuli of equal contrast.
    Two,
    /// An annulus interrupted by a gap of intermediate intensity.
    Arc,
    /// Background only.
    Empty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FetalGeometry {
    pub dims: [usize; 2],
    pub slices: Vec<FetalSlice>,
    pub inner_radius: f64,
    pub thickness: f64,
    /// Angular half-width of the arc gap, radians.
    pub gap_half_angle: f64,
    pub cp: f64,
    pub background: f64,
    pub gap: f64,
}

impl Default for FetalGeometry {
    fn default() -> Self {
        FetalGeometry {
            dims: [128, 64],
            slices: vec![FetalSlice::One, FetalSlice::Two, FetalSlice::One, FetalSlice::Two],
            inner_radius: 27.0,
            thickness: 3.0,
            gap_half_angle: 0.3,
            cp: 0.1,
            background: 0.6,
            gap: 0.4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhantomSpec {
    pub task: PhantomTask,
    /// Standard deviation of additive Gaussian noise, clamped to [0, 1].
    pub noise_sigma: f64,
    pub seed: u64,
    pub violation: Violation,
    pub brain: BrainGeometry,
    pub cardiac: CardiacGeometry,
    pub fetal: FetalGeometry,
}

fn bad(msg: String) -> Error {
    Error::Config(format!("phantom: {msg}"))
}

fn check_level(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(bad(format!("{name} = {v} outside [0, 1]")));
    }
    Ok(())
}

impl PhantomSpec {
    pub fn brain() -> Self {
        PhantomSpec::default()
    }

    pub fn cardiac_2d() -> Self {
        PhantomSpec {
            task: PhantomTask::Cardiac2d,
            ..Default::default()
        }
    }

    pub fn cardiac_3d() -> Self {
        PhantomSpec {
            task: PhantomTask::Cardiac3d,
            ..Default::default()
        }
    }

    pub fn fetal() -> Self {
        PhantomSpec {
            task: PhantomTask::Fetal,
            ..Default::default()
        }
    }

    pub fn with_violation(mut self, v: Violation) -> Self {
        self.violation = v;
        self
    }

    pub fn with_noise(mut self, sigma: f64, seed: u64) -> Self {
        self.noise_sigma = sigma;
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_sigma >= 0.0) {
            return Err(bad("noise_sigma must be nonnegative".into()));
        }
        let b = &self.brain;
        if !(0.0 < b.tc_radius && b.tc_radius < b.et_radius && b.et_radius < b.ed_radius && b.ed_radius < b.head_radius) {
            return Err(bad("brain radii must satisfy 0 < tc < et < ed < head".into()));
        }
        if b.dims.iter().any(|&d| (d as f64) < 2.0 * b.head_radius + 2.0) {
            return Err(bad("brain head does not fit in dims".into()));
        }
        for (n, v) in [
            ("flair_peak", b.flair_peak),
            ("flair_brain", b.flair_brain),
            ("t1ce_et", b.t1ce_et),
            ("t1ce_tc", b.t1ce_tc),
            ("t1ce_ed", b.t1ce_ed),
            ("t1ce_brain", b.t1ce_brain),
            ("t1ce_solid_core", b.t1ce_solid_core),
        ] {
            check_level(n, v)?;
        }
        if b.flair_peak - b.flair_drop < b.flair_brain + 0.1 {
            return Err(bad("FLAIR tumour signal must exceed brain by 0.1".into()));
        }

        let c = &self.cardiac;
        let myo_outer = c.lv_radius + c.myo_thickness;
        if !(c.lv_radius > 0.0 && c.myo_thickness > 0.0 && c.rv_radius > 0.0) {
            return Err(bad("cardiac radii must be positive".into()));
        }
        if c.rv_offset + c.rv_radius <= myo_outer {
            return Err(bad("RV crescent is empty".into()));
        }
        let reach = (c.lv_center[0] - myo_outer).min(c.lv_center[1] - myo_outer);
        let right = c.lv_center[0] + c.rv_offset + c.rv_radius;
        let vertical = c.lv_center[1] + c.rv_radius.max(myo_outer);
        if reach < 1.0 || right > c.dims[0] as f64 - 2.0 || vertical > c.dims[1] as f64 - 2.0 || c.lv_center[1] < c.rv_radius + 1.0 {
            return Err(bad("cardiac geometry overflows the image".into()));
        }
        if c.slices < 1 {
            return Err(bad("cardiac slices must be at least 1".into()));
        }
        for (n, v) in [("lv", c.lv), ("rv", c.rv), ("myo", c.myo), ("background", c.background)] {
            check_level(n, v)?;
        }

        let f = &self.fetal;
        let outer = f.inner_radius + f.thickness;
        if !(f.inner_radius > 0.0 && f.thickness > 0.0) {
            return Err(bad("fetal radii must be positive".into()));
        }
        if 2.0 * outer + 2.0 > f.dims[1] as f64 || 4.0 * outer + 4.0 > f.dims[0] as f64 {
            return Err(bad("fetal annuli do not fit in the slice".into()));
        }
        for (n, v) in [("cp", f.cp), ("background", f.background), ("gap", f.gap)] {
            check_level(n, v)?;
        }
        Ok(())
    }
}

fn add_noise(img: &mut GrayImage, sigma: f64, rng: &mut ChaCha8Rng) {
    if sigma <= 0.0 {
        return;
    }
    let normal = Normal::new(0.0, sigma).expect("valid sigma");
    let noisy: Vec<f64> = img
        .data()
        .iter()
        .map(|&v| (v + normal.sample(rng)).clamp(0.0, 1.0))
        .collect();
    let spacing = img.spacing().map(<[f64]>::to_vec);
    *img = GrayImage::new(img.dims(), noisy).expect("finite").with_spacing(spacing);
}

pub struct BrainPhantom {
    pub flair: GrayImage,
    pub t1ce: GrayImage,
    pub truth: LabelMap,
}

pub fn make_brain_phantom(spec: &PhantomSpec) -> Result<BrainPhantom> {
    spec.validate()?;
    let g = &spec.brain;
    let dims = Dims::new(&g.dims)?;
    let c = [g.dims[0] as f64 / 2.0, g.dims[1] as f64 / 2.0, g.dims[2] as f64 / 2.0];
    let radius = |x: usize, y: usize, z: usize| {
        ((x as f64 - c[0]).powi(2) + (y as f64 - c[1]).powi(2) + (z as f64 - c[2]).powi(2)).sqrt()
    };
    let perforated = |x: usize, y: usize, z: usize| {
        spec.violation == Violation::PerforatedShell
            && z as f64 > c[2]
            && (x as f64 - c[0]).powi(2) + (y as f64 - c[1]).powi(2) <= g.perforation_radius.powi(2)
    };
    let mut labels = vec![0u32; dims.len()];
    let mut flair = vec![0.0; dims.len()];
    let mut t1ce = vec![0.0; dims.len()];
    for z in 0..g.dims[2] {
        for y in 0..g.dims[1] {
            for x in 0..g.dims[0] {
                let i = dims.index(x, y, z);
                let r = radius(x, y, z);
                let label = if r <= g.tc_radius {
                    TC
                } else if r <= g.et_radius {
                    if perforated(x, y, z) {
                        ED
                    } else {
                        ET
                    }
                } else if r <= g.ed_radius {
                    ED
                } else {
                    0
                };
                labels[i] = label;
                let in_head = r <= g.head_radius;
                flair[i] = if label != 0 {
                    g.flair_peak - g.flair_drop * r / g.ed_radius
                } else if in_head {
                    g.flair_brain
                } else {
                    0.0
                };
                t1ce[i] = match label {
                    ET => g.t1ce_et,
                    TC if spec.violation == Violation::SolidCore => g.t1ce_solid_core,
                    TC => g.t1ce_tc,
                    ED => g.t1ce_ed,
                    _ if in_head => g.t1ce_brain,
                    _ => 0.0,
                };
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut flair = GrayImage::new(dims, flair)?;
    let mut t1ce = GrayImage::new(dims, t1ce)?;
    add_noise(&mut flair, spec.noise_sigma, &mut rng);
    add_noise(&mut t1ce, spec.noise_sigma, &mut rng);
    Ok(BrainPhantom {
        flair,
        t1ce,
        truth: LabelMap::new(dims, labels, Alphabet::Brats)?,
    })
}

pub struct CardiacPhantom {
    pub image: GrayImage,
    pub truth: LabelMap,
}

/// Labels of one short-axis slice; `gap` opens the slot through the wall.
fn cardiac_slice_labels(g: &CardiacGeometry, violation: Violation, gap: bool) -> Vec<u32> {
    let dims = Dims::d2(g.dims[0], g.dims[1]);
    let [cx, cy] = g.lv_center;
    let rx = cx + g.rv_offset;
    let myo_outer = g.lv_radius + g.myo_thickness;
    let mut out = vec![0u32; dims.len()];
    for y in 0..g.dims[1] {
        for x in 0..g.dims[0] {
            let (fx, fy) = (x as f64, y as f64);
            let r = ((fx - cx).powi(2) + (fy - cy).powi(2)).sqrt();
            let r_rv = ((fx - rx).powi(2) + (fy - cy).powi(2)).sqrt();
            let slot = gap && fx > cx && (fy - cy).abs() <= g.gap_half_width as f64;
            let label = if r <= g.lv_radius {
                LV
            } else if r <= myo_outer {
                if slot {
                    LV
                } else {
                    MYO
                }
            } else if r_rv <= g.rv_radius && violation != Violation::MissingRv {
                RV
            } else {
                0
            };
            out[dims.index(x, y, 0)] = label;
        }
    }
    out
}

fn cardiac_intensity(g: &CardiacGeometry, label: u32) -> f64 {
    match label {
        LV => g.lv,
        RV => g.rv,
        MYO => g.myo,
        _ => g.background,
    }
}

/// 2D (`three_d = false`) or extruded 3D cardiac phantom.
pub fn make_cardiac_phantom(spec: &PhantomSpec, three_d: bool) -> Result<CardiacPhantom> {
    spec.validate()?;
    let g = &spec.cardiac;
    let nz = if three_d { g.slices } else { 1 };
    let dims = if three_d {
        Dims::d3(g.dims[0], g.dims[1], nz)
    } else {
        Dims::d2(g.dims[0], g.dims[1])
    };
    let (gap_lo, gap_hi) = match spec.violation {
        Violation::AxialGap(w) if three_d && w > 0 => {
            let lo = nz.saturating_sub(w) / 2;
            (lo, (lo + w).min(nz))
        }
        _ => (0, 0),
    };
    let plain = cardiac_slice_labels(g, spec.violation, false);
    let slotted = cardiac_slice_labels(g, spec.violation, true);
    let mut labels = Vec::with_capacity(dims.len());
    for z in 0..nz {
        if (gap_lo..gap_hi).contains(&z) {
            labels.extend_from_slice(&slotted);
        } else {
            labels.extend_from_slice(&plain);
        }
    }
    let mut image = GrayImage::new(dims, labels.iter().map(|&l| cardiac_intensity(g, l)).collect())?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    add_noise(&mut image, spec.noise_sigma, &mut rng);
    Ok(CardiacPhantom {
        image,
        truth: LabelMap::new(dims, labels, Alphabet::Acdc)?,
    })
}

pub struct FetalPhantom {
    pub volume: GrayImage,
    pub truth: BinaryMask,
}

fn annulus_centers(g: &FetalGeometry, kind: FetalSlice) -> Vec<[f64; 2]> {
    let (w, h) = (g.dims[0] as f64, g.dims[1] as f64);
    match kind {
        FetalSlice::Two => vec![[w / 4.0, h / 2.0], [3.0 * w / 4.0, h / 2.0]],
        FetalSlice::Empty => vec![],
        _ => vec![[w / 2.0, h / 2.0]],
    }
}

/// One slice: (intensities, truth).
pub fn fetal_slice(g: &FetalGeometry, kind: FetalSlice, violation: Violation) -> (Vec<f64>, Vec<bool>) {
    let dims = Dims::d2(g.dims[0], g.dims[1]);
    let centers = annulus_centers(g, kind);
    let mut img = vec![g.background; dims.len()];
    let mut truth = vec![false; dims.len()];
    for y in 0..g.dims[1] {
        for x in 0..g.dims[0] {
            let i = dims.index(x, y, 0);
            for c in &centers {
                let (dx, dy) = (x as f64 - c[0], y as f64 - c[1]);
                let r = (dx * dx + dy * dy).sqrt();
                if r < g.inner_radius || r > g.inner_radius + g.thickness {
                    continue;
                }
                let in_gap = kind == FetalSlice::Arc && dx > 0.0 && dy.atan2(dx).abs() <= g.gap_half_angle;
                if in_gap && violation == Violation::OpenArc {
                    img[i] = g.background;
                } else if in_gap {
                    // faint plate, still part of the curve
                    img[i] = g.gap;
                    truth[i] = true;
                } else {
                    img[i] = g.cp;
                    truth[i] = true;
                }
            }
        }
    }
    (img, truth)
}

/// Stack of coronal slices along z.
pub fn make_fetal_phantom(spec: &PhantomSpec) -> Result<FetalPhantom> {
    spec.validate()?;
    let g = &spec.fetal;
    if g.slices.is_empty() {
        return Err(bad("fetal phantom needs at least one slice".into()));
    }
    let slice_dims = Dims::d2(g.dims[0], g.dims[1]);
    let mut imgs = Vec::new();
    let mut truths = Vec::new();
    for &kind in &g.slices {
        let (img, truth) = fetal_slice(g, kind, spec.violation);
        imgs.push(GrayImage::new(slice_dims, img)?);
        truths.push(BinaryMask::new(slice_dims, truth)?);
    }
    let mut volume = GrayImage::stack(&imgs, 2)?;
    let truth = BinaryMask::stack(&truths, 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    add_noise(&mut volume, spec.noise_sigma, &mut rng);
    Ok(FetalPhantom { volume, truth })
}

/// Truth as a label map with the single CP class.
pub fn fetal_truth_labels(truth: &BinaryMask) -> LabelMap {
    LabelMap::from_masks(truth.dims(), Alphabet::Sta, &[(CP, truth)]).expect("valid labels")
}
