//! Checks whether an image and its reference labels satisfy the anatomical
//! model each pipeline relies on.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{Alphabet, BinaryMask, GrayImage, LabelMap, ED, ET, LV, MYO, RV, TC};
use crate::morphology::{all_axes, binary_dilate, complement_components, connected_components, StructuringBall};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubCheck {
    /// `"H1'"`, `"H2'"` or `"H3'"`.
    pub hypothesis: String,
    pub name: String,
    pub passed: bool,
    pub measured: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub task: Alphabet,
    pub checks: Vec<SubCheck>,
    /// 2D cardiac mode: share of nonempty slices passing every check.
    pub slice_fraction: Option<f64>,
    pub overall: bool,
}

impl HypothesisReport {
    fn new(task: Alphabet, checks: Vec<SubCheck>) -> Self {
        let overall = checks.iter().all(|c| c.passed);
        HypothesisReport {
            task,
            checks,
            slice_fraction: None,
            overall,
        }
    }

    pub fn check(&self, name: &str) -> Option<&SubCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn passed(&self, name: &str) -> bool {
        self.check(name).is_some_and(|c| c.passed)
    }

    pub fn failed_names(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }
}

fn sub(h: &str, name: &str, passed: bool, measured: &[(&str, f64)]) -> SubCheck {
    SubCheck {
        hypothesis: h.into(),
        name: name.into(),
        passed,
        measured: measured.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
    }
}

/// Brightest voxel of `mask` in `img`; ties go to the smaller index.
fn brightest(img: &GrayImage, mask: &BinaryMask) -> Option<usize> {
    let mut best: Option<usize> = None;
    for i in mask.indices() {
        if best.is_none_or(|b| img.get(i) > img.get(b)) {
            best = Some(i);
        }
    }
    best
}

fn dilate(mask: &BinaryMask, radius: usize) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    binary_dilate(mask, StructuringBall::new(radius, mask.dims().rank()))
}

/// Share of the voxels added by a radius-1 dilation of `mask` that lie in `target`.
fn dilation_share(mask: &BinaryMask, target: &BinaryMask) -> f64 {
    let ring = dilate(mask, 1).difference(mask);
    if ring.is_empty() {
        return 0.0;
    }
    ring.intersection(target).count() as f64 / ring.count() as f64
}

pub fn check_brats(seg: &LabelMap, flair: &GrayImage, t1ce: &GrayImage) -> Result<HypothesisReport> {
    if seg.alphabet() != Alphabet::Brats {
        return Err(Error::Config(format!("expected brats labels, got {:?}", seg.alphabet())));
    }
    seg.dims().check_same(&flair.dims())?;
    seg.dims().check_same(&t1ce.dims())?;
    let wt = seg.foreground();
    if wt.is_empty() {
        return Err(Error::EmptyMask);
    }
    let (et, tc, ed) = (seg.class_mask(ET), seg.class_mask(TC), seg.class_mask(ED));
    let mut checks = Vec::new();

    let cc = connected_components(&wt);
    let sizes = cc.sizes();
    let largest = sizes[0];
    let second = sizes.get(1).copied().unwrap_or(0);
    checks.push(sub(
        "H1'",
        "H1'.components",
        second * 10 <= largest,
        &[("components", sizes.len() as f64), ("largest", largest as f64), ("second", second as f64)],
    ));
    let ratio = if tc.is_empty() {
        f64::INFINITY
    } else {
        wt.count() as f64 / tc.count() as f64
    };
    checks.push(sub("H1'", "H1'.size_ratio", ratio <= 50.0, &[("wt_over_tc", ratio)]));
    let b = brightest(flair, &wt).expect("nonempty");
    let label = seg.labels()[b];
    checks.push(sub(
        "H1'",
        "H1'.flair_brightest",
        label == TC || label == ET,
        &[("voxel", b as f64), ("label", label as f64)],
    ));

    let grown = dilate(&dilate(&et, 1), 1);
    let (comps, _) = complement_components(&grown, &all_axes(grown.dims()));
    checks.push(sub(
        "H2'",
        "H2'.components",
        comps.count() == 2,
        &[("components", comps.count() as f64)],
    ));
    let b = brightest(t1ce, &wt).expect("nonempty");
    let label = seg.labels()[b];
    checks.push(sub(
        "H2'",
        "H2'.t1ce_brightest",
        label == ET,
        &[("voxel", b as f64), ("label", label as f64)],
    ));

    let tc_share = dilation_share(&tc, &et);
    checks.push(sub("H3'", "H3'.tc_inside", !tc.is_empty() && tc_share >= 0.5, &[("et_share", tc_share)]));
    let ed_share = dilation_share(&ed, &et);
    checks.push(sub("H3'", "H3'.ed_outside", ed_share <= 0.5, &[("et_share", ed_share)]));
    Ok(HypothesisReport::new(Alphabet::Brats, checks))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AcdcMode {
    #[serde(rename = "2d")]
    Slice,
    #[serde(rename = "3d")]
    Volume,
}

fn mean(img: &GrayImage, mask: &BinaryMask) -> f64 {
    mask.indices().map(|i| img.get(i)).sum::<f64>() / mask.count() as f64
}

/// Checks on one slice or volume. `border_axes` are the axes whose end faces
/// count as background.
fn acdc_checks(seg: &LabelMap, img: &GrayImage, radius: usize, border_axes: &[usize]) -> Result<Vec<SubCheck>> {
    let (lv, rv, myo) = (seg.class_mask(LV), seg.class_mask(RV), seg.class_mask(MYO));
    if lv.is_empty() || myo.is_empty() {
        return Err(Error::EmptyMask);
    }
    let whole = seg.foreground();
    let mut checks = Vec::new();
    let n = connected_components(&whole).count();
    checks.push(sub("H1'", "H1'.connected", n == 1, &[("components", n as f64)]));
    let (m_myo, m_lv) = (mean(img, &myo), mean(img, &lv));
    let mut measured = vec![("myo_mean", m_myo), ("lv_mean", m_lv)];
    let mut darker = m_myo < m_lv;
    // an absent RV is judged by the component count in (H2')
    if !rv.is_empty() {
        let m_rv = mean(img, &rv);
        measured.push(("rv_mean", m_rv));
        darker &= m_myo < m_rv;
    }
    checks.push(sub("H1'", "H1'.myo_darker", darker, &measured));

    let grown = dilate(&myo, radius);
    let rest = whole.difference(&grown);
    let k = connected_components(&rest).count();
    checks.push(sub("H2'", "H2'.two_components", k == 2, &[("components", k as f64)]));

    let (comps, touches) = complement_components(&grown, border_axes);
    let mut inner = BinaryMask::empty(grown.dims());
    for (i, &l) in comps.labels().iter().enumerate() {
        if l > 0 && !touches[l as usize - 1] {
            inner.set(i, true);
        }
    }
    // LV voxels swallowed by the dilated wall are neither inside nor outside
    let open_lv = lv.difference(&grown);
    let covered = if open_lv.is_empty() {
        0.0
    } else {
        open_lv.intersection(&inner).count() as f64 / open_lv.count() as f64
    };
    checks.push(sub("H3'", "H3'.lv_enclosed", covered == 1.0, &[("lv_share_inside", covered)]));
    Ok(checks)
}

pub fn check_acdc(seg: &LabelMap, img: &GrayImage, mode: AcdcMode, myo_dilation_radius: usize) -> Result<HypothesisReport> {
    if seg.alphabet() != Alphabet::Acdc {
        return Err(Error::Config(format!("expected acdc labels, got {:?}", seg.alphabet())));
    }
    seg.dims().check_same(&img.dims())?;
    let dims = seg.dims();
    match (mode, dims.rank()) {
        (AcdcMode::Volume, 3) => {
            // the base and apex faces are open ends of the tube, not background
            let axes = [0, 1];
            let checks = acdc_checks(seg, img, myo_dilation_radius, &axes)?;
            Ok(HypothesisReport::new(Alphabet::Acdc, checks))
        }
        (AcdcMode::Volume, r) => Err(Error::Rank { expected: 3, got: r }),
        (AcdcMode::Slice, 2) => {
            let checks = acdc_checks(seg, img, myo_dilation_radius, &[0, 1])?;
            let mut rep = HypothesisReport::new(Alphabet::Acdc, checks);
            rep.slice_fraction = Some(if rep.overall { 1.0 } else { 0.0 });
            Ok(rep)
        }
        (AcdcMode::Slice, _) => {
            let mut merged: Vec<SubCheck> = Vec::new();
            let (mut nonempty, mut passing) = (0usize, 0usize);
            for z in 0..dims.extent(2) {
                let s = seg.extract_slice(2, z)?;
                if s.foreground().is_empty() {
                    continue;
                }
                nonempty += 1;
                let checks = acdc_checks(&s, &img.extract_slice(2, z)?, myo_dilation_radius, &[0, 1])?;
                if checks.iter().all(|c| c.passed) {
                    passing += 1;
                }
                if merged.is_empty() {
                    merged = checks
                        .iter()
                        .map(|c| sub(&c.hypothesis, &c.name, true, &[("failing_slices", 0.0)]))
                        .collect();
                }
                for (m, c) in merged.iter_mut().zip(&checks) {
                    if !c.passed {
                        m.passed = false;
                        *m.measured.get_mut("failing_slices").expect("present") += 1.0;
                    }
                }
            }
            if nonempty == 0 {
                return Err(Error::EmptyMask);
            }
            let mut rep = HypothesisReport::new(Alphabet::Acdc, merged);
            rep.slice_fraction = Some(passing as f64 / nonempty as f64);
            Ok(rep)
        }
    }
}

/// Plate of one coronal slice: one or two enclosed regions of at least a
/// hundredth of the slice.
pub fn check_sta(cp_slice: &BinaryMask) -> Result<HypothesisReport> {
    let dims = cp_slice.dims();
    if dims.rank() != 2 {
        return Err(Error::Rank {
            expected: 2,
            got: dims.rank(),
        });
    }
    let min_size = dims.len() as f64 / 100.0;
    let (comps, touches) = complement_components(cp_slice, &all_axes(dims));
    let count = comps
        .sizes()
        .iter()
        .zip(&touches)
        .filter(|&(&s, &t)| !t && s as f64 >= min_size)
        .count();
    let check = sub("H2'", "H2'.regions", count == 1 || count == 2, &[("regions", count as f64)]);
    Ok(HypothesisReport::new(Alphabet::Sta, vec![check]))
}

/// [`check_sta`] on every nonempty slice along `axis` of a 3D plate mask (or
/// on the mask itself when it is 2D). Passes when every nonempty slice does.
pub fn check_sta_volume(cp: &BinaryMask, axis: usize) -> Result<HypothesisReport> {
    if cp.dims().rank() == 2 {
        return check_sta(cp);
    }
    let mut checks = Vec::new();
    let mut passing = 0usize;
    for z in 0..cp.dims().extent(axis) {
        let s = cp.extract_slice(axis, z)?;
        if s.is_empty() {
            continue;
        }
        let mut c = check_sta(&s)?.checks.remove(0);
        c.name = format!("{}.slice{z}", c.name);
        passing += c.passed as usize;
        checks.push(c);
    }
    let n = checks.len();
    let mut rep = HypothesisReport::new(Alphabet::Sta, checks);
    rep.overall &= n > 0;
    rep.slice_fraction = Some(if n == 0 { 0.0 } else { passing as f64 / n as f64 });
    Ok(rep)
}
