#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toposeg::ph::{oracle_persistence, persistence, Direction, Filtration, PersistenceDiagram};
use toposeg::{Dims, GrayImage};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Values on `levels + 1` evenly spaced levels, or continuous when `levels` is 0.
pub fn random_image(rng: &mut ChaCha8Rng, dims: Dims, levels: u32) -> GrayImage {
    GrayImage::from_fn(dims, |_, _, _| {
        if levels == 0 {
            rng.gen::<f64>()
        } else {
            rng.gen_range(0..=levels) as f64 / levels as f64
        }
    })
}

pub fn random_dims_2d(rng: &mut ChaCha8Rng, max: usize) -> Dims {
    Dims::d2(rng.gen_range(1..=max), rng.gen_range(1..=max))
}

pub fn random_dims_3d(rng: &mut ChaCha8Rng, max: usize) -> Dims {
    Dims::d3(rng.gen_range(1..=max), rng.gen_range(1..=max), rng.gen_range(1..=max))
}

pub fn diagram(img: &GrayImage, dir: Direction) -> PersistenceDiagram {
    let f = Filtration::new(img, dir).unwrap();
    persistence(&f, img.rank() - 1)
}

pub fn oracle_diagram(img: &GrayImage, dir: Direction) -> PersistenceDiagram {
    let f = Filtration::new(img, dir).unwrap();
    oracle_persistence(&f, img.rank() - 1).unwrap()
}

/// Strictly increasing piecewise-linear map of [0, 1] onto itself.
#[derive(Debug, Clone)]
pub struct PlMap {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PlMap {
    pub fn random(rng: &mut ChaCha8Rng, knots: usize) -> Self {
        let mut xs: Vec<f64> = (0..knots).map(|_| rng.gen_range(0.01..0.99)).collect();
        let mut ys: Vec<f64> = (0..knots).map(|_| rng.gen_range(0.01..0.99)).collect();
        xs.sort_by(f64::total_cmp);
        ys.sort_by(f64::total_cmp);
        xs.dedup();
        ys.dedup();
        let k = xs.len().min(ys.len());
        let mut x = vec![0.0];
        let mut y = vec![0.0];
        x.extend_from_slice(&xs[..k]);
        y.extend_from_slice(&ys[..k]);
        x.push(1.0);
        y.push(1.0);
        PlMap { xs: x, ys: y }
    }

    pub fn apply(&self, v: f64) -> f64 {
        let i = self.xs.partition_point(|&x| x <= v).clamp(1, self.xs.len() - 1);
        let (x0, x1, y0, y1) = (self.xs[i - 1], self.xs[i], self.ys[i - 1], self.ys[i]);
        (y0 + (v - x0) / (x1 - x0) * (y1 - y0)).clamp(y0, y1)
    }
}

/// Sorted (dim, birth, death, birth pixel, death pixel) rows, for exact comparison.
pub fn rows(d: &PersistenceDiagram) -> Vec<(usize, u64, u64, usize, Option<usize>)> {
    let mut v: Vec<_> = d
        .points
        .iter()
        .map(|p| (p.dim, p.birth.to_bits(), p.death.to_bits(), p.birth_pixel, p.death_pixel))
        .collect();
    v.sort();
    v
}

/// Labels and serialised report of every pipeline on its phantom, with
/// preprocessing and noise switched on.
pub fn pipeline_fingerprint() -> Vec<(String, Vec<u32>, String)> {
    use toposeg::phantoms::*;
    use toposeg::pipeline::*;
    let cfg = PipelineConfig::default();
    let mut out = Vec::new();
    let mut push = |name: &str, labels: &toposeg::LabelMap, report: &RunReport| {
        out.push((name.to_string(), labels.labels().to_vec(), serde_json::to_string(report).unwrap()));
    };
    let b = make_brain_phantom(&PhantomSpec::brain().with_noise(0.02, 7)).unwrap();
    let s = segment_glioblastoma(&b.flair, &b.t1ce, &cfg).unwrap();
    push("brain", &s.labels, &s.report);
    let c = make_cardiac_phantom(&PhantomSpec::cardiac_2d().with_noise(0.02, 7), false).unwrap();
    let s = segment_cardiac_2d(&c.image, &cfg).unwrap();
    push("cardiac2d", &s.labels, &s.report);
    let c = make_cardiac_phantom(&PhantomSpec::cardiac_3d().with_noise(0.02, 7), true).unwrap();
    let s = segment_cardiac_3d(&c.image, &cfg).unwrap();
    push("cardiac3d", &s.labels, &s.report);
    let f = make_fetal_phantom(&PhantomSpec::fetal().with_noise(0.02, 7)).unwrap();
    let s = segment_fetal_volume(&f.volume, &cfg).unwrap();
    push("fetal", &fetal_truth_labels(&s.mask), &s.report);
    out
}

pub fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}
