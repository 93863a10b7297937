use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::BinaryMask;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Disk {
    fn contains(&self, p: [f64; 2]) -> bool {
        let d = ((p[0] - self.center[0]).powi(2) + (p[1] - self.center[1]).powi(2)).sqrt();
        d <= self.radius * (1.0 + 1e-12) + 1e-12
    }

    fn from2(a: [f64; 2], b: [f64; 2]) -> Disk {
        let center = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
        let radius = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt() / 2.0;
        Disk { center, radius }
    }

    fn from3(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> Disk {
        let (bx, by) = (b[0] - a[0], b[1] - a[1]);
        let (cx, cy) = (c[0] - a[0], c[1] - a[1]);
        let d = 2.0 * (bx * cy - by * cx);
        if d.abs() < 1e-12 {
            // collinear: widest pair
            let cands = [Disk::from2(a, b), Disk::from2(a, c), Disk::from2(b, c)];
            return cands
                .into_iter()
                .max_by(|p, q| p.radius.total_cmp(&q.radius))
                .unwrap();
        }
        let b2 = bx * bx + by * by;
        let c2 = cx * cx + cy * cy;
        let ux = (cy * b2 - by * c2) / d;
        let uy = (bx * c2 - cx * b2) / d;
        Disk {
            center: [a[0] + ux, a[1] + uy],
            radius: (ux * ux + uy * uy).sqrt(),
        }
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Monotone-chain hull, collinear points dropped.
fn convex_hull(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

fn welzl(pts: &[[f64; 2]]) -> Disk {
    let mut d = Disk {
        center: pts[0],
        radius: 0.0,
    };
    for i in 1..pts.len() {
        if d.contains(pts[i]) {
            continue;
        }
        d = Disk {
            center: pts[i],
            radius: 0.0,
        };
        for j in 0..i {
            if d.contains(pts[j]) {
                continue;
            }
            d = Disk::from2(pts[i], pts[j]);
            for k in 0..j {
                if !d.contains(pts[k]) {
                    d = Disk::from3(pts[i], pts[j], pts[k]);
                }
            }
        }
    }
    d
}

/// Smallest disk containing every set voxel centre of a 2D mask.
pub fn minimal_enclosing_disk(mask: &BinaryMask) -> Result<Disk> {
    if mask.dims().rank() != 2 {
        return Err(Error::Rank {
            expected: 2,
            got: mask.dims().rank(),
        });
    }
    let dims = mask.dims();
    let pts: Vec<[f64; 2]> = mask
        .indices()
        .map(|i| {
            let c = dims.coords(i);
            [c[0] as f64, c[1] as f64]
        })
        .collect();
    if pts.is_empty() {
        return Err(Error::EmptyMask);
    }
    let mut hull = convex_hull(pts);
    hull.shuffle(&mut ChaCha8Rng::seed_from_u64(0x5eed));
    Ok(welzl(&hull))
}

/// Dice between the mask and its rasterised minimal enclosing disk.
pub fn disk_shape_score(mask: &BinaryMask) -> Result<f64> {
    let disk = minimal_enclosing_disk(mask)?;
    let dims = mask.dims();
    let r2 = (disk.radius + 1e-9).powi(2);
    let mut raster = 0usize;
    let mut overlap = 0usize;
    for (i, &b) in mask.bits().iter().enumerate() {
        let c = dims.coords(i);
        let inside = (c[0] as f64 - disk.center[0]).powi(2) + (c[1] as f64 - disk.center[1]).powi(2) <= r2;
        if inside {
            raster += 1;
            if b {
                overlap += 1;
            }
        }
    }
    Ok(2.0 * overlap as f64 / (raster + mask.count()) as f64)
}

/// Mean disk score of the nonempty slices along `axis`.
pub fn cylindricality(mask: &BinaryMask, axis: usize) -> Result<f64> {
    if mask.dims().rank() != 3 {
        return Err(Error::Rank {
            expected: 3,
            got: mask.dims().rank(),
        });
    }
    let mut total = 0.0;
    let mut n = 0usize;
    for i in 0..mask.dims().extent(axis) {
        let s = mask.extract_slice(axis, i)?;
        if s.is_empty() {
            continue;
        }
        total += disk_shape_score(&s)?;
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(total / n as f64)
}
