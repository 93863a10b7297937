//! Grey and binary morphology on the image grid, plus connected components.
//!
//! Connectivity is face adjacency everywhere (4 in 2D, 6 in 3D).

mod disk;

pub use disk::{cylindricality, disk_shape_score, minimal_enclosing_disk, Disk};

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::image::{BinaryMask, Dims, GrayImage};

/// Closed digital ball: integer offsets with Euclidean norm at most `radius`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructuringBall {
    pub radius: usize,
    pub rank: usize,
}

impl StructuringBall {
    pub fn new(radius: usize, rank: usize) -> Self {
        StructuringBall { radius, rank }
    }

    pub fn offsets(&self) -> Vec<[isize; 3]> {
        let r = self.radius as isize;
        let rz = if self.rank == 3 { r } else { 0 };
        let r2 = r * r;
        let mut out = Vec::new();
        for dz in -rz..=rz {
            for dy in -r..=r {
                for dx in -r..=r {
                    if dx * dx + dy * dy + dz * dz <= r2 {
                        out.push([dx, dy, dz]);
                    }
                }
            }
        }
        out
    }
}

fn reflect(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let m = i.rem_euclid(period);
    if m < n as isize {
        m as usize
    } else {
        (period - m) as usize
    }
}

/// Sampled Gaussian truncated at `ceil(3 sigma)` taps per side, unit sum.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil() as isize;
    let w: Vec<f64> = (-r..=r)
        .map(|x| (-(x * x) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Separable Gaussian blur with mirror borders.
pub fn gaussian_blur(img: &GrayImage, sigma: f64) -> Result<GrayImage> {
    if sigma < 0.0 || sigma.is_nan() {
        return Err(Error::NegativeSigma(sigma));
    }
    if sigma == 0.0 {
        return Ok(img.clone());
    }
    let kernel = gaussian_kernel(sigma);
    let r = (kernel.len() / 2) as isize;
    let dims = img.dims();
    let shape = dims.shape();
    let mut cur = img.data().to_vec();
    let mut line = Vec::new();
    for axis in 0..dims.rank() {
        let n = shape[axis];
        if n == 1 {
            continue;
        }
        let stride = dims.stride(axis);
        let mut next = cur.clone();
        for start in 0..dims.len() {
            if dims.coords(start)[axis] != 0 {
                continue;
            }
            line.clear();
            line.extend((0..n).map(|i| cur[start + i * stride]));
            for i in 0..n {
                let mut acc = 0.0;
                for (k, w) in kernel.iter().enumerate() {
                    acc += w * line[reflect(i as isize + k as isize - r, n)];
                }
                next[start + i * stride] = acc;
            }
        }
        cur = next;
    }
    let out = GrayImage::new(dims, cur)?.with_spacing(img.spacing().map(|s| s.to_vec()));
    Ok(if img.in_unit_range() {
        out.map(|v| v.clamp(0.0, 1.0))
    } else {
        out
    })
}

fn rank_filter(img: &GrayImage, ball: StructuringBall, take_max: bool) -> GrayImage {
    if ball.radius == 0 {
        return img.clone();
    }
    let dims = img.dims();
    let shape = dims.shape();
    let offsets = ball.offsets();
    let data = img.data();
    let out: Vec<f64> = (0..dims.len())
        .map(|i| {
            let c = dims.coords(i);
            let mut best = data[i];
            for o in &offsets {
                let x = c[0] as isize + o[0];
                let y = c[1] as isize + o[1];
                let z = c[2] as isize + o[2];
                if x < 0
                    || y < 0
                    || z < 0
                    || x >= shape[0] as isize
                    || y >= shape[1] as isize
                    || z >= shape[2] as isize
                {
                    continue;
                }
                let v = data[dims.index(x as usize, y as usize, z as usize)];
                if (take_max && v > best) || (!take_max && v < best) {
                    best = v;
                }
            }
            best
        })
        .collect();
    GrayImage::new(dims, out)
        .expect("same dims")
        .with_spacing(img.spacing().map(|s| s.to_vec()))
}

/// Max filter over the ball; out-of-domain offsets are ignored.
pub fn grey_dilate(img: &GrayImage, ball: StructuringBall) -> GrayImage {
    rank_filter(img, ball, true)
}

/// Min filter over the ball; out-of-domain offsets are ignored.
pub fn grey_erode(img: &GrayImage, ball: StructuringBall) -> GrayImage {
    rank_filter(img, ball, false)
}

/// Squared Euclidean distance from every voxel to the nearest set voxel
/// (`f64::INFINITY` when the mask is empty).
pub fn squared_edt(mask: &BinaryMask) -> Vec<f64> {
    let dims = mask.dims();
    let shape = dims.shape();
    let mut d: Vec<f64> = mask
        .bits()
        .iter()
        .map(|&b| if b { 0.0 } else { f64::INFINITY })
        .collect();
    let mut f = Vec::new();
    let mut out = Vec::new();
    for axis in 0..3 {
        let n = shape[axis];
        if n == 1 {
            continue;
        }
        let stride = dims.stride(axis);
        for start in 0..dims.len() {
            if dims.coords(start)[axis] != 0 {
                continue;
            }
            f.clear();
            f.extend((0..n).map(|i| d[start + i * stride]));
            edt_1d(&f, &mut out);
            for (i, &v) in out.iter().enumerate() {
                d[start + i * stride] = v;
            }
        }
    }
    d
}

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher).
fn edt_1d(f: &[f64], out: &mut Vec<f64>) {
    let n = f.len();
    out.clear();
    out.resize(n, f64::INFINITY);
    let finite: Vec<usize> = (0..n).filter(|&i| f[i].is_finite()).collect();
    if finite.is_empty() {
        return;
    }
    let mut v = vec![0usize; finite.len()];
    let mut z = vec![0f64; finite.len() + 1];
    let mut k = 0;
    v[0] = finite[0];
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for &q in &finite[1..] {
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] && k > 0 {
                k -= 1;
                continue;
            }
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
            break;
        }
    }
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        *o = dq * dq + f[p];
    }
}

/// Binary dilation by a closed ball: voxels within Euclidean distance
/// `radius` of the mask.
pub fn binary_dilate(mask: &BinaryMask, ball: StructuringBall) -> BinaryMask {
    if ball.radius == 0 || mask.is_empty() {
        return mask.clone();
    }
    let r2 = (ball.radius * ball.radius) as f64;
    let d = squared_edt(mask);
    BinaryMask::new(mask.dims(), d.iter().map(|&v| v <= r2).collect()).expect("same dims")
}

/// Face-connected components. Label 1 is the largest component; equal sizes
/// are ordered by their smallest voxel index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    dims: Dims,
    labels: Vec<u32>,
    sizes: Vec<usize>,
    min_index: Vec<usize>,
}

impl Components {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    /// Voxel counts, indexed by `label - 1`, non-increasing.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn min_index(&self, label: u32) -> usize {
        self.min_index[label as usize - 1]
    }

    pub fn label_of(&self, idx: usize) -> u32 {
        self.labels[idx]
    }

    pub fn mask(&self, label: u32) -> BinaryMask {
        BinaryMask::new(self.dims, self.labels.iter().map(|&l| l == label).collect())
            .expect("same dims")
    }
}

pub fn connected_components(mask: &BinaryMask) -> Components {
    let dims = mask.dims();
    let mut raw = vec![0u32; dims.len()];
    let mut sizes = Vec::new();
    let mut mins = Vec::new();
    let mut queue = VecDeque::new();
    for start in mask.indices() {
        if raw[start] != 0 {
            continue;
        }
        let id = sizes.len() as u32 + 1;
        raw[start] = id;
        queue.push_back(start);
        let mut size = 0;
        while let Some(v) = queue.pop_front() {
            size += 1;
            for n in dims.face_neighbors(v) {
                if mask.get(n) && raw[n] == 0 {
                    raw[n] = id;
                    queue.push_back(n);
                }
            }
        }
        sizes.push(size);
        mins.push(start);
    }
    // Discovery order already sorts by minimum index; a stable sort by size
    // gives the documented tie rule.
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]));
    let mut relabel = vec![0u32; sizes.len() + 1];
    for (new, &old) in order.iter().enumerate() {
        relabel[old + 1] = new as u32 + 1;
    }
    Components {
        dims,
        labels: raw.into_iter().map(|l| relabel[l as usize]).collect(),
        sizes: order.iter().map(|&o| sizes[o]).collect(),
        min_index: order.iter().map(|&o| mins[o]).collect(),
    }
}

pub fn count_components(mask: &BinaryMask) -> usize {
    connected_components(mask).count()
}

pub fn largest_component(mask: &BinaryMask) -> BinaryMask {
    let cc = connected_components(mask);
    if cc.count() == 0 {
        BinaryMask::empty(mask.dims())
    } else {
        cc.mask(1)
    }
}

/// Components of the complement of `mask`, each tagged with whether it touches
/// the domain boundary along one of `border_axes`.
pub fn complement_components(mask: &BinaryMask, border_axes: &[usize]) -> (Components, Vec<bool>) {
    let dims = mask.dims();
    let cc = connected_components(&mask.complement());
    let mut touches = vec![false; cc.count()];
    let shape = dims.shape();
    for (i, &l) in cc.labels().iter().enumerate() {
        if l == 0 || touches[l as usize - 1] {
            continue;
        }
        let c = dims.coords(i);
        if border_axes
            .iter()
            .any(|&a| shape[a] > 0 && (c[a] == 0 || c[a] + 1 == shape[a]))
        {
            touches[l as usize - 1] = true;
        }
    }
    (cc, touches)
}

pub fn all_axes(dims: Dims) -> Vec<usize> {
    (0..dims.rank()).collect()
}

/// Add every complement component that does not touch the domain boundary.
pub fn fill_holes(mask: &BinaryMask) -> BinaryMask {
    fill_holes_with(mask, &all_axes(mask.dims()))
}

/// As [`fill_holes`], counting only the boundary faces along `border_axes`.
pub fn fill_holes_with(mask: &BinaryMask, border_axes: &[usize]) -> BinaryMask {
    let (cc, touches) = complement_components(mask, border_axes);
    let mut out = mask.clone();
    for (i, &l) in cc.labels().iter().enumerate() {
        if l != 0 && !touches[l as usize - 1] {
            out.set(i, true);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask2(rows: &[&str]) -> BinaryMask {
        let ny = rows.len();
        let nx = rows[0].len();
        BinaryMask::from_fn(Dims::d2(nx, ny), |x, y, _| rows[y].as_bytes()[x] == b'#')
    }

    #[test]
    fn ball_sizes() {
        assert_eq!(StructuringBall::new(0, 2).offsets().len(), 1);
        assert_eq!(StructuringBall::new(2, 2).offsets().len(), 13);
        assert_eq!(StructuringBall::new(1, 3).offsets().len(), 7);
        assert_eq!(StructuringBall::new(2, 3).offsets().len(), 33);
    }

    #[test]
    fn reflect_mirrors_without_repeat() {
        let idx: Vec<usize> = (-3..7).map(|i| reflect(i, 4)).collect();
        assert_eq!(idx, vec![3, 2, 1, 0, 1, 2, 3, 2, 1, 0]);
    }

    #[test]
    fn blur_identity_and_constant() {
        let img = GrayImage::from_fn(Dims::d2(5, 4), |x, y, _| (x * y) as f64 / 12.0);
        assert_eq!(gaussian_blur(&img, 0.0).unwrap(), img);
        let c = GrayImage::filled(Dims::d3(5, 4, 3), 0.3);
        for v in gaussian_blur(&c, 1.7).unwrap().data() {
            assert!((v - 0.3).abs() < 1e-12);
        }
        assert!(gaussian_blur(&c, -1.0).is_err());
    }

    #[test]
    fn blur_impulse_matches_kernel() {
        let dims = Dims::d2(15, 15);
        let img = GrayImage::from_fn(dims, |x, y, _| if x == 7 && y == 7 { 1.0 } else { 0.0 });
        let out = gaussian_blur(&img, 1.0).unwrap();
        // independent evaluation of the truncated normalised kernel
        let g = |d: i32| (-(d * d) as f64 / 2.0).exp();
        let s: f64 = (-3..=3).map(g).sum();
        for y in 0..15i32 {
            for x in 0..15i32 {
                let (dx, dy) = (x - 7, y - 7);
                let expect = if dx.abs() <= 3 && dy.abs() <= 3 {
                    g(dx) * g(dy) / (s * s)
                } else {
                    0.0
                };
                assert!((out.at(x as usize, y as usize, 0) - expect).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn dilate_impulse_is_disk() {
        let dims = Dims::d2(9, 9);
        let img = GrayImage::from_fn(dims, |x, y, _| if x == 4 && y == 4 { 1.0 } else { 0.0 });
        let out = grey_dilate(&img, StructuringBall::new(2, 2));
        let on: usize = out.data().iter().filter(|&&v| v == 1.0).count();
        assert_eq!(on, 13);
        let m = BinaryMask::threshold(&img, |v| v > 0.5);
        assert_eq!(binary_dilate(&m, StructuringBall::new(2, 2)).count(), 13);
    }

    #[test]
    fn dilate_single_voxel_3d() {
        let m = BinaryMask::from_indices(Dims::d3(5, 5, 5), [Dims::d3(5, 5, 5).index(2, 2, 2)]);
        assert_eq!(binary_dilate(&m, StructuringBall::new(1, 3)).count(), 7);
        assert!(binary_dilate(&BinaryMask::empty(Dims::d2(3, 3)), StructuringBall::new(1, 2)).is_empty());
    }

    #[test]
    fn components_and_ties() {
        let m = mask2(&["##..#", "....#", "#.#..", "#...."]);
        let cc = connected_components(&m);
        assert_eq!(cc.count(), 4);
        assert_eq!(cc.sizes(), &[2, 2, 2, 1]);
        // three size-2 components; label 1 holds the smallest index
        assert_eq!(cc.min_index(1), 0);
        assert!(largest_component(&m).get(0));
        let diag = mask2(&["#.", ".#"]);
        assert_eq!(count_components(&diag), 2);
        assert_eq!(count_components(&BinaryMask::empty(Dims::d2(3, 3))), 0);
    }

    #[test]
    fn holes() {
        let ring = mask2(&[".....", ".###.", ".#.#.", ".###.", "....."]);
        let filled = fill_holes(&ring);
        assert_eq!(filled.count(), 9);
        let touching = mask2(&["#####", "#...#", "#####"]);
        assert_eq!(fill_holes(&touching).count(), touching.count() + 3);
        let open = mask2(&["..#..", "..#..", "....."]);
        assert_eq!(fill_holes(&open), open);
    }

    #[test]
    fn shell_fills_to_ball() {
        let dims = Dims::d3(9, 9, 9);
        let shell = BinaryMask::from_fn(dims, |x, y, z| {
            let r2 = [x, y, z].iter().map(|&c| (c as f64 - 4.0).powi(2)).sum::<f64>();
            (4.0..=9.0).contains(&r2)
        });
        let ball = BinaryMask::from_fn(dims, |x, y, z| {
            let r2 = [x, y, z].iter().map(|&c| (c as f64 - 4.0).powi(2)).sum::<f64>();
            r2 <= 9.0
        });
        assert_eq!(fill_holes(&shell), ball);
    }
}
