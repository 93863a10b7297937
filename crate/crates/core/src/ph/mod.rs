//! Persistent homology of sublevel and superlevel filtrations on the voxel
//! grid.
//!
//! Voxels are the vertices of the cubical complex. Face-adjacent voxels span
//! edges, 2x2 blocks span squares and 2x2x2 blocks span cubes, so H0 agrees
//! with face connectivity. Every cell takes the latest value among its
//! vertices. Filtration values live in `t` coordinates: `I(x)` for sublevel,
//! `1 - I(x)` for superlevel, and the frame at `t` is `{x : value(x) <= t}`.
//!
//! Ties between equal voxel values are broken by linear index (smaller index
//! enters first). A cell's defining voxel is therefore its latest vertex in
//! that order, which for equal values is the one with the larger index.

pub mod bottleneck;
mod engine;
pub mod export;
mod grid;
pub mod oracle;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{BinaryMask, Dims, GrayImage};

pub use bottleneck::bottleneck_distance;
pub use oracle::oracle_persistence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Sublevel,
    Superlevel,
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "sub" | "sublevel" => Ok(Direction::Sublevel),
            "super" | "superlevel" => Ok(Direction::Superlevel),
            other => Err(format!("unknown direction {other:?}")),
        }
    }
}

/// A grey image read as a nested family of binary frames.
#[derive(Debug, Clone)]
pub struct Filtration {
    dims: Dims,
    values: Vec<f64>,
    direction: Direction,
}

impl Filtration {
    pub fn new(img: &GrayImage, direction: Direction) -> Result<Self> {
        if let Some((index, &value)) = img
            .data()
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::OutOfRange { index, value });
        }
        let values = match direction {
            Direction::Sublevel => img.data().to_vec(),
            Direction::Superlevel => img.data().iter().map(|&v| 1.0 - v).collect(),
        };
        Ok(Filtration {
            dims: img.dims(),
            values,
            direction,
        })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Entry time of every voxel.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn is_active(&self, idx: usize, t: f64) -> bool {
        self.values[idx] <= t
    }

    pub fn frame(&self, t: f64) -> BinaryMask {
        BinaryMask::new(self.dims, self.values.iter().map(|&v| v <= t).collect())
            .expect("same dims")
    }

    /// Voxels ordered by entry time, ties by index.
    pub fn voxel_order(&self) -> Vec<u32> {
        let mut order: Vec<u32> = (0..self.values.len() as u32).collect();
        order.sort_unstable_by(|&a, &b| {
            self.values[a as usize]
                .total_cmp(&self.values[b as usize])
                .then(a.cmp(&b))
        });
        order
    }
}

pub fn build_filtration(img: &GrayImage, direction: Direction) -> Result<Filtration> {
    Filtration::new(img, direction)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersistencePoint {
    pub dim: usize,
    pub birth: f64,
    /// `f64::INFINITY` for essential classes.
    pub death: f64,
    pub birth_pixel: usize,
    pub death_pixel: Option<usize>,
}

impl PersistencePoint {
    pub fn is_essential(&self) -> bool {
        self.death.is_infinite()
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    pub fn alive_at(&self, t: f64) -> bool {
        self.birth <= t && t < self.death
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceDiagram {
    pub points: Vec<PersistencePoint>,
    pub max_dim: usize,
}

impl PersistenceDiagram {
    pub fn in_dim(&self, dim: usize) -> impl Iterator<Item = &PersistencePoint> + '_ {
        self.points.iter().filter(move |p| p.dim == dim)
    }

    pub fn betti(&self, dim: usize, t: f64) -> usize {
        self.in_dim(dim).filter(|p| p.alive_at(t)).count()
    }

    /// `(dim, birth, death)` triples sorted, for multiset comparison.
    pub fn signature(&self) -> Vec<(usize, f64, f64)> {
        let mut v: Vec<_> = self.points.iter().map(|p| (p.dim, p.birth, p.death)).collect();
        v.sort_by(|a, b| {
            a.0.cmp(&b.0)
                .then(a.1.total_cmp(&b.1))
                .then(a.2.total_cmp(&b.2))
        });
        v
    }

    /// Canonical point order: dim, birth, death, birth pixel.
    pub fn sort(&mut self) {
        self.points.sort_by(|a, b| {
            a.dim
                .cmp(&b.dim)
                .then(a.birth.total_cmp(&b.birth))
                .then(a.death.total_cmp(&b.death))
                .then(a.birth_pixel.cmp(&b.birth_pixel))
        });
    }
}

/// Highest homology degree the grid can carry: the number of non-singleton
/// axes minus one, and never below zero.
pub fn top_dim(dims: Dims) -> usize {
    dims.shape().iter().filter(|&&e| e > 1).count().saturating_sub(1)
}

/// Full diagram up to `max_dim` (clamped to what the grid can carry).
pub fn persistence(filt: &Filtration, max_dim: usize) -> PersistenceDiagram {
    engine::persistence(filt, max_dim)
}

/// Degree-0 diagram only.
pub fn persistence_h0(filt: &Filtration) -> PersistenceDiagram {
    engine::persistence(filt, 0)
}

/// Face-connected component of `seed` in the frame at `t`.
pub fn component_at(filt: &Filtration, t: f64, seed: usize) -> Result<BinaryMask> {
    let dims = filt.dims();
    if seed >= dims.len() {
        return Err(Error::VoxelIndex(seed));
    }
    if !filt.is_active(seed, t) {
        return Err(Error::InactiveSeed { seed, t });
    }
    let mut out = BinaryMask::empty(dims);
    out.set(seed, true);
    let mut queue = VecDeque::from([seed]);
    while let Some(v) = queue.pop_front() {
        for n in dims.face_neighbors(v) {
            if !out.get(n) && filt.is_active(n, t) {
                out.set(n, true);
                queue.push_back(n);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn superlevel_reparameterises() {
        let img = GrayImage::new(Dims::d2(3, 1), vec![0.2, 0.8, 0.5]).unwrap();
        let sub = Filtration::new(&img, Direction::Sublevel).unwrap();
        assert_eq!(sub.voxel_order(), vec![0, 2, 1]);
        let sup = Filtration::new(&img, Direction::Superlevel).unwrap();
        assert_eq!(sup.voxel_order(), vec![1, 2, 0]);
        assert!(Filtration::new(&img.map(|v| v + 0.5), Direction::Sublevel).is_err());
    }

    #[test]
    fn component_at_rules() {
        let img = GrayImage::new(Dims::d2(5, 1), vec![0.9, 0.9, 0.1, 0.9, 0.5]).unwrap();
        let f = Filtration::new(&img, Direction::Superlevel).unwrap();
        let c = component_at(&f, 0.2, 0).unwrap();
        assert_eq!(c.indices().collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(component_at(&f, 1.0, 0).unwrap().count(), 5);
        assert!(matches!(
            component_at(&f, 0.2, 2),
            Err(Error::InactiveSeed { .. })
        ));
    }
}
