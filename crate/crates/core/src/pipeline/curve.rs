//! Voxel-count curves over sampled thresholds and their forward differences.

use serde::{Deserialize, Serialize};

use crate::ph::Filtration;

/// `derivative[i]` is the forward difference between samples `i` and `i + 1`
/// divided by the sample step, so it has one entry fewer than `counts`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoxelCountCurve {
    pub thresholds: Vec<f64>,
    pub counts: Vec<usize>,
    pub derivative: Vec<f64>,
}

/// `samples` uniform thresholds covering [0, 1].
pub fn sample_thresholds(samples: usize) -> Vec<f64> {
    let n = samples.max(2);
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

impl VoxelCountCurve {
    pub fn from_counts(thresholds: Vec<f64>, counts: Vec<usize>) -> Self {
        let derivative = thresholds
            .windows(2)
            .zip(counts.windows(2))
            .map(|(t, c)| (c[1] as f64 - c[0] as f64) / (t[1] - t[0]))
            .collect();
        VoxelCountCurve {
            thresholds,
            counts,
            derivative,
        }
    }

    /// Frame sizes of the whole filtration.
    pub fn global(filt: &Filtration, samples: usize) -> Self {
        let mut sorted = filt.values().to_vec();
        sorted.sort_by(f64::total_cmp);
        let thresholds = sample_thresholds(samples);
        let counts = thresholds
            .iter()
            .map(|&t| sorted.partition_point(|&v| v <= t))
            .collect();
        Self::from_counts(thresholds, counts)
    }

    /// Size of the seed's component at each sample where the seed is active.
    pub fn localized(filt: &Filtration, seed: usize, samples: usize) -> Self {
        let dims = filt.dims();
        let values = filt.values();
        let order = filt.voxel_order();
        let mut parent: Vec<u32> = (0..dims.len() as u32).collect();
        let mut size = vec![1usize; dims.len()];
        let mut active = vec![false; dims.len()];
        fn find(parent: &mut [u32], mut x: u32) -> u32 {
            while parent[x as usize] != x {
                let p = parent[x as usize];
                parent[x as usize] = parent[p as usize];
                x = p;
            }
            x
        }
        let mut next = 0;
        let mut thresholds = Vec::new();
        let mut counts = Vec::new();
        for t in sample_thresholds(samples) {
            while next < order.len() && values[order[next] as usize] <= t {
                let v = order[next] as usize;
                active[v] = true;
                for n in dims.face_neighbors(v) {
                    if !active[n] {
                        continue;
                    }
                    let (a, b) = (find(&mut parent, v as u32), find(&mut parent, n as u32));
                    if a != b {
                        let (big, small) = if size[a as usize] >= size[b as usize] {
                            (a, b)
                        } else {
                            (b, a)
                        };
                        parent[small as usize] = big;
                        size[big as usize] += size[small as usize];
                    }
                }
                next += 1;
            }
            if active[seed] {
                let r = find(&mut parent, seed as u32);
                thresholds.push(t);
                counts.push(size[r as usize]);
            }
        }
        Self::from_counts(thresholds, counts)
    }

    /// Trapezoidal area under the derivative curve.
    pub fn derivative_area(&self) -> f64 {
        let d = &self.derivative;
        (1..d.len())
            .map(|i| (self.thresholds[i] - self.thresholds[i - 1]) * (d[i] + d[i - 1]) / 2.0)
            .sum()
    }

    pub fn first_exceedance(&self, threshold: f64) -> Option<usize> {
        self.derivative.iter().position(|&d| d > threshold)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::{Dims, GrayImage};
    use crate::ph::Direction;

    #[test]
    fn global_counts() {
        let img = GrayImage::new(Dims::d2(4, 1), vec![0.0, 0.25, 0.5, 1.0]).unwrap();
        let f = Filtration::new(&img, Direction::Sublevel).unwrap();
        let c = VoxelCountCurve::global(&f, 5);
        assert_eq!(c.counts, vec![1, 2, 3, 3, 4]);
        assert_eq!(c.derivative, vec![4.0, 4.0, 0.0, 4.0]);
        assert_eq!(c.first_exceedance(3.0), Some(0));
    }

    #[test]
    fn localized_counts_follow_component() {
        // two plateaus separated by a dim voxel
        let img = GrayImage::new(Dims::d2(5, 1), vec![0.9, 0.9, 0.2, 0.8, 0.8]).unwrap();
        let f = Filtration::new(&img, Direction::Superlevel).unwrap();
        let c = VoxelCountCurve::localized(&f, 0, 11);
        assert_eq!(c.thresholds.len(), 10);
        assert_eq!(*c.counts.first().unwrap(), 2);
        assert_eq!(*c.counts.last().unwrap(), 5);
        assert!(c.counts.windows(2).all(|w| w[0] <= w[1]));
    }
}
