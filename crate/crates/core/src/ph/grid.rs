//! Cell addressing on the doubled grid: a cell with lower corner `(x, y, z)`
//! spanning the axes flagged in `(bx, by, bz)` has coordinates
//! `(2x + bx, 2y + by, 2z + bz)`. Odd coordinates mark spanned axes.

use crate::image::Dims;

pub(crate) const RANK_SHIFT: u32 = 34;

#[derive(Debug, Clone)]
pub(crate) struct Grid {
    pub dims: Dims,
    pub k: [usize; 3],
    pub active: Vec<usize>,
}

impl Grid {
    pub fn new(dims: Dims) -> Self {
        let s = dims.shape();
        Grid {
            dims,
            k: [2 * s[0] - 1, 2 * s[1] - 1, 2 * s[2] - 1],
            active: (0..3).filter(|&a| s[a] > 1).collect(),
        }
    }

    pub fn cell_count(&self) -> usize {
        self.k.iter().product()
    }

    #[inline]
    pub fn id(&self, c: [usize; 3]) -> u64 {
        (c[0] + self.k[0] * (c[1] + self.k[1] * c[2])) as u64
    }

    #[inline]
    pub fn decode(&self, id: u64) -> [usize; 3] {
        let id = id as usize;
        [
            id % self.k[0],
            (id / self.k[0]) % self.k[1],
            id / (self.k[0] * self.k[1]),
        ]
    }

    pub fn cell_dim(c: [usize; 3]) -> usize {
        c.iter().filter(|&&v| v % 2 == 1).count()
    }

    /// Voxel indices of the cell's vertices.
    pub fn vertices(&self, c: [usize; 3], out: &mut Vec<usize>) {
        out.clear();
        out.push(0);
        let strides = [1, self.dims.stride(1), self.dims.stride(2)];
        for axis in 0..3 {
            let base = c[axis] / 2;
            let n = out.len();
            for i in 0..n {
                out[i] += base * strides[axis];
                if c[axis] % 2 == 1 {
                    out.push(out[i] + strides[axis]);
                }
            }
        }
    }

    /// Faces one dimension down.
    pub fn facets(&self, c: [usize; 3], out: &mut Vec<[usize; 3]>) {
        out.clear();
        for axis in 0..3 {
            if c[axis] % 2 == 1 {
                let mut lo = c;
                lo[axis] -= 1;
                let mut hi = c;
                hi[axis] += 1;
                out.push(lo);
                out.push(hi);
            }
        }
    }

    /// Cofaces one dimension up, inside the grid.
    pub fn cofacets(&self, c: [usize; 3], out: &mut Vec<[usize; 3]>) {
        out.clear();
        for &axis in &self.active {
            if c[axis] % 2 == 0 {
                if c[axis] > 0 {
                    let mut lo = c;
                    lo[axis] -= 1;
                    out.push(lo);
                }
                if c[axis] + 1 < self.k[axis] {
                    let mut hi = c;
                    hi[axis] += 1;
                    out.push(hi);
                }
            }
        }
    }
}
