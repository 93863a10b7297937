//! Fast diagram computation.
//!
//! * H0: union-find over voxels in filtration order (elder rule).
//! * Top-minus-one degree: union-find over top cells while sweeping the
//!   codimension-one cells backwards; the outside of the grid is a single
//!   node that never dies.
//! * H1 of a volume: cohomology column reduction over edges with clearing of
//!   the H0 death edges and apparent-pair shortcuts.
//!
//! Cells are compared by key `rank << 34 | id`, where `rank` is the position
//! of the defining voxel in the voxel order. Only same-dimension cells are
//! ever compared, so the key realises the (rank, dim, id) order.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use super::grid::{Grid, RANK_SHIFT};
use super::{Filtration, PersistenceDiagram, PersistencePoint};

struct Ctx<'a> {
    values: &'a [f64],
    order: Vec<u32>,
    rank: Vec<u32>,
    grid: Grid,
    scratch: Vec<usize>,
}

impl<'a> Ctx<'a> {
    fn new(filt: &'a Filtration) -> Self {
        let order = filt.voxel_order();
        let mut rank = vec![0u32; order.len()];
        for (r, &v) in order.iter().enumerate() {
            rank[v as usize] = r as u32;
        }
        Ctx {
            values: filt.values(),
            order,
            rank,
            grid: Grid::new(filt.dims()),
            scratch: Vec::with_capacity(8),
        }
    }

    fn key(&mut self, c: [usize; 3]) -> u64 {
        self.grid.vertices(c, &mut self.scratch);
        let r = self.scratch.iter().map(|&v| self.rank[v]).max().unwrap();
        ((r as u64) << RANK_SHIFT) | self.grid.id(c)
    }

    fn voxel(&self, key: u64) -> usize {
        self.order[(key >> RANK_SHIFT) as usize] as usize
    }

    fn value(&self, key: u64) -> f64 {
        self.values[self.voxel(key)]
    }

    fn cell(&self, key: u64) -> [usize; 3] {
        self.grid.decode(key & ((1u64 << RANK_SHIFT) - 1))
    }

    fn point(&self, dim: usize, birth: u64, death: u64) -> Option<PersistencePoint> {
        let (b, d) = (self.value(birth), self.value(death));
        (b < d).then(|| PersistencePoint {
            dim,
            birth: b,
            death: d,
            birth_pixel: self.voxel(birth),
            death_pixel: Some(self.voxel(death)),
        })
    }

    /// Keys of cells of dimension `dim` whose defining voxel is `v`,
    /// ascending.
    fn defined_by(&mut self, v: usize, dim: usize, out: &mut Vec<u64>) {
        out.clear();
        let c = self.grid.dims.coords(v);
        let r = self.rank[v];
        let active = self.grid.active.clone();
        let combos = 3usize.pow(active.len() as u32);
        for m in 0..combos {
            let mut cell = [2 * c[0], 2 * c[1], 2 * c[2]];
            let mut mm = m;
            let mut odd = 0;
            let mut ok = true;
            for &axis in &active {
                let off = mm % 3;
                mm /= 3;
                match off {
                    1 => {
                        if cell[axis] == 0 {
                            ok = false;
                        } else {
                            cell[axis] -= 1;
                            odd += 1;
                        }
                    }
                    2 => {
                        if cell[axis] + 1 >= self.grid.k[axis] {
                            ok = false;
                        } else {
                            cell[axis] += 1;
                            odd += 1;
                        }
                    }
                    _ => {}
                }
            }
            if !ok || odd != dim {
                continue;
            }
            let key = self.key(cell);
            if (key >> RANK_SHIFT) as u32 == r {
                out.push(key);
            }
        }
        out.sort_unstable();
    }
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }
}

struct BitSet(Vec<u64>);

impl BitSet {
    fn new(n: usize) -> Self {
        BitSet(vec![0; n / 64 + 1])
    }
    fn insert(&mut self, i: u64) {
        self.0[(i / 64) as usize] |= 1 << (i % 64);
    }
    fn contains(&self, i: u64) -> bool {
        self.0[(i / 64) as usize] & (1 << (i % 64)) != 0
    }
}

pub(crate) fn persistence(filt: &Filtration, max_dim: usize) -> PersistenceDiagram {
    let mut ctx = Ctx::new(filt);
    // dimension of the complex
    let top = ctx.grid.active.len();
    let max_dim = max_dim.min(top.saturating_sub(1));
    let mut points = Vec::new();
    let need_h1_cohomology = top == 3 && max_dim >= 1;
    let deaths = h0(&mut ctx, &mut points, need_h1_cohomology);
    if top >= 2 && max_dim + 1 >= top {
        codim_one(&mut ctx, top, &mut points);
    }
    if need_h1_cohomology {
        h1_cohomology(&mut ctx, deaths.as_ref().expect("death edges"), &mut points);
    }
    let mut diag = PersistenceDiagram { points, max_dim };
    diag.sort();
    diag
}

fn h0(ctx: &mut Ctx, points: &mut Vec<PersistencePoint>, track: bool) -> Option<BitSet> {
    let n = ctx.order.len();
    let dims = ctx.grid.dims;
    let mut uf = UnionFind::new(n);
    // oldest voxel of each root
    let mut oldest: Vec<u32> = (0..n as u32).collect();
    let mut deaths = track.then(|| BitSet::new(ctx.grid.cell_count()));
    let mut edges: Vec<(u64, usize)> = Vec::with_capacity(6);
    for r in 0..n {
        let v = ctx.order[r] as usize;
        let c = dims.coords(v);
        edges.clear();
        for u in dims.face_neighbors(v) {
            if ctx.rank[u] < r as u32 {
                let cu = dims.coords(u);
                let cell = [c[0] + cu[0], c[1] + cu[1], c[2] + cu[2]];
                edges.push((ctx.grid.id(cell), u));
            }
        }
        edges.sort_unstable();
        for &(id, u) in &edges {
            let ru = uf.find(u as u32);
            let rv = uf.find(v as u32);
            if ru == rv {
                continue;
            }
            let (ou, ov) = (oldest[ru as usize], oldest[rv as usize]);
            let (elder, younger) = if ctx.rank[ou as usize] < ctx.rank[ov as usize] {
                (ou, ov)
            } else {
                (ov, ou)
            };
            let (b, d) = (ctx.values[younger as usize], ctx.values[v]);
            if b < d {
                points.push(PersistencePoint {
                    dim: 0,
                    birth: b,
                    death: d,
                    birth_pixel: younger as usize,
                    death_pixel: Some(v),
                });
            }
            if let Some(set) = deaths.as_mut() {
                set.insert(id);
            }
            uf.parent[ru as usize] = rv;
            oldest[rv as usize] = elder;
        }
    }
    for x in 0..n as u32 {
        if uf.find(x) == x {
            let o = oldest[x as usize] as usize;
            points.push(PersistencePoint {
                dim: 0,
                birth: ctx.values[o],
                death: f64::INFINITY,
                birth_pixel: o,
                death_pixel: None,
            });
        }
    }
    deaths
}

/// Degree `top - 1` by duality: sweep codimension-one cells backwards and
/// merge the top cells on either side.
fn codim_one(ctx: &mut Ctx, top: usize, points: &mut Vec<PersistencePoint>) {
    let dims = ctx.grid.dims;
    let n = dims.len();
    let outside = n as u32;
    let mut uf = UnionFind::new(n + 1);
    // largest key in each component; top cells are indexed by lower corner
    let mut rep: Vec<u64> = vec![0; n + 1];
    rep[n] = u64::MAX;
    let mut initialised = vec![false; n];
    let mut cells = Vec::new();
    let mut cof = Vec::new();
    for r in (0..n).rev() {
        let v = ctx.order[r] as usize;
        ctx.defined_by(v, top - 1, &mut cells);
        for &key in cells.iter().rev() {
            let c = ctx.cell(key);
            ctx.grid.cofacets(c, &mut cof);
            let mut sides = [outside; 2];
            for (i, &t) in cof.iter().enumerate() {
                let corner = dims.index(t[0] / 2, t[1] / 2, t[2] / 2);
                if !initialised[corner] {
                    initialised[corner] = true;
                    rep[corner] = ctx.key(t);
                }
                sides[i] = corner as u32;
            }
            let ra = uf.find(sides[0]);
            let rb = uf.find(sides[1]);
            if ra == rb {
                continue;
            }
            let (young, old) = if rep[ra as usize] < rep[rb as usize] {
                (ra, rb)
            } else {
                (rb, ra)
            };
            if let Some(p) = ctx.point(top - 1, key, rep[young as usize]) {
                points.push(p);
            }
            uf.parent[young as usize] = old;
        }
    }
}

fn h1_cohomology(ctx: &mut Ctx, cleared: &BitSet, points: &mut Vec<PersistencePoint>) {
    let n = ctx.order.len();
    let mut reduced: HashMap<u64, Vec<u64>> = HashMap::new();
    let mut edges = Vec::new();
    let mut cof = Vec::new();
    let mut col: BinaryHeap<Reverse<u64>> = BinaryHeap::new();
    for r in (0..n).rev() {
        let v = ctx.order[r] as usize;
        ctx.defined_by(v, 1, &mut edges);
        for &e in edges.iter().rev() {
            if cleared.contains(e & ((1 << RANK_SHIFT) - 1)) {
                continue;
            }
            let cob = coboundary(ctx, e, &mut cof);
            let pivot = *cob.iter().min().expect("edge has a coface");
            if max_facet(ctx, pivot) == e {
                if let Some(p) = ctx.point(1, e, pivot) {
                    points.push(p);
                }
                continue;
            }
            col.clear();
            col.extend(cob.iter().map(|&k| Reverse(k)));
            loop {
                let Some(p) = pop_pivot(&mut col) else {
                    debug_assert!(false, "edge column reduced to zero");
                    break;
                };
                if let Some(other) = reduced.get(&p) {
                    col.push(Reverse(p));
                    col.extend(other.iter().map(|&k| Reverse(k)));
                    continue;
                }
                if let Some(owner) = apparent_owner(ctx, p, e, cleared, &mut cof) {
                    col.push(Reverse(p));
                    let other = coboundary(ctx, owner, &mut cof);
                    col.extend(other.into_iter().map(Reverse));
                    continue;
                }
                if let Some(pt) = ctx.point(1, e, p) {
                    points.push(pt);
                }
                let mut stored = vec![p];
                while let Some(k) = pop_pivot(&mut col) {
                    stored.push(k);
                }
                reduced.insert(p, stored);
                break;
            }
        }
    }
}

fn coboundary(ctx: &mut Ctx, e: u64, cof: &mut Vec<[usize; 3]>) -> Vec<u64> {
    let c = ctx.cell(e);
    ctx.grid.cofacets(c, cof);
    let cells: Vec<[usize; 3]> = cof.clone();
    cells.into_iter().map(|s| ctx.key(s)).collect()
}

fn max_facet(ctx: &mut Ctx, s: u64) -> u64 {
    let c = ctx.cell(s);
    let mut f = Vec::with_capacity(4);
    ctx.grid.facets(c, &mut f);
    f.into_iter().map(|e| ctx.key(e)).max().unwrap()
}

/// The earlier column whose unreduced coboundary is an apparent pair with
/// pivot `s`, if any.
fn apparent_owner(
    ctx: &mut Ctx,
    s: u64,
    current: u64,
    cleared: &BitSet,
    cof: &mut Vec<[usize; 3]>,
) -> Option<u64> {
    let e = max_facet(ctx, s);
    if e <= current || cleared.contains(e & ((1 << RANK_SHIFT) - 1)) {
        return None;
    }
    let min_cof = coboundary(ctx, e, cof).into_iter().min()?;
    (min_cof == s).then_some(e)
}

/// Smallest entry that survives mod-2 cancellation.
fn pop_pivot(col: &mut BinaryHeap<Reverse<u64>>) -> Option<u64> {
    while let Some(Reverse(p)) = col.pop() {
        if col.peek() == Some(&Reverse(p)) {
            col.pop();
            continue;
        }
        return Some(p);
    }
    None
}
