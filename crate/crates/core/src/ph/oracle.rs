//! Reference diagrams by plain boundary-matrix reduction over Z/2. Slow and
//! simple on purpose; only meant for small grids.

use std::collections::HashMap;

use super::grid::Grid;
use super::{Filtration, PersistenceDiagram, PersistencePoint};
use crate::error::{Error, Result};

pub const CELL_LIMIT: usize = 50_000;

struct Cell {
    value: f64,
    dim: usize,
    id: u64,
    pixel: usize,
    coords: [usize; 3],
}

pub fn oracle_persistence(filt: &Filtration, max_dim: usize) -> Result<PersistenceDiagram> {
    let grid = Grid::new(filt.dims());
    let total = grid.cell_count();
    if total > CELL_LIMIT {
        return Err(Error::TooLarge {
            cells: total,
            limit: CELL_LIMIT,
        });
    }
    let values = filt.values();
    let mut cells = Vec::with_capacity(total);
    let mut verts = Vec::new();
    for id in 0..total as u64 {
        let c = grid.decode(id);
        grid.vertices(c, &mut verts);
        // latest vertex; equal values resolved towards the smaller index
        let mut pixel = verts[0];
        for &v in &verts[1..] {
            if values[v] > values[pixel] || (values[v] == values[pixel] && v < pixel) {
                pixel = v;
            }
        }
        cells.push(Cell {
            value: values[pixel],
            dim: Grid::cell_dim(c),
            id,
            pixel,
            coords: c,
        });
    }
    cells.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then(a.dim.cmp(&b.dim))
            .then(a.id.cmp(&b.id))
    });
    let position: HashMap<u64, usize> = cells.iter().enumerate().map(|(i, c)| (c.id, i)).collect();

    let mut facets = Vec::new();
    let mut columns: Vec<Vec<usize>> = cells
        .iter()
        .map(|c| {
            grid.facets(c.coords, &mut facets);
            let mut col: Vec<usize> = facets.iter().map(|f| position[&grid.id(*f)]).collect();
            col.sort_unstable();
            col
        })
        .collect();

    let mut low_owner: HashMap<usize, usize> = HashMap::new();
    let mut paired = vec![false; cells.len()];
    let mut points = Vec::new();
    for j in 0..columns.len() {
        while let Some(&low) = columns[j].last() {
            match low_owner.get(&low) {
                Some(&k) => {
                    let other = columns[k].clone();
                    columns[j] = sym_diff(&columns[j], &other);
                }
                None => break,
            }
        }
        if let Some(&low) = columns[j].last() {
            low_owner.insert(low, j);
            paired[low] = true;
            paired[j] = true;
            let (b, d) = (&cells[low], &cells[j]);
            if b.dim <= max_dim && b.value < d.value {
                points.push(PersistencePoint {
                    dim: b.dim,
                    birth: b.value,
                    death: d.value,
                    birth_pixel: b.pixel,
                    death_pixel: Some(d.pixel),
                });
            }
        }
    }
    for (i, c) in cells.iter().enumerate() {
        if !paired[i] && columns[i].is_empty() && c.dim <= max_dim {
            points.push(PersistencePoint {
                dim: c.dim,
                birth: c.value,
                death: f64::INFINITY,
                birth_pixel: c.pixel,
                death_pixel: None,
            });
        }
    }
    let mut diag = PersistenceDiagram { points, max_dim };
    diag.sort();
    Ok(diag)
}

fn sym_diff(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}
