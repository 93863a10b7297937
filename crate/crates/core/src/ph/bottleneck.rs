//! Exact bottleneck distance for small diagrams: binary search over the
//! finitely many candidate distances, each tested by bipartite matching.

use super::PersistenceDiagram;
use crate::error::{Error, Result};

pub const POINT_LIMIT: usize = 64;

fn linf(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

fn half_persistence(a: (f64, f64)) -> f64 {
    (a.1 - a.0) / 2.0
}

/// Bottleneck distance between the degree-`dim` parts of two diagrams.
/// Essential points are matched among themselves by sorted birth; differing
/// essential counts give infinity.
pub fn bottleneck_distance(d1: &PersistenceDiagram, d2: &PersistenceDiagram, dim: usize) -> Result<f64> {
    let finite = |d: &PersistenceDiagram| -> Vec<(f64, f64)> {
        d.in_dim(dim)
            .filter(|p| !p.is_essential())
            .map(|p| (p.birth, p.death))
            .collect()
    };
    let essential = |d: &PersistenceDiagram| -> Vec<f64> {
        let mut v: Vec<f64> = d.in_dim(dim).filter(|p| p.is_essential()).map(|p| p.birth).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let (e1, e2) = (essential(d1), essential(d2));
    if e1.len() != e2.len() {
        return Ok(f64::INFINITY);
    }
    let ess = e1
        .iter()
        .zip(&e2)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let (a, b) = (finite(d1), finite(d2));
    if a.len() + b.len() > POINT_LIMIT {
        return Err(Error::TooLarge {
            cells: a.len() + b.len(),
            limit: POINT_LIMIT,
        });
    }
    Ok(ess.max(finite_bottleneck(&a, &b)))
}

fn finite_bottleneck(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let mut cands = vec![0.0];
    for &p in a.iter().chain(b) {
        cands.push(half_persistence(p));
    }
    for &p in a {
        for &q in b {
            cands.push(linf(p, q));
        }
    }
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    let (mut lo, mut hi) = (0, cands.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_matching(a, b, cands[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    cands[lo]
}

/// Left side: points of `a` then diagonal copies of `b`; right side: points
/// of `b` then diagonal copies of `a`. Diagonal-to-diagonal edges are free.
fn perfect_matching(a: &[(f64, f64)], b: &[(f64, f64)], eps: f64) -> bool {
    let (n, m) = (a.len(), b.len());
    let size = n + m;
    let adj: Vec<Vec<usize>> = (0..size)
        .map(|l| {
            (0..size)
                .filter(|&r| match (l < n, r < m) {
                    (true, true) => linf(a[l], b[r]) <= eps,
                    (true, false) => r - m == l && half_persistence(a[l]) <= eps,
                    (false, true) => l - n == r && half_persistence(b[r]) <= eps,
                    (false, false) => true,
                })
                .collect()
        })
        .collect();
    let mut match_r: Vec<Option<usize>> = vec![None; size];
    for l in 0..size {
        let mut seen = vec![false; size];
        if !augment(l, &adj, &mut match_r, &mut seen) {
            return false;
        }
    }
    true
}

fn augment(l: usize, adj: &[Vec<usize>], match_r: &mut [Option<usize>], seen: &mut [bool]) -> bool {
    for &r in &adj[l] {
        if seen[r] {
            continue;
        }
        seen[r] = true;
        if match_r[r].is_none_or(|l2| augment(l2, adj, match_r, seen)) {
            match_r[r] = Some(l);
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ph::PersistencePoint;

    fn diag(pts: &[(f64, f64)]) -> PersistenceDiagram {
        PersistenceDiagram {
            points: pts
                .iter()
                .map(|&(b, d)| PersistencePoint {
                    dim: 1,
                    birth: b,
                    death: d,
                    birth_pixel: 0,
                    death_pixel: None,
                })
                .collect(),
            max_dim: 1,
        }
    }

    #[test]
    fn examples() {
        let a = diag(&[(0.2, 0.6), (0.1, 0.3)]);
        assert_eq!(bottleneck_distance(&a, &a, 1).unwrap(), 0.0);
        let d = bottleneck_distance(&diag(&[(0.2, 0.6)]), &diag(&[(0.25, 0.6)]), 1).unwrap();
        assert!((d - 0.05).abs() < 1e-12);
        let d = bottleneck_distance(&diag(&[(0.4, 0.5)]), &diag(&[]), 1).unwrap();
        assert!((d - 0.05).abs() < 1e-12);
    }

    #[test]
    fn essential_counts() {
        let a = diag(&[(0.1, f64::INFINITY)]);
        assert_eq!(bottleneck_distance(&a, &diag(&[]), 1).unwrap(), f64::INFINITY);
        let b = diag(&[(0.3, f64::INFINITY)]);
        assert!((bottleneck_distance(&a, &b, 1).unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn size_limit() {
        let big: Vec<(f64, f64)> = (0..40).map(|i| (i as f64 / 100.0, 0.9)).collect();
        assert!(bottleneck_distance(&diag(&big), &diag(&big), 1).is_err());
    }
}
