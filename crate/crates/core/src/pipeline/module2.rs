//! Module 2: the geometric object, from the most persistent feature of the
//! image restricted to the whole object.

use crate::error::{Error, Result};
use crate::image::{BinaryMask, GrayImage};
use crate::ph::{component_at, persistence, Direction, Filtration, PersistenceDiagram, PersistencePoint};

#[derive(Debug, Clone)]
pub struct Detection {
    pub point: PersistencePoint,
    pub geo: BinaryMask,
    pub diagram: PersistenceDiagram,
}

/// Voxels outside `whole` get the value that enters last.
pub fn mask_outside(img: &GrayImage, whole: &BinaryMask, direction: Direction) -> Result<GrayImage> {
    let late = match direction {
        Direction::Superlevel => 0.0,
        Direction::Sublevel => 1.0,
    };
    img.masked(whole, late)
}

/// Most persistent point of degree `dim`; ties go to the smaller birth pixel.
/// Essential points only count in degree 0.
pub fn most_persistent(diag: &PersistenceDiagram, dim: usize) -> Option<PersistencePoint> {
    diag.in_dim(dim)
        .filter(|p| dim == 0 || !p.is_essential())
        .copied()
        .min_by(|a, b| {
            b.persistence()
                .total_cmp(&a.persistence())
                .then(a.birth_pixel.cmp(&b.birth_pixel))
        })
}

pub fn module2_detect(
    img: &GrayImage,
    whole: &BinaryMask,
    hom_dim: usize,
    direction: Direction,
) -> Result<Detection> {
    img.dims().check_same(&whole.dims())?;
    if whole.is_empty() {
        return Err(Error::EmptyMask);
    }
    let masked = mask_outside(img, whole, direction)?;
    let filt = Filtration::new(&masked, direction)?;
    let diagram = persistence(&filt, hom_dim);
    let point = most_persistent(&diagram, hom_dim).ok_or(Error::NoFeature(hom_dim))?;
    let geo = component_at(&filt, point.birth, point.birth_pixel)?;
    Ok(Detection { point, geo, diagram })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Dims;
    use crate::metrics::dice;

    #[test]
    fn sublevel_ring() {
        let dims = Dims::d2(40, 40);
        let r = |x: usize, y: usize| ((x as f64 - 20.0).powi(2) + (y as f64 - 20.0).powi(2)).sqrt();
        let ring = BinaryMask::from_fn(dims, |x, y, _| (8.0..=11.0).contains(&r(x, y)));
        let img = GrayImage::from_fn(dims, |x, y, _| if (8.0..=11.0).contains(&r(x, y)) { 0.1 } else { 0.7 });
        let whole = BinaryMask::from_fn(dims, |x, y, _| r(x, y) <= 15.0);
        let d = module2_detect(&img, &whole, 1, Direction::Sublevel).unwrap();
        assert!(dice(&d.geo, &ring).unwrap() >= 0.99);
        assert!(d.geo.get(d.point.birth_pixel));
    }

    #[test]
    fn solid_region_has_no_void() {
        let dims = Dims::d3(10, 10, 10);
        let img = GrayImage::from_fn(dims, |x, y, z| if (3..7).contains(&x) && (3..7).contains(&y) && (3..7).contains(&z) { 0.9 } else { 0.3 });
        let whole = BinaryMask::full(dims);
        assert!(matches!(
            module2_detect(&img, &whole, 2, Direction::Superlevel),
            Err(Error::NoFeature(2))
        ));
    }
}
