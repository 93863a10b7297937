//! Module 3: split the whole object by the complement of the geometric one.

use crate::error::{Error, Result};
use crate::image::BinaryMask;
use crate::morphology::{all_axes, complement_components};

#[derive(Debug, Clone)]
pub struct Partition {
    pub inside: BinaryMask,
    pub outside: BinaryMask,
    /// No complement component avoided the boundary.
    pub no_interior: bool,
}

pub fn module3_partition(whole: &BinaryMask, geo: &BinaryMask) -> Result<Partition> {
    module3_partition_with(whole, geo, &all_axes(geo.dims()))
}

/// As [`module3_partition`], with only the boundary faces along `border_axes`
/// counting as background.
pub fn module3_partition_with(whole: &BinaryMask, geo: &BinaryMask, border_axes: &[usize]) -> Result<Partition> {
    whole.dims().check_same(&geo.dims())?;
    if geo.count() == geo.dims().len() {
        return Err(Error::NoComplement);
    }
    let (cc, touches) = complement_components(geo, border_axes);
    let mut inside = BinaryMask::empty(geo.dims());
    let mut outside = BinaryMask::empty(geo.dims());
    for (i, &l) in cc.labels().iter().enumerate() {
        if l == 0 || !whole.get(i) {
            continue;
        }
        if touches[l as usize - 1] {
            outside.set(i, true);
        } else {
            inside.set(i, true);
        }
    }
    let no_interior = touches.iter().all(|&t| t);
    Ok(Partition {
        inside,
        outside,
        no_interior,
    })
}
