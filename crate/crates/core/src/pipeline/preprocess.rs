//! Normalization, blur and grey dilation applied before every pipeline.

use super::config::Preprocessing;
use crate::error::Result;
use crate::image::GrayImage;
use crate::morphology::{gaussian_blur, grey_dilate, StructuringBall};

pub fn preprocess(img: &GrayImage, p: Preprocessing) -> Result<GrayImage> {
    let mut out = img.normalize01()?;
    if p.sigma > 0.0 {
        out = gaussian_blur(&out, p.sigma)?;
    }
    if p.dilation_radius > 0 {
        out = grey_dilate(&out, StructuringBall::new(p.dilation_radius, out.rank()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Dims;

    #[test]
    fn normalizes_and_stays_in_range() {
        let img = GrayImage::from_fn(Dims::d2(9, 9), |x, y, _| (x * y) as f64 * 3.0 - 7.0);
        let p = Preprocessing {
            sigma: 1.0,
            dilation_radius: 1,
        };
        let out = preprocess(&img, p).unwrap();
        assert!(out.in_unit_range());
        let plain = preprocess(&img, Preprocessing::NONE).unwrap();
        assert_eq!(plain.at(8, 8, 0), 1.0);
        assert_eq!(plain.at(0, 0, 0), 0.0);
    }
}
