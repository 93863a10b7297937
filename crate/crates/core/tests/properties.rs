mod common;

use common::*;
use proptest::prelude::*;
use toposeg::morphology::{binary_dilate, count_components, grey_dilate, StructuringBall};
use toposeg::ph::{bottleneck_distance, Direction, Filtration, PersistenceDiagram};
use toposeg::pipeline::module2::module2_detect;
use toposeg::{BinaryMask, Dims, GrayImage};

fn image_strategy(max: usize, levels: u32) -> impl Strategy<Value = GrayImage> {
    (1..=max, 1..=max, 1..=3usize).prop_flat_map(move |(nx, ny, nz)| {
        let dims = if nz == 1 { Dims::d2(nx, ny) } else { Dims::d3(nx, ny, nz) };
        let value = if levels == 0 {
            (0.0f64..=1.0).boxed()
        } else {
            (0..=levels).prop_map(move |k| k as f64 / levels as f64).boxed()
        };
        prop::collection::vec(value, dims.len()).prop_map(move |v| GrayImage::new(dims, v).unwrap())
    })
}

fn dir_strategy() -> impl Strategy<Value = Direction> {
    prop_oneof![Just(Direction::Sublevel), Just(Direction::Superlevel)]
}

/// Diagram values are filtration times, `1 - I` for superlevel sets.
fn mapped(d: &PersistenceDiagram, f: &PlMap, dir: Direction) -> PersistenceDiagram {
    let g = |t: f64| match dir {
        Direction::Sublevel => f.apply(t),
        Direction::Superlevel => 1.0 - f.apply(1.0 - t),
    };
    let mut out = d.clone();
    for p in &mut out.points {
        p.birth = g(p.birth);
        if p.death.is_finite() {
            p.death = g(p.death);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn monotone_maps_commute_with_diagrams(img in image_strategy(7, 32), seed in any::<u64>(), dir in dir_strategy()) {
        let f = PlMap::random(&mut rng(seed), 4);
        let direct = diagram(&img.map(|v| f.apply(v)), dir);
        prop_assert_eq!(rows(&direct), rows(&mapped(&diagram(&img, dir), &f, dir)));
    }

    #[test]
    fn bottleneck_bounded_by_sup_norm(img in image_strategy(5, 0), seed in any::<u64>(), dir in dir_strategy()) {
        use rand::Rng;
        let mut r = rng(seed);
        let noisy = img.data().iter().map(|v| (v + r.gen_range(-0.05..=0.05)).clamp(0.0, 1.0)).collect();
        let other = GrayImage::new(img.dims(), noisy).unwrap();
        let sup = img.data().iter().zip(other.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let (d1, d2) = (diagram(&img, dir), diagram(&other, dir));
        for dim in 0..img.rank() {
            let b = bottleneck_distance(&d1, &d2, dim).unwrap();
            prop_assert!(b <= sup + 1e-9, "dim {} bottleneck {} sup {}", dim, b, sup);
        }
    }

    #[test]
    fn dilation_commutes_with_thresholding(img in image_strategy(8, 8), r in 0usize..3, t in 0.0f64..1.0) {
        let ball = StructuringBall::new(r, img.rank());
        let a = BinaryMask::threshold(&grey_dilate(&img, ball), |v| v >= t);
        let b = binary_dilate(&BinaryMask::threshold(&img, |v| v >= t), ball);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn betti0_counts_components(img in image_strategy(8, 8), t in 0.0f64..1.0, dir in dir_strategy()) {
        let f = Filtration::new(&img, dir).unwrap();
        let d = toposeg::ph::persistence(&f, 0);
        prop_assert_eq!(d.betti(0, t), count_components(&f.frame(t)));
    }

    #[test]
    fn detection_invariant_under_dyadic_affine_maps(img in image_strategy(7, 64), dir in dir_strategy()) {
        let whole = BinaryMask::full(img.dims());
        let scaled = img.map(|v| 0.5 * v + 0.25);
        match (module2_detect(&img, &whole, 0, dir), module2_detect(&scaled, &whole, 0, dir)) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.geo, b.geo);
                prop_assert_eq!(a.point.birth_pixel, b.point.birth_pixel);
            }
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
        }
    }
}
