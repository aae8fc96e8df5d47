use super::{BinaryMask, RasterError};
use image::{Rgba, RgbaImage};

/// Doubled axis position; reflection maps pixel column `x` to `k - x`.
fn doubled_axis(axis_x: f64) -> Result<i64, RasterError> {
    let k = (2.0 * axis_x).round();
    if !axis_x.is_finite() || (k - 2.0 * axis_x).abs() > 1e-9 {
        return Err(RasterError::Axis(axis_x));
    }
    Ok(k as i64)
}

/// Reflect an x coordinate about the vertical line `x = axis_x`.
pub fn reflect_x(x: f64, axis_x: f64) -> f64 {
    2.0 * axis_x - x
}

/// Reflect a mask about `x = axis_x` (must sit on a pixel center or pixel edge).
pub fn reflect_mask(mask: &BinaryMask, axis_x: f64) -> Result<BinaryMask, RasterError> {
    let k = doubled_axis(axis_x)?;
    let mut out = BinaryMask::new(mask.width(), mask.height());
    for (x, y) in mask.iter_set() {
        let nx = k - i64::from(x);
        if nx < 0 || nx >= i64::from(mask.width()) {
            return Err(RasterError::Bounds {
                axis: axis_x,
                width: mask.width(),
            });
        }
        out.set(nx as u32, y, true);
    }
    Ok(out)
}

/// Reflect the masked region of `image` about the vertical line `x = axis_x`.
///
/// Returns the reflected mask and a layer the size of `image` holding the
/// reflected pixels; everything outside the reflected mask is transparent.
/// Applying the operation twice with the same axis returns the input mask and
/// the input pixels restricted to it.
pub fn mirror_horizontal(
    mask: &BinaryMask,
    image: &RgbaImage,
    axis_x: f64,
) -> Result<(BinaryMask, RgbaImage), RasterError> {
    if mask.size() != image.dimensions() {
        return Err(RasterError::Dimension {
            expected: image.dimensions(),
            found: mask.size(),
        });
    }
    if axis_x < -0.5 || axis_x > f64::from(mask.width()) - 0.5 {
        return Err(RasterError::Bounds {
            axis: axis_x,
            width: mask.width(),
        });
    }
    let reflected = reflect_mask(mask, axis_x)?;
    let k = doubled_axis(axis_x)?;
    let mut layer = RgbaImage::from_pixel(image.width(), image.height(), Rgba([0, 0, 0, 0]));
    for (x, y) in mask.iter_set() {
        let nx = (k - i64::from(x)) as u32;
        layer.put_pixel(nx, y, *image.get_pixel(x, y));
    }
    Ok((reflected, layer))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::masked;
    use proptest::prelude::*;

    fn noise_image(w: u32, h: u32, seed: u32) -> RgbaImage {
        RgbaImage::from_fn(w, h, |x, y| {
            let v = (x * 31 + y * 17 + seed).wrapping_mul(2654435761);
            Rgba([v as u8, (v >> 8) as u8, (v >> 16) as u8, 255])
        })
    }

    #[test]
    fn three_by_one_about_column_one() {
        let mask = BinaryMask::from_fn(3, 1, |x, _| x <= 1);
        let img = noise_image(3, 1, 0);
        let (m, layer) = mirror_horizontal(&mask, &img, 1.0).unwrap();
        // Oracle: x -> 2 - x by enumeration.
        let expected: Vec<u32> = mask.iter_set().map(|(x, _)| 2 - x).collect();
        let mut got: Vec<u32> = m.iter_set().map(|(x, _)| x).collect();
        got.sort_unstable();
        let mut expected = expected;
        expected.sort_unstable();
        assert_eq!(got, expected);
        assert_eq!(got, vec![1, 2]);
        assert_eq!(layer.get_pixel(2, 0), img.get_pixel(0, 0));
        assert_eq!(layer.get_pixel(0, 0)[3], 0);
    }

    #[test]
    fn symmetric_mask_is_fixed() {
        let mask = BinaryMask::from_fn(9, 4, |x, y| (x as i32 - 4).abs() <= y as i32);
        let (m, _) = mirror_horizontal(&mask, &noise_image(9, 4, 3), 4.0).unwrap();
        assert_eq!(m, mask);
        // Half-pixel axis: columns 2..=5 about x = 3.5.
        let mask = BinaryMask::from_fn(9, 2, |x, _| (2..=5).contains(&x));
        let (m, _) = mirror_horizontal(&mask, &noise_image(9, 2, 3), 3.5).unwrap();
        assert_eq!(m, mask);
    }

    #[test]
    fn leaving_the_canvas_is_a_bounds_error() {
        let mask = BinaryMask::from_fn(4, 1, |x, _| x == 0);
        let err = mirror_horizontal(&mask, &noise_image(4, 1, 0), 2.0).unwrap_err();
        assert!(matches!(err, RasterError::Bounds { .. }));
        assert!(matches!(
            mirror_horizontal(&mask, &noise_image(4, 1, 0), 1.3),
            Err(RasterError::Axis(_))
        ));
    }

    proptest! {
        #[test]
        fn mirroring_is_an_involution(seed in any::<u32>(), axis2 in 14i64..18) {
            let (w, h) = (16u32, 6u32);
            let mask = BinaryMask::from_fn(w, h, |x, y| {
                (5..=11).contains(&x) && (seed.rotate_left(x + 3 * y) & 3) != 0
            });
            let img = noise_image(w, h, seed);
            let axis = axis2 as f64 / 2.0;
            let (m1, l1) = mirror_horizontal(&mask, &img, axis).unwrap();
            let (m2, l2) = mirror_horizontal(&m1, &l1, axis).unwrap();
            prop_assert_eq!(&m2, &mask);
            prop_assert_eq!(l2, masked(&img, &mask));
        }
    }
}
