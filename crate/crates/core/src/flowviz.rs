//! Colour rendering of displacement fields.
//!
//! Direction maps to hue and magnitude to saturation on an HSV wheel with
//! value fixed at 1. Hue 0 (red) is straight up (`dx > 0`, toward the
//! probe) and hue grows clockwise: 90 degrees points toward increasing
//! column. Zero displacement is white.

use crate::field::VectorField;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    height: usize,
    width: usize,
    pixels: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn new(height: usize, width: usize, pixels: Vec<[u8; 3]>) -> Self {
        assert_eq!(pixels.len(), height * width, "pixel count");
        Self {
            height,
            width,
            pixels,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> [u8; 3] {
        self.pixels[row * self.width + col]
    }
}

/// Hue in degrees `[0, 360)` of a displacement; 0 is up.
pub fn direction_hue(dx: f64, dy: f64) -> f64 {
    let deg = dy.atan2(dx).to_degrees();
    if deg < 0.0 {
        deg + 360.0
    } else {
        deg
    }
}

fn hsv_to_rgb(hue: f64, sat: f64) -> [u8; 3] {
    let h = (hue / 60.0).rem_euclid(6.0);
    let sector = h.floor();
    let f = h - sector;
    let p = 1.0 - sat;
    let q = 1.0 - sat * f;
    let t = 1.0 - sat * (1.0 - f);
    let (r, g, b) = match sector as u8 {
        0 => (1.0, t, p),
        1 => (q, 1.0, p),
        2 => (p, 1.0, t),
        3 => (p, q, 1.0),
        4 => (t, p, 1.0),
        _ => (1.0, p, q),
    };
    let byte = |v: f64| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
    [byte(r), byte(g), byte(b)]
}

/// Renders `field`; saturation is `min(|d| / max_mag, 1)`. `max_mag`
/// defaults to the largest magnitude in the field (1 for an all-zero field).
pub fn flow_to_color(field: &VectorField, max_mag: Option<f64>) -> RgbImage {
    let mags = field.magnitude();
    let scale = match max_mag {
        Some(m) if m > 0.0 && m.is_finite() => m,
        _ => {
            let m = mags.max();
            if m > 0.0 {
                m
            } else {
                1.0
            }
        }
    };
    let (h, w) = field.dims();
    let pixels = field
        .dx()
        .data()
        .iter()
        .zip(field.dy().data())
        .zip(mags.data())
        .map(|((&dx, &dy), &mag)| {
            if mag == 0.0 {
                [255, 255, 255]
            } else {
                hsv_to_rgb(direction_hue(dx, dy), (mag / scale).min(1.0))
            }
        })
        .collect();
    RgbImage::new(h, w, pixels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ScalarField;
    use proptest::prelude::*;

    #[test]
    fn zero_field_is_white() {
        let img = flow_to_color(&VectorField::zeros(3, 4), None);
        assert!(img.pixels().iter().all(|p| *p == [255, 255, 255]));
    }

    #[test]
    fn constant_field_is_single_colour() {
        let img = flow_to_color(&VectorField::constant(4, 4, 0.3, -1.2), None);
        assert!(img.pixels().iter().all(|p| *p == img.get(0, 0)));
        assert_ne!(img.get(0, 0), [255, 255, 255]);
    }

    #[test]
    fn cardinal_directions() {
        let up = flow_to_color(&VectorField::constant(1, 1, 1.0, 0.0), None);
        assert_eq!(up.get(0, 0), [255, 0, 0]);
        let down = flow_to_color(&VectorField::constant(1, 1, -1.0, 0.0), None);
        assert_eq!(down.get(0, 0), [0, 255, 255]);
        assert_eq!(direction_hue(0.0, 1.0), 90.0);
        assert_eq!(direction_hue(0.0, -1.0), 270.0);
    }

    #[test]
    fn opposite_vectors_differ_by_half_turn() {
        let dx = ScalarField::from_vec(2, 2, vec![1.0, -0.5, 0.2, 0.7]).unwrap();
        let dy = ScalarField::from_vec(2, 2, vec![0.3, 0.9, -1.0, 0.7]).unwrap();
        let f = VectorField::new(dx.clone(), dy.clone()).unwrap();
        let g = f.scale(-1.0);
        for i in 0..4 {
            let (a, b) = (dx.data()[i], dy.data()[i]);
            let h1 = direction_hue(a, b);
            let h2 = direction_hue(-a, -b);
            let diff = (h1 - h2).rem_euclid(360.0);
            assert!((diff - 180.0).abs() < 1e-9);
            // hue + 180 renders the opponent colour at equal saturation
            let s = (a.hypot(b) / 1.5).min(1.0);
            assert_eq!(
                flow_to_color(&g, Some(1.5)).pixels()[i],
                hsv_to_rgb(h1 + 180.0, s)
            );
        }
    }

    proptest! {
        #[test]
        fn joint_power_of_two_scaling_is_byte_identical(
            vals in proptest::collection::vec(-5.0f64..5.0, 18),
            exp in -4i32..5,
            max_mag in 0.1f64..6.0,
        ) {
            let dx = ScalarField::from_vec(3, 3, vals[..9].to_vec()).unwrap();
            let dy = ScalarField::from_vec(3, 3, vals[9..].to_vec()).unwrap();
            let f = VectorField::new(dx, dy).unwrap();
            let c = 2f64.powi(exp);
            prop_assert_eq!(
                flow_to_color(&f, Some(max_mag)),
                flow_to_color(&f.scale(c), Some(max_mag * c))
            );
        }

        #[test]
        fn saturation_monotone_in_magnitude(angle in 0.0f64..std::f64::consts::TAU, a in 0.0f64..2.0, b in 0.0f64..2.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let sat = |m: f64| {
                let f = VectorField::constant(1, 1, m * angle.cos(), m * angle.sin());
                let p = flow_to_color(&f, Some(1.5)).get(0, 0);
                // with value 1 the smallest channel is 255 * (1 - s)
                255 - *p.iter().min().unwrap()
            };
            prop_assert!(sat(lo) <= sat(hi));
        }
    }
}
