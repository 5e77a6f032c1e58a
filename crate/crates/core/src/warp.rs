//! Backward warping with bilinear interpolation and its analytic adjoint.
//!
//! `warped(r, c) = image(r + dx(r, c), c + dy(r, c))`, with the sample
//! coordinate clamped to `[0, H-1] x [0, W-1]`.

use crate::error::Result;
use crate::field::{ScalarField, VectorField};
use crate::metrics::LabelMask;

/// Out-of-grid handling for sample coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    #[default]
    Clamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WarpConfig {
    pub boundary: Boundary,
}

/// Cell lookup along one axis: lower index, fractional offset, and whether
/// the raw coordinate fell outside the grid.
#[inline]
fn locate(coord: f64, len: usize) -> (usize, f64, bool) {
    let hi = (len - 1) as f64;
    let clamped = coord < 0.0 || coord > hi;
    let x = coord.clamp(0.0, hi);
    if len == 1 {
        return (0, 0.0, clamped);
    }
    let i0 = (x.floor() as usize).min(len - 2);
    (i0, x - i0 as f64, clamped)
}

/// Bilinear sample plus partial derivatives with respect to the (raw)
/// row and column coordinates. Derivatives along a clamped axis are 0.
#[inline]
pub(crate) fn sample_with_grad(image: &ScalarField, row: f64, col: f64) -> (f64, f64, f64) {
    let (h, w) = image.dims();
    let (r0, fr, r_clamped) = locate(row, h);
    let (c0, fc, c_clamped) = locate(col, w);
    let r1 = (r0 + 1).min(h - 1);
    let c1 = (c0 + 1).min(w - 1);
    let data = image.data();
    let p00 = data[r0 * w + c0];
    let p01 = data[r0 * w + c1];
    let p10 = data[r1 * w + c0];
    let p11 = data[r1 * w + c1];
    let top = p00 * (1.0 - fc) + p01 * fc;
    let bottom = p10 * (1.0 - fc) + p11 * fc;
    let value = top * (1.0 - fr) + bottom * fr;
    let d_row = if r_clamped || h == 1 {
        0.0
    } else {
        bottom - top
    };
    let d_col = if c_clamped || w == 1 {
        0.0
    } else {
        (p01 - p00) * (1.0 - fr) + (p11 - p10) * fr
    };
    (value, d_row, d_col)
}

/// Bilinear sample at a sub-pixel location with clamping.
#[inline]
pub fn sample_bilinear(image: &ScalarField, row: f64, col: f64) -> f64 {
    sample_with_grad(image, row, col).0
}

/// Samples `image` at each pixel displaced by `field`.
pub fn warp_bilinear(image: &ScalarField, field: &VectorField) -> Result<ScalarField> {
    image.check_same_dims(field.dx(), "warp_bilinear field")?;
    let (h, w) = image.dims();
    let (dx, dy) = (field.dx().data(), field.dy().data());
    let mut out = ScalarField::zeros(h, w);
    let buf = out.data_mut();
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            buf[i] = sample_bilinear(image, r as f64 + dx[i], c as f64 + dy[i]);
        }
    }
    Ok(out)
}

/// Gradient of `<upstream, warp_bilinear(image, field)>` with respect to
/// the field components.
pub fn warp_adjoint(
    image: &ScalarField,
    field: &VectorField,
    upstream: &ScalarField,
) -> Result<VectorField> {
    Ok(warp_with_adjoint(image, field, upstream)?.1)
}

/// Warped image and field gradient in a single pass.
pub(crate) fn warp_with_adjoint(
    image: &ScalarField,
    field: &VectorField,
    upstream: &ScalarField,
) -> Result<(ScalarField, VectorField)> {
    image.check_same_dims(field.dx(), "warp_adjoint field")?;
    image.check_same_dims(upstream, "warp_adjoint upstream")?;
    let (h, w) = image.dims();
    let (dx, dy) = (field.dx().data(), field.dy().data());
    let up = upstream.data();
    let mut warped = ScalarField::zeros(h, w);
    let mut gx = ScalarField::zeros(h, w);
    let mut gy = ScalarField::zeros(h, w);
    {
        let wb = warped.data_mut();
        for r in 0..h {
            for c in 0..w {
                let i = r * w + c;
                let (v, d_row, d_col) = sample_with_grad(image, r as f64 + dx[i], c as f64 + dy[i]);
                wb[i] = v;
                gx.data_mut()[i] = up[i] * d_row;
                gy.data_mut()[i] = up[i] * d_col;
            }
        }
    }
    Ok((warped, VectorField::new(gx, gy)?))
}

/// Nearest-neighbour backward warp of a label mask; sample coordinates are
/// rounded and clamped.
pub fn warp_labels(mask: &LabelMask, field: &VectorField) -> Result<LabelMask> {
    let (h, w) = mask.dims();
    let expected = ScalarField::zeros(h, w);
    expected.check_same_dims(field.dx(), "warp_labels field")?;
    let (dx, dy) = (field.dx().data(), field.dy().data());
    let mut labels = Vec::with_capacity(h * w);
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            let sr = (r as f64 + dx[i]).round().clamp(0.0, (h - 1) as f64) as usize;
            let sc = (c as f64 + dy[i]).round().clamp(0.0, (w - 1) as f64) as usize;
            labels.push(mask.get(sr, sc));
        }
    }
    LabelMask::new(h, w, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn smooth_image(h: usize, w: usize, rng: &mut ChaCha8Rng) -> ScalarField {
        let (a, b, p, q) = (
            rng.random_range(0.2..0.6),
            rng.random_range(0.2..0.6),
            rng.random_range(0.0..6.0),
            rng.random_range(0.0..6.0),
        );
        ScalarField::from_fn(h, w, |r, c| {
            0.5 + 0.25 * (a * r as f64 + p).sin() * (b * c as f64 + q).cos()
        })
    }

    #[test]
    fn zero_field_is_exact_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let img = ScalarField::from_fn(7, 5, |_, _| rng.random::<f64>());
        let out = warp_bilinear(&img, &VectorField::zeros(7, 5)).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn row_ramp_shift_with_clamp() {
        let img = ScalarField::from_fn(8, 8, |r, _| r as f64);
        let out = warp_bilinear(&img, &VectorField::constant(8, 8, 1.0, 0.0)).unwrap();
        for r in 0..8 {
            for c in 0..8 {
                assert_eq!(out.get(r, c), ((r + 1).min(7)) as f64);
            }
        }
    }

    #[test]
    fn constant_image_is_invariant() {
        let img = ScalarField::filled(6, 6, 0.42);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let dx = ScalarField::from_fn(6, 6, |_, _| rng.random_range(-3.0..3.0));
        let dy = ScalarField::from_fn(6, 6, |_, _| rng.random_range(-3.0..3.0));
        let field = VectorField::new(dx, dy).unwrap();
        let out = warp_bilinear(&img, &field).unwrap();
        assert!(out.data().iter().all(|&v| (v - 0.42).abs() < 1e-15));
        let g = warp_adjoint(&img, &field, &ScalarField::filled(6, 6, 1.0)).unwrap();
        assert!(g
            .dx()
            .data()
            .iter()
            .chain(g.dy().data())
            .all(|&v| v.abs() < 1e-15));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let img = ScalarField::zeros(4, 4);
        assert!(warp_bilinear(&img, &VectorField::zeros(4, 5)).is_err());
        assert!(warp_adjoint(&img, &VectorField::zeros(4, 4), &ScalarField::zeros(3, 4)).is_err());
    }

    #[test]
    fn zero_upstream_gives_zero_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let img = smooth_image(6, 6, &mut rng);
        let field = VectorField::constant(6, 6, 0.3, -0.2);
        let g = warp_adjoint(&img, &field, &ScalarField::zeros(6, 6)).unwrap();
        assert!(g.dx().data().iter().chain(g.dy().data()).all(|&v| v == 0.0));
    }

    #[test]
    fn adjoint_matches_finite_differences_6x6() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (h, w) = (6, 6);
        let img = smooth_image(h, w, &mut rng);
        let dx = ScalarField::from_fn(h, w, |_, _| rng.random_range(-0.4..0.4));
        let dy = ScalarField::from_fn(h, w, |_, _| rng.random_range(-0.4..0.4));
        let up = ScalarField::from_fn(h, w, |_, _| rng.random_range(-1.0..1.0));
        let field = VectorField::new(dx.clone(), dy.clone()).unwrap();
        let g = warp_adjoint(&img, &field, &up).unwrap();

        let objective = |dx: &ScalarField, dy: &ScalarField| {
            let f = VectorField::new(dx.clone(), dy.clone()).unwrap();
            let out = warp_bilinear(&img, &f).unwrap();
            out.data()
                .iter()
                .zip(up.data())
                .map(|(a, b)| a * b)
                .sum::<f64>()
        };
        let step = 1e-4;
        for r in 1..h - 1 {
            for c in 1..w - 1 {
                let i = r * w + c;
                let bump = |f: &ScalarField, s: f64| {
                    let mut v = f.data().to_vec();
                    v[i] += s;
                    ScalarField::from_vec(h, w, v).unwrap()
                };
                let fd_x = (objective(&bump(&dx, step), &dy) - objective(&bump(&dx, -step), &dy))
                    / (2.0 * step);
                let fd_y = (objective(&dx, &bump(&dy, step)) - objective(&dx, &bump(&dy, -step)))
                    / (2.0 * step);
                let gx = g.dx().data()[i];
                let gy = g.dy().data()[i];
                assert!(
                    (gx - fd_x).abs() <= 1e-4 * fd_x.abs().max(1e-3),
                    "{gx} vs {fd_x}"
                );
                assert!(
                    (gy - fd_y).abs() <= 1e-4 * fd_y.abs().max(1e-3),
                    "{gy} vs {fd_y}"
                );
            }
        }
    }

    #[test]
    fn clamped_axis_has_zero_derivative() {
        let img = ScalarField::from_fn(5, 5, |r, c| (r * 5 + c) as f64);
        let (_, d_row, d_col) = sample_with_grad(&img, -2.0, 1.5);
        assert_eq!(d_row, 0.0);
        assert_eq!(d_col, 1.0);
        let (_, d_row, d_col) = sample_with_grad(&img, 2.5, 9.0);
        assert_eq!(d_row, 5.0);
        assert_eq!(d_col, 0.0);
    }

    #[test]
    fn label_warp_follows_nearest_sample() {
        let mask = LabelMask::new(4, 1, vec![0, 1, 2, 0]).unwrap();
        let out = warp_labels(&mask, &VectorField::constant(4, 1, 1.0, 0.0)).unwrap();
        assert_eq!(out.labels(), &[1, 2, 0, 0]);
        let same = warp_labels(&mask, &VectorField::zeros(4, 1)).unwrap();
        assert_eq!(same, mask);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use rand::Rng;

        proptest! {
            #[test]
            fn output_within_image_range(seed in 0u64..1000, amp in 0.0f64..4.0) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let img = ScalarField::from_fn(7, 9, |_, _| rng.random::<f64>());
                let dx = ScalarField::from_fn(7, 9, |_, _| rng.random_range(-amp..=amp));
                let dy = ScalarField::from_fn(7, 9, |_, _| rng.random_range(-amp..=amp));
                let out = warp_bilinear(&img, &VectorField::new(dx, dy).unwrap()).unwrap();
                prop_assert!(out.min() >= img.min() - 1e-12);
                prop_assert!(out.max() <= img.max() + 1e-12);
            }

            #[test]
            fn far_pixels_do_not_affect_sample(seed in 0u64..1000, r in 0usize..8, c in 0usize..8) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let img = ScalarField::from_fn(8, 8, |_, _| rng.random::<f64>());
                let dx = ScalarField::from_fn(8, 8, |_, _| rng.random_range(-1.5..1.5));
                let dy = ScalarField::from_fn(8, 8, |_, _| rng.random_range(-1.5..1.5));
                let field = VectorField::new(dx.clone(), dy.clone()).unwrap();
                let base = warp_bilinear(&img, &field).unwrap();
                let i = r * 8 + c;
                let sr = (r as f64 + dx.data()[i]).clamp(0.0, 7.0);
                let sc = (c as f64 + dy.data()[i]).clamp(0.0, 7.0);
                let r0 = (sr.floor() as usize).min(6);
                let c0 = (sc.floor() as usize).min(6);
                let mut v = img.data().to_vec();
                for rr in 0..8 {
                    for cc in 0..8 {
                        let inside = (r0..=r0 + 1).contains(&rr) && (c0..=c0 + 1).contains(&cc);
                        if !inside {
                            v[rr * 8 + cc] = rng.random();
                        }
                    }
                }
                let changed = ScalarField::from_vec(8, 8, v).unwrap();
                let out = warp_bilinear(&changed, &field).unwrap();
                prop_assert_eq!(out.data()[i], base.data()[i]);
            }
        }
    }
}
