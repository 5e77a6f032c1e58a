//! Backward bilinear warping and its analytic adjoint, checked against a
//! central difference at one pixel.
//!
//! cargo run --example warp_adjoint

use forcereg::warp::{warp_adjoint, warp_bilinear};
use forcereg::{ScalarField, VectorField};

fn main() -> forcereg::Result<()> {
    let n = 12;
    let image = ScalarField::from_fn(n, n, |r, c| {
        0.5 + 0.4 * (0.5 * r as f64).sin() * (0.3 * c as f64).cos()
    });
    let field = VectorField::new(
        ScalarField::from_fn(n, n, |r, c| 0.3 + 0.05 * (r + c) as f64),
        ScalarField::filled(n, n, -0.45),
    )?;
    let upstream = ScalarField::from_fn(n, n, |r, c| ((r * n + c) % 5) as f64 - 2.0);
    let objective = |f: &VectorField| -> f64 {
        let w = warp_bilinear(&image, f).unwrap();
        w.data()
            .iter()
            .zip(upstream.data())
            .map(|(a, b)| a * b)
            .sum()
    };

    let grad = warp_adjoint(&image, &field, &upstream)?;
    let (r, c) = (4, 6);
    let h = 1e-5;
    let nudge = |delta: f64| {
        let mut dx = field.dx().data().to_vec();
        dx[r * n + c] += delta;
        VectorField::new(ScalarField::from_vec(n, n, dx).unwrap(), field.dy().clone()).unwrap()
    };
    let fd = (objective(&nudge(h)) - objective(&nudge(-h))) / (2.0 * h);
    println!(
        "d/d dx at ({r},{c}): adjoint {:.9}  central diff {fd:.9}",
        grad.dx().get(r, c)
    );

    let warped = warp_bilinear(&image, &field)?;
    println!("row 0 before: {:.3?}", &image.data()[..4]);
    println!("row 0 after:  {:.3?}", &warped.data()[..4]);
    Ok(())
}
