//! Renders a colour-wheel test pattern and prints the colour of each
//! cardinal direction.
//!
//! cargo run --example flow_colors -- [out.ppm]

use forcereg::flowviz::{direction_hue, flow_to_color};
use forcereg::io::write_ppm;
use forcereg::{ScalarField, VectorField};

fn main() -> forcereg::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "wheel.ppm".into());
    let n = 129;
    let half = (n / 2) as f64;
    // dx points up (toward row 0), dy points right.
    let wheel = VectorField::new(
        ScalarField::from_fn(n, n, |r, _| half - r as f64),
        ScalarField::from_fn(n, n, |_, c| c as f64 - half),
    )?;
    let img = flow_to_color(&wheel, Some(half));
    write_ppm(out.as_ref(), &img)?;

    let centre = n / 2;
    for (name, (r, c)) in [
        ("up", (0, centre)),
        ("right", (centre, n - 1)),
        ("down", (n - 1, centre)),
        ("left", (centre, 0)),
        ("still", (centre, centre)),
    ] {
        let (dx, dy) = (wheel.dx().get(r, c), wheel.dy().get(r, c));
        println!(
            "{name:<6} hue {:>5.1}  rgb {:?}",
            direction_hue(dx, dy),
            img.get(r, c)
        );
    }
    println!("wrote {out}");
    Ok(())
}
