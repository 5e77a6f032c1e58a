//! Force differential variants and the sinusoidal force embedding.
//!
//! cargo run --example force_embedding

use forcereg::force::{force_embed, force_pair_embed, fuse_pointwise, project_embedding};
use forcereg::{delta_force, DeltaForceVariant, ForcePair, ScalarField};

fn main() -> forcereg::Result<()> {
    println!(
        "{:>12} {:>10} {:>10} {:>10} {:>12}",
        "pair", "NORMALIZED", "RAW", "RATIO", "SIGNED_SQRT"
    );
    for (m, t) in [(2.0, 6.0), (6.0, 2.0), (4.0, 4.0), (20.0, 60.0), (0.0, 3.0)] {
        let pair = ForcePair::new(m, t)?;
        let row: Vec<String> = DeltaForceVariant::ALL
            .iter()
            .map(|&v| format!("{:>10.5}", delta_force(pair, v).unwrap()))
            .collect();
        println!("{:>12} {}", format!("({m}, {t})"), row.join(" "));
    }

    // d_model = 4: [sin f, cos f, sin(f/1000^0.5), cos(f/1000^0.5)]
    let single = force_embed(3.0, 4)?;
    println!("\nembed(3 N, d=4) = {:.6?}", single.values());

    let pair = ForcePair::new(3.0, 6.0)?;
    let joint = force_pair_embed(pair, 8)?;
    let projected = project_embedding(&joint, 3, 7)?;
    println!(
        "pair embedding ({} values) -> 3 channels {projected:.4?}",
        joint.len()
    );

    let features: Vec<ScalarField> = (0..3)
        .map(|k| ScalarField::filled(2, 2, 1.0 + k as f64))
        .collect();
    let fused = fuse_pointwise(&features, &projected)?;
    for (k, f) in fused.iter().enumerate() {
        println!(
            "channel {k}: feature {} x {:.4} = {:.4}",
            1 + k,
            projected[k],
            f.get(0, 0)
        );
    }
    Ok(())
}
