//! Scores a registration with every metric and prints the JSON report.
//!
//! cargo run --release --example metrics_report

use forcereg::metrics::{evaluate, EvaluationInput};
use forcereg::phantom::{make_scene, render_pair};
use forcereg::warp::warp_labels;
use forcereg::{register_pair, DeltaForceVariant, ForcePair, PhantomConfig, SolverConfig};

fn main() -> forcereg::Result<()> {
    let scene = make_scene(&PhantomConfig::two_vessels(64, 8))?;
    let forces = ForcePair::new(2.0, 7.0)?;
    let pair = render_pair(&scene, forces, DeltaForceVariant::Normalized)?;
    let result = register_pair(&pair.moving, &pair.target, forces, &SolverConfig::default())?;
    let warped_mask = warp_labels(&pair.masks_moving, &result.field)?;

    let report = evaluate(&EvaluationInput {
        field: &result.field,
        df: result.df_value,
        warped: &result.warped,
        target: &pair.target,
        truth: Some(&pair.d_true),
        masks: Some((&warped_mask, &pair.masks_target)),
    })?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("serializable")
    );

    // Before registration, for comparison.
    let identity = evaluate(&EvaluationInput {
        field: &forcereg::VectorField::zeros(64, 64),
        df: result.df_value,
        warped: &pair.moving,
        target: &pair.target,
        truth: Some(&pair.d_true),
        masks: Some((&pair.masks_moving, &pair.masks_target)),
    })?;
    println!(
        "unregistered: mse {:.5}, ssim {:.4}, epe {:.3}",
        identity.mse,
        identity.ssim,
        identity.epe.unwrap()
    );
    Ok(())
}
