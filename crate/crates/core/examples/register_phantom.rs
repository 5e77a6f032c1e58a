//! Generates a two-vessel phantom pair and registers it with the
//! proportional force model, printing recovery statistics.
//!
//! cargo run --release --example register_phantom -- [seed]

use std::time::Instant;

use forcereg::metrics::{discrepancy_rate, endpoint_error};
use forcereg::phantom::{make_scene, render_pair};
use forcereg::{register_pair, DeltaForceVariant, ForcePair, PhantomConfig, SolverConfig};

fn main() -> forcereg::Result<()> {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    let scene = make_scene(&PhantomConfig::two_vessels(64, seed))?;
    let forces = ForcePair::new(3.0, 6.0)?;
    let pair = render_pair(&scene, forces, DeltaForceVariant::Normalized)?;

    let start = Instant::now();
    let result = register_pair(&pair.moving, &pair.target, forces, &SolverConfig::default())?;
    let elapsed = start.elapsed();

    let epe = endpoint_error(&result.field, &pair.d_true)?;
    let err = result
        .field
        .dx()
        .data()
        .iter()
        .zip(result.field.dy().data())
        .zip(pair.d_true.dx().data().iter().zip(pair.d_true.dy().data()))
        .map(|((x, y), (tx, ty))| (x - tx).hypot(y - ty));
    let within = err.filter(|e| *e <= 1.0).count() as f64 / pair.moving.len() as f64;
    let first = result.initial_loss();
    let last = result.final_loss();

    println!("df            {:.5}", result.df_value);
    println!("loss          {:.6e} -> {:.6e}", first.total, last.total);
    println!(
        "L_sim={:.6e} L_reg={:.6e} total={:.6e}",
        last.l_sim, last.l_reg, last.total
    );
    println!("mean EPE      {epe:.4} px");
    println!("within 1 px   {:.1}%", 100.0 * within);
    println!(
        "DR            {:.2}%",
        100.0 * discrepancy_rate(result.field.dx(), result.df_value)
    );
    println!("evaluations   {}", result.loss_trace.len());
    println!("wall time     {elapsed:.2?}");
    Ok(())
}
