//! Compares deformation models and force-differential variants over a set
//! of seeded phantom pairs: discrepancy rate of the proportional model
//! against direct field estimation, and endpoint error of each variant
//! when the solver sees forces rescaled by an unknown per-pair factor.
//!
//! cargo run --release --example ablation_trends -- [n_pairs]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use forcereg::metrics::{discrepancy_rate, endpoint_error};
use forcereg::phantom::{make_scene, render_pair, RenderedPair};
use forcereg::{
    register_pair, DeltaForceVariant, ForcePair, ModelKind, PhantomConfig, SolverConfig,
};

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn main() -> forcereg::Result<()> {
    let n: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(20);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut pairs: Vec<(ForcePair, RenderedPair, f64)> = Vec::new();
    for seed in 0..n {
        let f_m = rng.random_range(1.0..5.0);
        let f_t = f_m + rng.random_range(2.0..6.0);
        let forces = ForcePair::new(f_m, f_t)?;
        let scene = make_scene(&PhantomConfig::two_vessels(64, seed))?;
        let rescale = rng.random_range(0.5..3.0);
        pairs.push((
            forces,
            render_pair(&scene, forces, DeltaForceVariant::Normalized)?,
            rescale,
        ));
    }

    println!("pair  DR_prop%  DR_direct%  EPE_norm  EPE_raw");
    let (mut drp, mut drd, mut en, mut er) = (vec![], vec![], vec![], vec![]);
    for (i, (forces, pair, rescale)) in pairs.iter().enumerate() {
        let solve = |model, variant, f: ForcePair| {
            let cfg = SolverConfig::default()
                .with_model(model)
                .with_variant(variant);
            register_pair(&pair.moving, &pair.target, f, &cfg)
        };
        let prop = solve(
            ModelKind::Proportional,
            DeltaForceVariant::Normalized,
            *forces,
        )?;
        let direct = solve(ModelKind::Direct, DeltaForceVariant::Normalized, *forces)?;
        let scaled = forces.scaled(*rescale);
        let norm = solve(
            ModelKind::Proportional,
            DeltaForceVariant::Normalized,
            scaled,
        )?;
        let raw = solve(ModelKind::Proportional, DeltaForceVariant::Raw, scaled)?;
        let a = 100.0 * discrepancy_rate(prop.field.dx(), pair.df_true);
        let b = 100.0 * discrepancy_rate(direct.field.dx(), pair.df_true);
        let c = endpoint_error(&norm.field, &pair.d_true)?;
        let d = endpoint_error(&raw.field, &pair.d_true)?;
        println!("{i:>4}  {a:>8.2}  {b:>10.2}  {c:>8.4}  {d:>7.4}");
        drp.push(a);
        drd.push(b);
        en.push(c);
        er.push(d);
    }
    println!(
        "median {:>7.2}  {:>10.2}  {:>8.4}  {:>7.4}",
        median(drp),
        median(drd),
        median(en),
        median(er)
    );
    Ok(())
}
