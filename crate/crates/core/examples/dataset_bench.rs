//! Writes a small phantom dataset and benchmarks two modes and two force
//! variants over it, as `forcereg phantom` + `forcereg bench` would.
//!
//! cargo run --release --example dataset_bench -- [n_pairs] [workers]

use forcereg::cli::{
    run_bench, write_bench_csv, write_phantom_dataset, Dataset, PhantomDatasetConfig,
};
use forcereg::{DeltaForceVariant, ModelKind, SolverConfig};

fn main() -> forcereg::Result<()> {
    let mut args = std::env::args().skip(1);
    let n_pairs = args.next().and_then(|s| s.parse().ok()).unwrap_or(4);
    let workers = args.next().and_then(|s| s.parse().ok()).unwrap_or(4);

    let dir = std::env::temp_dir().join("forcereg_dataset_bench");
    let manifest = write_phantom_dataset(&PhantomDatasetConfig::default(), &dir, n_pairs, 1)?;
    for p in &manifest.pairs {
        println!(
            "pair {}: {:.2} N -> {:.2} N (df {:+.4})",
            p.pair_id, p.f_moving, p.f_target, p.df_true
        );
    }

    let dataset = Dataset::open(&dir)?;
    let rows = run_bench(
        &dataset,
        &[ModelKind::Proportional, ModelKind::Direct],
        &[DeltaForceVariant::Normalized, DeltaForceVariant::Raw],
        &SolverConfig::default(),
        workers,
    )?;
    write_bench_csv(&mut std::io::stdout().lock(), &rows)?;
    Ok(())
}
