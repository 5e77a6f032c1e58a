//! Batch register-and-evaluate over a dataset.
//!
//! CSV schema, one row per (pair, mode, variant) in that order:
//!
//! ```text
//! pair_id,mode,df_variant,dsc_artery,dsc_vein,hd95_artery,hd95_vein,ssim,mse,neg_mi,dr_percent,epe,wall_ms,status
//! ```
//!
//! Missing metrics (no masks, no truth, failed job) are empty cells;
//! infinite distances are `inf`. `status` is `ok` or `error: <message>`.
//! After the rows comes a line `# summary` and a per-configuration median
//! table:
//!
//! ```text
//! mode,df_variant,n_ok,dsc_artery,dsc_vein,hd95_artery,hd95_vein,ssim,mse,neg_mi,dr_percent,epe
//! ```

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use super::dataset::{Dataset, PairRow};
use crate::error::{Error, Result};
use crate::force::DeltaForceVariant;
use crate::metrics::{evaluate, EvaluationInput, MetricReport};
use crate::physics::ModelKind;
use crate::solver::{register_pair, SolverConfig};
use crate::warp::warp_labels;

pub const THREADS_ENV: &str = "PADREG_THREADS";

pub const ROW_HEADER: [&str; 14] = [
    "pair_id",
    "mode",
    "df_variant",
    "dsc_artery",
    "dsc_vein",
    "hd95_artery",
    "hd95_vein",
    "ssim",
    "mse",
    "neg_mi",
    "dr_percent",
    "epe",
    "wall_ms",
    "status",
];

pub const SUMMARY_HEADER: [&str; 12] = [
    "mode",
    "df_variant",
    "n_ok",
    "dsc_artery",
    "dsc_vein",
    "hd95_artery",
    "hd95_vein",
    "ssim",
    "mse",
    "neg_mi",
    "dr_percent",
    "epe",
];

/// Metric columns shared by rows and summary, in CSV order.
const METRIC_COUNT: usize = 9;

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub pair_id: usize,
    pub mode: ModelKind,
    pub df_variant: DeltaForceVariant,
    pub outcome: std::result::Result<MetricReport, String>,
    pub wall_ms: f64,
}

impl BenchRow {
    /// `dsc_artery .. epe` as CSV-ready values.
    fn metrics(&self) -> [Option<f64>; METRIC_COUNT] {
        match &self.outcome {
            Ok(r) => [
                r.dsc_artery,
                r.dsc_vein,
                r.hd95_artery,
                r.hd95_vein,
                Some(r.ssim),
                Some(r.mse),
                Some(-r.mi),
                Some(100.0 * r.dr),
                r.epe,
            ],
            Err(_) => [None; METRIC_COUNT],
        }
    }
}

pub fn mode_name(kind: ModelKind) -> String {
    kind.as_str().to_ascii_lowercase()
}

/// Worker count after applying the `PADREG_THREADS` cap.
pub fn effective_workers(requested: usize) -> usize {
    let cap = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    let n = requested.max(1);
    cap.map_or(n, |c| n.min(c))
}

fn run_job(
    dataset: &Dataset,
    pair_id: usize,
    pair: &PairRow,
    cfg: &SolverConfig,
) -> Result<MetricReport> {
    let forces = dataset.forces_of(pair)?;
    let moving = dataset.frame(pair.moving_id)?;
    let target = dataset.frame(pair.target_id)?;
    let result = register_pair(&moving, &target, forces, cfg)?;
    let truth = dataset.truth(pair_id)?;
    let masks = match (dataset.mask(pair.moving_id)?, dataset.mask(pair.target_id)?) {
        (Some(m), Some(t)) => Some((warp_labels(&m, &result.field)?, t)),
        _ => None,
    };
    evaluate(&EvaluationInput {
        field: &result.field,
        df: result.df_value,
        warped: &result.warped,
        target: &target,
        truth: truth.as_ref(),
        masks: masks.as_ref().map(|(w, t)| (w, t)),
    })
}

/// Runs every pair × mode × variant on a pool of `workers` threads. Rows come
/// back ordered by `(pair_id, mode, variant)` with modes and variants in the
/// order given.
pub fn run_bench(
    dataset: &Dataset,
    modes: &[ModelKind],
    variants: &[DeltaForceVariant],
    base: &SolverConfig,
    workers: usize,
) -> Result<Vec<BenchRow>> {
    base.validate()?;
    let mut jobs = Vec::new();
    for (pair_id, pair) in dataset.pairs.iter().enumerate() {
        for &mode in modes {
            for &variant in variants {
                jobs.push((pair_id, pair, mode, variant));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(effective_workers(workers))
        .build()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Ok(pool.install(|| {
        jobs.par_iter()
            .map(|&(pair_id, pair, mode, variant)| {
                let cfg = base.clone().with_model(mode).with_variant(variant);
                let start = Instant::now();
                let outcome = run_job(dataset, pair_id, pair, &cfg).map_err(|e| e.to_string());
                BenchRow {
                    pair_id,
                    mode,
                    df_variant: variant,
                    outcome,
                    wall_ms: start.elapsed().as_secs_f64() * 1e3,
                }
            })
            .collect()
    }))
}

fn cell(v: Option<f64>) -> String {
    match v {
        None => String::new(),
        Some(x) if x == f64::INFINITY => "inf".into(),
        Some(x) if x == f64::NEG_INFINITY => "-inf".into(),
        Some(x) => format!("{x}"),
    }
}

/// Median of the present values; infinities sort last.
fn median(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        let (a, b) = (values[n / 2 - 1], values[n / 2]);
        if a == b {
            a
        } else {
            0.5 * (a + b)
        }
    })
}

pub fn write_bench_csv(out: &mut impl Write, rows: &[BenchRow]) -> Result<()> {
    let map = |e: csv::Error| Error::InvalidInput(e.to_string());
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    w.write_record(ROW_HEADER).map_err(map)?;
    for row in rows {
        let mut rec = vec![
            row.pair_id.to_string(),
            mode_name(row.mode),
            row.df_variant.as_str().to_owned(),
        ];
        rec.extend(row.metrics().into_iter().map(cell));
        rec.push(format!("{:.3}", row.wall_ms));
        rec.push(match &row.outcome {
            Ok(_) => "ok".to_owned(),
            Err(msg) => format!("error: {msg}"),
        });
        w.write_record(&rec).map_err(map)?;
    }

    w.write_record(["# summary"]).map_err(map)?;
    w.write_record(SUMMARY_HEADER).map_err(map)?;
    let mut configs: Vec<(ModelKind, DeltaForceVariant)> = Vec::new();
    for row in rows {
        if !configs.contains(&(row.mode, row.df_variant)) {
            configs.push((row.mode, row.df_variant));
        }
    }
    for (mode, variant) in configs {
        let group: Vec<&BenchRow> = rows
            .iter()
            .filter(|r| r.mode == mode && r.df_variant == variant && r.outcome.is_ok())
            .collect();
        let mut rec = vec![
            mode_name(mode),
            variant.as_str().to_owned(),
            group.len().to_string(),
        ];
        for k in 0..METRIC_COUNT {
            rec.push(cell(median(
                group.iter().filter_map(|r| r.metrics()[k]).collect(),
            )));
        }
        w.write_record(&rec).map_err(map)?;
    }
    w.flush()?;
    Ok(())
}

/// CSV text with the `wall_ms` column blanked, for run-to-run comparison.
pub fn strip_timing(csv_text: &str) -> String {
    let wall = ROW_HEADER
        .iter()
        .position(|&h| h == "wall_ms")
        .expect("column exists");
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(csv_text.as_bytes());
    let mut w = csv::WriterBuilder::new()
        .flexible(true)
        .from_writer(Vec::new());
    for rec in reader.records().flatten() {
        let mut cols: Vec<String> = rec.iter().map(str::to_owned).collect();
        if cols.len() == ROW_HEADER.len() && cols[0] != ROW_HEADER[0] {
            cols[wall].clear();
        }
        w.write_record(&cols).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

pub fn bench_to_path(
    dataset_dir: &Path,
    modes: &[ModelKind],
    variants: &[DeltaForceVariant],
    cfg: &SolverConfig,
    out_csv: &Path,
    workers: usize,
) -> Result<Vec<BenchRow>> {
    let dataset = Dataset::open(dataset_dir)?;
    let rows = run_bench(&dataset, modes, variants, cfg, workers)?;
    let mut buf = Vec::new();
    write_bench_csv(&mut buf, &rows)?;
    std::fs::write(out_csv, buf)?;
    Ok(rows)
}
