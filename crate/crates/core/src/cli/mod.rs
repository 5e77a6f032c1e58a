//! Command-line front end. Each subcommand is a plain function returning
//! [`Result`]; [`run`] maps errors to exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 2 | I/O, parse, format or configuration error (also bad flags) |
//! | 3 | solver failure (non-finite loss) |
//! | 4 | dimension mismatch |

pub mod bench;
pub mod dataset;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::flowviz::flow_to_color;
use crate::force::{DeltaForceVariant, ForcePair};
use crate::io::{
    read_flo, read_pgm_image, read_pgm_mask, write_flo, write_pgm_image, write_pgm_mask, write_ppm,
    PgmDepth,
};
use crate::metrics::{evaluate, EvaluationInput, MetricReport};
use crate::physics::ModelKind;
use crate::solver::{register_pair, RegistrationResult, SolverConfig};
use crate::warp::warp_labels;

pub use bench::{bench_to_path, run_bench, strip_timing, write_bench_csv, BenchRow};
pub use dataset::{write_phantom_dataset, Dataset, Manifest, PhantomDatasetConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_DIMENSION: i32 = 4;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NonFiniteLoss { .. } => EXIT_SOLVER,
        Error::DimensionMismatch { .. } | Error::DimensionTooSmall { .. } => EXIT_DIMENSION,
        _ => EXIT_IO,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "forcereg",
    version,
    about = "Force-constrained deformable registration"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic dataset with ground truth.
    Phantom(PhantomArgs),
    /// Register one frame pair.
    Register(RegisterArgs),
    /// Score a registration result.
    Evaluate(EvaluateArgs),
    /// Render a displacement field as a colour image.
    Viz(VizArgs),
    /// Register and score every pair of a dataset.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct PhantomArgs {
    /// JSON dataset config; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub n_pairs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RegisterArgs {
    #[arg(long)]
    pub moving: PathBuf,
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long)]
    pub f_moving: f64,
    #[arg(long)]
    pub f_target: f64,
    /// physics (= proportional), linear, quadratic or direct; overrides
    /// the solver config.
    #[arg(long)]
    pub mode: Option<ModelKind>,
    /// Overrides the solver config.
    #[arg(long)]
    pub df_variant: Option<DeltaForceVariant>,
    /// JSON solver config; defaults apply when omitted.
    #[arg(long)]
    pub solver_config: Option<PathBuf>,
    #[arg(long)]
    pub out_field: PathBuf,
    #[arg(long)]
    pub out_stiffness: PathBuf,
    #[arg(long)]
    pub out_warped: PathBuf,
    /// Label mask of the moving frame, warped alongside the image.
    #[arg(long, requires = "out_mask")]
    pub moving_mask: Option<PathBuf>,
    #[arg(long, requires = "moving_mask")]
    pub out_mask: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub field: PathBuf,
    #[arg(long)]
    pub truth_field: Option<PathBuf>,
    #[arg(long)]
    pub warped: PathBuf,
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long, requires = "mask_target")]
    pub mask_warped: Option<PathBuf>,
    #[arg(long, requires = "mask_warped")]
    pub mask_target: Option<PathBuf>,
    /// Force differential used for the discrepancy rate.
    #[arg(long, allow_hyphen_values = true)]
    pub df: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VizArgs {
    #[arg(long)]
    pub field: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub max_mag: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "physics,direct")]
    pub modes: Vec<ModelKind>,
    #[arg(long, value_delimiter = ',', default_value = "normalized")]
    pub df_variants: Vec<DeltaForceVariant>,
    #[arg(long)]
    pub solver_config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Capped by PADREG_THREADS when set.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

fn load_solver_config(path: Option<&Path>) -> Result<SolverConfig> {
    match path {
        Some(p) => SolverConfig::from_json(&crate::io::read_text(p)?),
        None => Ok(SolverConfig::default()),
    }
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| Error::InvalidInput(e.to_string()))?;
    text.push('\n');
    crate::io::write_bytes(path, text.as_bytes())
}

pub fn cmd_phantom(args: &PhantomArgs) -> Result<Manifest> {
    let cfg = match &args.config {
        Some(p) => PhantomDatasetConfig::from_json(&crate::io::read_text(p)?)?,
        None => PhantomDatasetConfig::default(),
    };
    write_phantom_dataset(&cfg, &args.out_dir, args.n_pairs, args.seed)
}

pub fn loss_line(result: &RegistrationResult) -> String {
    let last = result.final_loss();
    format!(
        "L_sim={} L_reg={} total={}",
        last.l_sim, last.l_reg, last.total
    )
}

pub fn cmd_register(args: &RegisterArgs) -> Result<RegistrationResult> {
    let mut cfg = load_solver_config(args.solver_config.as_deref())?;
    if let Some(mode) = args.mode {
        cfg = cfg.with_model(mode);
    }
    if let Some(variant) = args.df_variant {
        cfg = cfg.with_variant(variant);
    }
    let forces = ForcePair::new(args.f_moving, args.f_target)?;
    let moving = read_pgm_image(&args.moving)?;
    let target = read_pgm_image(&args.target)?;
    let result = register_pair(&moving, &target, forces, &cfg)?;
    write_flo(&args.out_field, &result.field)?;
    write_flo(&args.out_stiffness, &result.stiffness.clone().into_field())?;
    write_pgm_image(&args.out_warped, &result.warped, PgmDepth::Sixteen)?;
    if let (Some(mask_in), Some(mask_out)) = (&args.moving_mask, &args.out_mask) {
        let warped = warp_labels(&read_pgm_mask(mask_in)?, &result.field)?;
        write_pgm_mask(mask_out, &warped)?;
    }
    Ok(result)
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<MetricReport> {
    let field = read_flo(&args.field)?;
    let truth: Option<VectorField> = args.truth_field.as_deref().map(read_flo).transpose()?;
    let warped = read_pgm_image(&args.warped)?;
    let target = read_pgm_image(&args.target)?;
    let masks = match (&args.mask_warped, &args.mask_target) {
        (Some(a), Some(b)) => Some((read_pgm_mask(a)?, read_pgm_mask(b)?)),
        _ => None,
    };
    if let Some((a, b)) = &masks {
        for m in [a, b] {
            if m.dims() != target.dims() {
                return Err(Error::DimensionMismatch {
                    what: "evaluate masks",
                    expected: target.dims(),
                    actual: m.dims(),
                });
            }
        }
    }
    if !args.df.is_finite() {
        return Err(Error::InvalidInput(format!(
            "df must be finite, got {}",
            args.df
        )));
    }
    let report = evaluate(&EvaluationInput {
        field: &field,
        df: args.df,
        warped: &warped,
        target: &target,
        truth: truth.as_ref(),
        masks: masks.as_ref().map(|(a, b)| (a, b)),
    })?;
    write_json(&args.out, &report)?;
    Ok(report)
}

pub fn cmd_viz(args: &VizArgs) -> Result<()> {
    if let Some(m) = args.max_mag {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::InvalidInput(format!(
                "max-mag must be positive, got {m}"
            )));
        }
    }
    let field = read_flo(&args.field)?;
    write_ppm(&args.out, &flow_to_color(&field, args.max_mag))
}

pub fn cmd_bench(args: &BenchArgs) -> Result<Vec<BenchRow>> {
    let cfg = load_solver_config(args.solver_config.as_deref())?;
    bench_to_path(
        &args.dataset,
        &args.modes,
        &args.df_variants,
        &cfg,
        &args.out,
        args.workers,
    )
}

/// Runs a parsed command, printing diagnostics to stderr, and returns the
/// process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome = match &cli.command {
        Command::Phantom(a) => cmd_phantom(a).map(|_| ()),
        Command::Register(a) => cmd_register(a).map(|r| println!("{}", loss_line(&r))),
        Command::Evaluate(a) => cmd_evaluate(a).map(|_| ()),
        Command::Viz(a) => cmd_viz(a),
        Command::Bench(a) => cmd_bench(a).map(|_| ()),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("forcereg: {e}");
            exit_code(&e)
        }
    }
}

/// Parses `argv` and runs it. Usage errors print clap's message and yield 2.
pub fn run_from<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(argv) {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_IO
            } else {
                EXIT_OK
            }
        }
    }
}
