//! Per-pair variational registration.
//!
//! The stiffness map (and, for the linear and quadratic models, the scalar
//! model coefficients) is optimized directly so that warping the moving
//! frame by the force-derived displacement matches the target frame:
//!
//! ```text
//! total = mse(warp(moving, D(K, ΔF)), target) + lambda * smoothness(D)
//! ```
//!
//! Optimization runs coarse-to-fine over a mean pyramid with Adam at every
//! level. `K` starts at zero (identity warp) on the coarsest level and is
//! upsampled with doubled values between levels, since pixel displacements
//! double with resolution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::force::{delta_force, DeltaForceVariant, ForcePair};
use crate::optim::Adam;
use crate::physics::{deformation_from_stiffness, DeformationModel, ModelKind, StiffnessMap};
use crate::warp::{warp_adjoint, warp_bilinear};

/// Smallest pyramid level the solver accepts.
pub const MIN_LEVEL_SIZE: usize = 8;

/// Window (in iterations) of the early-stopping test.
pub const STOP_WINDOW: usize = 10;

/// Model coefficients move at this fraction of the stiffness step.
pub const COEFF_STEP_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub levels: usize,
    pub iters_per_level: usize,
    pub step_size: f64,
    pub moment1: f64,
    pub moment2: f64,
    pub eps: f64,
    pub lambda_reg: f64,
    pub df_variant: DeltaForceVariant,
    pub model: DeformationModel,
    pub stop_rel_tol: f64,
    /// Recorded with the run; the solver itself draws no random numbers.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            levels: 3,
            iters_per_level: 300,
            step_size: 0.05,
            moment1: 0.9,
            moment2: 0.999,
            eps: 1e-8,
            lambda_reg: 0.03,
            df_variant: DeltaForceVariant::Normalized,
            model: DeformationModel::proportional(),
            stop_rel_tol: 1e-6,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.levels == 0 {
            return bad("levels must be >= 1");
        }
        if self.iters_per_level == 0 {
            return bad("iters_per_level must be >= 1");
        }
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return bad("step_size must be positive");
        }
        if !(0.0..1.0).contains(&self.moment1) || !(0.0..1.0).contains(&self.moment2) {
            return bad("moment1 and moment2 must lie in [0, 1)");
        }
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return bad("eps must be positive");
        }
        if !(self.lambda_reg.is_finite() && self.lambda_reg >= 0.0) {
            return bad("lambda_reg must be non-negative");
        }
        if !(self.stop_rel_tol.is_finite() && self.stop_rel_tol >= 0.0) {
            return bad("stop_rel_tol must be non-negative");
        }
        let m = &self.model;
        let coeffs = [
            m.alpha_x, m.alpha_y, m.beta_x, m.beta_y, m.gamma_x, m.gamma_y,
        ];
        if coeffs.iter().any(|c| !c.is_finite()) {
            return bad("model coefficients must be finite");
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)
            .map_err(|e| Error::InvalidConfig(format!("solver config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_model(mut self, tag: ModelKind) -> Self {
        self.model = DeformationModel::new(tag);
        self
    }

    pub fn with_variant(mut self, variant: DeltaForceVariant) -> Self {
        self.df_variant = variant;
        self
    }
}

/// One loss evaluation. The first sample of a trace is the zero field at
/// full resolution and the last is the returned result at full
/// resolution; everything between is the per-level optimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossSample {
    /// Pyramid level, 0 = full resolution.
    pub level: usize,
    pub iteration: usize,
    pub l_sim: f64,
    pub l_reg: f64,
    pub total: f64,
}

#[derive(Debug, Clone)]
pub struct RegistrationResult {
    pub stiffness: StiffnessMap,
    /// Model with its fitted coefficients.
    pub model: DeformationModel,
    pub field: VectorField,
    pub warped: ScalarField,
    pub loss_trace: Vec<LossSample>,
    pub df_value: f64,
}

impl RegistrationResult {
    pub fn initial_loss(&self) -> LossSample {
        self.loss_trace[0]
    }

    pub fn final_loss(&self) -> LossSample {
        *self.loss_trace.last().expect("trace is never empty")
    }
}

/// Similarity term: mean squared intensity difference.
pub fn loss_similarity(warped: &ScalarField, target: &ScalarField) -> Result<f64> {
    crate::metrics::mse(warped, target)
}

/// Smoothness term: mean over pixels of the squared norm of the forward
/// differences of both components.
pub fn loss_smoothness(field: &VectorField) -> Result<f64> {
    let (rx, cx) = field.dx().forward_diff()?;
    let (ry, cy) = field.dy().forward_diff()?;
    let sum: f64 = [&rx, &cx, &ry, &cy]
        .iter()
        .map(|f| f.data().iter().map(|v| v * v).sum::<f64>())
        .sum();
    Ok(sum / field.dx().len() as f64)
}

/// Adds `scale * d(smoothness of f)/df` into `grad`.
fn add_smoothness_grad(f: &ScalarField, scale: f64, grad: &mut [f64]) {
    let (h, w) = f.dims();
    let d = f.data();
    let k = 2.0 * scale / (h * w) as f64;
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            if r + 1 < h {
                let diff = d[i + w] - d[i];
                grad[i + w] += k * diff;
                grad[i] -= k * diff;
            }
            if c + 1 < w {
                let diff = d[i + 1] - d[i];
                grad[i + 1] += k * diff;
                grad[i] -= k * diff;
            }
        }
    }
}

/// Loss value and gradients at one point of the parameter space.
#[derive(Debug, Clone)]
pub struct ObjectiveEval {
    pub l_sim: f64,
    pub l_reg: f64,
    pub total: f64,
    pub grad: StiffnessMap,
    /// `[alpha_x, alpha_y, beta_x, beta_y, gamma_x, gamma_y]`, zero for
    /// coefficients the model does not use.
    pub grad_coeffs: [f64; 6],
    pub field: VectorField,
    pub warped: ScalarField,
}

/// Evaluates the registration objective and its gradient with respect to
/// the stiffness map and the model coefficients.
pub fn objective(
    moving: &ScalarField,
    target: &ScalarField,
    stiffness: &StiffnessMap,
    df: f64,
    model: &DeformationModel,
    lambda_reg: f64,
) -> Result<ObjectiveEval> {
    moving.check_same_dims(target, "objective images")?;
    moving.check_same_dims(stiffness.kx(), "objective stiffness")?;
    let n = moving.len() as f64;
    let field = deformation_from_stiffness(stiffness, df, model);

    let warped = warp_bilinear(moving, &field)?;
    let residual: Vec<f64> = warped
        .data()
        .iter()
        .zip(target.data())
        .map(|(w, t)| w - t)
        .collect();
    let l_sim = residual.iter().map(|r| r * r).sum::<f64>() / n;
    let upstream = ScalarField::from_vec(
        moving.height(),
        moving.width(),
        residual.iter().map(|r| 2.0 * r / n).collect(),
    )
    .map_err(|_| non_finite_input())?;
    let g_field = warp_adjoint(moving, &field, &upstream)?;
    let l_reg = loss_smoothness(&field)?;

    let (gdx_sim, gdy_sim) = g_field.into_parts();
    let mut gdx = gdx_sim.into_vec();
    let mut gdy = gdy_sim.into_vec();
    add_smoothness_grad(field.dx(), lambda_reg, &mut gdx);
    add_smoothness_grad(field.dy(), lambda_reg, &mut gdy);

    let mut grad_coeffs = [0.0; 6];
    let chain = |axis: usize, k: &ScalarField, gd: &[f64], coeffs: &mut [f64; 6]| -> Vec<f64> {
        let (_, beta, gamma) = model.coeffs(axis);
        match model.tag {
            ModelKind::Direct => gd.to_vec(),
            ModelKind::Proportional => gd.iter().map(|g| g * df).collect(),
            ModelKind::Linear | ModelKind::Quadratic => {
                let (mut sa, mut sb, mut sg) = (0.0, 0.0, 0.0);
                let out = k
                    .data()
                    .iter()
                    .zip(gd)
                    .map(|(&kv, &g)| {
                        sa += g;
                        sb += g * kv;
                        sg += g * kv * kv;
                        (2.0 * gamma * kv + beta) * df * g
                    })
                    .collect();
                coeffs[axis] = df * sa;
                coeffs[2 + axis] = df * sb;
                if model.tag == ModelKind::Quadratic {
                    coeffs[4 + axis] = df * sg;
                }
                out
            }
        }
    };
    let gkx = chain(0, stiffness.kx(), &gdx, &mut grad_coeffs);
    let gky = chain(1, stiffness.ky(), &gdy, &mut grad_coeffs);
    let (h, w) = moving.dims();
    let grad = StiffnessMap::new(
        ScalarField::from_vec(h, w, gkx).map_err(|_| non_finite_input())?,
        ScalarField::from_vec(h, w, gky).map_err(|_| non_finite_input())?,
    )?;
    Ok(ObjectiveEval {
        l_sim,
        l_reg,
        total: l_sim + lambda_reg * l_reg,
        grad,
        grad_coeffs,
        field,
        warped,
    })
}

fn non_finite_input() -> Error {
    Error::InvalidInput("non-finite value in objective evaluation".into())
}

fn coeff_vector(m: &DeformationModel) -> [f64; 6] {
    [
        m.alpha_x, m.alpha_y, m.beta_x, m.beta_y, m.gamma_x, m.gamma_y,
    ]
}

fn with_coeffs(mut m: DeformationModel, c: &[f64]) -> DeformationModel {
    m.alpha_x = c[0];
    m.alpha_y = c[1];
    m.beta_x = c[2];
    m.beta_y = c[3];
    m.gamma_x = c[4];
    m.gamma_y = c[5];
    m
}

/// Carries a level solution to the next finer grid. Displacements double,
/// so `K` and `alpha` double and `gamma` halves (keeps `gamma K^2` doubling).
fn prolong(
    stiffness: &StiffnessMap,
    model: &DeformationModel,
    dims: (usize, usize),
) -> Result<(StiffnessMap, DeformationModel)> {
    let kx = stiffness.kx().upsample2(dims.0, dims.1)?.scale(2.0);
    let ky = stiffness.ky().upsample2(dims.0, dims.1)?.scale(2.0);
    let mut m = *model;
    m.alpha_x *= 2.0;
    m.alpha_y *= 2.0;
    m.gamma_x *= 0.5;
    m.gamma_y *= 0.5;
    Ok((StiffnessMap::new(kx, ky)?, m))
}

fn check_intensities(img: &ScalarField, what: &str) -> Result<()> {
    if img.min() < 0.0 || img.max() > 1.0 {
        return Err(Error::InvalidInput(format!(
            "{what} intensities must lie in [0, 1] (got [{}, {}])",
            img.min(),
            img.max()
        )));
    }
    Ok(())
}

/// Image pyramid, finest first.
fn build_pyramid(img: &ScalarField, levels: usize) -> Result<Vec<ScalarField>> {
    let mut out = vec![img.clone()];
    for _ in 1..levels {
        let next = out.last().expect("non-empty").downsample2()?;
        out.push(next);
    }
    Ok(out)
}

fn pack(stiffness: &StiffnessMap) -> Vec<f64> {
    let mut p = stiffness.kx().data().to_vec();
    p.extend_from_slice(stiffness.ky().data());
    p
}

fn unpack(params: &[f64], dims: (usize, usize)) -> Result<StiffnessMap> {
    let n = dims.0 * dims.1;
    let kx = ScalarField::from_vec(dims.0, dims.1, params[..n].to_vec());
    let ky = ScalarField::from_vec(dims.0, dims.1, params[n..].to_vec());
    match (kx, ky) {
        (Ok(kx), Ok(ky)) => StiffnessMap::new(kx, ky),
        _ => Err(non_finite_input()),
    }
}

fn sample(level: usize, iteration: usize, eval: &ObjectiveEval) -> LossSample {
    LossSample {
        level,
        iteration,
        l_sim: eval.l_sim,
        l_reg: eval.l_reg,
        total: eval.total,
    }
}

/// Registers `moving` onto `target` given the contact forces of both frames.
pub fn register_pair(
    moving: &ScalarField,
    target: &ScalarField,
    forces: ForcePair,
    cfg: &SolverConfig,
) -> Result<RegistrationResult> {
    cfg.validate()?;
    moving.check_same_dims(target, "register_pair images")?;
    check_intensities(moving, "moving")?;
    check_intensities(target, "target")?;
    let df = delta_force(forces, cfg.df_variant)?;

    let movings = build_pyramid(moving, cfg.levels)?;
    let targets = build_pyramid(target, cfg.levels)?;
    let coarsest = movings.last().expect("non-empty").dims();
    if coarsest.0 < MIN_LEVEL_SIZE || coarsest.1 < MIN_LEVEL_SIZE {
        return Err(Error::InvalidConfig(format!(
            "{} levels reduce {}x{} to {}x{}, below the {MIN_LEVEL_SIZE}x{MIN_LEVEL_SIZE} minimum",
            cfg.levels,
            moving.height(),
            moving.width(),
            coarsest.0,
            coarsest.1
        )));
    }

    let (h, w) = moving.dims();
    let lambda = cfg.lambda_reg;
    let fits_coeffs = matches!(cfg.model.tag, ModelKind::Linear | ModelKind::Quadratic);
    let mut trace = Vec::new();
    let mut counter = 0usize;

    let zero = StiffnessMap::zeros(h, w);
    let initial = objective(moving, target, &zero, df, &cfg.model, lambda)?;
    trace.push(sample(0, counter, &initial));

    let mut stiffness = StiffnessMap::zeros(coarsest.0, coarsest.1);
    let mut model = cfg.model;

    for level in (0..cfg.levels).rev() {
        let (mv, tg) = (&movings[level], &targets[level]);
        let dims = mv.dims();
        if stiffness.dims() != dims {
            let (k, m) = prolong(&stiffness, &model, dims)?;
            stiffness = k;
            model = m;
        }

        let mut params = pack(&stiffness);
        let mut coeffs = coeff_vector(&model);
        let mut opt = Adam::new(
            params.len(),
            cfg.step_size,
            cfg.moment1,
            cfg.moment2,
            cfg.eps,
        );
        let mut coeff_opt = Adam::new(
            6,
            cfg.step_size * COEFF_STEP_FRACTION,
            cfg.moment1,
            cfg.moment2,
            cfg.eps,
        );
        let mut history: Vec<f64> = Vec::with_capacity(cfg.iters_per_level + 1);
        let mut best: Option<(f64, Vec<f64>, [f64; 6])> = None;

        for it in 0..=cfg.iters_per_level {
            counter += 1;
            let current = unpack(&params, dims).map_err(|_| Error::NonFiniteLoss {
                level,
                iteration: counter,
                trace: trace.clone(),
            })?;
            let m = with_coeffs(model, &coeffs);
            let eval = objective(mv, tg, &current, df, &m, lambda)?;
            trace.push(sample(level, counter, &eval));
            if !eval.total.is_finite() {
                return Err(Error::NonFiniteLoss {
                    level,
                    iteration: counter,
                    trace,
                });
            }
            if best.as_ref().is_none_or(|(b, _, _)| eval.total < *b) {
                best = Some((eval.total, params.clone(), coeffs));
            }
            history.push(eval.total);
            if it == cfg.iters_per_level {
                break;
            }
            if it >= STOP_WINDOW {
                let prev = history[it - STOP_WINDOW];
                let decrease = if prev == 0.0 {
                    0.0
                } else {
                    (prev - eval.total) / prev.abs()
                };
                if decrease < cfg.stop_rel_tol {
                    break;
                }
            }
            let mut grads = eval.grad.kx().data().to_vec();
            grads.extend_from_slice(eval.grad.ky().data());
            opt.update(&mut params, &grads);
            if fits_coeffs {
                coeff_opt.update(&mut coeffs, &eval.grad_coeffs);
            }
        }

        let (_, p, c) = best.expect("at least one evaluation per level");
        stiffness = unpack(&p, dims)?;
        model = with_coeffs(model, &c);
    }

    let mut final_eval = objective(moving, target, &stiffness, df, &model, lambda)?;
    if final_eval.total > initial.total {
        stiffness = zero;
        model = cfg.model;
        final_eval = initial;
    }
    counter += 1;
    trace.push(sample(0, counter, &final_eval));

    Ok(RegistrationResult {
        field: deformation_from_stiffness(&stiffness, df, &model),
        stiffness,
        model,
        warped: final_eval.warped,
        loss_trace: trace,
        df_value: df,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn smooth(h: usize, w: usize, rng: &mut ChaCha8Rng) -> ScalarField {
        let (a, b, p, q) = (
            rng.random_range(0.3..0.8),
            rng.random_range(0.3..0.8),
            rng.random_range(0.0..6.0),
            rng.random_range(0.0..6.0),
        );
        ScalarField::from_fn(h, w, |r, c| {
            0.5 + 0.3 * (a * r as f64 + p).sin() * (b * c as f64 + q).cos()
        })
    }

    #[test]
    fn similarity_examples() {
        let a = ScalarField::from_vec(1, 2, vec![0.0, 0.5]).unwrap();
        let b = ScalarField::from_vec(1, 2, vec![0.5, 1.0]).unwrap();
        assert_eq!(loss_similarity(&a, &b).unwrap(), 0.25);
        assert_eq!(loss_similarity(&a, &a).unwrap(), 0.0);
        let z = ScalarField::zeros(2, 2);
        assert_eq!(
            loss_similarity(&z, &ScalarField::filled(2, 2, 1.0)).unwrap(),
            1.0
        );
        assert!(loss_similarity(&a, &z).is_err());
    }

    #[test]
    fn smoothness_examples() {
        assert_eq!(
            loss_smoothness(&VectorField::constant(5, 5, 1.0, -2.0)).unwrap(),
            0.0
        );
        let dx = ScalarField::from_fn(4, 4, |r, _| r as f64);
        let f = VectorField::new(dx, ScalarField::zeros(4, 4)).unwrap();
        assert_eq!(loss_smoothness(&f).unwrap(), 0.75);
        let base = loss_smoothness(&f).unwrap();
        for c in [2.0, 3.0] {
            let scaled = loss_smoothness(&f.scale(c)).unwrap();
            assert!((scaled - c * c * base).abs() < 1e-12);
        }
        assert!(loss_smoothness(&VectorField::zeros(1, 4)).is_err());
    }

    #[test]
    fn smoothness_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = ScalarField::from_fn(5, 6, |_, _| rng.random_range(-1.0..1.0));
        let mut g = vec![0.0; f.len()];
        add_smoothness_grad(&f, 1.0, &mut g);
        let loss = |f: &ScalarField| {
            loss_smoothness(&VectorField::new(f.clone(), ScalarField::zeros(5, 6)).unwrap())
                .unwrap()
        };
        for i in 0..f.len() {
            let mut p = f.data().to_vec();
            let mut m = f.data().to_vec();
            p[i] += 1e-5;
            m[i] -= 1e-5;
            let fd = (loss(&ScalarField::from_vec(5, 6, p).unwrap())
                - loss(&ScalarField::from_vec(5, 6, m).unwrap()))
                / 2e-5;
            assert!((fd - g[i]).abs() < 1e-8, "{fd} vs {}", g[i]);
        }
    }

    /// Central differences of the full objective, one parameter at a time.
    fn check_objective_gradient(model: DeformationModel, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (h, w) = (8, 8);
        let moving = smooth(h, w, &mut rng);
        let target = smooth(h, w, &mut rng);
        let kx = ScalarField::from_fn(h, w, |_, _| rng.random_range(-0.6..0.6));
        let ky = ScalarField::from_fn(h, w, |_, _| rng.random_range(-0.6..0.6));
        let k = StiffnessMap::new(kx, ky).unwrap();
        let df = 0.7;
        let lambda = 0.03;
        let eval = objective(&moving, &target, &k, df, &model, lambda).unwrap();

        let total_at = |k: &StiffnessMap, m: &DeformationModel| {
            objective(&moving, &target, k, df, m, lambda).unwrap().total
        };
        let step = 1e-6;
        let mut num = 0.0;
        let mut den = 0.0;
        let params = pack(&k);
        let mut analytic = pack(&eval.grad);
        analytic.truncate(params.len());
        for i in 0..params.len() {
            let mut p = params.clone();
            p[i] += step;
            let plus = total_at(&unpack(&p, (h, w)).unwrap(), &model);
            p[i] -= 2.0 * step;
            let minus = total_at(&unpack(&p, (h, w)).unwrap(), &model);
            let fd = (plus - minus) / (2.0 * step);
            num += (fd - analytic[i]).powi(2);
            den += fd * fd;
        }
        let rel = (num / den).sqrt();
        assert!(rel < 1e-3, "relative gradient error {rel}");

        let c0 = coeff_vector(&model);
        for j in 0..6 {
            let mut c = c0;
            c[j] += step;
            let plus = total_at(&k, &with_coeffs(model, &c));
            c[j] -= 2.0 * step;
            let minus = total_at(&k, &with_coeffs(model, &c));
            let fd = (plus - minus) / (2.0 * step);
            let g = eval.grad_coeffs[j];
            assert!(
                (fd - g).abs() <= 1e-3 * fd.abs().max(1e-6),
                "coeff {j}: {g} vs {fd}"
            );
        }
    }

    #[test]
    fn objective_gradient_proportional() {
        for seed in 0..5 {
            check_objective_gradient(DeformationModel::proportional(), seed);
        }
    }

    #[test]
    fn objective_gradient_other_models() {
        let linear = DeformationModel {
            alpha_x: 0.1,
            alpha_y: -0.05,
            beta_x: 0.8,
            beta_y: 1.2,
            ..DeformationModel::new(ModelKind::Linear)
        };
        let quadratic = DeformationModel {
            gamma_x: 0.3,
            gamma_y: -0.2,
            ..linear
        };
        let quadratic = DeformationModel {
            tag: ModelKind::Quadratic,
            ..quadratic
        };
        check_objective_gradient(linear, 21);
        check_objective_gradient(quadratic, 22);
        check_objective_gradient(DeformationModel::direct(), 23);
    }

    #[test]
    fn identical_frames_stay_at_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let img = smooth(32, 32, &mut rng);
        let forces = ForcePair::new(2.0, 7.0).unwrap();
        let res = register_pair(&img, &img, forces, &SolverConfig::default()).unwrap();
        let mean_abs = res.field.magnitude().mean();
        assert!(mean_abs <= 1e-3);
        assert!(res.final_loss().total <= res.initial_loss().total);
    }

    #[test]
    fn recovers_uniform_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let moving = smooth(32, 32, &mut rng);
        let forces = ForcePair::new(1.0, 3.0).unwrap();
        let df = delta_force(forces, DeltaForceVariant::Normalized).unwrap();
        let truth = VectorField::constant(32, 32, 0.8, -0.3);
        let target = crate::warp::warp_bilinear(&moving, &truth).unwrap();
        let res = register_pair(&moving, &target, forces, &SolverConfig::default()).unwrap();
        assert_eq!(res.df_value, df);
        let epe = crate::metrics::endpoint_error(&res.field, &truth).unwrap();
        assert!(epe < 0.15, "epe {epe}");
        let expected = deformation_from_stiffness(&res.stiffness, df, &res.model);
        assert_eq!(expected, res.field);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig {
            moment1: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let img = ScalarField::filled(16, 16, 0.5);
        let forces = ForcePair::new(1.0, 2.0).unwrap();
        // 16 -> 8 -> 4 violates the minimum level size
        assert!(matches!(
            register_pair(&img, &img, forces, &SolverConfig::default()),
            Err(Error::InvalidConfig(_))
        ));
        let two = SolverConfig {
            levels: 2,
            ..Default::default()
        };
        assert!(register_pair(&img, &img, forces, &two).is_ok());
        let bright = ScalarField::filled(16, 16, 1.5);
        assert!(matches!(
            register_pair(&bright, &img, forces, &two),
            Err(Error::InvalidInput(_))
        ));
        let zero = ForcePair::new(0.0, 0.0).unwrap();
        assert!(matches!(
            register_pair(&img, &img, zero, &two),
            Err(Error::DegenerateForcePair { .. })
        ));
    }

    #[test]
    fn config_json() {
        let cfg = SolverConfig::from_json(
            r#"{"levels":2,"iters_per_level":50,"df_variant":"RAW","model":{"tag":"DIRECT"}}"#,
        )
        .unwrap();
        assert_eq!(cfg.levels, 2);
        assert_eq!(cfg.df_variant, DeltaForceVariant::Raw);
        assert_eq!(cfg.model.tag, ModelKind::Direct);
        assert_eq!(cfg.lambda_reg, 0.03);
        assert!(SolverConfig::from_json(r#"{"levels":2,"learning_rate":1}"#).is_err());
        let round: SolverConfig =
            serde_json::from_str(&serde_json::to_string(&SolverConfig::default()).unwrap())
                .unwrap();
        assert_eq!(round, SolverConfig::default());
    }
}
