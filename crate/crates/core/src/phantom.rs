//! Synthetic force-paired frames with exact ground truth.
//!
//! A scene is a compliance map that decays with depth (tissue near the
//! probe moves most, tissue at depth is anchored), circular vessel
//! inclusions that are softer (veins) or stiffer (arteries) than the
//! background, and a speckled rest image. Pairs are rendered with the
//! engine's own proportional model, so the registration problem has an
//! exact solution.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::force::{delta_force, DeltaForceVariant, ForcePair};
use crate::metrics::{LabelMask, LABEL_ARTERY, LABEL_VEIN};
use crate::physics::{deformation_from_stiffness, DeformationModel, StiffnessMap};
use crate::warp::{warp_bilinear, warp_labels};

pub const BACKGROUND_INTENSITY: f64 = 0.5;
pub const ARTERY_INTENSITY: f64 = 0.15;
pub const VEIN_INTENSITY: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inclusion {
    pub center_row: f64,
    pub center_col: f64,
    pub radius: f64,
    /// Multiplies the local compliance: > 1 is softer, < 1 stiffer.
    pub stiffness_factor: f64,
    /// 1 = artery, 2 = vein.
    pub label: u8,
}

impl Inclusion {
    fn contains(&self, row: usize, col: usize) -> bool {
        let dr = row as f64 - self.center_row;
        let dc = col as f64 - self.center_col;
        dr * dr + dc * dc <= self.radius * self.radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE", deny_unknown_fields)]
pub enum Speckle {
    #[default]
    None,
    /// Unit-mean log-normal factor `exp(sigma * z - sigma^2 / 2)` per pixel.
    Multiplicative { sigma: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhantomConfig {
    pub height: usize,
    pub width: usize,
    pub inclusions: Vec<Inclusion>,
    /// Compliance at the surface, in pixels per unit force differential.
    pub base_kx: f64,
    /// Fraction of `base_kx` left at the bottom row.
    pub depth_decay: f64,
    /// Lateral compliance relative to `kx`.
    pub ky_scale: f64,
    pub speckle: Speckle,
    pub blur_sigma: f64,
    pub seed: u64,
}

impl Default for PhantomConfig {
    fn default() -> Self {
        Self {
            height: 64,
            width: 64,
            inclusions: Vec::new(),
            base_kx: 3.0,
            depth_decay: 0.3,
            ky_scale: 0.1,
            speckle: Speckle::Multiplicative { sigma: 0.3 },
            blur_sigma: 1.0,
            seed: 0,
        }
    }
}

impl PhantomConfig {
    /// A `size x size` scene with one stiff artery and one soft vein.
    pub fn two_vessels(size: usize, seed: u64) -> Self {
        let s = size as f64;
        Self {
            height: size,
            width: size,
            inclusions: vec![
                Inclusion {
                    center_row: 0.45 * s,
                    center_col: 0.3 * s,
                    radius: 0.12 * s,
                    stiffness_factor: 0.3,
                    label: LABEL_ARTERY,
                },
                Inclusion {
                    center_row: 0.5 * s,
                    center_col: 0.68 * s,
                    radius: 0.15 * s,
                    stiffness_factor: 2.0,
                    label: LABEL_VEIN,
                },
            ],
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.height < 2 || self.width < 2 {
            return bad(format!(
                "phantom must be at least 2x2, got {}x{}",
                self.height, self.width
            ));
        }
        if !(self.base_kx.is_finite() && self.base_kx > 0.0) {
            return bad("base_kx must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.depth_decay) {
            return bad("depth_decay must lie in [0, 1]".into());
        }
        if !(self.ky_scale.is_finite() && self.ky_scale >= 0.0) {
            return bad("ky_scale must be non-negative".into());
        }
        if !(self.blur_sigma.is_finite() && self.blur_sigma >= 0.0) {
            return bad("blur_sigma must be non-negative".into());
        }
        if let Speckle::Multiplicative { sigma } = self.speckle {
            if !(sigma.is_finite() && sigma > 0.0) {
                return bad("speckle sigma must be positive".into());
            }
        }
        let (hmax, wmax) = ((self.height - 1) as f64, (self.width - 1) as f64);
        for (i, inc) in self.inclusions.iter().enumerate() {
            if inc.label != LABEL_ARTERY && inc.label != LABEL_VEIN {
                return bad(format!("inclusion {i}: label must be 1 or 2"));
            }
            if !(inc.stiffness_factor.is_finite() && inc.stiffness_factor > 0.0) {
                return bad(format!("inclusion {i}: stiffness_factor must be positive"));
            }
            if !(inc.radius.is_finite() && inc.radius > 0.0) {
                return bad(format!("inclusion {i}: radius must be positive"));
            }
            let inside = inc.center_row - inc.radius >= 0.0
                && inc.center_row + inc.radius <= hmax
                && inc.center_col - inc.radius >= 0.0
                && inc.center_col + inc.radius <= wmax;
            if !inside {
                return bad(format!("inclusion {i} extends outside the grid"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhantomScene {
    pub k_true: StiffnessMap,
    pub rest_image: ScalarField,
    pub masks: LabelMask,
}

fn gaussian_blur(img: &ScalarField, sigma: f64) -> ScalarField {
    if sigma == 0.0 {
        return img.clone();
    }
    let radius = (3.0 * sigma).ceil() as isize;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|d| (-((d * d) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= sum);
    let (h, w) = img.dims();
    let clamp = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;
    let pass_rows = ScalarField::from_fn(h, w, |r, c| {
        kernel
            .iter()
            .enumerate()
            .map(|(k, wgt)| wgt * img.get(r, clamp(c as isize + k as isize - radius, w)))
            .sum()
    });
    ScalarField::from_fn(h, w, |r, c| {
        kernel
            .iter()
            .enumerate()
            .map(|(k, wgt)| wgt * pass_rows.get(clamp(r as isize + k as isize - radius, h), c))
            .sum()
    })
}

/// Builds the ground-truth scene for `cfg`.
pub fn make_scene(cfg: &PhantomConfig) -> Result<PhantomScene> {
    cfg.validate()?;
    let (h, w) = (cfg.height, cfg.width);
    let mut labels = vec![0u8; h * w];
    let mut factor = vec![1.0f64; h * w];
    for r in 0..h {
        for c in 0..w {
            for inc in &cfg.inclusions {
                if inc.contains(r, c) {
                    labels[r * w + c] = inc.label;
                    factor[r * w + c] = inc.stiffness_factor;
                }
            }
        }
    }
    let depth = |r: usize| 1.0 - (1.0 - cfg.depth_decay) * r as f64 / (h - 1) as f64;
    let kx = ScalarField::from_fn(h, w, |r, c| cfg.base_kx * depth(r) * factor[r * w + c]);
    let mid = (w - 1) as f64 / 2.0;
    let ky = ScalarField::from_fn(h, w, |r, c| {
        let side = (c as f64 - mid).signum() * ((c as f64 - mid) != 0.0) as u8 as f64;
        cfg.ky_scale * kx.get(r, c) * side
    });

    let base = ScalarField::from_fn(h, w, |r, c| match labels[r * w + c] {
        LABEL_ARTERY => ARTERY_INTENSITY,
        LABEL_VEIN => VEIN_INTENSITY,
        _ => BACKGROUND_INTENSITY,
    });
    let blurred = gaussian_blur(&base, cfg.blur_sigma);
    let rest_image = match cfg.speckle {
        Speckle::None => blurred.map(|v| v.clamp(0.0, 1.0)),
        Speckle::Multiplicative { sigma } => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let noisy: Vec<f64> = blurred
                .data()
                .iter()
                .map(|&v| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    (v * (sigma * z - 0.5 * sigma * sigma).exp()).clamp(0.0, 1.0)
                })
                .collect();
            ScalarField::from_vec(h, w, noisy)?
        }
    };

    Ok(PhantomScene {
        k_true: StiffnessMap::new(kx, ky)?,
        rest_image,
        masks: LabelMask::new(h, w, labels)?,
    })
}

/// A rendered moving/target pair with its exact deformation.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedPair {
    pub moving: ScalarField,
    pub target: ScalarField,
    pub masks_moving: LabelMask,
    pub masks_target: LabelMask,
    pub d_true: VectorField,
    pub df_true: f64,
}

/// Renders the frame pair seen under `forces`: the moving frame is the rest
/// image, the target is its backward warp by the true displacement.
pub fn render_pair(
    scene: &PhantomScene,
    forces: ForcePair,
    variant: DeltaForceVariant,
) -> Result<RenderedPair> {
    let df_true = delta_force(forces, variant)?;
    let d_true =
        deformation_from_stiffness(&scene.k_true, df_true, &DeformationModel::proportional());
    let target = warp_bilinear(&scene.rest_image, &d_true)?;
    let masks_target = warp_labels(&scene.masks, &d_true)?;
    Ok(RenderedPair {
        moving: scene.rest_image.clone(),
        target,
        masks_moving: scene.masks.clone(),
        masks_target,
        d_true,
        df_true,
    })
}
