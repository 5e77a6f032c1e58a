//! Deformation from a stiffness map and a force differential.
//!
//! The stiffness map plays the role of a per-pixel compliance (inverse
//! Young's modulus, with contact area absorbed): under a force differential
//! `df` a pixel moves by `k * df` in the proportional model. It is not
//! sign-constrained.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::{ScalarField, VectorField};

/// Per-pixel displacement per unit force differential, one map per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct StiffnessMap {
    kx: ScalarField,
    ky: ScalarField,
}

impl StiffnessMap {
    pub fn new(kx: ScalarField, ky: ScalarField) -> Result<Self> {
        kx.check_same_dims(&ky, "StiffnessMap components")?;
        Ok(Self { kx, ky })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self {
            kx: ScalarField::zeros(height, width),
            ky: ScalarField::zeros(height, width),
        }
    }

    pub fn kx(&self) -> &ScalarField {
        &self.kx
    }

    pub fn ky(&self) -> &ScalarField {
        &self.ky
    }

    pub fn dims(&self) -> (usize, usize) {
        self.kx.dims()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            kx: self.kx.scale(factor),
            ky: self.ky.scale(factor),
        }
    }

    /// Reinterprets a displacement field as a stiffness map (used by the
    /// direct model, where the map *is* the field).
    pub fn from_field(field: VectorField) -> Self {
        let (kx, ky) = field.into_parts();
        Self { kx, ky }
    }

    pub fn into_field(self) -> VectorField {
        VectorField::new(self.kx, self.ky).expect("components share dims")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ModelKind {
    /// `D = K * df`
    #[default]
    Proportional,
    /// `D = (beta * K + alpha) * df`
    Linear,
    /// `D = (gamma * K^2 + beta * K + alpha) * df`
    Quadratic,
    /// `D = K`, force differential ignored.
    Direct,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Proportional => "PROPORTIONAL",
            ModelKind::Linear => "LINEAR",
            ModelKind::Quadratic => "QUADRATIC",
            ModelKind::Direct => "DIRECT",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "proportional" | "physics" => Ok(Self::Proportional),
            "linear" => Ok(Self::Linear),
            "quadratic" => Ok(Self::Quadratic),
            "direct" => Ok(Self::Direct),
            _ => Err(crate::error::Error::InvalidConfig(format!(
                "unknown deformation model '{s}'"
            ))),
        }
    }
}

/// Deformation model and its scalar coefficients. Coefficients a model
/// does not use are ignored. Defaults are the identity embedding of the
/// proportional model (`beta = 1`, `alpha = gamma = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeformationModel {
    pub tag: ModelKind,
    pub alpha_x: f64,
    pub alpha_y: f64,
    pub beta_x: f64,
    pub beta_y: f64,
    pub gamma_x: f64,
    pub gamma_y: f64,
}

impl Default for DeformationModel {
    fn default() -> Self {
        Self::new(ModelKind::Proportional)
    }
}

impl DeformationModel {
    pub fn new(tag: ModelKind) -> Self {
        Self {
            tag,
            alpha_x: 0.0,
            alpha_y: 0.0,
            beta_x: 1.0,
            beta_y: 1.0,
            gamma_x: 0.0,
            gamma_y: 0.0,
        }
    }

    pub fn proportional() -> Self {
        Self::new(ModelKind::Proportional)
    }

    pub fn direct() -> Self {
        Self::new(ModelKind::Direct)
    }

    /// `(alpha, beta, gamma)` for one axis; 0 = x, 1 = y.
    pub(crate) fn coeffs(&self, axis: usize) -> (f64, f64, f64) {
        let (a, b, g) = if axis == 0 {
            (self.alpha_x, self.beta_x, self.gamma_x)
        } else {
            (self.alpha_y, self.beta_y, self.gamma_y)
        };
        match self.tag {
            ModelKind::Proportional | ModelKind::Direct => (0.0, 1.0, 0.0),
            ModelKind::Linear => (a, b, 0.0),
            ModelKind::Quadratic => (a, b, g),
        }
    }

    /// Per-pixel response `g(k)` so that `D = g(K) * df` (or `D = K` for
    /// the direct model).
    #[inline]
    pub(crate) fn response(&self, axis: usize, k: f64) -> f64 {
        let (a, b, g) = self.coeffs(axis);
        match self.tag {
            ModelKind::Proportional | ModelKind::Direct => k,
            ModelKind::Linear => b * k + a,
            ModelKind::Quadratic => g * k * k + b * k + a,
        }
    }
}

/// Displacement field implied by `stiffness` under force differential `df`.
pub fn deformation_from_stiffness(
    stiffness: &StiffnessMap,
    df: f64,
    model: &DeformationModel,
) -> VectorField {
    let map_axis = |axis: usize, k: &ScalarField| match model.tag {
        ModelKind::Direct => k.clone(),
        _ => k.map(|v| model.response(axis, v) * df),
    };
    VectorField::new(map_axis(0, &stiffness.kx), map_axis(1, &stiffness.ky))
        .expect("stiffness components share dims")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::discrepancy_rate;
    use proptest::prelude::*;

    fn random_map(seed: u64, h: usize, w: usize) -> StiffnessMap {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let kx = ScalarField::from_fn(h, w, |_, _| rng.random_range(-2.0..2.0));
        let ky = ScalarField::from_fn(h, w, |_, _| rng.random_range(-2.0..2.0));
        StiffnessMap::new(kx, ky).unwrap()
    }

    #[test]
    fn zero_force_gives_zero_field() {
        let d = deformation_from_stiffness(
            &random_map(1, 4, 5),
            0.0,
            &DeformationModel::proportional(),
        );
        assert!(d.dx().data().iter().chain(d.dy().data()).all(|&v| v == 0.0));
    }

    #[test]
    fn constant_map_example() {
        let k =
            StiffnessMap::new(ScalarField::filled(3, 3, 2.0), ScalarField::zeros(3, 3)).unwrap();
        let d = deformation_from_stiffness(&k, 0.5, &DeformationModel::proportional());
        assert!(d.dx().data().iter().all(|&v| v == 1.0));
        assert!(d.dy().data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_coefficients_reproduce_proportional() {
        let k = random_map(3, 6, 6);
        let p = deformation_from_stiffness(&k, -0.7, &DeformationModel::proportional());
        let l = deformation_from_stiffness(&k, -0.7, &DeformationModel::new(ModelKind::Linear));
        let q = deformation_from_stiffness(&k, -0.7, &DeformationModel::new(ModelKind::Quadratic));
        assert_eq!(p, l);
        assert_eq!(p, q);
    }

    #[test]
    fn quadratic_formula() {
        let k = StiffnessMap::new(
            ScalarField::filled(2, 2, 3.0),
            ScalarField::filled(2, 2, -1.0),
        )
        .unwrap();
        let model = DeformationModel {
            tag: ModelKind::Quadratic,
            alpha_x: 1.0,
            alpha_y: 0.5,
            beta_x: 2.0,
            beta_y: 1.0,
            gamma_x: 0.5,
            gamma_y: 2.0,
        };
        let d = deformation_from_stiffness(&k, 2.0, &model);
        // x: (0.5*9 + 2*3 + 1) * 2 = 23; y: (2*1 - 1 + 0.5) * 2 = 3
        assert!(d.dx().data().iter().all(|&v| v == 23.0));
        assert!(d.dy().data().iter().all(|&v| v == 3.0));
    }

    #[test]
    fn direct_ignores_force() {
        let k = random_map(4, 5, 5);
        let a = deformation_from_stiffness(&k, -1.0, &DeformationModel::direct());
        let b = deformation_from_stiffness(&k, 1.0, &DeformationModel::direct());
        assert_eq!(a, b);
        assert_eq!(a.dx(), k.kx());
    }

    #[test]
    fn model_json_defaults_and_unknown_keys() {
        let m: DeformationModel =
            serde_json::from_str(r#"{"tag":"LINEAR","alpha_x":0.5}"#).unwrap();
        assert_eq!(m.tag, ModelKind::Linear);
        assert_eq!(m.alpha_x, 0.5);
        assert_eq!(m.beta_y, 1.0);
        assert!(serde_json::from_str::<DeformationModel>(r#"{"tag":"LINEAR","delta":1}"#).is_err());
    }

    proptest! {
        #[test]
        fn sign_law_and_zero_dr(seed in 0u64..500, df in 0.01f64..3.0) {
            let k = random_map(seed, 5, 5);
            let d = deformation_from_stiffness(&k, df, &DeformationModel::proportional());
            for (dxv, kv) in d.dx().data().iter().zip(k.kx().data()) {
                prop_assert_eq!(crate::force::sign0(*dxv), crate::force::sign0(*kv));
            }
            let nonneg = StiffnessMap::new(k.kx().map(f64::abs), k.ky().clone()).unwrap();
            let d = deformation_from_stiffness(&nonneg, df, &DeformationModel::proportional());
            prop_assert_eq!(discrepancy_rate(d.dx(), df), 0.0);
        }

        #[test]
        fn homogeneous_and_force_linear(seed in 0u64..500, c in -3.0f64..3.0, df in -2.0f64..2.0) {
            let k = random_map(seed, 4, 4);
            let model = DeformationModel::proportional();
            let lhs = deformation_from_stiffness(&k.scale(c), df, &model);
            let rhs = deformation_from_stiffness(&k, df, &model).scale(c);
            for (a, b) in lhs.dx().data().iter().zip(rhs.dx().data()) {
                prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
            }
            for kind in [ModelKind::Proportional, ModelKind::Linear, ModelKind::Quadratic] {
                let m = DeformationModel { alpha_x: 0.3, gamma_x: -0.2, ..DeformationModel::new(kind) };
                let once = deformation_from_stiffness(&k, df, &m);
                let twice = deformation_from_stiffness(&k, 2.0 * df, &m);
                for (a, b) in once.dx().data().iter().zip(twice.dx().data()) {
                    prop_assert!((2.0 * a - b).abs() <= 1e-12 * b.abs().max(1.0));
                }
            }
        }
    }
}
