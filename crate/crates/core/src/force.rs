//! Contact-force handling: the signed force differential that drives the
//! deformation model, and the sinusoidal force embedding used for
//! feature fusion.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;

/// Base of the geometric frequency schedule of the embedding.
pub const EMBEDDING_BASE: f64 = 1000.0;

/// Probe-normal contact forces (newtons) of the moving and target frames.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForcePair {
    pub f_moving: f64,
    pub f_target: f64,
}

impl ForcePair {
    pub fn new(f_moving: f64, f_target: f64) -> Result<Self> {
        let pair = Self { f_moving, f_target };
        pair.validate()?;
        Ok(pair)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |f: f64| f.is_finite() && f >= 0.0;
        if ok(self.f_moving) && ok(self.f_target) {
            Ok(())
        } else {
            Err(Error::InvalidForce {
                f_moving: self.f_moving,
                f_target: self.f_target,
            })
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            f_moving: self.f_moving * factor,
            f_target: self.f_target * factor,
        }
    }

    pub fn swapped(&self) -> Self {
        Self {
            f_moving: self.f_target,
            f_target: self.f_moving,
        }
    }
}

/// How the two forces are reduced to a single signed differential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DeltaForceVariant {
    /// `sign(d) * sqrt(|d| / (f_t + f_m))` with `d = f_t - f_m`.
    #[default]
    Normalized,
    /// `f_t - f_m`.
    Raw,
    /// `(f_t - f_m) / (f_t + f_m)`.
    Ratio,
    /// `sign(d) * sqrt(|d|)`.
    SignedSqrt,
}

impl DeltaForceVariant {
    pub const ALL: [DeltaForceVariant; 4] = [
        DeltaForceVariant::Normalized,
        DeltaForceVariant::Raw,
        DeltaForceVariant::Ratio,
        DeltaForceVariant::SignedSqrt,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            DeltaForceVariant::Normalized => "NORMALIZED",
            DeltaForceVariant::Raw => "RAW",
            DeltaForceVariant::Ratio => "RATIO",
            DeltaForceVariant::SignedSqrt => "SIGNED_SQRT",
        }
    }

    fn needs_positive_sum(&self) -> bool {
        matches!(
            self,
            DeltaForceVariant::Normalized | DeltaForceVariant::Ratio
        )
    }
}

impl std::fmt::Display for DeltaForceVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DeltaForceVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "NORMALIZED" => Ok(Self::Normalized),
            "RAW" => Ok(Self::Raw),
            "RATIO" => Ok(Self::Ratio),
            "SIGNED_SQRT" => Ok(Self::SignedSqrt),
            _ => Err(Error::InvalidConfig(format!(
                "unknown delta-force variant '{s}'"
            ))),
        }
    }
}

/// `sign` with `sign(0) = 0`.
#[inline]
pub(crate) fn sign0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Signed force differential for `pair` under `variant`.
pub fn delta_force(pair: ForcePair, variant: DeltaForceVariant) -> Result<f64> {
    pair.validate()?;
    let diff = pair.f_target - pair.f_moving;
    let sum = pair.f_target + pair.f_moving;
    if variant.needs_positive_sum() && sum <= 0.0 {
        return Err(Error::DegenerateForcePair {
            f_moving: pair.f_moving,
            f_target: pair.f_target,
            variant: variant.as_str(),
        });
    }
    Ok(match variant {
        DeltaForceVariant::Normalized => sign0(diff) * (diff.abs() / sum).sqrt(),
        DeltaForceVariant::Raw => diff,
        DeltaForceVariant::Ratio => diff / sum,
        DeltaForceVariant::SignedSqrt => sign0(diff) * diff.abs().sqrt(),
    })
}

/// Sinusoidal embedding of one or two forces.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceEmbedding {
    d_model: usize,
    values: Vec<f64>,
}

impl ForceEmbedding {
    /// Width of the embedding of a single force.
    pub fn d_model(&self) -> usize {
        self.d_model
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_d_model(d_model: usize) -> Result<()> {
    if d_model < 2 || !d_model.is_multiple_of(2) {
        return Err(Error::InvalidDimension(format!(
            "d_model must be even and >= 2, got {d_model}"
        )));
    }
    Ok(())
}

/// `[sin(f / B^(2j/d)) for j < d/2] ++ [cos(f / B^(2j/d)) for j < d/2]`
/// with `B = 1000`.
pub fn force_embed(force: f64, d_model: usize) -> Result<ForceEmbedding> {
    check_d_model(d_model)?;
    if !force.is_finite() || force < 0.0 {
        return Err(Error::InvalidForce {
            f_moving: force,
            f_target: force,
        });
    }
    let half = d_model / 2;
    let mut values = vec![0.0; d_model];
    for j in 0..half {
        let angle = force / EMBEDDING_BASE.powf(2.0 * j as f64 / d_model as f64);
        values[j] = angle.sin();
        values[half + j] = angle.cos();
    }
    Ok(ForceEmbedding { d_model, values })
}

/// Joint embedding: `force_embed(f_moving) ++ force_embed(f_target)`.
pub fn force_pair_embed(pair: ForcePair, d_model: usize) -> Result<ForceEmbedding> {
    pair.validate()?;
    let mut values = force_embed(pair.f_moving, d_model)?.values;
    values.extend(force_embed(pair.f_target, d_model)?.values);
    Ok(ForceEmbedding { d_model, values })
}

/// Seeded linear map `R^n -> R^out_dim` standing in for learned projection
/// layers. The matrix has orthonormal columns when `out_dim >= n` and
/// orthonormal rows otherwise.
pub fn project_embedding(emb: &ForceEmbedding, out_dim: usize, seed: u64) -> Result<Vec<f64>> {
    if out_dim == 0 {
        return Err(Error::InvalidDimension("out_dim must be >= 1".into()));
    }
    let n = emb.len();
    let matrix = orthonormal_map(out_dim, n, seed);
    Ok((0..out_dim)
        .map(|i| (0..n).map(|j| matrix[i * n + j] * emb.values[j]).sum())
        .collect())
}

/// Row-major `rows x cols` matrix whose shorter side is orthonormal
/// (Gram-Schmidt over Gaussian draws).
fn orthonormal_map(rows: usize, cols: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (count, len) = if rows >= cols {
        (cols, rows)
    } else {
        (rows, cols)
    };
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(count);
    while basis.len() < count {
        let mut v: Vec<f64> = (0..len).map(|_| StandardNormal.sample(&mut rng)).collect();
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    let mut m = vec![0.0; rows * cols];
    for (k, b) in basis.iter().enumerate() {
        for (t, &x) in b.iter().enumerate() {
            if rows >= cols {
                m[t * cols + k] = x;
            } else {
                m[k * cols + t] = x;
            }
        }
    }
    m
}

/// Scales channel `k` of `features` by `emb[k]` at every pixel.
pub fn fuse_pointwise(features: &[ScalarField], emb: &[f64]) -> Result<Vec<ScalarField>> {
    if features.len() != emb.len() {
        return Err(Error::DimensionMismatch {
            what: "fuse_pointwise channels",
            expected: (features.len(), 1),
            actual: (emb.len(), 1),
        });
    }
    if let Some(first) = features.first() {
        for f in &features[1..] {
            first.check_same_dims(f, "fuse_pointwise feature maps")?;
        }
    }
    Ok(features.iter().zip(emb).map(|(f, &w)| f.scale(w)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use DeltaForceVariant::*;

    fn pair(m: f64, t: f64) -> ForcePair {
        ForcePair::new(m, t).unwrap()
    }

    #[test]
    fn delta_force_examples() {
        assert_eq!(delta_force(pair(5.0, 5.0), Normalized).unwrap(), 0.0);
        assert_eq!(delta_force(pair(0.0, 4.0), Normalized).unwrap(), 1.0);
        let v = delta_force(pair(2.0, 6.0), Normalized).unwrap();
        assert!((v - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(delta_force(pair(2.0, 6.0), Raw).unwrap(), 4.0);
        assert_eq!(delta_force(pair(2.0, 6.0), Ratio).unwrap(), 0.5);
        assert_eq!(delta_force(pair(2.0, 6.0), SignedSqrt).unwrap(), 2.0);
        assert_eq!(delta_force(pair(6.0, 2.0), SignedSqrt).unwrap(), -2.0);
    }

    #[test]
    fn equal_forces_give_zero_for_every_variant() {
        for v in DeltaForceVariant::ALL {
            assert_eq!(delta_force(pair(3.5, 3.5), v).unwrap(), 0.0);
        }
    }

    #[test]
    fn degenerate_pairs() {
        assert!(matches!(
            delta_force(pair(0.0, 0.0), Normalized),
            Err(Error::DegenerateForcePair { .. })
        ));
        assert!(delta_force(pair(0.0, 0.0), Ratio).is_err());
        assert_eq!(delta_force(pair(0.0, 0.0), Raw).unwrap(), 0.0);
        assert_eq!(delta_force(pair(0.0, 0.0), SignedSqrt).unwrap(), 0.0);
        assert!(ForcePair::new(-1.0, 2.0).is_err());
        assert!(ForcePair::new(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn variant_names_round_trip() {
        for v in DeltaForceVariant::ALL {
            assert_eq!(v.as_str().parse::<DeltaForceVariant>().unwrap(), v);
            let json = serde_json::to_string(&v).unwrap();
            assert_eq!(json, format!("\"{}\"", v.as_str()));
        }
        assert_eq!(
            "signed-sqrt".parse::<DeltaForceVariant>().unwrap(),
            SignedSqrt
        );
        assert!("bogus".parse::<DeltaForceVariant>().is_err());
    }

    #[test]
    fn embedding_at_zero_force() {
        let e = force_embed(0.0, 8).unwrap();
        assert_eq!(&e.values()[..4], &[0.0; 4]);
        assert_eq!(&e.values()[4..], &[1.0; 4]);
    }

    #[test]
    fn embedding_single_frequency() {
        let e = force_embed(std::f64::consts::FRAC_PI_2, 2).unwrap();
        assert!((e.values()[0] - 1.0).abs() < 1e-15);
        assert!(e.values()[1].abs() < 1e-15);
    }

    #[test]
    fn embedding_rejects_bad_width() {
        assert!(force_embed(1.0, 3).is_err());
        assert!(force_embed(1.0, 0).is_err());
        assert!(force_embed(-1.0, 4).is_err());
    }

    #[test]
    fn embedding_values_for_f3_d4() {
        // frequencies for d_model = 4: 1000^0 = 1 and 1000^(1/2)
        let slow = 3.0 / 1000f64.sqrt();
        let expected = [3f64.sin(), slow.sin(), 3f64.cos(), slow.cos()];
        let e = force_embed(3.0, 4).unwrap();
        for (a, b) in e.values().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15, "{a} vs {b}");
        }
    }

    #[test]
    fn pair_embedding_layout() {
        let e = force_pair_embed(pair(0.0, 0.0), 4).unwrap();
        assert_eq!(e.values(), &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0]);

        let e = force_pair_embed(pair(1.7, 1.7), 6).unwrap();
        assert_eq!(e.len(), 12);
        assert_eq!(&e.values()[..6], &e.values()[6..]);

        let e = force_pair_embed(pair(2.0, 6.0), 4).unwrap();
        let mut expected = force_embed(2.0, 4).unwrap().values().to_vec();
        expected.extend_from_slice(force_embed(6.0, 4).unwrap().values());
        assert_eq!(e.values(), expected.as_slice());
    }

    #[test]
    fn projection_is_linear_and_deterministic() {
        let e = force_pair_embed(pair(2.0, 6.0), 8).unwrap();
        let a = project_embedding(&e, 32, 7).unwrap();
        let b = project_embedding(&e, 32, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, project_embedding(&e, 32, 8).unwrap());

        let doubled = ForceEmbedding {
            d_model: 8,
            values: e.values().iter().map(|v| 2.0 * v).collect(),
        };
        let a2 = project_embedding(&doubled, 32, 7).unwrap();
        for (x, y) in a.iter().zip(&a2) {
            assert!((2.0 * x - y).abs() <= 1e-12 * y.abs().max(1.0));
        }

        let zero = ForceEmbedding {
            d_model: 8,
            values: vec![0.0; 16],
        };
        assert!(project_embedding(&zero, 5, 1)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
        assert!(project_embedding(&zero, 0, 1).is_err());
    }

    #[test]
    fn projection_with_orthonormal_columns_preserves_norm() {
        let e = force_pair_embed(pair(1.0, 9.0), 4).unwrap();
        let p = project_embedding(&e, 64, 3).unwrap();
        let n_in: f64 = e.values().iter().map(|v| v * v).sum();
        let n_out: f64 = p.iter().map(|v| v * v).sum();
        assert!((n_in - n_out).abs() < 1e-10);
    }

    #[test]
    fn fuse_examples() {
        let a = ScalarField::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = ScalarField::from_vec(2, 2, vec![5.0, 6.0, 7.0, 8.0]).unwrap();
        let out = fuse_pointwise(&[a.clone(), b.clone()], &[2.0, -1.0]).unwrap();
        assert_eq!(out[0].data(), &[2.0, 4.0, 6.0, 8.0]);
        assert_eq!(out[1].data(), &[-5.0, -6.0, -7.0, -8.0]);

        let same = fuse_pointwise(&[a.clone(), b.clone()], &[1.0, 1.0]).unwrap();
        assert_eq!(same, vec![a.clone(), b.clone()]);
        let zero = fuse_pointwise(&[a.clone(), b.clone()], &[0.0, 0.0]).unwrap();
        assert!(zero.iter().all(|f| f.data().iter().all(|&v| v == 0.0)));

        assert!(fuse_pointwise(&[a], &[1.0, 2.0]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn embedding_components_bounded(f in 0.0f64..500.0, half in 1usize..16) {
                let e = force_embed(f, 2 * half).unwrap();
                prop_assert!(e.values().iter().all(|v| (-1.0..=1.0).contains(v)));
            }

            #[test]
            fn normalized_monotone_in_target(fm in 0.0f64..20.0, ft in 0.0f64..20.0, step in 1e-3f64..5.0) {
                prop_assume!(fm + ft > 0.0);
                let lo = delta_force(ForcePair::new(fm, ft).unwrap(), Normalized).unwrap();
                let hi = delta_force(ForcePair::new(fm, ft + step).unwrap(), Normalized).unwrap();
                prop_assert!(hi > lo);
            }

            #[test]
            fn first_frequency_is_injective(a in 0.0f64..std::f64::consts::TAU, b in 0.0f64..std::f64::consts::TAU) {
                prop_assume!((a - b).abs() > 1e-6);
                let ea = force_embed(a, 4).unwrap();
                let eb = force_embed(b, 4).unwrap();
                let (sa, ca) = (ea.values()[0], ea.values()[2]);
                let (sb, cb) = (eb.values()[0], eb.values()[2]);
                prop_assert!((sa - sb).abs() + (ca - cb).abs() > 0.0);
            }
        }
    }
}
