//! Registration quality metrics: overlap (Dice), boundary distance (HD95),
//! intensity similarity (SSIM, MI, MSE), force-direction consistency
//! (discrepancy rate) and endpoint error against a known field.

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};

pub const LABEL_BACKGROUND: u8 = 0;
pub const LABEL_ARTERY: u8 = 1;
pub const LABEL_VEIN: u8 = 2;

/// Per-pixel vessel labels: 0 background, 1 artery, 2 vein.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMask {
    height: usize,
    width: usize,
    labels: Vec<u8>,
}

impl LabelMask {
    pub fn new(height: usize, width: usize, labels: Vec<u8>) -> Result<Self> {
        if height == 0 || width == 0 || labels.len() != height * width {
            return Err(Error::InvalidDimension(format!(
                "label mask {}x{} with {} labels",
                height,
                width,
                labels.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l > LABEL_VEIN) {
            return Err(Error::InvalidDimension(format!(
                "label {bad} outside {{0,1,2}}"
            )));
        }
        Ok(Self {
            height,
            width,
            labels,
        })
    }

    pub fn empty(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            labels: vec![LABEL_BACKGROUND; height * width],
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.labels[row * self.width + col]
    }

    pub fn count(&self, label: u8) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    fn check_same_dims(&self, other: &LabelMask, what: &'static str) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                what,
                expected: self.dims(),
                actual: other.dims(),
            });
        }
        Ok(())
    }

    /// Label pixels with at least one 4-neighbour of another label, or on
    /// the image edge.
    pub fn boundary(&self, label: u8) -> Vec<bool> {
        let (h, w) = self.dims();
        let mut out = vec![false; h * w];
        for r in 0..h {
            for c in 0..w {
                if self.get(r, c) != label {
                    continue;
                }
                let edge = r == 0 || c == 0 || r + 1 == h || c + 1 == w;
                out[r * w + c] = edge
                    || self.get(r - 1, c) != label
                    || self.get(r + 1, c) != label
                    || self.get(r, c - 1) != label
                    || self.get(r, c + 1) != label;
            }
        }
        out
    }
}

/// `2|A ∩ B| / (|A| + |B|)` for one label; 1 when both are empty.
pub fn dice(a: &LabelMask, b: &LabelMask, label: u8) -> Result<f64> {
    a.check_same_dims(b, "dice")?;
    let (mut na, mut nb, mut both) = (0usize, 0usize, 0usize);
    for (&x, &y) in a.labels.iter().zip(&b.labels) {
        let (ia, ib) = (x == label, y == label);
        na += ia as usize;
        nb += ib as usize;
        both += (ia && ib) as usize;
    }
    if na + nb == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * both as f64 / (na + nb) as f64)
}

/// Exact squared Euclidean distance transform: for every pixel, squared
/// distance to the nearest `true` pixel of `features`. Separable lower
/// envelope of parabolas, one pass per axis.
fn squared_distance_transform(features: &[bool], h: usize, w: usize) -> Vec<f64> {
    let big = ((h * h + w * w) as f64) * 4.0 + 1.0;
    let mut grid: Vec<f64> = features
        .iter()
        .map(|&f| if f { 0.0 } else { big })
        .collect();
    let mut line = Vec::new();
    let mut out = Vec::new();
    for c in 0..w {
        line.clear();
        line.extend((0..h).map(|r| grid[r * w + c]));
        envelope_1d(&line, &mut out);
        for r in 0..h {
            grid[r * w + c] = out[r];
        }
    }
    for r in 0..h {
        line.clear();
        line.extend_from_slice(&grid[r * w..(r + 1) * w]);
        envelope_1d(&line, &mut out);
        grid[r * w..(r + 1) * w].copy_from_slice(&out);
    }
    grid
}

fn envelope_1d(f: &[f64], out: &mut Vec<f64>) {
    let n = f.len();
    out.clear();
    out.resize(n, 0.0);
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let meet = |q: usize, p: usize| {
        ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q - p) as f64)
    };
    for q in 1..n {
        // z[0] = -inf, so k never underflows
        let mut s = meet(q, v[k]);
        while s <= z[k] {
            k -= 1;
            s = meet(q, v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (q, slot) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let d = q as f64 - p as f64;
        *slot = d * d + f[p];
    }
}

/// Linear-interpolation percentile of an ascending slice (`p` in [0, 100]).
pub(crate) fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// 95th percentile of the pooled directed nearest-boundary distances
/// between the label boundaries of `a` and `b`. 0 when both masks lack the
/// label, `+inf` when exactly one does.
pub fn hd95(a: &LabelMask, b: &LabelMask, label: u8) -> Result<f64> {
    a.check_same_dims(b, "hd95")?;
    let (h, w) = a.dims();
    let ba = a.boundary(label);
    let bb = b.boundary(label);
    let (has_a, has_b) = (ba.iter().any(|&x| x), bb.iter().any(|&x| x));
    match (has_a, has_b) {
        (false, false) => return Ok(0.0),
        (true, false) | (false, true) => return Ok(f64::INFINITY),
        _ => {}
    }
    let to_b = squared_distance_transform(&bb, h, w);
    let to_a = squared_distance_transform(&ba, h, w);
    let mut dists: Vec<f64> = ba
        .iter()
        .zip(&to_b)
        .filter(|(&on, _)| on)
        .map(|(_, d)| d.sqrt())
        .chain(
            bb.iter()
                .zip(&to_a)
                .filter(|(&on, _)| on)
                .map(|(_, d)| d.sqrt()),
        )
        .collect();
    dists.sort_by(f64::total_cmp);
    Ok(percentile_sorted(&dists, 95.0))
}

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
const SSIM_C1: f64 = 0.01 * 0.01;
const SSIM_C2: f64 = 0.03 * 0.03;

fn gaussian_kernel(size: usize, sigma: f64) -> Vec<f64> {
    let center = (size / 2) as f64;
    let raw: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - center;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / sum).collect()
}

/// Valid-mode separable filtering: output has `(h - n + 1) x (w - n + 1)`.
fn filter_valid(data: &[f64], h: usize, w: usize, kernel: &[f64]) -> Vec<f64> {
    let n = kernel.len();
    let (oh, ow) = (h - n + 1, w - n + 1);
    let mut tmp = vec![0.0; h * ow];
    for r in 0..h {
        for c in 0..ow {
            tmp[r * ow + c] = kernel
                .iter()
                .enumerate()
                .map(|(k, wgt)| wgt * data[r * w + c + k])
                .sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for r in 0..oh {
        for c in 0..ow {
            out[r * ow + c] = kernel
                .iter()
                .enumerate()
                .map(|(k, wgt)| wgt * tmp[(r + k) * ow + c])
                .sum();
        }
    }
    out
}

/// Mean structural similarity over all fully contained 11x11 Gaussian
/// windows (sigma 1.5, dynamic range 1).
pub fn ssim(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    a.check_same_dims(b, "ssim")?;
    let (h, w) = a.dims();
    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        return Err(Error::DimensionTooSmall {
            what: "ssim",
            height: h,
            width: w,
            min_h: SSIM_WINDOW,
            min_w: SSIM_WINDOW,
        });
    }
    let kernel = gaussian_kernel(SSIM_WINDOW, SSIM_SIGMA);
    let (x, y) = (a.data(), b.data());
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(p, q)| p * q).collect();
    let mu_x = filter_valid(x, h, w, &kernel);
    let mu_y = filter_valid(y, h, w, &kernel);
    let e_xx = filter_valid(&xx, h, w, &kernel);
    let e_yy = filter_valid(&yy, h, w, &kernel);
    let e_xy = filter_valid(&xy, h, w, &kernel);
    let mut total = 0.0;
    for i in 0..mu_x.len() {
        let (mx, my) = (mu_x[i], mu_y[i]);
        let vx = e_xx[i] - mx * mx;
        let vy = e_yy[i] - my * my;
        let cov = e_xy[i] - mx * my;
        total += ((2.0 * mx * my + SSIM_C1) * (2.0 * cov + SSIM_C2))
            / ((mx * mx + my * my + SSIM_C1) * (vx + vy + SSIM_C2));
    }
    Ok(total / mu_x.len() as f64)
}

pub const MI_BINS: usize = 32;

#[inline]
fn bin_of(v: f64, bins: usize) -> usize {
    ((v.clamp(0.0, 1.0) * bins as f64) as usize).min(bins - 1)
}

/// Mutual information in bits from a `bins x bins` joint histogram over
/// `[0, 1]`.
pub fn mutual_information(a: &ScalarField, b: &ScalarField, bins: usize) -> Result<f64> {
    a.check_same_dims(b, "mutual_information")?;
    if bins < 2 {
        return Err(Error::InvalidConfig(format!(
            "bins must be >= 2, got {bins}"
        )));
    }
    let mut joint = vec![0usize; bins * bins];
    for (&x, &y) in a.data().iter().zip(b.data()) {
        joint[bin_of(x, bins) * bins + bin_of(y, bins)] += 1;
    }
    let n = a.len() as f64;
    let mut pa = vec![0.0; bins];
    let mut pb = vec![0.0; bins];
    for i in 0..bins {
        for j in 0..bins {
            let p = joint[i * bins + j] as f64 / n;
            pa[i] += p;
            pb[j] += p;
        }
    }
    let mut mi = 0.0;
    for i in 0..bins {
        for j in 0..bins {
            let count = joint[i * bins + j];
            if count > 0 {
                let p = count as f64 / n;
                mi += p * (p / (pa[i] * pb[j])).log2();
            }
        }
    }
    Ok(mi.max(0.0))
}

/// Mean squared intensity difference.
pub fn mse(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    a.check_same_dims(b, "mse")?;
    let sum: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(sum / a.len() as f64)
}

/// Fraction of pixels whose vertical displacement strictly contradicts the
/// sign of the force differential (`dx * df < 0`).
pub fn discrepancy_rate(dx: &ScalarField, df: f64) -> f64 {
    if df == 0.0 {
        return 0.0;
    }
    let bad = dx.data().iter().filter(|&&v| v * df < 0.0).count();
    bad as f64 / dx.len() as f64
}

/// Mean Euclidean distance between corresponding displacement vectors.
pub fn endpoint_error(d: &VectorField, d_true: &VectorField) -> Result<f64> {
    d.dx().check_same_dims(d_true.dx(), "endpoint_error")?;
    let n = d.dx().len() as f64;
    let sum: f64 = d
        .dx()
        .data()
        .iter()
        .zip(d.dy().data())
        .zip(d_true.dx().data().iter().zip(d_true.dy().data()))
        .map(|((x, y), (tx, ty))| (x - tx).hypot(y - ty))
        .sum();
    Ok(sum / n)
}

fn ser_opt_real<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) if x.is_finite() => s.serialize_f64(*x),
        Some(x) if x.is_nan() => s.serialize_str("nan"),
        Some(x) if *x > 0.0 => s.serialize_str("inf"),
        Some(_) => s.serialize_str("-inf"),
        None => s.serialize_none(),
    }
}

fn de_opt_real<'de, D: serde::Deserializer<'de>>(
    d: D,
) -> std::result::Result<Option<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Real {
        Num(f64),
        Text(String),
    }
    match Option::<Real>::deserialize(d)? {
        None => Ok(None),
        Some(Real::Num(x)) => Ok(Some(x)),
        Some(Real::Text(t)) => match t.as_str() {
            "inf" => Ok(Some(f64::INFINITY)),
            "-inf" => Ok(Some(f64::NEG_INFINITY)),
            "nan" => Ok(Some(f64::NAN)),
            other => Err(serde::de::Error::custom(format!("bad real '{other}'"))),
        },
    }
}

/// Flat metric record. Mask metrics are present only when masks were
/// supplied, `epe` only with a ground-truth field. `mi` is the standard
/// non-negative mutual information. Infinite distances serialize as the
/// string `"inf"`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dsc_artery: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dsc_vein: Option<f64>,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        serialize_with = "ser_opt_real",
        deserialize_with = "de_opt_real"
    )]
    pub hd95_artery: Option<f64>,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        serialize_with = "ser_opt_real",
        deserialize_with = "de_opt_real"
    )]
    pub hd95_vein: Option<f64>,
    pub ssim: f64,
    pub mi: f64,
    pub mse: f64,
    pub dr: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epe: Option<f64>,
}

/// Everything needed to fill a [`MetricReport`].
pub struct EvaluationInput<'a> {
    pub field: &'a VectorField,
    pub df: f64,
    pub warped: &'a ScalarField,
    pub target: &'a ScalarField,
    pub truth: Option<&'a VectorField>,
    pub masks: Option<(&'a LabelMask, &'a LabelMask)>,
}

pub fn evaluate(input: &EvaluationInput<'_>) -> Result<MetricReport> {
    input
        .warped
        .check_same_dims(input.target, "evaluate images")?;
    input
        .warped
        .check_same_dims(input.field.dx(), "evaluate field")?;
    let mut report = MetricReport {
        ssim: ssim(input.warped, input.target)?,
        mi: mutual_information(input.warped, input.target, MI_BINS)?,
        mse: mse(input.warped, input.target)?,
        dr: discrepancy_rate(input.field.dx(), input.df),
        ..Default::default()
    };
    if let Some(truth) = input.truth {
        report.epe = Some(endpoint_error(input.field, truth)?);
    }
    if let Some((warped_mask, target_mask)) = input.masks {
        report.dsc_artery = Some(dice(warped_mask, target_mask, LABEL_ARTERY)?);
        report.dsc_vein = Some(dice(warped_mask, target_mask, LABEL_VEIN)?);
        report.hd95_artery = Some(hd95(warped_mask, target_mask, LABEL_ARTERY)?);
        report.hd95_vein = Some(hd95(warped_mask, target_mask, LABEL_VEIN)?);
    }
    Ok(report)
}
