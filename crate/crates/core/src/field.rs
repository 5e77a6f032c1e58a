//! Dense 2-D fields on a pixel grid.
//!
//! Rows grow with imaging depth (away from the probe). A displacement's
//! `dx` component is positive toward the probe, i.e. toward *smaller* row
//! indices; `dy` is positive toward larger column indices. All data is
//! stored row-major as `f64`.

use crate::error::{Error, Result};

/// An `height x width` grid of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl ScalarField {
    /// Builds a field from row-major data. Rejects empty grids, a length
    /// that does not match `height * width`, and non-finite values.
    pub fn from_vec(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::DimensionTooSmall {
                what: "ScalarField",
                height,
                width,
                min_h: 1,
                min_w: 1,
            });
        }
        if data.len() != height * width {
            return Err(Error::InvalidDimension(format!(
                "data length {} does not match {}x{}",
                data.len(),
                height,
                width
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDimension(format!(
                "non-finite value {} at index {}",
                data[i], i
            )));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Self {
        assert!(height > 0 && width > 0, "empty field");
        assert!(value.is_finite(), "non-finite fill value");
        Self {
            height,
            width,
            data: vec![value; height * width],
        }
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self::filled(height, width, 0.0)
    }

    /// Evaluates `f(row, col)` at every pixel.
    ///
    /// Panics if `f` produces a non-finite value.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(height > 0 && width > 0, "empty field");
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                let v = f(r, c);
                assert!(v.is_finite(), "non-finite value at ({r}, {c})");
                data.push(v);
            }
        }
        Self {
            height,
            width,
            data,
        }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Applies `f` pointwise. Panics if the result is not finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let data: Vec<f64> = self.data.iter().map(|&v| f(v)).collect();
        assert!(
            data.iter().all(|v| v.is_finite()),
            "map produced non-finite value"
        );
        Self {
            height: self.height,
            width: self.width,
            data,
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map(|v| v * factor)
    }

    pub(crate) fn check_same_dims(&self, other: &ScalarField, what: &'static str) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                what,
                expected: self.dims(),
                actual: other.dims(),
            });
        }
        Ok(())
    }

    fn require_at_least(&self, min_h: usize, min_w: usize, what: &'static str) -> Result<()> {
        if self.height < min_h || self.width < min_w {
            return Err(Error::DimensionTooSmall {
                what,
                height: self.height,
                width: self.width,
                min_h,
                min_w,
            });
        }
        Ok(())
    }

    /// Halves the resolution by averaging 2x2 blocks. Odd trailing rows or
    /// columns are averaged over the truncated block.
    pub fn downsample2(&self) -> Result<Self> {
        self.require_at_least(2, 2, "downsample2")?;
        let out_h = self.height.div_ceil(2);
        let out_w = self.width.div_ceil(2);
        let mut data = Vec::with_capacity(out_h * out_w);
        for orow in 0..out_h {
            let r0 = 2 * orow;
            let r1 = (r0 + 2).min(self.height);
            for ocol in 0..out_w {
                let c0 = 2 * ocol;
                let c1 = (c0 + 2).min(self.width);
                let mut sum = 0.0;
                for r in r0..r1 {
                    for c in c0..c1 {
                        sum += self.get(r, c);
                    }
                }
                data.push(sum / ((r1 - r0) * (c1 - c0)) as f64);
            }
        }
        Ok(Self {
            height: out_h,
            width: out_w,
            data,
        })
    }

    /// Bilinear upsampling onto a `target_h x target_w` grid with corner
    /// alignment: target index `i` samples source coordinate
    /// `i * (src - 1) / (target - 1)`.
    pub fn upsample2(&self, target_h: usize, target_w: usize) -> Result<Self> {
        let ok = |src: usize, dst: usize| dst + 1 >= 2 * src && dst <= 2 * src;
        if !ok(self.height, target_h) || !ok(self.width, target_w) {
            return Err(Error::DimensionMismatch {
                what: "upsample2 target",
                expected: (2 * self.height, 2 * self.width),
                actual: (target_h, target_w),
            });
        }
        let scale = |src: usize, dst: usize| {
            if dst > 1 {
                (src - 1) as f64 / (dst - 1) as f64
            } else {
                0.0
            }
        };
        let sr = scale(self.height, target_h);
        let sc = scale(self.width, target_w);
        let mut data = Vec::with_capacity(target_h * target_w);
        for r in 0..target_h {
            let y = r as f64 * sr;
            let r0 = (y.floor() as usize).min(self.height - 1);
            let r1 = (r0 + 1).min(self.height - 1);
            let fy = y - r0 as f64;
            for c in 0..target_w {
                let x = c as f64 * sc;
                let c0 = (x.floor() as usize).min(self.width - 1);
                let c1 = (c0 + 1).min(self.width - 1);
                let fx = x - c0 as f64;
                let top = self.get(r0, c0) * (1.0 - fx) + self.get(r0, c1) * fx;
                let bottom = self.get(r1, c0) * (1.0 - fx) + self.get(r1, c1) * fx;
                data.push(top * (1.0 - fy) + bottom * fy);
            }
        }
        Ok(Self {
            height: target_h,
            width: target_w,
            data,
        })
    }

    /// Forward differences `(f[r+1,c] - f[r,c], f[r,c+1] - f[r,c])`, zero on
    /// the last row (row direction) and last column (column direction).
    pub fn forward_diff(&self) -> Result<(Self, Self)> {
        self.require_at_least(2, 2, "forward_diff")?;
        let (h, w) = self.dims();
        let mut drow = vec![0.0; h * w];
        let mut dcol = vec![0.0; h * w];
        for r in 0..h {
            for c in 0..w {
                let i = r * w + c;
                if r + 1 < h {
                    drow[i] = self.data[i + w] - self.data[i];
                }
                if c + 1 < w {
                    dcol[i] = self.data[i + 1] - self.data[i];
                }
            }
        }
        Ok((
            Self {
                height: h,
                width: w,
                data: drow,
            },
            Self {
                height: h,
                width: w,
                data: dcol,
            },
        ))
    }
}

/// Dense displacement in pixels: `dx` toward the probe (up), `dy` toward
/// increasing column.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    dx: ScalarField,
    dy: ScalarField,
}

impl VectorField {
    pub fn new(dx: ScalarField, dy: ScalarField) -> Result<Self> {
        dx.check_same_dims(&dy, "VectorField components")?;
        Ok(Self { dx, dy })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self {
            dx: ScalarField::zeros(height, width),
            dy: ScalarField::zeros(height, width),
        }
    }

    /// Same vector `(dx, dy)` at every pixel.
    pub fn constant(height: usize, width: usize, dx: f64, dy: f64) -> Self {
        Self {
            dx: ScalarField::filled(height, width, dx),
            dy: ScalarField::filled(height, width, dy),
        }
    }

    #[inline]
    pub fn dx(&self) -> &ScalarField {
        &self.dx
    }

    #[inline]
    pub fn dy(&self) -> &ScalarField {
        &self.dy
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        self.dx.dims()
    }

    pub fn into_parts(self) -> (ScalarField, ScalarField) {
        (self.dx, self.dy)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            dx: self.dx.scale(factor),
            dy: self.dy.scale(factor),
        }
    }

    /// Per-pixel Euclidean length.
    pub fn magnitude(&self) -> ScalarField {
        let data = self
            .dx
            .data()
            .iter()
            .zip(self.dy.data())
            .map(|(x, y)| x.hypot(*y))
            .collect();
        ScalarField {
            height: self.dx.height,
            width: self.dx.width,
            data,
        }
    }
}

/// A sub-pixel location on the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub row: f64,
    pub col: f64,
}

impl GridPoint {
    pub fn new(row: f64, col: f64) -> Self {
        Self { row, col }
    }

    /// The point reached by following displacement `(dx, dy)` with the
    /// sampling convention used by the warp: `dx` adds to the row index.
    pub fn displaced(self, dx: f64, dy: f64) -> Self {
        Self {
            row: self.row + dx,
            col: self.col + dy,
        }
    }
}
