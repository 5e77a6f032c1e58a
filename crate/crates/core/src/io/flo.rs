//! Middlebury `.flo`: `"PIEH"`, width and height as little-endian `i32`,
//! then row-major `(horizontal, vertical)` little-endian `f32` pairs.
//!
//! The horizontal component is `dy` (positive toward increasing column) and
//! the vertical component is `dx` stored as-is, i.e. positive *toward the
//! probe* (up). This differs from the usual optical-flow convention where
//! vertical flow is positive downward.

use super::{read_bytes, write_bytes};
use std::path::Path;

use super::format_err;
use crate::error::Result;
use crate::field::{ScalarField, VectorField};

pub const FLO_MAGIC: &[u8; 4] = b"PIEH";

pub fn encode_flo(field: &VectorField) -> Vec<u8> {
    let (h, w) = field.dims();
    let mut out = Vec::with_capacity(12 + 8 * h * w);
    out.extend_from_slice(FLO_MAGIC);
    out.extend_from_slice(&(w as i32).to_le_bytes());
    out.extend_from_slice(&(h as i32).to_le_bytes());
    for (dx, dy) in field.dx().data().iter().zip(field.dy().data()) {
        out.extend_from_slice(&(*dy as f32).to_le_bytes());
        out.extend_from_slice(&(*dx as f32).to_le_bytes());
    }
    out
}

pub fn decode_flo(bytes: &[u8], path: &Path) -> Result<VectorField> {
    if bytes.len() < 12 || &bytes[..4] != FLO_MAGIC {
        return Err(format_err(path, "missing PIEH header"));
    }
    let word = |i: usize| i32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
    let (w, h) = (word(4), word(8));
    if w <= 0 || h <= 0 {
        return Err(format_err(path, format!("bad dimensions {w}x{h}")));
    }
    let (w, h) = (w as usize, h as usize);
    if bytes.len() != 12 + 8 * w * h {
        return Err(format_err(
            path,
            format!(
                "expected {} bytes for {w}x{h}, found {}",
                12 + 8 * w * h,
                bytes.len()
            ),
        ));
    }
    let real = |i: usize| f32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes")) as f64;
    let mut dx = Vec::with_capacity(w * h);
    let mut dy = Vec::with_capacity(w * h);
    for p in 0..w * h {
        let at = 12 + 8 * p;
        dy.push(real(at));
        dx.push(real(at + 4));
    }
    let build = |v| ScalarField::from_vec(h, w, v).map_err(|e| format_err(path, e.to_string()));
    VectorField::new(build(dx)?, build(dy)?)
}

pub fn write_flo(path: &Path, field: &VectorField) -> Result<()> {
    write_bytes(path, &encode_flo(field))?;
    Ok(())
}

pub fn read_flo(path: &Path) -> Result<VectorField> {
    decode_flo(&read_bytes(path)?, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn layout_is_horizontal_then_vertical() {
        let f = VectorField::constant(1, 2, 1.5, -0.25);
        let b = encode_flo(&f);
        assert_eq!(b.len(), 12 + 16);
        assert_eq!(&b[..4], b"PIEH");
        assert_eq!(i32::from_le_bytes(b[4..8].try_into().unwrap()), 2);
        assert_eq!(i32::from_le_bytes(b[8..12].try_into().unwrap()), 1);
        assert_eq!(f32::from_le_bytes(b[12..16].try_into().unwrap()), -0.25);
        assert_eq!(f32::from_le_bytes(b[16..20].try_into().unwrap()), 1.5);
    }

    #[test]
    fn rejects_truncated_and_bad_magic() {
        let p = Path::new("x.flo");
        let mut b = encode_flo(&VectorField::zeros(2, 2));
        b.pop();
        assert!(decode_flo(&b, p).is_err());
        let mut b = encode_flo(&VectorField::zeros(2, 2));
        b[0] = b'X';
        assert!(decode_flo(&b, p).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_exact_at_f32(vals in proptest::collection::vec(-100.0f32..100.0, 24)) {
            let dx = ScalarField::from_vec(3, 4, vals[..12].iter().map(|&v| v as f64).collect()).unwrap();
            let dy = ScalarField::from_vec(3, 4, vals[12..].iter().map(|&v| v as f64).collect()).unwrap();
            let f = VectorField::new(dx, dy).unwrap();
            let bytes = encode_flo(&f);
            let back = decode_flo(&bytes, Path::new("t.flo")).unwrap();
            prop_assert_eq!(&back, &f);
            prop_assert_eq!(encode_flo(&back), bytes);
        }
    }
}
