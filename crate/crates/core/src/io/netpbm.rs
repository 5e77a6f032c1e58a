//! Binary PGM (P5) and PPM (P6).
//!
//! Images are stored as intensities in `[0, 1]` quantized to `maxval`
//! (8- or 16-bit, big-endian for 16-bit). Masks are stored with raw label
//! values 0/1/2 and maxval 255.

use super::{read_bytes, write_bytes};
use std::path::Path;

use super::format_err;
use crate::error::Result;
use crate::field::ScalarField;
use crate::flowviz::RgbImage;
use crate::metrics::LabelMask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PgmDepth {
    Eight,
    #[default]
    Sixteen,
}

impl PgmDepth {
    fn maxval(self) -> u32 {
        match self {
            PgmDepth::Eight => 255,
            PgmDepth::Sixteen => 65535,
        }
    }
}

struct Header {
    width: usize,
    height: usize,
    maxval: u32,
    data_start: usize,
}

fn parse_header(bytes: &[u8], magic: &[u8; 2], path: &Path) -> Result<Header> {
    if bytes.len() < 2 || &bytes[..2] != magic {
        return Err(format_err(
            path,
            format!("expected {} header", String::from_utf8_lossy(magic)),
        ));
    }
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for slot in fields.iter_mut() {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(format_err(path, "malformed header"));
        }
        *slot = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format_err(path, "header value out of range"))?;
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(format_err(path, "missing whitespace after maxval"));
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 || maxval == 0 || maxval > 65535 {
        return Err(format_err(
            path,
            format!("bad header {width}x{height} maxval {maxval}"),
        ));
    }
    Ok(Header {
        width: width as usize,
        height: height as usize,
        maxval,
        data_start: pos + 1,
    })
}

fn read_samples(bytes: &[u8], header: &Header, channels: usize, path: &Path) -> Result<Vec<u32>> {
    let wide = header.maxval > 255;
    let n = header.width * header.height * channels;
    let need = n * if wide { 2 } else { 1 };
    let body = &bytes[header.data_start.min(bytes.len())..];
    if body.len() != need {
        return Err(format_err(
            path,
            format!("expected {need} data bytes, found {}", body.len()),
        ));
    }
    let samples: Vec<u32> = if wide {
        body.chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as u32)
            .collect()
    } else {
        body.iter().map(|&b| b as u32).collect()
    };
    if samples.iter().any(|&s| s > header.maxval) {
        return Err(format_err(path, "sample exceeds maxval"));
    }
    Ok(samples)
}

pub fn encode_pgm_image(img: &ScalarField, depth: PgmDepth) -> Vec<u8> {
    let (h, w) = img.dims();
    let maxval = depth.maxval();
    let mut out = format!("P5\n{w} {h}\n{maxval}\n").into_bytes();
    for &v in img.data() {
        let q = (v.clamp(0.0, 1.0) * maxval as f64).round() as u32;
        match depth {
            PgmDepth::Eight => out.push(q as u8),
            PgmDepth::Sixteen => out.extend_from_slice(&(q as u16).to_be_bytes()),
        }
    }
    out
}

pub fn decode_pgm_image(bytes: &[u8], path: &Path) -> Result<ScalarField> {
    let header = parse_header(bytes, b"P5", path)?;
    let samples = read_samples(bytes, &header, 1, path)?;
    let scale = header.maxval as f64;
    ScalarField::from_vec(
        header.height,
        header.width,
        samples.into_iter().map(|s| s as f64 / scale).collect(),
    )
}

pub fn encode_pgm_mask(mask: &LabelMask) -> Vec<u8> {
    let (h, w) = mask.dims();
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.extend_from_slice(mask.labels());
    out
}

pub fn decode_pgm_mask(bytes: &[u8], path: &Path) -> Result<LabelMask> {
    let header = parse_header(bytes, b"P5", path)?;
    let samples = read_samples(bytes, &header, 1, path)?;
    if samples.iter().any(|&s| s > 2) {
        return Err(format_err(path, "mask values must be 0, 1 or 2"));
    }
    LabelMask::new(
        header.height,
        header.width,
        samples.into_iter().map(|s| s as u8).collect(),
    )
}

pub fn encode_ppm(img: &RgbImage) -> Vec<u8> {
    let (h, w) = img.dims();
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    for p in img.pixels() {
        out.extend_from_slice(p);
    }
    out
}

pub fn decode_ppm(bytes: &[u8], path: &Path) -> Result<RgbImage> {
    let header = parse_header(bytes, b"P6", path)?;
    if header.maxval != 255 {
        return Err(format_err(path, "only maxval 255 is supported"));
    }
    let samples = read_samples(bytes, &header, 3, path)?;
    let pixels = samples
        .chunks_exact(3)
        .map(|c| [c[0] as u8, c[1] as u8, c[2] as u8])
        .collect();
    Ok(RgbImage::new(header.height, header.width, pixels))
}

pub fn write_pgm_image(path: &Path, img: &ScalarField, depth: PgmDepth) -> Result<()> {
    write_bytes(path, &encode_pgm_image(img, depth))?;
    Ok(())
}

pub fn read_pgm_image(path: &Path) -> Result<ScalarField> {
    decode_pgm_image(&read_bytes(path)?, path)
}

pub fn write_pgm_mask(path: &Path, mask: &LabelMask) -> Result<()> {
    write_bytes(path, &encode_pgm_mask(mask))?;
    Ok(())
}

pub fn read_pgm_mask(path: &Path) -> Result<LabelMask> {
    decode_pgm_mask(&read_bytes(path)?, path)
}

pub fn write_ppm(path: &Path, img: &RgbImage) -> Result<()> {
    write_bytes(path, &encode_ppm(img))?;
    Ok(())
}

pub fn read_ppm(path: &Path) -> Result<RgbImage> {
    decode_ppm(&read_bytes(path)?, path)
}
