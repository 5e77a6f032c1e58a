//! On-disk formats: `.flo` displacement fields, binary PGM images and
//! label masks, binary PPM colour images.

mod flo;
mod netpbm;

pub use flo::{decode_flo, encode_flo, read_flo, write_flo, FLO_MAGIC};
pub use netpbm::{
    decode_pgm_image, decode_pgm_mask, decode_ppm, encode_pgm_image, encode_pgm_mask, encode_ppm,
    read_pgm_image, read_pgm_mask, read_ppm, write_pgm_image, write_pgm_mask, write_ppm, PgmDepth,
};

use crate::error::Error;
use std::path::Path;

pub(crate) fn format_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.display().to_string(),
        message: message.into(),
    }
}

fn with_path(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(
        e.kind(),
        format!("{}: {e}", path.display()),
    ))
}

pub(crate) fn read_bytes(path: &Path) -> crate::error::Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| with_path(path, e))
}

pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> crate::error::Result<()> {
    std::fs::write(path, bytes).map_err(|e| with_path(path, e))
}

pub(crate) fn read_text(path: &Path) -> crate::error::Result<String> {
    std::fs::read_to_string(path).map_err(|e| with_path(path, e))
}
