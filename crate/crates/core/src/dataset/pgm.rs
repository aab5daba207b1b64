//! Binary PGM (P5) reading and writing for 28x28 grayscale images.

use std::fs;
use std::path::Path;

use crate::encoder::{IMAGE_PIXELS, IMAGE_SIDE};
use crate::error::{Error, Result};

const MAXVAL: u32 = 255;

/// Writes pixels in [0, 1] as a binary P5 file with maxval 255.
pub fn write_pgm(path: impl AsRef<Path>, pixels: &[f64]) -> Result<()> {
    if pixels.len() != IMAGE_PIXELS {
        return Err(Error::Dimension {
            context: "PGM write",
            expected: IMAGE_PIXELS,
            actual: pixels.len(),
        });
    }
    if pixels.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::invalid_input("PGM pixels must lie in [0, 1]"));
    }
    let mut bytes = format!("P5\n{IMAGE_SIDE} {IMAGE_SIDE}\n{MAXVAL}\n").into_bytes();
    bytes.extend(pixels.iter().map(|p| (p * MAXVAL as f64).round() as u8));
    fs::write(path, bytes)?;
    Ok(())
}

/// Reads a binary P5 file, requiring 28x28 dimensions and maxval 255, and
/// scales the payload to [0, 1].
pub fn read_pgm(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    parse_pgm(&fs::read(path)?)
}

pub(crate) fn parse_pgm(bytes: &[u8]) -> Result<Vec<f64>> {
    let mut cursor = 0usize;

    // Header tokens are separated by whitespace; '#' starts a comment that
    // runs to the end of the line.
    let mut next_token = |bytes: &[u8]| -> Result<String> {
        loop {
            while cursor < bytes.len() && bytes[cursor].is_ascii_whitespace() {
                cursor += 1;
            }
            if cursor < bytes.len() && bytes[cursor] == b'#' {
                while cursor < bytes.len() && bytes[cursor] != b'\n' {
                    cursor += 1;
                }
                continue;
            }
            break;
        }
        let start = cursor;
        while cursor < bytes.len() && !bytes[cursor].is_ascii_whitespace() {
            cursor += 1;
        }
        if start == cursor {
            return Err(Error::format("PGM", "truncated header"));
        }
        Ok(String::from_utf8_lossy(&bytes[start..cursor]).into_owned())
    };

    let magic = next_token(bytes)?;
    if magic != "P5" {
        return Err(Error::format(
            "PGM",
            format!("unsupported magic '{magic}', expected P5"),
        ));
    }
    let width: usize = next_token(bytes)?
        .parse()
        .map_err(|_| Error::format("PGM", "non-numeric width"))?;
    let height: usize = next_token(bytes)?
        .parse()
        .map_err(|_| Error::format("PGM", "non-numeric height"))?;
    let maxval: u32 = next_token(bytes)?
        .parse()
        .map_err(|_| Error::format("PGM", "non-numeric maxval"))?;

    if width != IMAGE_SIDE || height != IMAGE_SIDE {
        return Err(Error::format(
            "PGM",
            format!("expected {IMAGE_SIDE}x{IMAGE_SIDE} image, got {width}x{height}"),
        ));
    }
    if maxval != MAXVAL {
        return Err(Error::format(
            "PGM",
            format!("unsupported maxval {maxval}, expected {MAXVAL}"),
        ));
    }

    // Exactly one whitespace byte separates the header from the raster.
    if cursor >= bytes.len() || !bytes[cursor].is_ascii_whitespace() {
        return Err(Error::format("PGM", "missing raster separator"));
    }
    cursor += 1;

    let payload = &bytes[cursor..];
    if payload.len() < IMAGE_PIXELS {
        return Err(Error::format(
            "PGM",
            format!(
                "truncated payload: expected {IMAGE_PIXELS} bytes, got {}",
                payload.len()
            ),
        ));
    }
    if payload.len() > IMAGE_PIXELS {
        return Err(Error::format("PGM", "trailing bytes after raster"));
    }
    Ok(payload.iter().map(|&b| b as f64 / MAXVAL as f64).collect())
}
