//! IDX archive loader (the MNIST container format): big-endian headers,
//! magic-checked, used for stress-testing the encoder with real digits.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use crate::encoder::{IMAGE_PIXELS, IMAGE_SIDE};
use crate::error::{Error, Result};

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

/// One raw image with its integer label (not mapped onto the 15-slot
/// class/individual scheme).
#[derive(Debug, Clone, PartialEq)]
pub struct IdxImage {
    pub pixels: Vec<f64>,
    pub label: u8,
}

fn read_u32_be(r: &mut impl Read, what: &str) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)
        .map_err(|_| Error::format("IDX", format!("truncated {what}")))?;
    Ok(u32::from_be_bytes(buf))
}

/// Loads up to `limit` 28x28 images from an IDX image/label file pair,
/// scaling pixels to [0, 1].
pub fn load_idx(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
    limit: usize,
) -> Result<Vec<IdxImage>> {
    let images = BufReader::new(File::open(images_path)?);
    let labels = BufReader::new(File::open(labels_path)?);
    parse_idx(images, labels, limit)
}

pub(crate) fn parse_idx(
    mut images: impl Read,
    mut labels: impl Read,
    limit: usize,
) -> Result<Vec<IdxImage>> {
    let magic = read_u32_be(&mut images, "image magic")?;
    if magic != IMAGES_MAGIC {
        return Err(Error::format(
            "IDX",
            format!("image magic {magic:#010x}, expected {IMAGES_MAGIC:#010x}"),
        ));
    }
    let image_count = read_u32_be(&mut images, "image count")? as usize;
    let rows = read_u32_be(&mut images, "row count")? as usize;
    let cols = read_u32_be(&mut images, "column count")? as usize;
    if rows != IMAGE_SIDE || cols != IMAGE_SIDE {
        return Err(Error::format(
            "IDX",
            format!("expected {IMAGE_SIDE}x{IMAGE_SIDE} images, got {rows}x{cols}"),
        ));
    }

    let magic = read_u32_be(&mut labels, "label magic")?;
    if magic != LABELS_MAGIC {
        return Err(Error::format(
            "IDX",
            format!("label magic {magic:#010x}, expected {LABELS_MAGIC:#010x}"),
        ));
    }
    let label_count = read_u32_be(&mut labels, "label count")? as usize;
    if label_count != image_count {
        return Err(Error::format(
            "IDX",
            format!("{image_count} images but {label_count} labels"),
        ));
    }

    let take = image_count.min(limit);
    let mut out = Vec::with_capacity(take);
    let mut pixel_buf = vec![0u8; IMAGE_PIXELS];
    let mut label_buf = [0u8; 1];
    for i in 0..take {
        images
            .read_exact(&mut pixel_buf)
            .map_err(|_| Error::format("IDX", format!("truncated pixel data at image {i}")))?;
        labels
            .read_exact(&mut label_buf)
            .map_err(|_| Error::format("IDX", format!("truncated label data at image {i}")))?;
        out.push(IdxImage {
            pixels: pixel_buf.iter().map(|&b| b as f64 / 255.0).collect(),
            label: label_buf[0],
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic_pair(count: usize) -> (Vec<u8>, Vec<u8>) {
        let mut images = Vec::new();
        images.extend(IMAGES_MAGIC.to_be_bytes());
        images.extend((count as u32).to_be_bytes());
        images.extend(28u32.to_be_bytes());
        images.extend(28u32.to_be_bytes());
        for i in 0..count {
            images.extend(std::iter::repeat_n((i * 7 % 256) as u8, IMAGE_PIXELS));
        }
        let mut labels = Vec::new();
        labels.extend(LABELS_MAGIC.to_be_bytes());
        labels.extend((count as u32).to_be_bytes());
        labels.extend((0..count).map(|i| (i % 10) as u8));
        (images, labels)
    }

    #[test]
    fn header_count_equals_returned_count_when_limit_exceeds_it() {
        let (images, labels) = synthetic_pair(5);
        let loaded = parse_idx(images.as_slice(), labels.as_slice(), 100).unwrap();
        assert_eq!(loaded.len(), 5);
        assert_eq!(loaded[3].label, 3);
        assert!((loaded[1].pixels[0] - 7.0 / 255.0).abs() < 1e-12);
    }

    #[test]
    fn limit_zero_yields_empty_list() {
        let (images, labels) = synthetic_pair(3);
        assert!(parse_idx(images.as_slice(), labels.as_slice(), 0)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn limit_truncates() {
        let (images, labels) = synthetic_pair(5);
        assert_eq!(
            parse_idx(images.as_slice(), labels.as_slice(), 2)
                .unwrap()
                .len(),
            2
        );
    }

    #[test]
    fn wrong_magics_are_rejected() {
        let (images, labels) = synthetic_pair(2);
        let mut bad_images = images.clone();
        bad_images[3] = 0x01;
        assert!(parse_idx(bad_images.as_slice(), labels.as_slice(), 10).is_err());
        let mut bad_labels = labels.clone();
        bad_labels[3] = 0x03;
        assert!(parse_idx(images.as_slice(), bad_labels.as_slice(), 10).is_err());
    }

    #[test]
    fn count_mismatch_and_truncation_are_rejected() {
        let (images, labels) = synthetic_pair(3);
        let (_, other_labels) = synthetic_pair(4);
        assert!(parse_idx(images.as_slice(), other_labels.as_slice(), 10).is_err());

        let truncated = &images[..images.len() - 10];
        assert!(parse_idx(truncated, labels.as_slice(), 10).is_err());
    }

    #[test]
    fn pixels_are_normalized() {
        let (images, labels) = synthetic_pair(2);
        for image in parse_idx(images.as_slice(), labels.as_slice(), 10).unwrap() {
            assert!(image.pixels.iter().all(|p| (0.0..=1.0).contains(p)));
        }
    }
}
