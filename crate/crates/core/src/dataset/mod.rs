//! The animal-silhouette dataset: procedural generation, the two-hot
//! 15-slot label encoding, and file ingestion (PGM images, IDX archives,
//! manifest CSV).

mod idx;
mod pgm;
mod silhouettes;

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::network::{CLASS_SLOTS, INDIVIDUAL_SLOTS, OUTPUT_SLOTS};

pub use idx::{load_idx, IdxImage};
pub use pgm::{read_pgm, write_pgm};
pub use silhouettes::generate_silhouettes;

/// Number of classes in the canonical set.
pub const CLASS_COUNT: usize = CLASS_SLOTS;
/// Variants per class in the canonical set.
pub const VARIANTS_PER_CLASS: usize = 4;
/// Total images in the canonical set.
pub const IMAGE_COUNT: usize = CLASS_COUNT * VARIANTS_PER_CLASS;

/// Class names in slot order.
pub const CLASS_NAMES: [&str; CLASS_COUNT] = ["bird", "cat", "dog"];

/// A 28x28 grayscale image with its class and individual identity.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledImage {
    pub id: String,
    /// 0 = bird, 1 = cat, 2 = dog.
    pub class_index: usize,
    /// 0..11, unique across the set, allocated class-major
    /// (bird 0-3, cat 4-7, dog 8-11).
    pub individual_index: usize,
    /// Row-major pixels in [0, 1].
    pub pixels: Vec<f64>,
}

impl LabeledImage {
    /// The two-hot training target for this image.
    pub fn target(&self) -> Vec<f64> {
        encode_labels(self.class_index, self.individual_index)
            .expect("constructed LabeledImage carries valid indices")
    }
}

/// Canonical name of an individual slot under the class-major allocation:
/// index 5 is "cat-1".
pub fn individual_name(individual_index: usize) -> String {
    match CLASS_NAMES.get(individual_index / VARIANTS_PER_CLASS) {
        Some(class) => format!("{class}-{}", individual_index % VARIANTS_PER_CLASS),
        None => format!("individual-{individual_index}"),
    }
}

/// Builds the 15-slot two-hot target: one-hot class in slots 0..2, one-hot
/// individual in slots 3..14 (individual k lands in slot 3+k).
pub fn encode_labels(class_index: usize, individual_index: usize) -> Result<Vec<f64>> {
    if class_index >= CLASS_SLOTS {
        return Err(Error::invalid_input(format!(
            "class index {class_index} out of range 0..{CLASS_SLOTS}"
        )));
    }
    if individual_index >= INDIVIDUAL_SLOTS {
        return Err(Error::invalid_input(format!(
            "individual index {individual_index} out of range 0..{INDIVIDUAL_SLOTS}"
        )));
    }
    let mut target = vec![0.0; OUTPUT_SLOTS];
    target[class_index] = 1.0;
    target[CLASS_SLOTS + individual_index] = 1.0;
    Ok(target)
}

/// Writes every image as `<id>.pgm` plus a `manifest.csv` (id, class,
/// individual, path) into `dir`, returning the manifest path.
pub fn write_dataset(dir: impl AsRef<Path>, images: &[LabeledImage]) -> Result<PathBuf> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut manifest = String::from("id,class,individual,path\n");
    for image in images {
        let file_name = format!("{}.pgm", image.id);
        write_pgm(dir.join(&file_name), &image.pixels)?;
        manifest.push_str(&format!(
            "{},{},{},{}\n",
            image.id, image.class_index, image.individual_index, file_name
        ));
    }
    let manifest_path = dir.join("manifest.csv");
    fs::write(&manifest_path, manifest)?;
    Ok(manifest_path)
}

/// Loads a dataset described by a manifest CSV. Paths are resolved relative
/// to the manifest's directory; indices are range-checked and individuals
/// must be unique.
pub fn load_manifest(manifest_path: impl AsRef<Path>) -> Result<Vec<LabeledImage>> {
    let manifest_path = manifest_path.as_ref();
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let text = fs::read_to_string(manifest_path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some("id,class,individual,path") => {}
        other => {
            return Err(Error::format(
                "dataset manifest",
                format!("unexpected header {other:?}"),
            ))
        }
    }

    let mut images = Vec::new();
    let mut seen_individuals = [false; INDIVIDUAL_SLOTS];
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::format(
                "dataset manifest",
                format!(
                    "line {}: expected 4 fields, got {}",
                    lineno + 2,
                    fields.len()
                ),
            ));
        }
        let class_index: usize = fields[1].parse().map_err(|_| {
            Error::format(
                "dataset manifest",
                format!("bad class index '{}'", fields[1]),
            )
        })?;
        let individual_index: usize = fields[2].parse().map_err(|_| {
            Error::format(
                "dataset manifest",
                format!("bad individual index '{}'", fields[2]),
            )
        })?;
        // Re-use the label encoder's range checks.
        encode_labels(class_index, individual_index)?;
        if seen_individuals[individual_index] {
            return Err(Error::format(
                "dataset manifest",
                format!("individual {individual_index} appears twice"),
            ));
        }
        seen_individuals[individual_index] = true;
        let pixels = read_pgm(base.join(fields[3]))?;
        images.push(LabeledImage {
            id: fields[0].to_string(),
            class_index,
            individual_index,
            pixels,
        });
    }
    Ok(images)
}
