//! The sigmoid autoencoder that compresses 28x28 images into the 16-value
//! code the classifier consumes.
//!
//! The 784-16-784 net trains input-to-input with the same per-sample MSE
//! descent as the classifier and is frozen afterwards; the classifier only
//! ever sees its 16-dimensional hidden codes.

use crate::error::{Error, Result};
use crate::network::{Network, TrainConfig};
use crate::numerics::Rng;

/// Side length of input images.
pub const IMAGE_SIDE: usize = 28;
/// Pixels per image.
pub const IMAGE_PIXELS: usize = IMAGE_SIDE * IMAGE_SIDE;
/// Width of the hidden code.
pub const CODE_SIZE: usize = 16;

/// A 784-16-784 sigmoid autoencoder. Salience stays zero; only the hidden
/// code and the reconstruction are of interest.
#[derive(Debug, Clone, PartialEq)]
pub struct Autoencoder {
    net: Network,
}

impl Autoencoder {
    pub fn new(seed: u64) -> Autoencoder {
        let net = Network::new(&[IMAGE_PIXELS, CODE_SIZE, IMAGE_PIXELS], seed)
            .expect("fixed autoencoder dims are valid");
        Autoencoder { net }
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    fn check_image(pixels: &[f64]) -> Result<()> {
        if pixels.len() != IMAGE_PIXELS {
            return Err(Error::Dimension {
                context: "autoencoder image",
                expected: IMAGE_PIXELS,
                actual: pixels.len(),
            });
        }
        if pixels.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid_input(
                "image pixels must lie in [0, 1]".to_string(),
            ));
        }
        Ok(())
    }

    /// Trains input-to-input for `epochs` passes and returns the loss after
    /// each epoch.
    pub fn train(
        &mut self,
        images: &[Vec<f64>],
        epochs: usize,
        cfg: &TrainConfig,
    ) -> Result<Vec<f64>> {
        if images.is_empty() {
            return Err(Error::invalid_input("training on an empty image set"));
        }
        for image in images {
            Self::check_image(image)?;
        }
        let samples: Vec<(Vec<f64>, Vec<f64>)> = images
            .iter()
            .map(|img| (img.clone(), img.clone()))
            .collect();
        let mut rng = Rng::new(cfg.seed);
        let mut losses = Vec::with_capacity(epochs);
        for _ in 0..epochs {
            losses.push(self.net.train_epoch(&samples, cfg, &mut rng)?);
        }
        Ok(losses)
    }

    /// Hidden-layer activations for one image: the 16-value code.
    pub fn encode(&mut self, image: &[f64]) -> Result<Vec<f64>> {
        Self::check_image(image)?;
        self.net.forward(image)?;
        Ok(self.net.layers()[0].last_activation.clone())
    }

    /// Full forward pass: the reconstructed image.
    pub fn reconstruct(&mut self, image: &[f64]) -> Result<Vec<f64>> {
        Self::check_image(image)?;
        self.net.forward(image)
    }

    /// [`image_accuracy`] averaged over images.
    pub fn reconstruction_accuracy(&mut self, images: &[Vec<f64>]) -> Result<f64> {
        if images.is_empty() {
            return Err(Error::invalid_input(
                "reconstruction accuracy over an empty image set",
            ));
        }
        let mut total = 0.0;
        for image in images {
            let reconstruction = self.reconstruct(image)?;
            total += image_accuracy(image, &reconstruction);
        }
        Ok(total / images.len() as f64)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        self.net.save(path)
    }

    pub fn from_network(net: Network) -> Result<Autoencoder> {
        if net.dims() != [IMAGE_PIXELS, CODE_SIZE, IMAGE_PIXELS] {
            return Err(Error::format(
                "network snapshot",
                format!("not an autoencoder: dims {:?}", net.dims()),
            ));
        }
        Ok(Autoencoder { net })
    }

    /// Loads a snapshot, rejecting anything that is not a 784-16-784 net.
    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Autoencoder> {
        Self::from_network(Network::load(path)?)
    }
}

/// Reconstruction accuracy of one image as a percentage:
/// 100 x (1 - mean absolute pixel error). A perfect reconstruction scores
/// 100; the complement of a binary image scores 0.
pub fn image_accuracy(original: &[f64], reconstruction: &[f64]) -> f64 {
    debug_assert_eq!(original.len(), reconstruction.len());
    let mean_abs_err: f64 = reconstruction
        .iter()
        .zip(original)
        .map(|(r, p)| (r - p).abs())
        .sum::<f64>()
        / original.len() as f64;
    100.0 * (1.0 - mean_abs_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_cfg(lr: f64, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: lr,
            epochs: 1,
            seed,
            shuffle_each_epoch: true,
        }
    }

    fn checkerboard(phase: usize) -> Vec<f64> {
        (0..IMAGE_PIXELS)
            .map(|i| (((i / IMAGE_SIDE) + i + phase) % 2) as f64)
            .collect()
    }

    #[test]
    fn encode_produces_a_sixteen_value_code_in_range() {
        let mut ae = Autoencoder::new(1);
        let code = ae.encode(&vec![0.5; IMAGE_PIXELS]).unwrap();
        assert_eq!(code.len(), CODE_SIZE);
        assert!(code.iter().all(|c| *c > 0.0 && *c < 1.0));
    }

    #[test]
    fn encode_is_deterministic_and_non_mutating() {
        let mut ae = Autoencoder::new(2);
        let image = checkerboard(0);
        let before = ae.clone();
        let a = ae.encode(&image).unwrap();
        let b = ae.encode(&image).unwrap();
        assert_eq!(a, b);
        // Only the activation cache may differ.
        for (l_after, l_before) in ae.network().layers().iter().zip(before.network().layers()) {
            assert_eq!(l_after.weights, l_before.weights);
            assert_eq!(l_after.biases, l_before.biases);
            assert_eq!(l_after.salience, l_before.salience);
        }
    }

    #[test]
    fn all_zero_image_encodes_to_sigmoid_of_hidden_biases() {
        let mut ae = Autoencoder::new(3);
        let code = ae.encode(&vec![0.0; IMAGE_PIXELS]).unwrap();
        // Biases start at zero, so every code entry is sigmoid(0) = 0.5.
        assert!(code.iter().all(|&c| c == 0.5));
    }

    #[test]
    fn encode_rejects_wrong_size_and_out_of_range_pixels() {
        let mut ae = Autoencoder::new(4);
        assert!(ae.encode(&vec![0.5; 100]).is_err());
        let mut bad = vec![0.5; IMAGE_PIXELS];
        bad[7] = 1.5;
        assert!(ae.encode(&bad).is_err());
    }

    #[test]
    fn training_returns_one_loss_per_epoch() {
        let mut ae = Autoencoder::new(5);
        let images = vec![checkerboard(0), checkerboard(1)];
        let losses = ae.train(&images, 3, &tiny_cfg(10.0, 9)).unwrap();
        assert_eq!(losses.len(), 3);
        assert!(losses.iter().all(|l| l.is_finite()));
    }

    #[test]
    fn reconstruction_accuracy_bounds() {
        let mut ae = Autoencoder::new(6);
        let images = vec![checkerboard(0)];
        let acc = ae.reconstruction_accuracy(&images).unwrap();
        assert!((0.0..=100.0).contains(&acc));
        assert!(ae.reconstruction_accuracy(&[]).is_err());
    }

    #[test]
    fn accuracy_metric_extremes() {
        let image = checkerboard(0);
        let complement: Vec<f64> = image.iter().map(|p| 1.0 - p).collect();
        assert_eq!(image_accuracy(&image, &image), 100.0);
        assert_eq!(image_accuracy(&image, &complement), 0.0);
    }
}
