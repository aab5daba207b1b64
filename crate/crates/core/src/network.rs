//! The fully-connected feedforward classifier with per-node salience state.
//!
//! A [`Network`] is a stack of dense sigmoid layers. Every non-input node
//! carries a salience scalar in [-1, 1] (written by the salience module)
//! and a cached activation from the most recent forward pass (read back
//! when computing the salience response). Classification training is plain
//! per-sample gradient descent on MSE and requires the unmodulated
//! activation mode; the three salience-modulated modes only change how a
//! tagged network responds at inference time.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{sigmoid, sigmoid_prime_from_output, Matrix, Rng};

/// How a node's salience reshapes its sigmoid at inference time.
///
/// With all-zero salience every variant reduces to the plain sigmoid,
/// bit for bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActivationMode {
    /// Unmodulated sigmoid; salience is ignored.
    #[serde(rename = "none")]
    Standard,
    /// Shifts the sigmoid left by the node's salience: y = sigmoid(x + S).
    HorizontalOffset,
    /// Steepens (or flattens) the slope: y = sigmoid(x * sqrt(0.5^-S)).
    Gradient,
    /// Scales the output ceiling: y = 0.5^-S * sigmoid(x).
    Amplitude,
}

impl ActivationMode {
    pub const ALL: [ActivationMode; 4] = [
        ActivationMode::Standard,
        ActivationMode::HorizontalOffset,
        ActivationMode::Gradient,
        ActivationMode::Amplitude,
    ];

    /// Stable one-byte code used by the snapshot format.
    pub fn code(self) -> u8 {
        match self {
            ActivationMode::Standard => 0,
            ActivationMode::HorizontalOffset => 1,
            ActivationMode::Gradient => 2,
            ActivationMode::Amplitude => 3,
        }
    }

    pub fn from_code(code: u8) -> Result<ActivationMode> {
        match code {
            0 => Ok(ActivationMode::Standard),
            1 => Ok(ActivationMode::HorizontalOffset),
            2 => Ok(ActivationMode::Gradient),
            3 => Ok(ActivationMode::Amplitude),
            other => Err(Error::format(
                "network snapshot",
                format!("unknown activation mode code {other}"),
            )),
        }
    }

    /// Applies the mode to a pre-activation `x` with node salience `s`.
    #[inline]
    pub fn apply(self, x: f64, s: f64) -> f64 {
        match self {
            ActivationMode::Standard => sigmoid(x),
            ActivationMode::HorizontalOffset => sigmoid(x + s),
            ActivationMode::Gradient => sigmoid(x * 0.5f64.powf(-s).sqrt()),
            ActivationMode::Amplitude => 0.5f64.powf(-s) * sigmoid(x),
        }
    }
}

impl fmt::Display for ActivationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ActivationMode::Standard => "none",
            ActivationMode::HorizontalOffset => "horizontal-offset",
            ActivationMode::Gradient => "gradient",
            ActivationMode::Amplitude => "amplitude",
        };
        f.write_str(name)
    }
}

impl FromStr for ActivationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<ActivationMode> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "standard" => Ok(ActivationMode::Standard),
            "offset" | "horizontal-offset" => Ok(ActivationMode::HorizontalOffset),
            "gradient" => Ok(ActivationMode::Gradient),
            "amplitude" => Ok(ActivationMode::Amplitude),
            other => Err(Error::invalid_input(format!(
                "unknown activation mode '{other}' (expected none, offset, gradient or amplitude)"
            ))),
        }
    }
}

/// One dense layer: out_dim x in_dim weights plus per-node bias, salience
/// and the activation cached by the latest forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Matrix,
    pub biases: Vec<f64>,
    pub salience: Vec<f64>,
    pub last_activation: Vec<f64>,
}

impl Layer {
    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }
}

/// Hyperparameters for classification / reconstruction training.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub shuffle_each_epoch: bool,
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::invalid_input(format!(
                "learning rate must be positive and finite, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 {
            return Err(Error::invalid_input("epoch count must be at least 1"));
        }
        Ok(())
    }
}

/// Outcome of a forward pass through a 15-output classifier: the winning
/// class slot (0..2), the winning individual slot (3..14, reported as a
/// 0..11 index) and the raw sigmoid outputs behind both.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub class_index: usize,
    pub individual_index: usize,
    pub class_confidence: f64,
    pub individual_confidence: f64,
    pub raw_outputs: Vec<f64>,
}

impl Prediction {
    /// Interprets a 15-slot output vector. Ties break toward the lower index.
    pub fn from_outputs(outputs: &[f64]) -> Result<Prediction> {
        if outputs.len() != OUTPUT_SLOTS {
            return Err(Error::Dimension {
                context: "prediction output vector",
                expected: OUTPUT_SLOTS,
                actual: outputs.len(),
            });
        }
        let (class_index, class_confidence) = argmax(&outputs[..CLASS_SLOTS]);
        let (individual_index, individual_confidence) = argmax(&outputs[CLASS_SLOTS..]);
        Ok(Prediction {
            class_index,
            individual_index,
            class_confidence,
            individual_confidence,
            raw_outputs: outputs.to_vec(),
        })
    }
}

/// Number of class slots in the output encoding.
pub const CLASS_SLOTS: usize = 3;
/// Number of individual slots in the output encoding.
pub const INDIVIDUAL_SLOTS: usize = 12;
/// Total output width: one-hot class plus one-hot individual.
pub const OUTPUT_SLOTS: usize = CLASS_SLOTS + INDIVIDUAL_SLOTS;

fn argmax(values: &[f64]) -> (usize, f64) {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    (best, values[best])
}

const SNAPSHOT_MAGIC: &[u8; 5] = b"SANN1";

/// Layered dense feedforward network.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    dims: Vec<usize>,
    mode: ActivationMode,
    layers: Vec<Layer>,
}

impl Network {
    /// Builds a network with weights drawn uniformly from
    /// ±1/sqrt(fan_in), zero biases and zero salience, in mode
    /// [`ActivationMode::Standard`].
    pub fn new(dims: &[usize], seed: u64) -> Result<Network> {
        if dims.len() < 2 {
            return Err(Error::invalid_input(format!(
                "a network needs at least an input and an output layer, got {} dims",
                dims.len()
            )));
        }
        if dims.contains(&0) {
            return Err(Error::invalid_input("layer sizes must be positive"));
        }
        let mut rng = Rng::new(seed);
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for pair in dims.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            let mut weights = Matrix::zeros(fan_out, fan_in);
            for r in 0..fan_out {
                for c in 0..fan_in {
                    weights.set(r, c, rng.uniform(-bound, bound)?);
                }
            }
            layers.push(Layer {
                weights,
                biases: vec![0.0; fan_out],
                salience: vec![0.0; fan_out],
                last_activation: vec![0.0; fan_out],
            });
        }
        Ok(Network {
            dims: dims.to_vec(),
            mode: ActivationMode::Standard,
            layers,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    pub fn mode(&self) -> ActivationMode {
        self.mode
    }

    pub fn set_mode(&mut self, mode: ActivationMode) {
        self.mode = mode;
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Mutable layer access for the salience update and for parameter
    /// surgery in oracle tests. Callers must keep shapes consistent with
    /// `dims` and salience entries within [-1, 1].
    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    /// Propagates `input` through every layer under the current activation
    /// mode, caching each node's activation, and returns the output layer.
    pub fn forward(&mut self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.dims[0] {
            return Err(Error::Dimension {
                context: "network input",
                expected: self.dims[0],
                actual: input.len(),
            });
        }
        let mode = self.mode;
        let mut current = input.to_vec();
        for layer in &mut self.layers {
            let pre = layer.weights.mul_vec(&current)?;
            for (i, (x, b)) in pre.iter().zip(&layer.biases).enumerate() {
                layer.last_activation[i] = mode.apply(x + b, layer.salience[i]);
            }
            current.clear();
            current.extend_from_slice(&layer.last_activation);
        }
        Ok(current)
    }

    /// Mean squared error of one sample: mean over output slots of the
    /// squared difference to `target`.
    pub fn sample_loss(&mut self, input: &[f64], target: &[f64]) -> Result<f64> {
        let output = self.forward(input)?;
        if target.len() != output.len() {
            return Err(Error::Dimension {
                context: "training target",
                expected: output.len(),
                actual: target.len(),
            });
        }
        let sum: f64 = output
            .iter()
            .zip(target)
            .map(|(y, t)| (y - t) * (y - t))
            .sum();
        Ok(sum / output.len() as f64)
    }

    /// Mean of [`Network::sample_loss`] over a sample set.
    pub fn mean_loss(&mut self, samples: &[(Vec<f64>, Vec<f64>)]) -> Result<f64> {
        if samples.is_empty() {
            return Err(Error::invalid_input("loss over an empty sample set"));
        }
        let mut total = 0.0;
        for (input, target) in samples {
            total += self.sample_loss(input, target)?;
        }
        Ok(total / samples.len() as f64)
    }

    /// Analytic gradient of the per-sample MSE with respect to every weight
    /// and bias, via backpropagation. Returns one (dW, db) pair per layer.
    pub fn gradients(
        &mut self,
        input: &[f64],
        target: &[f64],
    ) -> Result<(Vec<Matrix>, Vec<Vec<f64>>)> {
        let output = self.forward(input)?;
        if target.len() != output.len() {
            return Err(Error::Dimension {
                context: "training target",
                expected: output.len(),
                actual: target.len(),
            });
        }

        let n_layers = self.layers.len();
        let n_out = output.len() as f64;

        // delta_i = dL/d(pre-activation_i), starting from the output layer.
        let mut deltas: Vec<Vec<f64>> = vec![Vec::new(); n_layers];
        deltas[n_layers - 1] = output
            .iter()
            .zip(target)
            .map(|(y, t)| 2.0 / n_out * (y - t) * sigmoid_prime_from_output(*y))
            .collect();
        for l in (0..n_layers - 1).rev() {
            let next = &self.layers[l + 1];
            let next_delta = &deltas[l + 1];
            let mut delta = vec![0.0; self.layers[l].out_dim()];
            for (i, d) in delta.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (k, nd) in next_delta.iter().enumerate() {
                    acc += nd * next.weights.get(k, i);
                }
                *d = acc * sigmoid_prime_from_output(self.layers[l].last_activation[i]);
            }
            deltas[l] = delta;
        }

        let mut weight_grads = Vec::with_capacity(n_layers);
        let mut bias_grads = Vec::with_capacity(n_layers);
        for (l, layer) in self.layers.iter().enumerate() {
            let layer_input: &[f64] = if l == 0 {
                input
            } else {
                &self.layers[l - 1].last_activation
            };
            let mut dw = Matrix::zeros(layer.out_dim(), layer.in_dim());
            for (i, d) in deltas[l].iter().enumerate() {
                for (j, x) in layer_input.iter().enumerate() {
                    dw.set(i, j, d * x);
                }
            }
            weight_grads.push(dw);
            bias_grads.push(deltas[l].clone());
        }
        Ok((weight_grads, bias_grads))
    }

    fn sgd_step(&mut self, input: &[f64], target: &[f64], learning_rate: f64) -> Result<()> {
        let (weight_grads, bias_grads) = self.gradients(input, target)?;
        for ((layer, dw), db) in self.layers.iter_mut().zip(&weight_grads).zip(&bias_grads) {
            for (i, bias_grad) in db.iter().enumerate() {
                let row = layer.weights.row_mut(i);
                for (w, g) in row.iter_mut().zip(dw.row(i)) {
                    *w -= learning_rate * g;
                }
                layer.biases[i] -= learning_rate * bias_grad;
            }
        }
        Ok(())
    }

    /// One pass of per-sample gradient descent over `samples` (seeded
    /// shuffle when enabled), returning the mean per-sample MSE measured
    /// on the full set after the pass.
    ///
    /// Training requires the unmodulated activation mode; salience applies
    /// only at and after tagging time.
    pub fn train_epoch(
        &mut self,
        samples: &[(Vec<f64>, Vec<f64>)],
        cfg: &TrainConfig,
        rng: &mut Rng,
    ) -> Result<f64> {
        cfg.validate()?;
        if self.mode != ActivationMode::Standard {
            return Err(Error::invalid_input(
                "classification training requires the unmodulated activation mode",
            ));
        }
        if samples.is_empty() {
            return Err(Error::invalid_input("training on an empty sample set"));
        }
        let mut order: Vec<usize> = (0..samples.len()).collect();
        if cfg.shuffle_each_epoch {
            rng.shuffle(&mut order);
        }
        for idx in order {
            let (input, target) = &samples[idx];
            self.sgd_step(input, target, cfg.learning_rate)?;
        }
        let loss = self.mean_loss(samples)?;
        if !loss.is_finite() {
            return Err(Error::Numeric("mean epoch loss became non-finite".into()));
        }
        Ok(loss)
    }

    /// Runs `cfg.epochs` epochs of [`Network::train_epoch`] with a fresh
    /// generator seeded from `cfg.seed`, returning the loss after each epoch.
    pub fn train(
        &mut self,
        samples: &[(Vec<f64>, Vec<f64>)],
        cfg: &TrainConfig,
    ) -> Result<Vec<f64>> {
        cfg.validate()?;
        let mut rng = Rng::new(cfg.seed);
        let mut losses = Vec::with_capacity(cfg.epochs);
        for epoch in 0..cfg.epochs {
            let loss = self
                .train_epoch(samples, cfg, &mut rng)
                .map_err(|e| match e {
                    Error::Numeric(msg) => Error::Numeric(format!("epoch {epoch}: {msg}")),
                    other => other,
                })?;
            losses.push(loss);
        }
        Ok(losses)
    }

    /// Forward pass plus argmax decoding of the 15-slot output layout.
    pub fn predict(&mut self, input: &[f64]) -> Result<Prediction> {
        let outputs = self.forward(input)?;
        Prediction::from_outputs(&outputs)
    }

    /// Fraction of samples whose predicted class / individual match the
    /// target encoding. Targets use the same 15-slot layout as training.
    pub fn accuracy(&mut self, samples: &[(Vec<f64>, Vec<f64>)]) -> Result<(f64, f64)> {
        if samples.is_empty() {
            return Err(Error::invalid_input("accuracy over an empty sample set"));
        }
        let mut class_hits = 0usize;
        let mut individual_hits = 0usize;
        for (input, target) in samples {
            let predicted = self.predict(input)?;
            let expected = Prediction::from_outputs(target)?;
            if predicted.class_index == expected.class_index {
                class_hits += 1;
            }
            if predicted.individual_index == expected.individual_index {
                individual_hits += 1;
            }
        }
        let n = samples.len() as f64;
        Ok((class_hits as f64 / n, individual_hits as f64 / n))
    }

    /// Writes the versioned snapshot: magic, mode byte, dims, then per layer
    /// the weights (row-major), biases and salience as little-endian f64.
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(SNAPSHOT_MAGIC)?;
        w.write_all(&[self.mode.code()])?;
        w.write_all(&(self.dims.len() as u32).to_le_bytes())?;
        for &d in &self.dims {
            w.write_all(&(d as u32).to_le_bytes())?;
        }
        for layer in &self.layers {
            for v in layer.weights.as_slice() {
                w.write_all(&v.to_le_bytes())?;
            }
            for v in &layer.biases {
                w.write_all(&v.to_le_bytes())?;
            }
            for v in &layer.salience {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Reads a snapshot produced by [`Network::write_to`], rejecting wrong
    /// magic, malformed headers, out-of-range salience and truncated or
    /// oversized payloads.
    pub fn read_from(mut r: impl Read) -> Result<Network> {
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic)
            .map_err(|_| Error::format("network snapshot", "file too short for header"))?;
        if &magic != SNAPSHOT_MAGIC {
            return Err(Error::format(
                "network snapshot",
                format!("bad magic {magic:?}, expected {SNAPSHOT_MAGIC:?}"),
            ));
        }
        let mut byte = [0u8; 1];
        r.read_exact(&mut byte)
            .map_err(|_| Error::format("network snapshot", "missing mode byte"))?;
        let mode = ActivationMode::from_code(byte[0])?;

        let mut u32_buf = [0u8; 4];
        r.read_exact(&mut u32_buf)
            .map_err(|_| Error::format("network snapshot", "missing dimension count"))?;
        let ndims = u32::from_le_bytes(u32_buf) as usize;
        if !(2..=64).contains(&ndims) {
            return Err(Error::format(
                "network snapshot",
                format!("implausible dimension count {ndims}"),
            ));
        }
        let mut dims = Vec::with_capacity(ndims);
        for _ in 0..ndims {
            r.read_exact(&mut u32_buf)
                .map_err(|_| Error::format("network snapshot", "truncated dimension list"))?;
            let d = u32::from_le_bytes(u32_buf) as usize;
            if d == 0 {
                return Err(Error::format("network snapshot", "zero layer size"));
            }
            dims.push(d);
        }

        let mut read_f64s = |n: usize, what: &str| -> Result<Vec<f64>> {
            let mut buf = vec![0u8; n * 8];
            r.read_exact(&mut buf)
                .map_err(|_| Error::format("network snapshot", format!("truncated {what}")))?;
            let values: Vec<f64> = buf
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::format(
                    "network snapshot",
                    format!("non-finite value in {what}"),
                ));
            }
            Ok(values)
        };

        let mut layers = Vec::with_capacity(ndims - 1);
        for pair in dims.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let weights =
                Matrix::from_vec(fan_out, fan_in, read_f64s(fan_out * fan_in, "weights")?)?;
            let biases = read_f64s(fan_out, "biases")?;
            let salience = read_f64s(fan_out, "salience")?;
            if salience.iter().any(|s| !(-1.0..=1.0).contains(s)) {
                return Err(Error::format(
                    "network snapshot",
                    "salience entry outside [-1, 1]",
                ));
            }
            layers.push(Layer {
                weights,
                biases,
                salience,
                last_activation: vec![0.0; fan_out],
            });
        }

        let mut trailing = [0u8; 1];
        if r.read(&mut trailing)? != 0 {
            return Err(Error::format(
                "network snapshot",
                "trailing bytes after payload",
            ));
        }
        Ok(Network { dims, mode, layers })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Network> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}
