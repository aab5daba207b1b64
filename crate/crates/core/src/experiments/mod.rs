//! The end-to-end experiment harness: baseline/endline training, the
//! salience confidence comparison, the intensity sweep, the polarity
//! suite, the activation-mode variants and the inference benchmark,
//! together with their CSV/SVG artifacts.
//!
//! Every run is reproducible: the plan's seed fixes the dataset, the
//! encoder, the classifier and every shuffle, so repeated runs emit
//! byte-identical CSV files (benchmark timings excepted).

mod bench;
mod stats;
mod svg;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{
    generate_silhouettes, LabeledImage, CLASS_COUNT, IMAGE_COUNT, VARIANTS_PER_CLASS,
};
use crate::encoder::{Autoencoder, CODE_SIZE};
use crate::error::{Error, Result};
use crate::network::{ActivationMode, Network, TrainConfig, OUTPUT_SLOTS};
use crate::numerics::Rng;
use crate::salience::{respond, response_from_cache, tag, SalienceConfig, TagReport};

pub use bench::{run_benchmark, BenchmarkRecord, BenchmarkReport};
pub use stats::{five_number_summary, mean, FiveNumber};
pub use svg::{render_boxplot_svg, render_network_svg, BoxGroup};

/// Hidden width of the classifier (16-16-15 topology).
pub const HIDDEN_WIDTH: usize = 16;

/// Everything a full experiment run depends on. Unknown JSON keys are
/// rejected so a typo cannot silently fall back to a default.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentPlan {
    pub seed: u64,
    /// Epoch at which the baseline model is snapshotted.
    pub baseline_epochs: usize,
    /// Total classification epochs; the endline model.
    pub endline_epochs: usize,
    pub encoder_epochs: usize,
    pub sann_learning_rate: f64,
    pub encoder_learning_rate: f64,
    /// Tagging parameters shared by the salience experiments.
    pub salience: SalienceConfig,
    /// Images tagged by the confidence/intensity/activation experiments;
    /// the first one doubles as the positive image of the polarity suite.
    pub tagged_image_ids: Vec<String>,
    /// The negatively tagged image of the polarity suite.
    pub polarity_negative_id: String,
    /// Neuromodulator magnitude for the two sequential polarity events.
    /// Sub-saturating, so the second event keeps headroom on nodes the two
    /// activation patterns share.
    pub polarity_level: f64,
    pub intensity_factors: Vec<f64>,
    /// Base neuromodulator level for the intensity sweep, chosen so the
    /// largest factor still lands within the valid salience range.
    pub intensity_base_level: f64,
    pub activation_modes: Vec<ActivationMode>,
    pub benchmark_repetitions: usize,
    pub benchmark_warmup: usize,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan {
            seed: 7,
            baseline_epochs: 355,
            endline_epochs: 500,
            encoder_epochs: 200,
            sann_learning_rate: 2.0,
            encoder_learning_rate: 50.0,
            salience: SalienceConfig::default(),
            tagged_image_ids: vec!["cat-0".to_string()],
            polarity_negative_id: "dog-0".to_string(),
            polarity_level: 0.5,
            intensity_factors: vec![1.0, 2.0, 3.0],
            intensity_base_level: 1.0 / 3.0,
            activation_modes: vec![
                ActivationMode::HorizontalOffset,
                ActivationMode::Gradient,
                ActivationMode::Amplitude,
            ],
            benchmark_repetitions: 1200,
            benchmark_warmup: 100,
        }
    }
}

impl ExperimentPlan {
    pub fn from_json(json: &str) -> Result<ExperimentPlan> {
        let plan: ExperimentPlan = serde_json::from_str(json)
            .map_err(|e| Error::format("experiment plan", e.to_string()))?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ExperimentPlan> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.baseline_epochs == 0 || self.baseline_epochs > self.endline_epochs {
            return Err(Error::invalid_input(format!(
                "baseline epochs must satisfy 1 <= baseline ({}) <= endline ({})",
                self.baseline_epochs, self.endline_epochs
            )));
        }
        if self.encoder_epochs == 0 {
            return Err(Error::invalid_input("encoder epochs must be at least 1"));
        }
        if self.benchmark_repetitions == 0 {
            return Err(Error::invalid_input(
                "benchmark repetitions must be at least 1",
            ));
        }
        if self.tagged_image_ids.is_empty() {
            return Err(Error::invalid_input(
                "at least one tagged image id is required",
            ));
        }
        if self.intensity_factors.is_empty() {
            return Err(Error::invalid_input(
                "intensity factor list must not be empty",
            ));
        }
        if self.polarity_level.is_nan() || self.polarity_level <= 0.0 || self.polarity_level > 1.0 {
            return Err(Error::invalid_input(format!(
                "polarity level must lie in (0, 1], got {}",
                self.polarity_level
            )));
        }
        if self.activation_modes.contains(&ActivationMode::Standard) {
            return Err(Error::invalid_input(
                "activation variant list must use modulated modes only",
            ));
        }
        Ok(())
    }
}

/// The fixed front half of every experiment: the 12 silhouettes, the
/// trained (frozen) encoder and the encoded training samples.
pub struct Pipeline {
    pub images: Vec<LabeledImage>,
    pub encoder: Autoencoder,
    pub encoder_losses: Vec<f64>,
    pub reconstruction_accuracy: f64,
    /// (code, two-hot target) per image, in image order.
    pub samples: Vec<(Vec<f64>, Vec<f64>)>,
}

impl Pipeline {
    /// Generates the canonical silhouettes for the plan's seed and trains
    /// the encoder on them.
    pub fn prepare(plan: &ExperimentPlan) -> Result<Pipeline> {
        Self::from_images(plan, generate_silhouettes(plan.seed))
    }

    /// Runs the same preparation over a user-supplied dataset (loaded from
    /// a manifest). The set must be canonical: 12 images, 4 per class.
    pub fn from_images(plan: &ExperimentPlan, images: Vec<LabeledImage>) -> Result<Pipeline> {
        plan.validate()?;
        Self::check_images(&images)?;
        let pixel_sets: Vec<Vec<f64>> = images.iter().map(|i| i.pixels.clone()).collect();
        let mut encoder = Autoencoder::new(plan.seed.wrapping_add(1));
        let cfg = TrainConfig {
            learning_rate: plan.encoder_learning_rate,
            epochs: plan.encoder_epochs,
            seed: plan.seed.wrapping_add(2),
            shuffle_each_epoch: true,
        };
        let encoder_losses = encoder.train(&pixel_sets, plan.encoder_epochs, &cfg)?;
        Self::assemble(images, encoder, encoder_losses)
    }

    /// Builds the pipeline around an already trained (frozen) encoder; no
    /// encoder training happens and the loss curve stays empty.
    pub fn with_encoder(
        plan: &ExperimentPlan,
        images: Vec<LabeledImage>,
        encoder: Autoencoder,
    ) -> Result<Pipeline> {
        plan.validate()?;
        Self::check_images(&images)?;
        Self::assemble(images, encoder, Vec::new())
    }

    fn check_images(images: &[LabeledImage]) -> Result<()> {
        if images.len() != IMAGE_COUNT {
            return Err(Error::invalid_input(format!(
                "the experiment pipeline needs exactly {IMAGE_COUNT} images, got {}",
                images.len()
            )));
        }
        for class in 0..CLASS_COUNT {
            let count = images.iter().filter(|i| i.class_index == class).count();
            if count != VARIANTS_PER_CLASS {
                return Err(Error::invalid_input(format!(
                    "class {class} has {count} images, expected {VARIANTS_PER_CLASS}"
                )));
            }
        }
        Ok(())
    }

    fn assemble(
        images: Vec<LabeledImage>,
        mut encoder: Autoencoder,
        encoder_losses: Vec<f64>,
    ) -> Result<Pipeline> {
        let pixel_sets: Vec<Vec<f64>> = images.iter().map(|i| i.pixels.clone()).collect();
        let reconstruction_accuracy = encoder.reconstruction_accuracy(&pixel_sets)?;
        let mut samples = Vec::with_capacity(images.len());
        for image in &images {
            samples.push((encoder.encode(&image.pixels)?, image.target()));
        }
        Ok(Pipeline {
            images,
            encoder,
            encoder_losses,
            reconstruction_accuracy,
            samples,
        })
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.images
            .iter()
            .position(|i| i.id == id)
            .ok_or_else(|| Error::invalid_input(format!("no image with id '{id}' in the dataset")))
    }

    /// epoch,loss CSV of the encoder training curve.
    pub fn encoder_loss_csv(&self) -> String {
        let mut csv = String::from("epoch,loss\n");
        for (i, loss) in self.encoder_losses.iter().enumerate() {
            let _ = writeln!(csv, "{},{}", i + 1, loss);
        }
        csv
    }

    /// id,c0..c15 CSV of every image's encoded representation.
    pub fn codes_csv(&self) -> String {
        let mut csv = String::from("id");
        for i in 0..CODE_SIZE {
            let _ = write!(csv, ",c{i}");
        }
        csv.push('\n');
        for (image, (code, _)) in self.images.iter().zip(&self.samples) {
            let _ = write!(csv, "{}", image.id);
            for v in code {
                let _ = write!(csv, ",{v}");
            }
            csv.push('\n');
        }
        csv
    }
}

/// epoch,loss,class_accuracy,individual_accuracy CSV of a training run.
pub fn training_curve_csv(curve: &[EpochRecord]) -> String {
    let mut csv = String::from("epoch,loss,class_accuracy,individual_accuracy\n");
    for r in curve {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            r.epoch, r.loss, r.class_accuracy, r.individual_accuracy
        );
    }
    csv
}

/// Accuracy and loss after one training epoch.
#[derive(Debug, Clone, Copy)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub class_accuracy: f64,
    pub individual_accuracy: f64,
}

/// One seeded classification run with its two snapshots.
pub struct TrainingRun {
    pub baseline: Network,
    pub endline: Network,
    pub curve: Vec<EpochRecord>,
    /// First epoch (1-based) at which both accuracies hit 100%.
    pub first_perfect_epoch: Option<usize>,
}

/// Trains one classifier, snapshotting at `baseline_epochs` and running on
/// to `endline_epochs`. Fails when 100% accuracy is never reached.
pub fn run_baseline_endline(plan: &ExperimentPlan, pipeline: &Pipeline) -> Result<TrainingRun> {
    plan.validate()?;
    let mut net = Network::new(
        &[CODE_SIZE, HIDDEN_WIDTH, OUTPUT_SLOTS],
        plan.seed.wrapping_add(3),
    )?;
    let cfg = TrainConfig {
        learning_rate: plan.sann_learning_rate,
        epochs: plan.endline_epochs,
        seed: plan.seed.wrapping_add(4),
        shuffle_each_epoch: true,
    };
    let mut rng = Rng::new(cfg.seed);
    let mut curve = Vec::with_capacity(plan.endline_epochs);
    let mut baseline = None;
    let mut first_perfect_epoch = None;
    for epoch in 1..=plan.endline_epochs {
        let loss = net.train_epoch(&pipeline.samples, &cfg, &mut rng)?;
        let (class_accuracy, individual_accuracy) = net.accuracy(&pipeline.samples)?;
        if first_perfect_epoch.is_none() && class_accuracy == 1.0 && individual_accuracy == 1.0 {
            first_perfect_epoch = Some(epoch);
        }
        curve.push(EpochRecord {
            epoch,
            loss,
            class_accuracy,
            individual_accuracy,
        });
        if epoch == plan.baseline_epochs {
            baseline = Some(net.clone());
        }
    }
    if first_perfect_epoch.is_none() {
        let best = curve
            .iter()
            .map(|r| (r.class_accuracy + r.individual_accuracy) / 2.0)
            .fold(0.0f64, f64::max);
        return Err(Error::Experiment(format!(
            "classification never reached 100% accuracy within {} epochs (best mean accuracy {best:.3})",
            plan.endline_epochs
        )));
    }
    Ok(TrainingRun {
        baseline: baseline.expect("baseline epoch lies within the run"),
        endline: net,
        curve,
        first_perfect_epoch,
    })
}

/// One observed image: the argmax confidences plus the salience response
/// read from the same forward pass.
#[derive(Debug, Clone)]
pub struct ConfidenceRecord {
    /// Comparison group ("A".."D", an intensity factor, or a mode name).
    pub group: String,
    pub image_id: String,
    pub class_confidence: f64,
    pub individual_confidence: f64,
    pub response: f64,
}

fn observe(
    net: &mut Network,
    pipeline: &Pipeline,
    index: usize,
    group: &str,
) -> Result<ConfidenceRecord> {
    let prediction = net.predict(&pipeline.samples[index].0)?;
    let response = response_from_cache(net);
    Ok(ConfidenceRecord {
        group: group.to_string(),
        image_id: pipeline.images[index].id.clone(),
        class_confidence: prediction.class_confidence,
        individual_confidence: prediction.individual_confidence,
        response,
    })
}

fn observe_all(
    net: &mut Network,
    pipeline: &Pipeline,
    group: &str,
) -> Result<Vec<ConfidenceRecord>> {
    (0..pipeline.images.len())
        .map(|i| observe(net, pipeline, i, group))
        .collect()
}

/// Groups of the weight-strengthening comparison:
/// A = baseline, B = endline, C = tagged images after tagging the baseline,
/// D = untagged images after the same tagging.
pub struct SalienceOutcome {
    pub records: Vec<ConfidenceRecord>,
    pub tag_reports: Vec<TagReport>,
    /// The tagged network (baseline clone after one-time tagging).
    pub tagged: Network,
}

impl SalienceOutcome {
    pub fn group_records(&self, group: &str) -> Vec<&ConfidenceRecord> {
        self.records.iter().filter(|r| r.group == group).collect()
    }

    pub fn class_confidences(&self, group: &str) -> Vec<f64> {
        self.group_records(group)
            .iter()
            .map(|r| r.class_confidence)
            .collect()
    }

    pub fn individual_confidences(&self, group: &str) -> Vec<f64> {
        self.group_records(group)
            .iter()
            .map(|r| r.individual_confidence)
            .collect()
    }
}

/// Tags a clone of the baseline on the plan's tagged images and compares
/// confidences across the four groups of the box-plot comparison.
pub fn run_salience_confidence(
    plan: &ExperimentPlan,
    pipeline: &Pipeline,
    baseline: &Network,
    endline: &Network,
) -> Result<SalienceOutcome> {
    plan.validate()?;
    let tagged_indices: Vec<usize> = plan
        .tagged_image_ids
        .iter()
        .map(|id| pipeline.index_of(id))
        .collect::<Result<_>>()?;

    let mut records = Vec::new();
    let mut baseline_clone = baseline.clone();
    records.extend(observe_all(&mut baseline_clone, pipeline, "A")?);
    let mut endline_clone = endline.clone();
    records.extend(observe_all(&mut endline_clone, pipeline, "B")?);

    let mut tagged = baseline.clone();
    let mut tag_reports = Vec::new();
    for &index in &tagged_indices {
        tag_reports.push(tag(
            &mut tagged,
            &pipeline.samples[index].0,
            &plan.salience,
        )?);
    }
    for index in 0..pipeline.images.len() {
        let group = if tagged_indices.contains(&index) {
            "C"
        } else {
            "D"
        };
        records.push(observe(&mut tagged, pipeline, index, group)?);
    }

    Ok(SalienceOutcome {
        records,
        tag_reports,
        tagged,
    })
}

/// Confidence shift produced by one intensity factor.
pub struct IntensityOutcome {
    pub factor: f64,
    pub records: Vec<ConfidenceRecord>,
    pub mean_class_improvement: f64,
    pub mean_individual_improvement: f64,
}

/// Clones the baseline once per factor and tags identically except for the
/// intensity multiplier applied to the sweep's base level.
pub fn run_intensity_sweep(
    plan: &ExperimentPlan,
    pipeline: &Pipeline,
    baseline: &Network,
) -> Result<Vec<IntensityOutcome>> {
    plan.validate()?;
    let tagged_indices: Vec<usize> = plan
        .tagged_image_ids
        .iter()
        .map(|id| pipeline.index_of(id))
        .collect::<Result<_>>()?;
    let before = observe_all(&mut baseline.clone(), pipeline, "baseline")?;

    let mut outcomes = Vec::with_capacity(plan.intensity_factors.len());
    for &factor in &plan.intensity_factors {
        let mut net = baseline.clone();
        let cfg = SalienceConfig {
            level: plan.intensity_base_level,
            intensity: factor,
            ..plan.salience.clone()
        };
        for &index in &tagged_indices {
            tag(&mut net, &pipeline.samples[index].0, &cfg)?;
        }
        let group = format!("{factor}x");
        let records = observe_all(&mut net, pipeline, &group)?;
        let class_improvements: Vec<f64> = records
            .iter()
            .zip(&before)
            .map(|(after, b)| after.class_confidence - b.class_confidence)
            .collect();
        let individual_improvements: Vec<f64> = records
            .iter()
            .zip(&before)
            .map(|(after, b)| after.individual_confidence - b.individual_confidence)
            .collect();
        outcomes.push(IntensityOutcome {
            factor,
            records,
            mean_class_improvement: mean(&class_improvements),
            mean_individual_improvement: mean(&individual_improvements),
        });
    }
    Ok(outcomes)
}

/// Results of the sign-symmetry check plus the combined +/- tagging run.
pub struct PolarityOutcome {
    pub positive_id: String,
    pub negative_id: String,
    /// max over nodes of |S_positive + S_negative|.
    pub max_salience_negation_error: f64,
    /// Weight matrices of the two runs compared bit for bit.
    pub weights_bit_identical: bool,
    /// Unmodulated-mode outputs of the two runs compared bit for bit.
    pub outputs_bit_identical: bool,
    /// max over images of |R_positive + R_negative|.
    pub max_response_negation_error: f64,
    /// Per-image salience response after tagging +positive then -negative.
    pub combined_responses: Vec<(String, f64)>,
    /// The network left behind by the combined run (for the diagram).
    pub combined: Network,
}

/// Runs the polarity suite in the unmodulated mode: (a) tags a baseline
/// clone with +N and another with -N and compares them element-wise,
/// then (b) tags +positive followed by -negative sequentially and reads
/// the per-image responses.
pub fn run_polarity_suite(
    plan: &ExperimentPlan,
    pipeline: &Pipeline,
    baseline: &Network,
) -> Result<PolarityOutcome> {
    plan.validate()?;
    let positive_id = plan.tagged_image_ids[0].clone();
    let negative_id = plan.polarity_negative_id.clone();
    let positive_index = pipeline.index_of(&positive_id)?;
    let negative_index = pipeline.index_of(&negative_id)?;
    if pipeline.images[positive_index].class_index == pipeline.images[negative_index].class_index {
        return Err(Error::invalid_input(
            "polarity suite needs tagged images from two different classes",
        ));
    }
    // Sign symmetry is a property of the unmodulated readout, and the
    // sequential events must not saturate the nodes both patterns share.
    let cfg = SalienceConfig {
        activation_mode: ActivationMode::Standard,
        level: plan.polarity_level,
        ..plan.salience.clone()
    };

    let mut positive = baseline.clone();
    tag(&mut positive, &pipeline.samples[positive_index].0, &cfg)?;
    let mut negative = baseline.clone();
    tag(
        &mut negative,
        &pipeline.samples[positive_index].0,
        &cfg.negated(),
    )?;

    let mut max_salience_negation_error = 0.0f64;
    let mut weights_bit_identical = true;
    for (lp, ln) in positive.layers().iter().zip(negative.layers()) {
        for (sp, sn) in lp.salience.iter().zip(&ln.salience) {
            max_salience_negation_error = max_salience_negation_error.max((sp + sn).abs());
        }
        if lp.weights != ln.weights {
            weights_bit_identical = false;
        }
    }

    let mut outputs_bit_identical = true;
    let mut max_response_negation_error = 0.0f64;
    for (code, _) in &pipeline.samples {
        let out_pos = positive.forward(code)?;
        let r_pos = response_from_cache(&positive);
        let out_neg = negative.forward(code)?;
        let r_neg = response_from_cache(&negative);
        if out_pos != out_neg {
            outputs_bit_identical = false;
        }
        max_response_negation_error = max_response_negation_error.max((r_pos + r_neg).abs());
    }

    let mut combined = baseline.clone();
    tag(&mut combined, &pipeline.samples[positive_index].0, &cfg)?;
    tag(
        &mut combined,
        &pipeline.samples[negative_index].0,
        &cfg.negated(),
    )?;
    let mut combined_responses = Vec::with_capacity(pipeline.images.len());
    for (index, image) in pipeline.images.iter().enumerate() {
        let r = respond(&mut combined, &pipeline.samples[index].0, cfg.gamma)?;
        combined_responses.push((image.id.clone(), r.response));
    }

    Ok(PolarityOutcome {
        positive_id,
        negative_id,
        max_salience_negation_error,
        weights_bit_identical,
        outputs_bit_identical,
        max_response_negation_error,
        combined_responses,
        combined,
    })
}

/// Confidences after tagging under one activation-modulation mode.
pub struct ActivationOutcome {
    pub mode: ActivationMode,
    pub records: Vec<ConfidenceRecord>,
    pub tagged_class_confidence: f64,
    pub tagged_individual_confidence: f64,
}

/// Baseline group plus one outcome per modulated mode, each tagged with
/// weight strengthening disabled so the activation effect stands alone.
pub struct ActivationReport {
    pub baseline_records: Vec<ConfidenceRecord>,
    pub baseline_tagged_class_confidence: f64,
    pub variants: Vec<ActivationOutcome>,
}

pub fn run_activation_variants(
    plan: &ExperimentPlan,
    pipeline: &Pipeline,
    baseline: &Network,
) -> Result<ActivationReport> {
    plan.validate()?;
    let tagged_indices: Vec<usize> = plan
        .tagged_image_ids
        .iter()
        .map(|id| pipeline.index_of(id))
        .collect::<Result<_>>()?;
    let first_tagged = tagged_indices[0];

    let baseline_records = observe_all(&mut baseline.clone(), pipeline, "baseline")?;
    let baseline_tagged_class_confidence = baseline_records[first_tagged].class_confidence;

    let mut variants = Vec::with_capacity(plan.activation_modes.len());
    for &mode in &plan.activation_modes {
        let mut net = baseline.clone();
        let cfg = SalienceConfig {
            affect_weights: false,
            activation_mode: mode,
            ..plan.salience.clone()
        };
        for &index in &tagged_indices {
            tag(&mut net, &pipeline.samples[index].0, &cfg)?;
        }
        let records = observe_all(&mut net, pipeline, &mode.to_string())?;
        variants.push(ActivationOutcome {
            mode,
            tagged_class_confidence: records[first_tagged].class_confidence,
            tagged_individual_confidence: records[first_tagged].individual_confidence,
            records,
        });
    }
    Ok(ActivationReport {
        baseline_records,
        baseline_tagged_class_confidence,
        variants,
    })
}

/// Which part of the suite to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentSelection {
    Baseline,
    Salience,
    Intensity,
    Polarity,
    Activation,
    Bench,
    All,
}

impl FromStr for ExperimentSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<ExperimentSelection> {
        match s.to_ascii_lowercase().as_str() {
            "baseline" => Ok(ExperimentSelection::Baseline),
            "salience" => Ok(ExperimentSelection::Salience),
            "intensity" => Ok(ExperimentSelection::Intensity),
            "polarity" => Ok(ExperimentSelection::Polarity),
            "activation" => Ok(ExperimentSelection::Activation),
            "bench" => Ok(ExperimentSelection::Bench),
            "all" => Ok(ExperimentSelection::All),
            other => Err(Error::invalid_input(format!(
                "unknown experiment '{other}' (expected baseline, salience, intensity, polarity, activation, bench or all)"
            ))),
        }
    }
}

/// Paths and human-readable summary of one suite invocation.
pub struct SuiteReport {
    pub lines: Vec<String>,
    pub artifacts: Vec<PathBuf>,
}

struct ArtifactSink {
    out_dir: PathBuf,
    artifacts: Vec<PathBuf>,
}

impl ArtifactSink {
    fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.out_dir.join(name);
        fs::write(&path, contents)?;
        self.artifacts.push(path.clone());
        Ok(path)
    }

    fn record(&mut self, path: PathBuf) {
        self.artifacts.push(path);
    }
}

fn records_csv(records: &[ConfidenceRecord]) -> String {
    let mut csv = String::from("group,image_id,class_confidence,individual_confidence,response\n");
    for r in records {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            r.group, r.image_id, r.class_confidence, r.individual_confidence, r.response
        );
    }
    csv
}

fn confidence_box_groups(records: &[ConfidenceRecord], groups: &[&str]) -> Vec<BoxGroup> {
    let mut out = Vec::new();
    for g in groups {
        let class: Vec<f64> = records
            .iter()
            .filter(|r| r.group == *g)
            .map(|r| r.class_confidence)
            .collect();
        if !class.is_empty() {
            out.push(BoxGroup::new(format!("{g}1"), class));
        }
    }
    for g in groups {
        let individual: Vec<f64> = records
            .iter()
            .filter(|r| r.group == *g)
            .map(|r| r.individual_confidence)
            .collect();
        if !individual.is_empty() {
            out.push(BoxGroup::new(format!("{g}2"), individual));
        }
    }
    out
}

/// Runs the selected experiments end to end over a prepared pipeline,
/// writing CSV/SVG/snapshot artifacts under `out_dir`.
pub fn run_suite(
    plan: &ExperimentPlan,
    selection: ExperimentSelection,
    out_dir: impl AsRef<Path>,
    pipeline: &Pipeline,
) -> Result<SuiteReport> {
    plan.validate()?;
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir)?;
    let mut sink = ArtifactSink {
        out_dir: out_dir.to_path_buf(),
        artifacts: Vec::new(),
    };
    let mut lines = Vec::new();

    sink.write("encoder_loss.csv", &pipeline.encoder_loss_csv())?;
    sink.write("codes.csv", &pipeline.codes_csv())?;
    match pipeline.encoder_losses.last() {
        Some(final_loss) => lines.push(format!(
            "encoder: reconstruction accuracy {:.2}% after {} epochs (final loss {:.5})",
            pipeline.reconstruction_accuracy, plan.encoder_epochs, final_loss
        )),
        None => lines.push(format!(
            "encoder: reconstruction accuracy {:.2}% (pre-trained snapshot)",
            pipeline.reconstruction_accuracy
        )),
    }

    let run = run_baseline_endline(plan, pipeline)?;
    sink.write("training_curve.csv", &training_curve_csv(&run.curve))?;
    let baseline_path = out_dir.join("baseline.snn");
    run.baseline.save(&baseline_path)?;
    sink.record(baseline_path);
    let endline_path = out_dir.join("endline.snn");
    run.endline.save(&endline_path)?;
    sink.record(endline_path);
    let (baseline_class, baseline_individual) = run.baseline.clone().accuracy(&pipeline.samples)?;
    lines.push(format!(
        "training: 100% accuracy from epoch {} (baseline at epoch {}: class {:.0}%, individual {:.0}%)",
        run.first_perfect_epoch.unwrap(),
        plan.baseline_epochs,
        100.0 * baseline_class,
        100.0 * baseline_individual
    ));

    let wants = |s: ExperimentSelection| selection == s || selection == ExperimentSelection::All;

    if wants(ExperimentSelection::Salience) {
        let outcome = run_salience_confidence(plan, pipeline, &run.baseline, &run.endline)?;
        sink.write("salience_confidence.csv", &records_csv(&outcome.records))?;
        let groups = confidence_box_groups(&outcome.records, &["A", "B", "C", "D"]);
        let svg_path = out_dir.join("salience_confidence.svg");
        render_boxplot_svg(
            "Classification confidence before/after one-time salience tagging",
            &groups,
            &svg_path,
        )?;
        sink.record(svg_path);
        let tagged_path = out_dir.join("tagged.snn");
        outcome.tagged.save(&tagged_path)?;
        sink.record(tagged_path);
        let mut tag_csv = Vec::new();
        outcome.tag_reports[0].write_csv(&mut tag_csv)?;
        sink.write("tag_report.csv", &String::from_utf8_lossy(&tag_csv))?;
        let viz_path = out_dir.join("network_tagged.svg");
        render_network_svg(&outcome.tagged, &viz_path)?;
        sink.record(viz_path);

        let tagged_id = &plan.tagged_image_ids[0];
        let before = outcome
            .records
            .iter()
            .find(|r| r.group == "A" && &r.image_id == tagged_id)
            .expect("tagged image present in group A");
        let after = outcome
            .records
            .iter()
            .find(|r| r.group == "C" && &r.image_id == tagged_id)
            .expect("tagged image present in group C");
        lines.push(format!(
            "salience: {} class confidence {:.4} -> {:.4}, individual {:.4} -> {:.4} (R = {:.4})",
            tagged_id,
            before.class_confidence,
            after.class_confidence,
            before.individual_confidence,
            after.individual_confidence,
            after.response
        ));
    }

    if wants(ExperimentSelection::Intensity) {
        let outcomes = run_intensity_sweep(plan, pipeline, &run.baseline)?;
        let mut csv =
            String::from("factor,image_id,class_confidence,individual_confidence,response\n");
        let mut box_groups = Vec::new();
        let mut summary = String::from("intensity: mean class improvement");
        for o in &outcomes {
            for r in &o.records {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{}",
                    o.factor, r.image_id, r.class_confidence, r.individual_confidence, r.response
                );
            }
            box_groups.push(BoxGroup::new(
                format!("{}x", o.factor),
                o.records.iter().map(|r| r.class_confidence).collect(),
            ));
            let _ = write!(summary, " {}x: {:+.5}", o.factor, o.mean_class_improvement);
        }
        sink.write("intensity.csv", &csv)?;
        let svg_path = out_dir.join("intensity.svg");
        render_boxplot_svg(
            "Class confidence by salience intensity factor",
            &box_groups,
            &svg_path,
        )?;
        sink.record(svg_path);
        lines.push(summary);
    }

    if wants(ExperimentSelection::Polarity) {
        let outcome = run_polarity_suite(plan, pipeline, &run.baseline)?;
        let mut csv = String::from("image_id,response\n");
        for (id, r) in &outcome.combined_responses {
            let _ = writeln!(csv, "{id},{r}");
        }
        sink.write("polarity.csv", &csv)?;
        let viz_path = out_dir.join("network_polarity.svg");
        render_network_svg(&outcome.combined, &viz_path)?;
        sink.record(viz_path);
        let r_pos = outcome
            .combined_responses
            .iter()
            .find(|(id, _)| id == &outcome.positive_id)
            .map(|(_, r)| *r)
            .unwrap();
        let r_neg = outcome
            .combined_responses
            .iter()
            .find(|(id, _)| id == &outcome.negative_id)
            .map(|(_, r)| *r)
            .unwrap();
        lines.push(format!(
            "polarity: max |S_pos + S_neg| = {:.2e}, weights identical: {}, confidences identical: {}; after +{} / -{}: R({}) = {:.4}, R({}) = {:.4}",
            outcome.max_salience_negation_error,
            outcome.weights_bit_identical,
            outcome.outputs_bit_identical,
            outcome.positive_id,
            outcome.negative_id,
            outcome.positive_id,
            r_pos,
            outcome.negative_id,
            r_neg
        ));
    }

    if wants(ExperimentSelection::Activation) {
        let report = run_activation_variants(plan, pipeline, &run.baseline)?;
        let mut all_records = report.baseline_records.clone();
        for v in &report.variants {
            all_records.extend(v.records.iter().cloned());
        }
        sink.write("activation.csv", &records_csv(&all_records))?;
        let mut group_names: Vec<&str> = vec!["baseline"];
        let mode_names: Vec<String> = report.variants.iter().map(|v| v.mode.to_string()).collect();
        group_names.extend(mode_names.iter().map(|s| s.as_str()));
        let groups = confidence_box_groups(&all_records, &group_names);
        let svg_path = out_dir.join("activation.svg");
        render_boxplot_svg(
            "Class confidence by activation-modulation mode",
            &groups,
            &svg_path,
        )?;
        sink.record(svg_path);
        let mut summary = format!(
            "activation: tagged class confidence baseline {:.4}",
            report.baseline_tagged_class_confidence
        );
        for v in &report.variants {
            let _ = write!(summary, ", {} {:.4}", v.mode, v.tagged_class_confidence);
        }
        lines.push(summary);
    }

    if wants(ExperimentSelection::Bench) {
        let mut tagged = run.baseline.clone();
        let first_tagged = pipeline.index_of(&plan.tagged_image_ids[0])?;
        tag(
            &mut tagged,
            &pipeline.samples[first_tagged].0,
            &plan.salience,
        )?;
        let report = run_benchmark(
            &tagged,
            &pipeline.samples[first_tagged].0,
            plan.benchmark_repetitions,
            plan.benchmark_warmup,
        )?;
        let mut csv = String::from("arm,run,micros\n");
        for (i, t) in report.without.timings_us.iter().enumerate() {
            let _ = writeln!(csv, "without,{},{}", i + 1, t);
        }
        for (i, t) in report.with_response.timings_us.iter().enumerate() {
            let _ = writeln!(csv, "with,{},{}", i + 1, t);
        }
        sink.write("bench.csv", &csv)?;
        let svg_path = out_dir.join("bench.svg");
        render_boxplot_svg(
            "Classification time with and without the salience response (us)",
            &[
                BoxGroup::new("without", report.without.timings_us.clone()),
                BoxGroup::new("with", report.with_response.timings_us.clone()),
            ],
            &svg_path,
        )?;
        sink.record(svg_path);
        lines.push(format!(
            "bench: mean {:.2}us (without) vs {:.2}us (with response) over {} runs, ratio {:.3}; medians {:.2}us / {:.2}us",
            report.without.mean_us,
            report.with_response.mean_us,
            plan.benchmark_repetitions,
            report.mean_ratio,
            report.without.median_us,
            report.with_response.median_us
        ));
    }

    Ok(SuiteReport {
        lines,
        artifacts: sink.artifacts,
    })
}
