use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use sann_core::dataset::{
    generate_silhouettes, individual_name, load_manifest, read_pgm, write_dataset, LabeledImage,
    CLASS_NAMES,
};
use sann_core::encoder::Autoencoder;
use sann_core::experiments::{
    render_network_svg, run_baseline_endline, training_curve_csv, ExperimentPlan,
    ExperimentSelection, Pipeline,
};
use sann_core::network::Network;
use sann_core::salience::{respond, response_from_cache, tag, SalienceConfig};
use sann_core::Result;

#[derive(Parser)]
#[command(
    name = "sann",
    version,
    about = "Salience-affected neural network harness",
    subcommand_required = true,
    arg_required_else_help = true
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the 12-image silhouette dataset (PGM files plus manifest)
    GenData {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value = "out/data")]
        out_dir: PathBuf,
    },
    /// Train the 784-16-784 autoencoder and export its snapshot and codes
    TrainEncoder {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        epochs: usize,
        #[arg(long, default_value_t = 50.0)]
        learning_rate: f64,
        /// Dataset manifest; generated silhouettes when omitted
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Train the 16-16-15 classifier on encoded images
    Train {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Total training epochs (the endline snapshot)
        #[arg(long, default_value_t = 500)]
        epochs: usize,
        /// Epoch of the baseline snapshot
        #[arg(long, default_value_t = 355)]
        baseline_epochs: usize,
        #[arg(long, default_value_t = 2.0)]
        learning_rate: f64,
        /// Pre-trained encoder snapshot; trains one when omitted
        #[arg(long)]
        encoder: Option<PathBuf>,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Apply one-time salience tagging to a trained snapshot
    Tag {
        /// Classifier snapshot to tag
        #[arg(long)]
        snapshot: PathBuf,
        /// Encoder snapshot used to encode the image
        #[arg(long)]
        encoder: PathBuf,
        /// 28x28 PGM image carrying the salience
        #[arg(long)]
        image: PathBuf,
        /// Neuromodulator level in [-1, 1]
        #[arg(long, default_value_t = 1.0)]
        level: f64,
        /// Intensity multiplier applied to the level
        #[arg(long, default_value_t = 1.0)]
        intensity: f64,
        /// Weight-strengthening constant
        #[arg(long, default_value_t = 0.1)]
        theta: f64,
        /// Activation modulation: none, offset, gradient or amplitude
        #[arg(long, default_value = "none")]
        mode: String,
        /// Leave the weights untouched (activation modulation only)
        #[arg(long)]
        no_affect_weights: bool,
        /// Where to write the tagged snapshot
        #[arg(long)]
        out: PathBuf,
        /// Optional per-node tagging report CSV
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Classify one image and print prediction plus salience response
    Infer {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long)]
        encoder: PathBuf,
        #[arg(long)]
        image: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
    },
    /// Print the salience response and desire-to-act for one image
    Respond {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long)]
        encoder: PathBuf,
        #[arg(long)]
        image: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
    },
    /// Run the experiment suite and emit CSV/SVG/snapshot artifacts
    Experiment {
        /// baseline | salience | intensity | polarity | activation | bench | all
        which: String,
        #[command(flatten)]
        overrides: PlanOverrides,
        /// Dataset manifest; generated silhouettes when omitted
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Render a network snapshot as an SVG diagram
    Viz {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long, default_value = "out/network.svg")]
        out: PathBuf,
    },
}

/// Flag-level overrides for the experiment plan. Explicit flags win over
/// plan-file values, which win over defaults.
#[derive(Args)]
struct PlanOverrides {
    /// Plan file (JSON mirroring the plan fields; unknown keys rejected)
    #[arg(long)]
    plan: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Total training epochs (the endline snapshot)
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    baseline_epochs: Option<usize>,
    #[arg(long)]
    encoder_epochs: Option<usize>,
    /// Weight-strengthening constant
    #[arg(long)]
    theta: Option<f64>,
    /// Desire-to-act constant
    #[arg(long)]
    gamma: Option<f64>,
    /// Neuromodulator level in [-1, 1]
    #[arg(long)]
    level: Option<f64>,
    /// Intensity multiplier applied to the level
    #[arg(long)]
    intensity: Option<f64>,
    /// Activation modulation applied at tagging time
    #[arg(long)]
    mode: Option<String>,
    /// Image id tagged by the salience experiments
    #[arg(long)]
    tagged_image: Option<String>,
}

impl PlanOverrides {
    fn resolve(&self) -> Result<ExperimentPlan> {
        let (mut plan, from_file) = match &self.plan {
            Some(path) => (ExperimentPlan::load(path)?, true),
            None => (ExperimentPlan::default(), false),
        };
        let note = |flag: &str, old: String, new: String| {
            if from_file && old != new {
                eprintln!("note: {flag} {new} overrides plan value {old}");
            }
        };
        if let Some(seed) = self.seed {
            note("--seed", plan.seed.to_string(), seed.to_string());
            plan.seed = seed;
        }
        if let Some(epochs) = self.epochs {
            note(
                "--epochs",
                plan.endline_epochs.to_string(),
                epochs.to_string(),
            );
            plan.endline_epochs = epochs;
        }
        if let Some(epochs) = self.baseline_epochs {
            note(
                "--baseline-epochs",
                plan.baseline_epochs.to_string(),
                epochs.to_string(),
            );
            plan.baseline_epochs = epochs;
        }
        if let Some(epochs) = self.encoder_epochs {
            note(
                "--encoder-epochs",
                plan.encoder_epochs.to_string(),
                epochs.to_string(),
            );
            plan.encoder_epochs = epochs;
        }
        if let Some(theta) = self.theta {
            note(
                "--theta",
                plan.salience.theta.to_string(),
                theta.to_string(),
            );
            plan.salience.theta = theta;
        }
        if let Some(gamma) = self.gamma {
            note(
                "--gamma",
                plan.salience.gamma.to_string(),
                gamma.to_string(),
            );
            plan.salience.gamma = gamma;
        }
        if let Some(level) = self.level {
            note(
                "--level",
                plan.salience.level.to_string(),
                level.to_string(),
            );
            plan.salience.level = level;
        }
        if let Some(intensity) = self.intensity {
            note(
                "--intensity",
                plan.salience.intensity.to_string(),
                intensity.to_string(),
            );
            plan.salience.intensity = intensity;
        }
        if let Some(mode) = &self.mode {
            let mode: sann_core::ActivationMode = mode.parse()?;
            note(
                "--mode",
                plan.salience.activation_mode.to_string(),
                mode.to_string(),
            );
            plan.salience.activation_mode = mode;
        }
        if let Some(tagged) = &self.tagged_image {
            note(
                "--tagged-image",
                plan.tagged_image_ids.join("+"),
                tagged.clone(),
            );
            plan.tagged_image_ids = vec![tagged.clone()];
        }
        plan.validate()?;
        Ok(plan)
    }
}

fn load_images(data: &Option<PathBuf>, seed: u64) -> Result<Vec<LabeledImage>> {
    match data {
        Some(manifest) => load_manifest(manifest),
        None => Ok(generate_silhouettes(seed)),
    }
}

fn encoded_input(encoder_path: &Path, image_path: &Path) -> Result<Vec<f64>> {
    let mut encoder = Autoencoder::load(encoder_path)?;
    let pixels = read_pgm(image_path)?;
    encoder.encode(&pixels)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenData { seed, out_dir } => {
            let images = generate_silhouettes(seed);
            let manifest = write_dataset(&out_dir, &images)?;
            println!(
                "wrote {} PGM images and {}",
                images.len(),
                manifest.display()
            );
        }
        Command::TrainEncoder {
            seed,
            epochs,
            learning_rate,
            data,
            out_dir,
        } => {
            let plan = ExperimentPlan {
                seed,
                encoder_epochs: epochs,
                encoder_learning_rate: learning_rate,
                ..ExperimentPlan::default()
            };
            let images = load_images(&data, seed)?;
            let pipeline = Pipeline::from_images(&plan, images)?;
            fs::create_dir_all(&out_dir)?;
            let snapshot = out_dir.join("encoder.snn");
            pipeline.encoder.save(&snapshot)?;
            fs::write(
                out_dir.join("encoder_loss.csv"),
                pipeline.encoder_loss_csv(),
            )?;
            fs::write(out_dir.join("codes.csv"), pipeline.codes_csv())?;
            println!(
                "encoder: reconstruction accuracy {:.2}% after {epochs} epochs",
                pipeline.reconstruction_accuracy
            );
            println!("wrote {}", snapshot.display());
        }
        Command::Train {
            seed,
            epochs,
            baseline_epochs,
            learning_rate,
            encoder,
            data,
            out_dir,
        } => {
            let plan = ExperimentPlan {
                seed,
                endline_epochs: epochs,
                baseline_epochs,
                sann_learning_rate: learning_rate,
                ..ExperimentPlan::default()
            };
            let images = load_images(&data, seed)?;
            let pipeline = match encoder {
                Some(path) => Pipeline::with_encoder(&plan, images, Autoencoder::load(path)?)?,
                None => Pipeline::from_images(&plan, images)?,
            };
            let run = run_baseline_endline(&plan, &pipeline)?;
            fs::create_dir_all(&out_dir)?;
            run.baseline.save(out_dir.join("baseline.snn"))?;
            run.endline.save(out_dir.join("endline.snn"))?;
            fs::write(
                out_dir.join("training_curve.csv"),
                training_curve_csv(&run.curve),
            )?;
            println!(
                "training: 100% accuracy from epoch {}; snapshots at epoch {} and {}",
                run.first_perfect_epoch.unwrap(),
                baseline_epochs,
                epochs
            );
            println!("wrote {}", out_dir.join("baseline.snn").display());
            println!("wrote {}", out_dir.join("endline.snn").display());
        }
        Command::Tag {
            snapshot,
            encoder,
            image,
            level,
            intensity,
            theta,
            mode,
            no_affect_weights,
            out,
            report,
        } => {
            let mut net = Network::load(&snapshot)?;
            let code = encoded_input(&encoder, &image)?;
            let cfg = SalienceConfig {
                level,
                intensity,
                theta,
                affect_weights: !no_affect_weights,
                activation_mode: mode.parse()?,
                ..SalienceConfig::default()
            };
            let tag_report = tag(&mut net, &code, &cfg)?;
            net.save(&out)?;
            if tag_report.level_clamped {
                eprintln!(
                    "note: level x intensity clamped to {}",
                    tag_report.effective_level
                );
            }
            println!(
                "tagged with effective level {}: {} weights strengthened across {} nodes",
                tag_report.effective_level,
                tag_report.weights_touched,
                tag_report.nodes.len()
            );
            if let Some(report_path) = report {
                let mut csv = Vec::new();
                tag_report.write_csv(&mut csv)?;
                fs::write(&report_path, csv)?;
                println!("wrote {}", report_path.display());
            }
            println!("wrote {}", out.display());
        }
        Command::Infer {
            snapshot,
            encoder,
            image,
            gamma,
        } => {
            let mut net = Network::load(&snapshot)?;
            let code = encoded_input(&encoder, &image)?;
            let prediction = net.predict(&code)?;
            let response = response_from_cache(&net);
            println!(
                "prediction: class {} (confidence {:.4}), individual {} (confidence {:.4})",
                CLASS_NAMES
                    .get(prediction.class_index)
                    .copied()
                    .unwrap_or("unknown"),
                prediction.class_confidence,
                individual_name(prediction.individual_index),
                prediction.individual_confidence
            );
            println!("salience: R = {}, D = {}", response, gamma * response);
        }
        Command::Respond {
            snapshot,
            encoder,
            image,
            gamma,
        } => {
            let mut net = Network::load(&snapshot)?;
            let code = encoded_input(&encoder, &image)?;
            let r = respond(&mut net, &code, gamma)?;
            println!("R = {}, D = {}", r.response, r.desire_to_act);
        }
        Command::Experiment {
            which,
            overrides,
            data,
            out_dir,
        } => {
            let selection: ExperimentSelection = which.parse()?;
            let plan = overrides.resolve()?;
            let pipeline = match &data {
                Some(manifest) => Pipeline::from_images(&plan, load_manifest(manifest)?)?,
                None => Pipeline::prepare(&plan)?,
            };
            let report = sann_core::experiments::run_suite(&plan, selection, &out_dir, &pipeline)?;
            for line in &report.lines {
                println!("{line}");
            }
            println!("artifacts:");
            for path in &report.artifacts {
                println!("  {}", path.display());
            }
        }
        Command::Viz { snapshot, out } => {
            let net = Network::load(&snapshot)?;
            if let Some(parent) = out.parent() {
                if !parent.as_os_str().is_empty() {
                    fs::create_dir_all(parent)?;
                }
            }
            render_network_svg(&net, &out)?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn overrides_win_over_plan_file() {
        let dir = tempfile::tempdir().unwrap();
        let plan_path = dir.path().join("plan.json");
        fs::write(&plan_path, r#"{"seed": 42, "endline_epochs": 480}"#).unwrap();
        let overrides = PlanOverrides {
            plan: Some(plan_path),
            seed: Some(7),
            epochs: None,
            baseline_epochs: None,
            encoder_epochs: None,
            theta: Some(0.2),
            gamma: None,
            level: None,
            intensity: None,
            mode: Some("amplitude".to_string()),
            tagged_image: None,
        };
        let plan = overrides.resolve().unwrap();
        assert_eq!(plan.seed, 7);
        assert_eq!(plan.endline_epochs, 480);
        assert_eq!(plan.salience.theta, 0.2);
        assert_eq!(
            plan.salience.activation_mode,
            sann_core::ActivationMode::Amplitude
        );
    }

    #[test]
    fn bad_mode_is_an_input_error() {
        let overrides = PlanOverrides {
            plan: None,
            seed: None,
            epochs: None,
            baseline_epochs: None,
            encoder_epochs: None,
            theta: None,
            gamma: None,
            level: None,
            intensity: None,
            mode: Some("relu".to_string()),
            tagged_image: None,
        };
        assert!(overrides.resolve().is_err());
    }
}
