use super::{emit_report, json_f64};
use crate::Format;
use cine3d::qa::{contrast, edge_sharpness, intensity_profile, mse, psnr_db, ssim};
use cine3d::volume::{load_labels, load_volume};
use cine3d::{Error, Result};
use clap::{Args, ValueEnum};
use serde_json::json;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, Eq, PartialEq, ValueEnum)]
enum QaMetric {
    /// Edge sharpness along the LV-to-RV intensity profile; needs --labels.
    Es,
    /// Max/min intensity ratio along the same profile; needs --labels.
    Contrast,
    /// Structural similarity between two volumes in the unit range.
    Ssim,
    /// Peak signal-to-noise ratio in dB; null for identical inputs.
    Psnr,
    /// Mean squared error between two volumes.
    Mse,
}

impl QaMetric {
    fn name(self) -> &'static str {
        match self {
            QaMetric::Es => "es",
            QaMetric::Contrast => "contrast",
            QaMetric::Ssim => "ssim",
            QaMetric::Psnr => "psnr",
            QaMetric::Mse => "mse",
        }
    }
}

#[derive(Args)]
pub struct QaArgs {
    #[arg(long, value_enum)]
    metric: QaMetric,
    /// One intensity volume for es/contrast, two for ssim/psnr/mse.
    #[arg(num_args = 1..=2, required = true)]
    inputs: Vec<PathBuf>,
    /// Segmentation providing LV and RV for the profile metrics.
    #[arg(long, value_name = "PATH")]
    labels: Option<PathBuf>,
    /// Frame for the profile metrics.
    #[arg(long, default_value_t = 0)]
    frame: usize,
}

pub fn run(args: QaArgs, format: Format) -> Result<()> {
    let value = match args.metric {
        QaMetric::Es | QaMetric::Contrast => {
            let image_path = match args.inputs.as_slice() {
                [p] => p,
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "the {} metric takes one image",
                        args.metric.name()
                    )))
                }
            };
            let labels_path = args.labels.as_ref().ok_or_else(|| {
                Error::InvalidArgument(format!("the {} metric needs --labels", args.metric.name()))
            })?;
            let image = load_volume(image_path)?;
            let labels = load_labels(labels_path)?;
            let profile = intensity_profile(&image, &labels, args.frame)?;
            match args.metric {
                QaMetric::Es => edge_sharpness(&profile),
                _ => contrast(&profile)?,
            }
        }
        QaMetric::Ssim | QaMetric::Psnr | QaMetric::Mse => {
            let (a, b) = match args.inputs.as_slice() {
                [a, b] => (load_volume(a)?, load_volume(b)?),
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "the {} metric takes two volumes",
                        args.metric.name()
                    )))
                }
            };
            match args.metric {
                QaMetric::Ssim => ssim(&a, &b)?,
                QaMetric::Psnr => psnr_db(mse(&a, &b)?),
                _ => mse(&a, &b)?,
            }
        }
    };
    emit_report(
        format,
        &[
            ("metric", json!(args.metric.name())),
            ("value", json_f64(value)),
        ],
    )
}
