use super::{emit_report, json_f64};
use crate::Format;
use cine3d::loss::{
    combined_image_loss, deformation_smoothness, dice, focal_tversky, gmae, mae, surface_area_loss,
    MaskStack, TverskyParams, COMBINED_GMAE_RATIO, SURFACE_AREA_SCALE,
};
use cine3d::respsim::load_field;
use cine3d::volume::{load_labels, load_volume};
use cine3d::{Error, LabelVolume, Result, Structure};
use clap::{Args, ValueEnum};
use serde_json::json;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, Eq, PartialEq, ValueEnum)]
enum LossKind {
    /// Mean absolute error between two intensity volumes.
    Mae,
    /// Mean absolute error between Sobel gradient magnitudes.
    Gmae,
    /// MAE plus the weighted gradient term.
    Combined,
    /// Deformation-field smoothness penalty; takes one field.
    Smooth,
    /// Focal Tversky loss over the foreground classes of two label maps.
    Ftl,
    /// Squared surface-voxel-count difference over foreground classes.
    Surface,
    /// Dice coefficient for one structure; needs --structure.
    Dice,
}

impl LossKind {
    fn name(self) -> &'static str {
        match self {
            LossKind::Mae => "mae",
            LossKind::Gmae => "gmae",
            LossKind::Combined => "combined",
            LossKind::Smooth => "smooth",
            LossKind::Ftl => "ftl",
            LossKind::Surface => "surface",
            LossKind::Dice => "dice",
        }
    }
}

#[derive(Args)]
pub struct LossArgs {
    #[arg(long, value_enum)]
    loss: LossKind,
    /// Prediction then reference; the smooth loss takes a single field.
    #[arg(num_args = 1..=2, required = true)]
    inputs: Vec<PathBuf>,
    /// Frame for the label-map losses.
    #[arg(long, default_value_t = 0)]
    frame: usize,
    /// Structure short name for the dice loss (LV, RV, LA, RA, Ao, PA).
    #[arg(long)]
    structure: Option<String>,
}

fn two_inputs(args: &LossArgs) -> Result<(&PathBuf, &PathBuf)> {
    match args.inputs.as_slice() {
        [a, b] => Ok((a, b)),
        _ => Err(Error::InvalidArgument(format!(
            "the {} loss takes a prediction and a reference",
            args.loss.name()
        ))),
    }
}

fn checked_frame(labels: &LabelVolume, frame: usize) -> Result<usize> {
    if frame >= labels.frame_count() {
        return Err(Error::InvalidArgument(format!(
            "frame index {frame} is out of range for {} frames",
            labels.frame_count()
        )));
    }
    Ok(frame)
}

pub fn run(args: LossArgs, format: Format) -> Result<()> {
    let value = match args.loss {
        LossKind::Mae | LossKind::Gmae | LossKind::Combined => {
            let (a, b) = two_inputs(&args)?;
            let pred = load_volume(a)?;
            let gt = load_volume(b)?;
            match args.loss {
                LossKind::Mae => mae(&pred, &gt)?,
                LossKind::Gmae => gmae(&pred, &gt)?,
                _ => combined_image_loss(&pred, &gt, COMBINED_GMAE_RATIO)?,
            }
        }
        LossKind::Smooth => {
            let field = match args.inputs.as_slice() {
                [f] => load_field(f)?,
                _ => {
                    return Err(Error::InvalidArgument(
                        "the smooth loss takes exactly one deformation field".into(),
                    ))
                }
            };
            deformation_smoothness(&field)
        }
        LossKind::Ftl | LossKind::Surface => {
            let (a, b) = two_inputs(&args)?;
            let pred_labels = load_labels(a)?;
            let gt_labels = load_labels(b)?;
            let pred =
                MaskStack::from_labels(&pred_labels, checked_frame(&pred_labels, args.frame)?)?;
            let gt = MaskStack::from_labels(&gt_labels, checked_frame(&gt_labels, args.frame)?)?;
            match args.loss {
                LossKind::Ftl => focal_tversky(&pred, &gt, TverskyParams::default())?,
                _ => surface_area_loss(&pred, &gt, SURFACE_AREA_SCALE)?,
            }
        }
        LossKind::Dice => {
            let (a, b) = two_inputs(&args)?;
            let name = args
                .structure
                .as_deref()
                .ok_or_else(|| Error::InvalidArgument("the dice loss needs --structure".into()))?;
            let structure = Structure::parse(name)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown structure {name:?}")))?;
            let pred_labels = load_labels(a)?;
            let gt_labels = load_labels(b)?;
            let pred = pred_labels.class_mask(checked_frame(&pred_labels, args.frame)?, structure);
            let gt = gt_labels.class_mask(checked_frame(&gt_labels, args.frame)?, structure);
            dice(&pred, &gt)?
        }
    };
    emit_report(
        format,
        &[
            ("loss", json!(args.loss.name())),
            ("value", json_f64(value)),
        ],
    )
}
