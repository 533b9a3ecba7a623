//! Reference implementations of the training losses, exact enough to serve
//! as oracles: image fidelity (MAE, gradient MAE, their weighted sum),
//! deformation smoothness, and the segmentation losses (Focal Tversky,
//! surface-area mismatch, Dice).
//!
//! Everything here is a pure function over [`crate::volume::Volume`],
//! [`crate::respsim::DeformationField`] or [`MaskStack`]; nothing depends on
//! a learning framework.

mod image;
mod overlap;
mod smoothness;
mod surface;

pub use image::{combined_image_loss, gmae, mae, COMBINED_GMAE_RATIO};
pub use overlap::{dice, focal_tversky, MaskStack, TverskyParams};
pub use smoothness::{deformation_smoothness, SMOOTHNESS_SCALE};
pub use surface::{surface_area_loss, surface_voxel_count, SURFACE_AREA_SCALE};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bundle of every loss the pipeline trains with, as evaluated on one
/// prediction/target pair. Produced piecemeal; `validate` checks the
/// cross-component invariants before a report is written out.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub mae: f64,
    pub gmae: f64,
    pub combined: f64,
    pub smoothness: f64,
    pub focal_tversky: f64,
    pub surface_area: f64,
    pub dice: f64,
}

impl LossReport {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("mae", self.mae),
            ("gmae", self.gmae),
            ("combined", self.combined),
            ("smoothness", self.smoothness),
            ("focal_tversky", self.focal_tversky),
            ("surface_area", self.surface_area),
            ("dice", self.dice),
        ];
        for (name, v) in named {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::arg(format!(
                    "loss component {name} = {v} is invalid"
                )));
            }
        }
        if self.dice > 1.0 {
            return Err(Error::arg(format!("dice = {} exceeds 1", self.dice)));
        }
        Ok(())
    }
}
