//! From raw per-class probability maps to clinical numbers: binarization,
//! island cleanup, chamber volume-time curves and the ventricular metrics
//! derived from them.

mod components;
mod islands;

pub use components::{component_sizes, label_components, largest_component, Connectivity};
pub use islands::clean_islands;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{LabelVolume, Mask, Structure, Volume};

/// Probability cutoff used when re-binarizing interpolated soft masks.
pub const BINARIZE_THRESHOLD: f64 = 0.2;

/// Threshold a probability volume, one mask per frame. A voxel is
/// foreground when its value is at least `threshold`; the low cutoff keeps
/// thin structures that interpolation has washed out.
pub fn binarize(prob: &Volume, threshold: f64) -> Result<Vec<Mask>> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::arg(format!(
            "binarization threshold must lie in [0, 1], got {threshold}"
        )));
    }
    if prob
        .data()
        .iter()
        .any(|&v| !(0.0..=1.0).contains(&(v as f64)))
    {
        return Err(Error::arg("probability volume has values outside [0, 1]"));
    }
    let t = threshold as f32;
    (0..prob.frame_count())
        .map(|f| {
            Mask::new(
                prob.dims(),
                prob.spacing_mm(),
                prob.frame_data(f).iter().map(|&v| v >= t).collect(),
            )
        })
        .collect()
}

/// Volume of one structure over time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeCurve {
    pub structure: Structure,
    pub volumes_ml: Vec<f64>,
    pub frame_period_s: Option<f64>,
}

/// Per-frame volume of `structure` in ml: voxel count times the voxel
/// volume (spacing product / 1000).
pub fn volume_curve(labels: &LabelVolume, structure: Structure) -> VolumeCurve {
    let voxel_ml = labels.voxel_ml();
    let volumes_ml = (0..labels.frame_count())
        .map(|f| labels.class_mask(f, structure).count() as f64 * voxel_ml)
        .collect();
    VolumeCurve {
        structure,
        volumes_ml,
        frame_period_s: labels.frame_period_s(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VentricularMetrics {
    pub edv_ml: f64,
    pub esv_ml: f64,
    pub ef_fraction: f64,
    pub edv_frame: usize,
    pub esv_frame: usize,
}

/// End-diastolic volume is the curve maximum, end-systolic the minimum,
/// ejection fraction their relative difference (EDV-ESV)/EDV. Ties go to
/// the earliest frame.
pub fn ventricular_metrics(curve: &VolumeCurve) -> Result<VentricularMetrics> {
    if curve.volumes_ml.iter().all(|&v| v == 0.0) {
        return Err(Error::Measurement(format!(
            "{} volume curve is identically zero",
            curve.structure.short_name()
        )));
    }
    if curve.volumes_ml.iter().any(|&v| !v.is_finite() || v < 0.0) {
        return Err(Error::Measurement(
            "volume curve has invalid entries".to_string(),
        ));
    }
    let mut edv_frame = 0usize;
    let mut esv_frame = 0usize;
    for (f, &v) in curve.volumes_ml.iter().enumerate() {
        if v > curve.volumes_ml[edv_frame] {
            edv_frame = f;
        }
        if v < curve.volumes_ml[esv_frame] {
            esv_frame = f;
        }
    }
    let edv_ml = curve.volumes_ml[edv_frame];
    let esv_ml = curve.volumes_ml[esv_frame];
    Ok(VentricularMetrics {
        edv_ml,
        esv_ml,
        ef_fraction: (edv_ml - esv_ml) / edv_ml,
        edv_frame,
        esv_frame,
    })
}
