//! Vessel geometry: skeletonize a vessel mask into an ordered voxel chain,
//! fit a smooth Chebyshev centerline through it, and measure diameters with
//! radial rays at named landmarks.

mod centerline;
mod diameter;
mod skeleton;

pub use centerline::{
    fit_centerline, fit_with_params, select_point, Centerline, SelectPoint, CHEB_ORDER,
};
pub use diameter::{measure_diameter, DiameterMeasurement, RAY_COUNT};
pub use skeleton::skeletonize;

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::volume::{LabelVolume, Mask, Structure};

/// A named measurement site on one vessel.
#[derive(Clone, Debug, PartialEq)]
pub struct VesselLandmark {
    pub name: String,
    pub vessel: Structure,
    pub location: SelectPoint,
}

/// Measure every landmark on one frame of a label volume. Each vessel is
/// skeletonized and fit once and the centerline is shared by all of its
/// landmarks; results come back in landmark order.
pub fn vessel_report(
    labels: &LabelVolume,
    frame: usize,
    landmarks: &[VesselLandmark],
) -> Result<Vec<DiameterMeasurement>> {
    let n_frames = labels.frame_count();
    if frame >= n_frames {
        return Err(Error::arg(format!(
            "frame index {frame} is out of range for {n_frames} frames"
        )));
    }
    let mut cache: HashMap<Structure, (Mask, Centerline)> = HashMap::new();
    let mut out = Vec::with_capacity(landmarks.len());
    for lm in landmarks {
        if lm.vessel == Structure::Background {
            return Err(Error::arg(format!(
                "landmark {:?} targets the background class",
                lm.name
            )));
        }
        if let Entry::Vacant(slot) = cache.entry(lm.vessel) {
            let mask = labels.class_mask(frame, lm.vessel);
            let chain = skeletonize(&mask)?;
            let line = fit_centerline(&chain, labels.spacing_mm(), CHEB_ORDER)?;
            slot.insert((mask, line));
        }
        let (mask, line) = &cache[&lm.vessel];
        let (point, tangent) = select_point(line, lm.location)?;
        out.push(measure_diameter(
            lm.name.clone(),
            mask,
            point,
            tangent,
            RAY_COUNT,
        )?);
    }
    Ok(out)
}
