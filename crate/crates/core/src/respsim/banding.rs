use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream, Domain};
use crate::volume::{normalize01, Volume};

/// Banding outcome for one LR slice. `factor` is 1.0 when the slice was
/// not selected.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandingDraw {
    pub banded: bool,
    pub factor: f64,
}

pub const BANDING_PROBABILITY: f64 = 0.5;
pub const BANDING_SCALE_RANGE: (f64, f64) = (0.6, 1.4);

fn check_banding_args(probability: f64, scale_range: (f64, f64)) -> Result<()> {
    if !(0.0..=1.0).contains(&probability) {
        return Err(Error::arg(format!(
            "banding probability {probability} outside [0, 1]"
        )));
    }
    if !(scale_range.0 > 0.0 && scale_range.1 >= scale_range.0) {
        return Err(Error::arg(format!(
            "banding scale range {scale_range:?} must be positive and ordered"
        )));
    }
    Ok(())
}

/// Decide per slice whether to band and by how much. Selection and scale
/// use separate per-slice draw slots, so outcomes are independent of slice
/// count and evaluation order.
pub fn draw_banding(
    seed: u64,
    n_slices: usize,
    probability: f64,
    scale_range: (f64, f64),
) -> Result<Vec<BandingDraw>> {
    check_banding_args(probability, scale_range)?;
    Ok((0..n_slices)
        .map(|k| {
            let banded = stream(seed, Domain::BandSelect, k as u64).random_bool(probability);
            let factor = if banded {
                if scale_range.0 == scale_range.1 {
                    scale_range.0
                } else {
                    stream(seed, Domain::BandScale, k as u64)
                        .random_range(scale_range.0..=scale_range.1)
                }
            } else {
                1.0
            };
            BandingDraw { banded, factor }
        })
        .collect())
}

/// Multiply each LR slice by its factor. No renormalization.
pub fn scale_slices(v: &Volume, factors: &[f64]) -> Result<Volume> {
    let dims = v.dims();
    if factors.len() != dims[2] {
        return Err(Error::dims(format!(
            "{} slice factors for {} slices",
            factors.len(),
            dims[2]
        )));
    }
    let n_lr = dims[2];
    let out = v.clone().map_data(|mut data| {
        for (idx, x) in data.iter_mut().enumerate() {
            let k = idx % n_lr;
            *x = (*x as f64 * factors[k]) as f32;
        }
        data
    });
    Ok(out)
}

/// Randomly darken or brighten slices, then rescale the volume to [0, 1].
/// Returns the banded volume and the draws that produced it.
pub fn apply_banding(
    v: &Volume,
    probability: f64,
    scale_range: (f64, f64),
    seed: u64,
) -> Result<(Volume, Vec<BandingDraw>)> {
    let draws = draw_banding(seed, v.dims()[2], probability, scale_range)?;
    let banded = apply_banding_replay(v, &draws)?;
    Ok((banded, draws))
}

/// Re-apply previously recorded banding draws.
pub fn apply_banding_replay(v: &Volume, draws: &[BandingDraw]) -> Result<Volume> {
    let factors: Vec<f64> = draws.iter().map(|d| d.factor).collect();
    Ok(normalize01(&scale_slices(v, &factors)?))
}
