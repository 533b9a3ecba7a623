use crate::error::{Error, Result};
use crate::loss::overlap::MaskStack;
use crate::volume::Mask;

/// Scale on the squared surface-count mismatch.
pub const SURFACE_AREA_SCALE: f64 = 7.62e-6;

/// Min-pool erosion with a 3x3x3 window, borders replicated: a voxel
/// survives iff every window tap (clamped into the grid) is in the mask.
/// Replication means a full-grid mask erodes to itself.
fn erode(mask: &Mask) -> Vec<bool> {
    let d = mask.dims();
    let mut out = vec![false; d[0] * d[1] * d[2]];
    let clamp = |c: i64, n: usize| c.clamp(0, n as i64 - 1) as usize;
    for i in 0..d[0] {
        for j in 0..d[1] {
            for k in 0..d[2] {
                let mut all = true;
                'window: for di in -1i64..=1 {
                    for dj in -1i64..=1 {
                        for dk in -1i64..=1 {
                            if !mask.get(
                                clamp(i as i64 + di, d[0]),
                                clamp(j as i64 + dj, d[1]),
                                clamp(k as i64 + dk, d[2]),
                            ) {
                                all = false;
                                break 'window;
                            }
                        }
                    }
                }
                out[mask.index(i, j, k)] = all;
            }
        }
    }
    out
}

/// Number of surface voxels: the mask minus its erosion.
pub fn surface_voxel_count(mask: &Mask) -> usize {
    let eroded = erode(mask);
    mask.data()
        .iter()
        .zip(&eroded)
        .filter(|&(&m, &e)| m && !e)
        .count()
}

/// Squared mismatch of per-class surface-voxel counts, summed over classes
/// and scaled. Both stacks must be binary.
pub fn surface_area_loss(pred: &MaskStack, gt: &MaskStack, scale: f64) -> Result<f64> {
    if pred.dims() != gt.dims() || pred.classes() != gt.classes() {
        return Err(Error::dims(format!(
            "mask stacks differ: {:?} x{} classes vs {:?} x{} classes",
            pred.dims(),
            pred.classes(),
            gt.dims(),
            gt.classes()
        )));
    }
    if !pred.is_binary() || !gt.is_binary() {
        return Err(Error::arg("surface-area loss needs binary stacks"));
    }
    if scale <= 0.0 || !scale.is_finite() {
        return Err(Error::arg(format!(
            "surface scale must be positive, got {scale}"
        )));
    }
    let mut loss = 0.0f64;
    for c in 0..pred.classes() {
        let sp = surface_voxel_count(&pred.class_mask(c)) as f64;
        let sg = surface_voxel_count(&gt.class_mask(c)) as f64;
        loss += (sp - sg) * (sp - sg);
    }
    Ok(loss * scale)
}
