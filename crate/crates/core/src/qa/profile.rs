use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{LabelVolume, Structure, Volume};

/// Extra samples kept inside each blood pool beyond the boundary hits, so a
/// profile always shows pool, septum, pool.
const PROFILE_MARGIN: usize = 4;

/// Ordered intensities along a line crossing the LV-septum boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntensityProfile {
    samples: Vec<f64>,
    spacing_mm: f64,
    normalized: bool,
}

impl IntensityProfile {
    pub fn new(samples: Vec<f64>, spacing_mm: f64) -> Result<IntensityProfile> {
        if samples.len() < 4 {
            return Err(Error::arg(format!(
                "a profile needs at least 4 samples, got {}",
                samples.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("profile samples must be finite"));
        }
        if !(spacing_mm.is_finite() && spacing_mm > 0.0) {
            return Err(Error::arg("profile sample spacing must be positive"));
        }
        Ok(IntensityProfile {
            samples,
            spacing_mm,
            normalized: false,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn spacing_mm(&self) -> f64 {
        self.spacing_mm
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Min-max normalize to [0, 1]. A constant profile comes back all zero.
    pub fn normalized(&self) -> IntensityProfile {
        let lo = self.samples.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self
            .samples
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let samples = if hi > lo {
            self.samples.iter().map(|v| (v - lo) / (hi - lo)).collect()
        } else {
            vec![0.0; self.samples.len()]
        };
        IntensityProfile {
            samples,
            spacing_mm: self.spacing_mm,
            normalized: true,
        }
    }

    fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn max(&self) -> f64 {
        self.samples
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn centroid_vox(labels: &LabelVolume, frame: usize, class: Structure) -> Result<[f64; 3]> {
    let code = class.code();
    let d = labels.dims();
    let mut sum = [0.0f64; 3];
    let mut count = 0usize;
    for i in 0..d[0] {
        for j in 0..d[1] {
            for k in 0..d[2] {
                if labels.at(frame, i, j, k) == code {
                    sum[0] += i as f64;
                    sum[1] += j as f64;
                    sum[2] += k as f64;
                    count += 1;
                }
            }
        }
    }
    if count == 0 {
        return Err(Error::EmptyMask(format!(
            "{} is empty in frame {frame}",
            class.short_name()
        )));
    }
    Ok([
        sum[0] / count as f64,
        sum[1] / count as f64,
        sum[2] / count as f64,
    ])
}

/// Trilinear image value at a continuous voxel position inside the hull.
fn sample_image(image: &Volume, frame: usize, pos: [f64; 3]) -> f64 {
    let d = image.dims();
    let base = [
        (pos[0].floor() as usize).min(d[0].saturating_sub(2)),
        (pos[1].floor() as usize).min(d[1].saturating_sub(2)),
        (pos[2].floor() as usize).min(d[2].saturating_sub(2)),
    ];
    let f = [
        pos[0] - base[0] as f64,
        pos[1] - base[1] as f64,
        pos[2] - base[2] as f64,
    ];
    let mut acc = 0.0f64;
    for ci in 0..2usize {
        for cj in 0..2usize {
            for ck in 0..2usize {
                let i = (base[0] + ci).min(d[0] - 1);
                let j = (base[1] + cj).min(d[1] - 1);
                let k = (base[2] + ck).min(d[2] - 1);
                let w = (if ci == 1 { f[0] } else { 1.0 - f[0] })
                    * (if cj == 1 { f[1] } else { 1.0 - f[1] })
                    * (if ck == 1 { f[2] } else { 1.0 - f[2] });
                acc += w * image.at(frame, i, j, k) as f64;
            }
        }
    }
    acc
}

fn nearest_label(labels: &LabelVolume, frame: usize, pos: [f64; 3]) -> u8 {
    let d = labels.dims();
    let i = (pos[0].round() as usize).min(d[0] - 1);
    let j = (pos[1].round() as usize).min(d[1] - 1);
    let k = (pos[2].round() as usize).min(d[2] - 1);
    labels.at(frame, i, j, k)
}

/// Extract the LV-to-RV intensity profile of one frame: the straight line
/// between the two blood-pool centroids, sampled every half voxel, then
/// clipped to a few samples beyond the last LV hit and the first RV hit so
/// it spans blood pool, septum, blood pool.
pub fn intensity_profile(
    image: &Volume,
    labels: &LabelVolume,
    frame: usize,
) -> Result<IntensityProfile> {
    if image.dims() != labels.dims() {
        return Err(Error::dims(format!(
            "image dims {:?} do not match label dims {:?}",
            image.dims(),
            labels.dims()
        )));
    }
    let n_frames = image.frame_count().min(labels.frame_count());
    if frame >= n_frames {
        return Err(Error::arg(format!(
            "frame index {frame} is out of range for {n_frames} frames"
        )));
    }

    let lv = centroid_vox(labels, frame, Structure::LeftVentricle)?;
    let rv = centroid_vox(labels, frame, Structure::RightVentricle)?;
    let dir = [rv[0] - lv[0], rv[1] - lv[1], rv[2] - lv[2]];
    let len_vox = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
    if len_vox < 1e-9 {
        return Err(Error::DegenerateGeometry(
            "LV and RV centroids coincide".to_string(),
        ));
    }

    // Half-voxel steps along the centroid segment.
    let n_steps = (len_vox / 0.5).ceil() as usize;
    let positions: Vec<[f64; 3]> = (0..=n_steps)
        .map(|s| {
            let t = s as f64 / n_steps as f64;
            [lv[0] + t * dir[0], lv[1] + t * dir[1], lv[2] + t * dir[2]]
        })
        .collect();
    let codes: Vec<u8> = positions
        .iter()
        .map(|&p| nearest_label(labels, frame, p))
        .collect();

    let lv_code = Structure::LeftVentricle.code();
    let rv_code = Structure::RightVentricle.code();
    let last_lv = codes
        .iter()
        .rposition(|&c| c == lv_code)
        .ok_or_else(|| Error::Measurement("profile line never samples the LV".to_string()))?;
    let first_rv = codes[last_lv..]
        .iter()
        .position(|&c| c == rv_code)
        .map(|off| last_lv + off)
        .ok_or_else(|| {
            Error::Measurement("profile line does not cross from LV into RV".to_string())
        })?;

    let lo = last_lv.saturating_sub(PROFILE_MARGIN);
    let hi = (first_rv + PROFILE_MARGIN).min(n_steps);
    let samples: Vec<f64> = positions[lo..=hi]
        .iter()
        .map(|&p| sample_image(image, frame, p))
        .collect();

    let spacing = image.spacing_mm();
    let step_mm = 0.5
        * ((dir[0] * spacing[0]).powi(2)
            + (dir[1] * spacing[1]).powi(2)
            + (dir[2] * spacing[2]).powi(2))
        .sqrt()
        / len_vox;
    IntensityProfile::new(samples, step_mm)
}

/// Maximum absolute forward difference of the min-max-normalized profile,
/// per sample step. A constant profile has no edge and scores 0.
pub fn edge_sharpness(profile: &IntensityProfile) -> f64 {
    let normalized;
    let p = if profile.is_normalized() {
        profile
    } else {
        normalized = profile.normalized();
        &normalized
    };
    p.samples
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max)
}

/// Blood-pool to myocardium intensity ratio: max over min of the raw
/// profile. Undefined when the minimum is not positive, which also rejects
/// normalized profiles (their minimum is exactly 0).
pub fn contrast(profile: &IntensityProfile) -> Result<f64> {
    let lo = profile.min();
    if lo <= 0.0 {
        return Err(Error::Measurement(format!(
            "contrast needs a strictly positive raw profile, got minimum {lo}"
        )));
    }
    Ok(profile.max() / lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two bright disks (LV left, RV right) separated by a darker band that
    /// fills the gap, extruded along the slice axis.
    fn two_pool_phantom() -> (Volume, LabelVolume) {
        let dims = [32, 32, 5];
        let mut img = vec![0.0f32; dims[0] * dims[1] * dims[2]];
        let mut lab = vec![0u8; img.len()];
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    let idx = (i * dims[1] + j) * dims[2] + k;
                    let in_lv = (i as f64 - 8.0).powi(2) + (j as f64 - 16.0).powi(2) < 36.0;
                    let in_rv = (i as f64 - 24.0).powi(2) + (j as f64 - 16.0).powi(2) < 36.0;
                    if in_lv {
                        img[idx] = 1.0;
                        lab[idx] = Structure::LeftVentricle.code();
                    } else if in_rv {
                        img[idx] = 1.0;
                        lab[idx] = Structure::RightVentricle.code();
                    } else if (14..=18).contains(&i) && (8..=24).contains(&j) {
                        img[idx] = 0.2;
                    }
                }
            }
        }
        (
            Volume::new(dims, [1.0; 3], img).unwrap(),
            LabelVolume::new(dims, [1.0; 3], lab).unwrap(),
        )
    }

    #[test]
    fn phantom_profile_spans_pool_septum_pool() {
        let (img, lab) = two_pool_phantom();
        let p = intensity_profile(&img, &lab, 0).unwrap();
        assert!(p.samples().len() >= 4);
        assert!((p.min() - 0.2).abs() < 1e-6, "min {}", p.min());
        assert!((p.max() - 1.0).abs() < 1e-6, "max {}", p.max());
        // The clipped profile cannot be longer than the centroid segment.
        let centroid_dist = 16.0;
        let length = (p.samples().len() - 1) as f64 * p.spacing_mm();
        assert!(length > 0.0 && length <= centroid_dist + 1e-9, "{length}");
    }

    #[test]
    fn missing_rv_mask_is_a_precondition_error() {
        let (img, lab) = two_pool_phantom();
        let d = lab.dims();
        let data: Vec<u8> = lab
            .data()
            .iter()
            .map(|&c| {
                if c == Structure::RightVentricle.code() {
                    0
                } else {
                    c
                }
            })
            .collect();
        let no_rv = LabelVolume::new(d, lab.spacing_mm(), data).unwrap();
        assert!(matches!(
            intensity_profile(&img, &no_rv, 0),
            Err(Error::EmptyMask(_))
        ));
    }

    #[test]
    fn profile_rejects_mismatched_grids_and_bad_frames() {
        let (img, lab) = two_pool_phantom();
        let small = Volume::new([4, 4, 4], [1.0; 3], vec![0.5; 64]).unwrap();
        assert!(intensity_profile(&small, &lab, 0).is_err());
        assert!(intensity_profile(&img, &lab, 1).is_err());
    }

    #[test]
    fn sharpness_of_step_and_ramp_profiles_is_known() {
        let step = IntensityProfile::new(vec![0.0, 0.0, 1.0, 1.0], 1.0).unwrap();
        assert_eq!(edge_sharpness(&step), 1.0);

        let n = 6;
        let ramp = IntensityProfile::new((0..n).map(|i| i as f64).collect(), 1.0).unwrap();
        assert!((edge_sharpness(&ramp) - 1.0 / (n - 1) as f64).abs() < 1e-12);

        let flat = IntensityProfile::new(vec![3.0; 5], 1.0).unwrap();
        assert_eq!(edge_sharpness(&flat), 0.0);
    }

    #[test]
    fn sharpness_ignores_affine_intensity_rescaling() {
        let base = vec![0.3, 0.9, 0.1, 0.5, 0.45, 0.8];
        let p = IntensityProfile::new(base.clone(), 1.0).unwrap();
        let q = IntensityProfile::new(base.iter().map(|v| 2.5 * v - 1.0).collect(), 1.0).unwrap();
        assert!((edge_sharpness(&p) - edge_sharpness(&q)).abs() < 1e-12);
    }

    #[test]
    fn contrast_is_a_raw_max_over_min_ratio() {
        let p = IntensityProfile::new(vec![8.5, 3.0, 1.0, 4.0], 1.0).unwrap();
        assert!((contrast(&p).unwrap() - 8.5).abs() < 1e-12);

        let flat = IntensityProfile::new(vec![2.0; 4], 1.0).unwrap();
        assert_eq!(contrast(&flat).unwrap(), 1.0);

        let with_zero = IntensityProfile::new(vec![1.0, 0.0, 2.0, 3.0], 1.0).unwrap();
        assert!(contrast(&with_zero).is_err());
        assert!(contrast(&p.normalized()).is_err());
    }

    #[test]
    fn contrast_scaling_behaviour_is_multiplicative_not_additive() {
        let base = vec![8.5, 3.0, 1.0, 4.0];
        let p = IntensityProfile::new(base.clone(), 1.0).unwrap();
        let scaled = IntensityProfile::new(base.iter().map(|v| 3.0 * v).collect(), 1.0).unwrap();
        let shifted = IntensityProfile::new(base.iter().map(|v| v + 1.0).collect(), 1.0).unwrap();
        let c = contrast(&p).unwrap();
        assert!((contrast(&scaled).unwrap() - c).abs() < 1e-12);
        assert!((contrast(&shifted).unwrap() - c).abs() > 0.1);
    }

    #[test]
    fn profile_construction_validates_inputs() {
        assert!(IntensityProfile::new(vec![1.0, 2.0, 3.0], 1.0).is_err());
        assert!(IntensityProfile::new(vec![1.0; 4], 0.0).is_err());
        assert!(IntensityProfile::new(vec![1.0, f64::NAN, 2.0, 3.0], 1.0).is_err());
    }
}
