use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::Mask;

/// Radial rays per measurement.
pub const RAY_COUNT: usize = 64;

/// One vessel diameter: the measurement point, the local tangent, and the
/// per-ray radii it was averaged from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiameterMeasurement {
    pub landmark: String,
    pub point_mm: [f64; 3],
    pub tangent: [f64; 3],
    pub radii_mm: Vec<f64>,
    pub diameter_mm: f64,
}

impl DiameterMeasurement {
    pub fn ray_min_mm(&self) -> f64 {
        self.radii_mm.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn ray_max_mm(&self) -> f64 {
        self.radii_mm.iter().copied().fold(0.0, f64::max)
    }
}

/// Trilinear interpolation of the 0/1 mask at a continuous voxel-space
/// position; None outside the hull of voxel centers.
fn sample(mask: &Mask, pos: [f64; 3]) -> Option<f64> {
    let d = mask.dims();
    for c in 0..3 {
        if !(0.0..=(d[c] - 1) as f64).contains(&pos[c]) {
            return None;
        }
    }
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
                acc += w * mask.get(i, j, k) as u8 as f64;
            }
        }
    }
    Some(acc)
}

fn normalize(v: [f64; 3]) -> Option<[f64; 3]> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if n < 1e-9 {
        return None;
    }
    Some([v[0] / n, v[1] / n, v[2] / n])
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Cast `n_rays` evenly spaced rays orthogonal to `tangent`, marching at
/// 0.1-voxel steps to the first crossing of the 0.5 iso-level of the
/// trilinearly interpolated mask, and report twice the mean radius. The
/// in-plane frame comes from projecting the HF axis (AP when the tangent
/// is parallel to HF), making the ray set deterministic.
pub fn measure_diameter(
    landmark: impl Into<String>,
    mask: &Mask,
    point_mm: [f64; 3],
    tangent: [f64; 3],
    n_rays: usize,
) -> Result<DiameterMeasurement> {
    if n_rays == 0 {
        return Err(Error::arg("diameter needs at least one ray"));
    }
    let t = normalize(tangent)
        .ok_or_else(|| Error::DegenerateGeometry("tangent is numerically zero".to_string()))?;
    let spacing = mask.spacing_mm();
    let to_vox = |p: [f64; 3]| [p[0] / spacing[0], p[1] / spacing[1], p[2] / spacing[2]];

    let origin = to_vox(point_mm);
    let v0 = sample(mask, origin)
        .ok_or_else(|| Error::Measurement("measurement point lies outside the grid".to_string()))?;
    if v0 < 0.5 {
        return Err(Error::Measurement(
            "measurement point lies outside the mask".to_string(),
        ));
    }

    // First in-plane direction: HF axis minus its tangent component; fall
    // back to AP when the tangent is (anti)parallel to HF.
    let project = |axis: [f64; 3]| {
        let dot = axis[0] * t[0] + axis[1] * t[1] + axis[2] * t[2];
        normalize([
            axis[0] - dot * t[0],
            axis[1] - dot * t[1],
            axis[2] - dot * t[2],
        ])
    };
    let e1 = project([1.0, 0.0, 0.0])
        .or_else(|| project([0.0, 1.0, 0.0]))
        .ok_or_else(|| Error::DegenerateGeometry("no in-plane basis".to_string()))?;
    let e2 = cross(t, e1);

    let step_mm = 0.1 * spacing[0].min(spacing[1]).min(spacing[2]);
    let diag_mm: f64 = (0..3)
        .map(|c| ((mask.dims()[c] as f64) * spacing[c]).powi(2))
        .sum::<f64>()
        .sqrt();
    let max_steps = (diag_mm / step_mm).ceil() as usize + 2;

    let mut radii_mm = Vec::with_capacity(n_rays);
    for r in 0..n_rays {
        let ang = std::f64::consts::TAU * r as f64 / n_rays as f64;
        let dir = [
            ang.cos() * e1[0] + ang.sin() * e2[0],
            ang.cos() * e1[1] + ang.sin() * e2[1],
            ang.cos() * e1[2] + ang.sin() * e2[2],
        ];
        let mut prev = v0;
        let mut radius = None;
        for m in 1..=max_steps {
            let dist = m as f64 * step_mm;
            let pos = to_vox([
                point_mm[0] + dist * dir[0],
                point_mm[1] + dist * dir[1],
                point_mm[2] + dist * dir[2],
            ]);
            let v = match sample(mask, pos) {
                Some(v) => v,
                None => break,
            };
            if v < 0.5 {
                // Linear refinement between the bracketing samples.
                let frac = (prev - 0.5) / (prev - v);
                radius = Some((m as f64 - 1.0 + frac) * step_mm);
                break;
            }
            prev = v;
        }
        match radius {
            Some(r) => radii_mm.push(r),
            None => {
                return Err(Error::Measurement(format!(
                    "ray {r} left the grid without exiting the mask"
                )))
            }
        }
    }
    let diameter_mm = 2.0 * radii_mm.iter().sum::<f64>() / n_rays as f64;
    Ok(DiameterMeasurement {
        landmark: landmark.into(),
        point_mm,
        tangent: t,
        radii_mm,
        diameter_mm,
    })
}
