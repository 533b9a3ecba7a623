//! Grid resampling, cropping, padding, and rigid rotation.
//!
//! All coordinate mappings are voxel-center aligned: output center o maps to
//! input coordinate (o + 0.5) * (out_spacing / in_spacing) - 0.5. With equal
//! spacings this is the identity map, so resampling to the source spacing
//! reproduces the volume bit for bit.

use crate::error::{Error, Result};
use crate::rng::{stream, Domain};
use crate::volume::types::{LabelVolume, Structure, Volume};
use rand::Rng;

/// Interpolation kernels for grid resampling.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interpolation {
    Nearest,
    Linear,
    Cubic,
}

impl Interpolation {
    pub fn parse(name: &str) -> Option<Interpolation> {
        match name.to_ascii_lowercase().as_str() {
            "nearest" => Some(Interpolation::Nearest),
            "linear" => Some(Interpolation::Linear),
            "cubic" => Some(Interpolation::Cubic),
            _ => None,
        }
    }
}

/// Keys cubic convolution kernel, a = -0.5. Reproduces linear ramps and
/// evaluates to exactly {0, 1, 0, 0} on integer sample positions.
#[inline]
fn cubic_weight(x: f64) -> f64 {
    const A: f64 = -0.5;
    let x = x.abs();
    if x <= 1.0 {
        ((A + 2.0) * x - (A + 3.0)) * x * x + 1.0
    } else if x < 2.0 {
        A * (((x - 5.0) * x + 8.0) * x - 4.0)
    } else {
        0.0
    }
}

#[inline]
fn clamp_index(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

/// Sample a 1D line at continuous coordinate `x` with edge clamping.
fn sample_line(line: &[f32], x: f64, method: Interpolation) -> f64 {
    let n = line.len();
    match method {
        Interpolation::Nearest => {
            let i = (x + 0.5).floor() as isize;
            line[clamp_index(i, n)] as f64
        }
        Interpolation::Linear => {
            let i0 = x.floor() as isize;
            let f = x - i0 as f64;
            let a = line[clamp_index(i0, n)] as f64;
            let b = line[clamp_index(i0 + 1, n)] as f64;
            a + (b - a) * f
        }
        Interpolation::Cubic => {
            let i0 = x.floor() as isize;
            let f = x - i0 as f64;
            let mut acc = 0.0;
            for m in -1..=2isize {
                let w = cubic_weight(f - m as f64);
                acc += w * line[clamp_index(i0 + m, n)] as f64;
            }
            acc
        }
    }
}

/// Resample one spatial axis of a single-frame payload.
fn resample_axis(
    data: &[f32],
    dims: [usize; 3],
    axis: usize,
    out_len: usize,
    coord: &dyn Fn(usize) -> f64,
    method: Interpolation,
) -> Vec<f32> {
    let mut out_dims = dims;
    out_dims[axis] = out_len;
    let mut out = vec![0.0f32; out_dims[0] * out_dims[1] * out_dims[2]];

    // Iterate over all lines along `axis`; gather each line contiguously.
    let (u_axis, v_axis) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let in_stride = strides(dims);
    let out_stride = strides(out_dims);
    let mut line = vec![0.0f32; dims[axis]];
    let coords: Vec<f64> = (0..out_len).map(coord).collect();

    for u in 0..dims[u_axis] {
        for v in 0..dims[v_axis] {
            let base_in = u * in_stride[u_axis] + v * in_stride[v_axis];
            let base_out = u * out_stride[u_axis] + v * out_stride[v_axis];
            for (t, slot) in line.iter_mut().enumerate() {
                *slot = data[base_in + t * in_stride[axis]];
            }
            for (o, &x) in coords.iter().enumerate() {
                out[base_out + o * out_stride[axis]] = sample_line(&line, x, method) as f32;
            }
        }
    }
    out
}

#[inline]
fn strides(dims: [usize; 3]) -> [usize; 3] {
    [dims[1] * dims[2], dims[2], 1]
}

/// Resample to an isotropic grid at `target_mm` with separable cubic
/// interpolation. Output extent per axis is round(dim * spacing / target),
/// at least 1.
pub fn resample_isotropic(v: &Volume, target_mm: f64) -> Result<Volume> {
    if target_mm <= 0.0 || !target_mm.is_finite() {
        return Err(Error::arg(format!(
            "target spacing must be positive, got {target_mm}"
        )));
    }
    let dims = v.dims();
    let spacing = v.spacing_mm();
    let mut out_dims = [0usize; 3];
    for a in 0..3 {
        out_dims[a] = ((dims[a] as f64 * spacing[a] / target_mm).round() as usize).max(1);
    }

    let frames = v.frame_count();
    let per_out = out_dims[0] * out_dims[1] * out_dims[2];
    let mut out = Vec::with_capacity(per_out * frames);
    for f in 0..frames {
        let mut cur = v.frame_data(f).to_vec();
        let mut cur_dims = dims;
        for a in 0..3 {
            let ratio = target_mm / spacing[a];
            let coord = move |o: usize| (o as f64 + 0.5) * ratio - 0.5;
            cur = resample_axis(&cur, cur_dims, a, out_dims[a], &coord, Interpolation::Cubic);
            cur_dims[a] = out_dims[a];
        }
        out.extend_from_slice(&cur);
    }
    v.rebuild(out_dims, [target_mm; 3], out)
}

/// Upsample along the slice (LR) axis by an integer factor. The LR spacing
/// divides by the factor; the other axes are untouched.
pub fn upsample_slice_dir(v: &Volume, factor: usize, method: Interpolation) -> Result<Volume> {
    if factor == 0 {
        return Err(Error::arg("upsample factor must be at least 1"));
    }
    if factor == 1 {
        return Ok(v.clone());
    }
    let dims = v.dims();
    let out_len = dims[2] * factor;
    let inv = 1.0 / factor as f64;
    let coord = move |o: usize| (o as f64 + 0.5) * inv - 0.5;

    let frames = v.frame_count();
    let mut out = Vec::with_capacity(dims[0] * dims[1] * out_len * frames);
    for f in 0..frames {
        out.extend_from_slice(&resample_axis(
            v.frame_data(f),
            dims,
            2,
            out_len,
            &coord,
            method,
        ));
    }
    let mut spacing = v.spacing_mm();
    spacing[2] /= factor as f64;
    v.rebuild([dims[0], dims[1], out_len], spacing, out)
}

/// Per-axis copy window for center-aligned crop/pad: returns
/// (src_start, dst_start, copy_len). Padding puts the extra voxel on the
/// high-index side when the difference is odd, so padding then cropping
/// back is the identity.
fn copy_window(in_len: usize, out_len: usize) -> (usize, usize, usize) {
    if out_len <= in_len {
        ((in_len - out_len) / 2, 0, out_len)
    } else {
        (0, (out_len - in_len) / 2, in_len)
    }
}

fn crop_or_pad_raw<T: Copy>(
    data: &[T],
    dims: [usize; 3],
    target: [usize; 3],
    frames: usize,
    fill: T,
) -> Vec<T> {
    let per_in = dims[0] * dims[1] * dims[2];
    let per_out = target[0] * target[1] * target[2];
    let windows = [
        copy_window(dims[0], target[0]),
        copy_window(dims[1], target[1]),
        copy_window(dims[2], target[2]),
    ];
    let mut out = vec![fill; per_out * frames];
    for f in 0..frames {
        for i in 0..windows[0].2 {
            for j in 0..windows[1].2 {
                let src = ((windows[0].0 + i) * dims[1] + windows[1].0 + j) * dims[2]
                    + windows[2].0
                    + f * per_in;
                let dst = ((windows[0].1 + i) * target[1] + windows[1].1 + j) * target[2]
                    + windows[2].1
                    + f * per_out;
                out[dst..dst + windows[2].2].copy_from_slice(&data[src..src + windows[2].2]);
            }
        }
    }
    out
}

/// Center-aligned crop and/or zero-pad to `target` dims. Spacing is kept.
pub fn crop_or_pad(v: &Volume, target: [usize; 3]) -> Result<Volume> {
    if target.contains(&0) {
        return Err(Error::dims(format!("target dims {target:?} contain zero")));
    }
    let out = crop_or_pad_raw(v.data(), v.dims(), target, v.frame_count(), 0.0f32);
    v.rebuild(target, v.spacing_mm(), out)
}

/// [`crop_or_pad`] for label volumes; padding fills with background.
pub fn crop_or_pad_labels(m: &LabelVolume, target: [usize; 3]) -> Result<LabelVolume> {
    if target.contains(&0) {
        return Err(Error::dims(format!("target dims {target:?} contain zero")));
    }
    let out = crop_or_pad_raw(
        m.data(),
        m.dims(),
        target,
        m.frame_count(),
        Structure::Background.code(),
    );
    LabelVolume::with_frames(target, m.spacing_mm(), m.frames(), m.frame_period_s(), out)
}

/// 3x3 rotation matrix for intrinsic rotations about the HF, AP, and LR
/// axes, composed as R = R_hf(a0) * R_ap(a1) * R_lr(a2).
fn rotation_matrix(angles_deg: [f64; 3]) -> [[f64; 3]; 3] {
    let [a, b, c] = angles_deg.map(f64::to_radians);
    let (sa, ca) = a.sin_cos();
    let (sb, cb) = b.sin_cos();
    let (sc, cc) = c.sin_cos();
    // Rotation about axis 0 mixes (1, 2); about axis 1 mixes (0, 2); about
    // axis 2 mixes (0, 1).
    let r0 = [[1.0, 0.0, 0.0], [0.0, ca, -sa], [0.0, sa, ca]];
    let r1 = [[cb, 0.0, sb], [0.0, 1.0, 0.0], [-sb, 0.0, cb]];
    let r2 = [[cc, -sc, 0.0], [sc, cc, 0.0], [0.0, 0.0, 1.0]];
    mat_mul(&mat_mul(&r0, &r1), &r2)
}

fn mat_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// Tricubic sample of a single frame at continuous voxel coordinates with
/// edge clamping. Caller guarantees the point lies inside the grid hull.
fn sample_cubic3(data: &[f32], dims: [usize; 3], p: [f64; 3]) -> f64 {
    let base = p.map(|x| x.floor() as isize);
    let frac = [
        p[0] - base[0] as f64,
        p[1] - base[1] as f64,
        p[2] - base[2] as f64,
    ];
    let mut w = [[0.0f64; 4]; 3];
    for (a, row) in w.iter_mut().enumerate() {
        for (m, wm) in row.iter_mut().enumerate() {
            *wm = cubic_weight(frac[a] - (m as f64 - 1.0));
        }
    }
    let mut acc = 0.0;
    for mi in 0..4 {
        let i = clamp_index(base[0] + mi as isize - 1, dims[0]);
        let wi = w[0][mi];
        for mj in 0..4 {
            let j = clamp_index(base[1] + mj as isize - 1, dims[1]);
            let wij = wi * w[1][mj];
            for (mk, &wk) in w[2].iter().enumerate() {
                let k = clamp_index(base[2] + mk as isize - 1, dims[2]);
                acc += wij * wk * data[(i * dims[1] + j) * dims[2] + k] as f64;
            }
        }
    }
    acc
}

/// Rigid rotation about the grid center, in physical (mm) coordinates.
/// Image voxels are sampled tricubically, labels nearest-neighbor, and
/// anything pulled from outside the field of view becomes 0 / background.
/// Angles are free here; random augmentation draws are bounded instead.
pub fn rotate_augment(
    v: &Volume,
    labels: Option<&LabelVolume>,
    angles_deg: [f64; 3],
) -> Result<(Volume, Option<LabelVolume>)> {
    if let Some(m) = labels {
        if m.dims() != v.dims() || m.frame_count() != v.frame_count() {
            return Err(Error::dims(format!(
                "labels {:?} do not match image {:?}",
                m.dims(),
                v.dims()
            )));
        }
    }
    let dims = v.dims();
    let spacing = v.spacing_mm();
    let r = rotation_matrix(angles_deg);
    // Backward map: src = center + R^T (dst - center).
    let center = [
        (dims[0] as f64 - 1.0) / 2.0 * spacing[0],
        (dims[1] as f64 - 1.0) / 2.0 * spacing[1],
        (dims[2] as f64 - 1.0) / 2.0 * spacing[2],
    ];

    let per = v.voxels_per_frame();
    let frames = v.frame_count();
    let mut out = vec![0.0f32; per * frames];
    let mut out_labels = labels.map(|m| vec![Structure::Background.code(); m.data().len()]);

    let mut src_vox = [0.0f64; 3];
    for i in 0..dims[0] {
        for j in 0..dims[1] {
            for k in 0..dims[2] {
                let d = [
                    i as f64 * spacing[0] - center[0],
                    j as f64 * spacing[1] - center[1],
                    k as f64 * spacing[2] - center[2],
                ];
                let mut inside = true;
                for a in 0..3 {
                    // R^T row a = column a of R.
                    let mm = r[0][a] * d[0] + r[1][a] * d[1] + r[2][a] * d[2] + center[a];
                    let x = mm / spacing[a];
                    if x < -0.5 || x > dims[a] as f64 - 0.5 {
                        inside = false;
                        break;
                    }
                    src_vox[a] = x;
                }
                if !inside {
                    continue;
                }
                let o = (i * dims[1] + j) * dims[2] + k;
                for f in 0..frames {
                    out[f * per + o] = sample_cubic3(v.frame_data(f), dims, src_vox) as f32;
                }
                if let (Some(ol), Some(m)) = (out_labels.as_mut(), labels) {
                    let ni = clamp_index((src_vox[0] + 0.5).floor() as isize, dims[0]);
                    let nj = clamp_index((src_vox[1] + 0.5).floor() as isize, dims[1]);
                    let nk = clamp_index((src_vox[2] + 0.5).floor() as isize, dims[2]);
                    let s = (ni * dims[1] + nj) * dims[2] + nk;
                    for f in 0..frames {
                        ol[f * per + o] = m.frame_data(f)[s];
                    }
                }
            }
        }
    }

    let rotated = v.rebuild(dims, spacing, out)?;
    let rotated_labels = match (labels, out_labels) {
        (Some(m), Some(data)) => Some(LabelVolume::with_frames(
            dims,
            spacing,
            m.frames(),
            m.frame_period_s(),
            data,
        )?),
        _ => None,
    };
    Ok((rotated, rotated_labels))
}

/// Random augmentation angles, uniform in +-10 degrees per axis.
pub fn draw_rotation_angles(seed: u64, index: u64) -> [f64; 3] {
    let mut rng = stream(seed, Domain::Rotation, index);
    [
        rng.random_range(-10.0..=10.0),
        rng.random_range(-10.0..=10.0),
        rng.random_range(-10.0..=10.0),
    ]
}
