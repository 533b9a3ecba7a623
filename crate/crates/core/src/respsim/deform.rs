use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{stream, Domain};
use crate::volume::{LabelVolume, Structure, Volume};

/// Envelope of the respiratory signal for drawn configurations:
/// max magnitude 1.5 times max amplitude variability 1.1.
pub const MAX_RESP_AMPLITUDE: f64 = 1.65;

/// Worst-case in-plane shift at the field center, head-foot direction.
pub const PEAK_SHIFT_HF_PX: f64 = 20.0;

/// Worst-case in-plane shift at the field center, anterior-posterior
/// direction.
pub const PEAK_SHIFT_AP_PX: f64 = 8.0;

/// In-plane displacement maps for one LR slice, in pixels. `dy` shifts
/// along HF, `dx` along AP; both are (n_hf x n_ap), AP fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceDeformation {
    dims: [usize; 2],
    dy: Vec<f32>,
    dx: Vec<f32>,
}

impl SliceDeformation {
    pub fn dims(&self) -> [usize; 2] {
        self.dims
    }

    pub fn dy(&self) -> &[f32] {
        &self.dy
    }

    pub fn dx(&self) -> &[f32] {
        &self.dx
    }

    pub fn from_components(
        dims: [usize; 2],
        dy: Vec<f32>,
        dx: Vec<f32>,
    ) -> Result<SliceDeformation> {
        let n = dims[0] * dims[1];
        if dy.len() != n || dx.len() != n {
            return Err(Error::dims(format!(
                "deformation components for a {}x{} slice need {} values, got {} and {}",
                dims[0],
                dims[1],
                n,
                dy.len(),
                dx.len()
            )));
        }
        Ok(SliceDeformation { dims, dy, dx })
    }

    /// A spatially constant shift. Useful for calibration checks.
    pub fn uniform(dims: [usize; 2], dy: f32, dx: f32) -> SliceDeformation {
        let n = dims[0] * dims[1];
        SliceDeformation {
            dims,
            dy: vec![dy; n],
            dx: vec![dx; n],
        }
    }

    fn negated(&self) -> SliceDeformation {
        SliceDeformation {
            dims: self.dims,
            dy: self.dy.iter().map(|&v| -v).collect(),
            dx: self.dx.iter().map(|&v| -v).collect(),
        }
    }
}

/// Per-slice deformations for a whole stack.
#[derive(Clone, Debug, PartialEq)]
pub struct DeformationField {
    dims: [usize; 2],
    slices: Vec<SliceDeformation>,
}

impl DeformationField {
    pub fn from_slices(slices: Vec<SliceDeformation>) -> Result<DeformationField> {
        let dims = slices
            .first()
            .ok_or_else(|| Error::arg("deformation field needs at least one slice"))?
            .dims;
        if slices.iter().any(|s| s.dims != dims) {
            return Err(Error::dims(
                "deformation slices disagree on in-plane dims".to_string(),
            ));
        }
        Ok(DeformationField { dims, slices })
    }

    pub fn dims(&self) -> [usize; 2] {
        self.dims
    }

    pub fn n_slices(&self) -> usize {
        self.slices.len()
    }

    pub fn slice(&self, k: usize) -> &SliceDeformation {
        &self.slices[k]
    }

    pub fn slices(&self) -> &[SliceDeformation] {
        &self.slices
    }

    pub fn negated(&self) -> DeformationField {
        DeformationField {
            dims: self.dims,
            slices: self.slices.iter().map(|s| s.negated()).collect(),
        }
    }
}

/// Separable bump profile: zero at both edges, one at the center.
/// A single-voxel axis is all edge, so its factor is zero.
#[inline]
fn bump(i: usize, n: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let u = i as f64 / (n - 1) as f64;
    4.0 * u * (1.0 - u)
}

/// In-plane deformation for one slice at respiratory amplitude `amplitude`.
///
/// dy(i,j) = S * A_hf * bump(i) * bump(j) and likewise for dx, with the
/// peaks A calibrated so the worst admissible amplitude (|S| = 1.65)
/// produces exactly 20 px HF and 8 px AP at the field center. Amplitudes
/// beyond the envelope are clamped to it, which keeps the pixel bounds
/// true under floating-point round-off of M * Var1.
pub fn deformation_for_slice(amplitude: f64, dims: [usize; 2]) -> SliceDeformation {
    let s = amplitude.clamp(-MAX_RESP_AMPLITUDE, MAX_RESP_AMPLITUDE);
    let gain_y = s * (PEAK_SHIFT_HF_PX / MAX_RESP_AMPLITUDE);
    let gain_x = s * (PEAK_SHIFT_AP_PX / MAX_RESP_AMPLITUDE);
    let row: Vec<f64> = (0..dims[0]).map(|i| bump(i, dims[0])).collect();
    let col: Vec<f64> = (0..dims[1]).map(|j| bump(j, dims[1])).collect();
    let n = dims[0] * dims[1];
    let mut dy = Vec::with_capacity(n);
    let mut dx = Vec::with_capacity(n);
    for &ri in &row {
        for &cj in &col {
            let shape = ri * cj;
            dy.push((gain_y * shape) as f32);
            dx.push((gain_x * shape) as f32);
        }
    }
    SliceDeformation { dims, dy, dx }
}

#[inline]
fn bilinear_plane(plane: &[f32], dims: [usize; 2], y: f64, x: f64) -> f64 {
    let clamp = |v: f64, n: usize| v.clamp(0.0, n as f64 - 1.0);
    let y = clamp(y, dims[0]);
    let x = clamp(x, dims[1]);
    let i0 = (y.floor() as usize).min(dims[0] - 1);
    let j0 = (x.floor() as usize).min(dims[1] - 1);
    let i1 = (i0 + 1).min(dims[0] - 1);
    let j1 = (j0 + 1).min(dims[1] - 1);
    let fy = y - i0 as f64;
    let fx = x - j0 as f64;
    let v00 = plane[i0 * dims[1] + j0] as f64;
    let v01 = plane[i0 * dims[1] + j1] as f64;
    let v10 = plane[i1 * dims[1] + j0] as f64;
    let v11 = plane[i1 * dims[1] + j1] as f64;
    let top = v00 + (v01 - v00) * fx;
    let bot = v10 + (v11 - v10) * fx;
    top + (bot - top) * fy
}

/// Warp each LR slice by its displacement maps. Backward bilinear warp:
/// output pixel (i,j) samples the input at (i - dy, j - dx), clamped to the
/// slice edges, so a positive uniform dy moves content toward higher HF
/// indices. Frames share the field.
pub fn apply_deformation(v: &Volume, field: &DeformationField) -> Result<Volume> {
    let dims = v.dims();
    if field.dims() != [dims[0], dims[1]] || field.n_slices() != dims[2] {
        return Err(Error::dims(format!(
            "field {:?} x {} slices does not match volume {:?}",
            field.dims(),
            field.n_slices(),
            dims
        )));
    }
    let (n_hf, n_ap, n_lr) = (dims[0], dims[1], dims[2]);
    let frames = v.frame_count();
    let per = v.voxels_per_frame();
    let mut out = vec![0.0f32; per * frames];
    let mut plane = vec![0.0f32; n_hf * n_ap];

    for f in 0..frames {
        let data = v.frame_data(f);
        for k in 0..n_lr {
            for i in 0..n_hf {
                for j in 0..n_ap {
                    plane[i * n_ap + j] = data[(i * n_ap + j) * n_lr + k];
                }
            }
            let sd = field.slice(k);
            for i in 0..n_hf {
                for j in 0..n_ap {
                    let p = i * n_ap + j;
                    let y = i as f64 - sd.dy[p] as f64;
                    let x = j as f64 - sd.dx[p] as f64;
                    out[f * per + (i * n_ap + j) * n_lr + k] =
                        bilinear_plane(&plane, [n_hf, n_ap], y, x) as f32;
                }
            }
        }
    }
    v.rebuild(dims, v.spacing_mm(), out)
}

/// Standard deviation, in voxels, of the Gaussian used to smooth the
/// elastic noise field.
const ELASTIC_SIGMA_VOX: f64 = 8.0;

/// Largest admissible elastic magnitude (fraction of the in-plane extent).
pub const MAX_ELASTIC_MAGNITUDE: f64 = 0.1;

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as usize;
    let mut k: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let x = i as f64 - radius as f64;
            (-0.5 * (x / sigma).powi(2)).exp()
        })
        .collect();
    let sum: f64 = k.iter().sum();
    for w in &mut k {
        *w /= sum;
    }
    k
}

fn smooth_axis(data: &mut [f64], dims: [usize; 3], axis: usize, kernel: &[f64]) {
    let radius = kernel.len() / 2;
    let stride = match axis {
        0 => dims[1] * dims[2],
        1 => dims[2],
        _ => 1,
    };
    let n = dims[axis];
    let (u_axis, v_axis) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let strides = [dims[1] * dims[2], dims[2], 1];
    let mut line = vec![0.0f64; n];
    let mut out_line = vec![0.0f64; n];
    for u in 0..dims[u_axis] {
        for v in 0..dims[v_axis] {
            let base = u * strides[u_axis] + v * strides[v_axis];
            for (t, slot) in line.iter_mut().enumerate() {
                *slot = data[base + t * stride];
            }
            for (t, slot) in out_line.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (m, &w) in kernel.iter().enumerate() {
                    let idx = (t as isize + m as isize - radius as isize).clamp(0, n as isize - 1)
                        as usize;
                    acc += w * line[idx];
                }
                *slot = acc;
            }
            for (t, &val) in out_line.iter().enumerate() {
                data[base + t * stride] = val;
            }
        }
    }
}

#[inline]
fn trilinear(data: &[f32], dims: [usize; 3], p: [f64; 3]) -> f64 {
    let c = [
        p[0].clamp(0.0, dims[0] as f64 - 1.0),
        p[1].clamp(0.0, dims[1] as f64 - 1.0),
        p[2].clamp(0.0, dims[2] as f64 - 1.0),
    ];
    let i0 = [
        (c[0].floor() as usize).min(dims[0] - 1),
        (c[1].floor() as usize).min(dims[1] - 1),
        (c[2].floor() as usize).min(dims[2] - 1),
    ];
    let i1 = [
        (i0[0] + 1).min(dims[0] - 1),
        (i0[1] + 1).min(dims[1] - 1),
        (i0[2] + 1).min(dims[2] - 1),
    ];
    let f = [
        c[0] - i0[0] as f64,
        c[1] - i0[1] as f64,
        c[2] - i0[2] as f64,
    ];
    let at = |i: usize, j: usize, k: usize| data[(i * dims[1] + j) * dims[2] + k] as f64;
    let mut acc = 0.0;
    for (wi, ii) in [(1.0 - f[0], i0[0]), (f[0], i1[0])] {
        for (wj, jj) in [(1.0 - f[1], i0[1]), (f[1], i1[1])] {
            for (wk, kk) in [(1.0 - f[2], i0[2]), (f[2], i1[2])] {
                let w = wi * wj * wk;
                if w != 0.0 {
                    acc += w * at(ii, jj, kk);
                }
            }
        }
    }
    acc
}

/// Random smooth elastic deformation applied identically to an image and
/// its labels (trilinear vs nearest-neighbor sampling). The displacement
/// field is uniform noise smoothed by a sigma-8 Gaussian, scaled so the
/// largest displacement vector is magnitude * min(in-plane extent) voxels.
/// `magnitude` is a fraction in [0, 0.1]; zero returns exact copies.
pub fn elastic_augment(
    v: &Volume,
    labels: &LabelVolume,
    magnitude: f64,
    seed: u64,
) -> Result<(Volume, LabelVolume)> {
    if !(0.0..=MAX_ELASTIC_MAGNITUDE).contains(&magnitude) {
        return Err(Error::arg(format!(
            "elastic magnitude {magnitude} outside [0, {MAX_ELASTIC_MAGNITUDE}]"
        )));
    }
    if labels.dims() != v.dims() || labels.frame_count() != v.frame_count() {
        return Err(Error::dims(format!(
            "labels {:?} do not match image {:?}",
            labels.dims(),
            v.dims()
        )));
    }
    if magnitude == 0.0 {
        return Ok((v.clone(), labels.clone()));
    }
    let dims = v.dims();
    let n = dims[0] * dims[1] * dims[2];
    let kernel = gaussian_kernel(ELASTIC_SIGMA_VOX);

    let mut field: Vec<Vec<f64>> = Vec::with_capacity(3);
    for comp in 0..3u64 {
        let mut rng = stream(seed, Domain::Elastic, comp);
        let mut noise: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        for axis in 0..3 {
            smooth_axis(&mut noise, dims, axis, &kernel);
        }
        field.push(noise);
    }

    let peak_target = magnitude * dims[0].min(dims[1]) as f64;
    let mut peak = 0.0f64;
    for ((a, b), c) in field[0].iter().zip(&field[1]).zip(&field[2]) {
        peak = peak.max(a * a + b * b + c * c);
    }
    let peak = peak.sqrt();
    let scale = if peak > 0.0 { peak_target / peak } else { 0.0 };
    for comp in &mut field {
        for d in comp.iter_mut() {
            *d *= scale;
        }
    }

    let frames = v.frame_count();
    let per = v.voxels_per_frame();
    let mut out = vec![0.0f32; per * frames];
    let mut out_labels = vec![Structure::Background.code(); per * frames];
    for i in 0..dims[0] {
        for j in 0..dims[1] {
            for k in 0..dims[2] {
                let idx = (i * dims[1] + j) * dims[2] + k;
                let src = [
                    i as f64 - field[0][idx],
                    j as f64 - field[1][idx],
                    k as f64 - field[2][idx],
                ];
                let ni = (src[0] + 0.5).floor().clamp(0.0, dims[0] as f64 - 1.0) as usize;
                let nj = (src[1] + 0.5).floor().clamp(0.0, dims[1] as f64 - 1.0) as usize;
                let nk = (src[2] + 0.5).floor().clamp(0.0, dims[2] as f64 - 1.0) as usize;
                let nearest = (ni * dims[1] + nj) * dims[2] + nk;
                for f in 0..frames {
                    out[f * per + idx] = trilinear(v.frame_data(f), dims, src) as f32;
                    out_labels[f * per + idx] = labels.frame_data(f)[nearest];
                }
            }
        }
    }
    let image = v.rebuild(dims, v.spacing_mm(), out)?;
    let warped_labels = LabelVolume::with_frames(
        dims,
        labels.spacing_mm(),
        labels.frames(),
        labels.frame_period_s(),
        out_labels,
    )?;
    Ok((image, warped_labels))
}
