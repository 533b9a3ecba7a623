use crate::error::{Error, Result};
use crate::volume::Volume;

/// Weight on the gradient term in [`combined_image_loss`].
pub const COMBINED_GMAE_RATIO: f64 = 5.357;

pub(crate) const DERIV: [f64; 3] = [-1.0, 0.0, 1.0];
pub(crate) const SMOOTH: [f64; 3] = [1.0, 2.0, 1.0];

fn check_same_grid(a: &Volume, b: &Volume) -> Result<()> {
    if a.dims() != b.dims() || a.frame_count() != b.frame_count() {
        return Err(Error::dims(format!(
            "volumes differ: {:?} x{} frames vs {:?} x{} frames",
            a.dims(),
            a.frame_count(),
            b.dims(),
            b.frame_count()
        )));
    }
    Ok(())
}

/// Mean absolute error over every voxel of every frame.
pub fn mae(a: &Volume, b: &Volume) -> Result<f64> {
    check_same_grid(a, b)?;
    let sum: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| (x as f64 - y as f64).abs())
        .sum();
    Ok(sum / a.data().len() as f64)
}

/// 3-tap convolution along one axis with the border value replicated.
/// Clamping each coordinate independently makes separable passes agree
/// with a direct windowed convolution.
pub(crate) fn conv3_axis(src: &[f64], dims: [usize; 3], axis: usize, k: [f64; 3]) -> Vec<f64> {
    let strides = [dims[1] * dims[2], dims[2], 1];
    let st = strides[axis];
    let n = dims[axis];
    let mut out = vec![0.0f64; src.len()];
    for i in 0..dims[0] {
        for j in 0..dims[1] {
            let row = i * strides[0] + j * strides[1];
            for kk in 0..dims[2] {
                let idx = row + kk;
                let c = [i, j, kk][axis];
                let lo = if c == 0 { idx } else { idx - st };
                let hi = if c + 1 == n { idx } else { idx + st };
                out[idx] = k[0] * src[lo] + k[1] * src[idx] + k[2] * src[hi];
            }
        }
    }
    out
}

/// One component of the (unnormalized) 3D Sobel gradient: the derivative
/// kernel [-1, 0, 1] along `axis` and the smoothing kernel [1, 2, 1] along
/// the other two.
pub(crate) fn sobel_component(frame: &[f32], dims: [usize; 3], axis: usize) -> Vec<f64> {
    let mut buf: Vec<f64> = frame.iter().map(|&v| v as f64).collect();
    for ax in 0..3 {
        let k = if ax == axis { DERIV } else { SMOOTH };
        buf = conv3_axis(&buf, dims, ax, k);
    }
    buf
}

/// Gradient mean absolute error: MAE between corresponding Sobel gradient
/// components, averaged over the three axes.
pub fn gmae(a: &Volume, b: &Volume) -> Result<f64> {
    check_same_grid(a, b)?;
    let dims = a.dims();
    let mut total = 0.0f64;
    for f in 0..a.frame_count() {
        let fa = a.frame_data(f);
        let fb = b.frame_data(f);
        for axis in 0..3 {
            let ga = sobel_component(fa, dims, axis);
            let gb = sobel_component(fb, dims, axis);
            total += ga.iter().zip(&gb).map(|(x, y)| (x - y).abs()).sum::<f64>();
        }
    }
    Ok(total / (3 * a.data().len()) as f64)
}

/// mae + ratio * gmae. The de-banding and super-resolution networks train
/// against this with ratio 5.357.
pub fn combined_image_loss(a: &Volume, b: &Volume, ratio: f64) -> Result<f64> {
    if ratio <= 0.0 || !ratio.is_finite() {
        return Err(Error::arg(format!(
            "gradient ratio must be positive, got {ratio}"
        )));
    }
    Ok(mae(a, b)? + ratio * gmae(a, b)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn hf_ramp(dims: [usize; 3], slope: f32) -> Volume {
        let mut data = vec![0.0f32; dims[0] * dims[1] * dims[2]];
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    data[(i * dims[1] + j) * dims[2] + k] = slope * i as f32;
                }
            }
        }
        Volume::new(dims, [1.0; 3], data).unwrap()
    }

    fn random_volume(dims: [usize; 3], seed: u64) -> Volume {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let data = (0..dims[0] * dims[1] * dims[2])
            .map(|_| rng.random_range(-1.0f32..1.0))
            .collect();
        Volume::new(dims, [1.0; 3], data).unwrap()
    }

    #[test]
    fn identical_volumes_lose_nothing() {
        let v = random_volume([6, 5, 4], 9);
        assert_eq!(mae(&v, &v).unwrap(), 0.0);
        assert_eq!(gmae(&v, &v).unwrap(), 0.0);
        assert_eq!(
            combined_image_loss(&v, &v, COMBINED_GMAE_RATIO).unwrap(),
            0.0
        );
    }

    #[test]
    fn constant_offset_hits_mae_only() {
        let a = Volume::new([3, 3, 3], [1.0; 3], vec![1.0; 27]).unwrap();
        let b = Volume::zeros([3, 3, 3], [1.0; 3]).unwrap();
        assert_eq!(mae(&a, &b).unwrap(), 1.0);
        assert_eq!(gmae(&a, &b).unwrap(), 0.0);
        assert_eq!(
            combined_image_loss(&a, &b, COMBINED_GMAE_RATIO).unwrap(),
            1.0
        );
    }

    #[test]
    fn mae_matches_elementwise_oracle() {
        let a = random_volume([7, 6, 5], 1);
        let b = random_volume([7, 6, 5], 2);
        let mut sum = 0.0f64;
        for (x, y) in a.data().iter().zip(b.data()) {
            sum += (*x as f64 - *y as f64).abs();
        }
        assert_eq!(mae(&a, &b).unwrap(), sum / a.data().len() as f64);
    }

    /// Direct 27-tap windowed Sobel with clamped indices; integer inputs
    /// keep every intermediate exact, so separable and direct must agree
    /// bit for bit.
    fn sobel_direct(frame: &[f32], dims: [usize; 3], axis: usize) -> Vec<f64> {
        let idx = |i: usize, j: usize, k: usize| (i * dims[1] + j) * dims[2] + k;
        let taps = |off: i64, which: usize| -> f64 {
            let k = if which == axis { DERIV } else { SMOOTH };
            k[(off + 1) as usize]
        };
        let clamp = |c: i64, n: usize| c.clamp(0, n as i64 - 1) as usize;
        let mut out = vec![0.0f64; frame.len()];
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    let mut acc = 0.0f64;
                    for di in -1i64..=1 {
                        for dj in -1i64..=1 {
                            for dk in -1i64..=1 {
                                let w = taps(di, 0) * taps(dj, 1) * taps(dk, 2);
                                let src = frame[idx(
                                    clamp(i as i64 + di, dims[0]),
                                    clamp(j as i64 + dj, dims[1]),
                                    clamp(k as i64 + dk, dims[2]),
                                )];
                                acc += w * src as f64;
                            }
                        }
                    }
                    out[idx(i, j, k)] = acc;
                }
            }
        }
        out
    }

    #[test]
    fn separable_sobel_matches_direct_convolution() {
        let dims = [5, 4, 6];
        let mut data = vec![0.0f32; 120];
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for v in &mut data {
            *v = rng.random_range(0..32) as f32;
        }
        for axis in 0..3 {
            let fast = sobel_component(&data, dims, axis);
            let slow = sobel_direct(&data, dims, axis);
            assert_eq!(fast, slow, "axis {axis}");
        }
    }

    #[test]
    fn ramp_gradient_values_are_known() {
        // Slope 0.05 ramp along HF with 4 rows, compared against zero:
        // interior Sobel response 32*slope, border 16*slope, so the HF axis
        // mean is 24*slope = 1.2 and the other two axes vanish. Tolerances
        // cover the f32 rounding of the slope itself.
        let a = hf_ramp([4, 5, 6], 0.05);
        let b = Volume::zeros([4, 5, 6], [1.0; 3]).unwrap();
        assert!((mae(&a, &b).unwrap() - 0.075).abs() < 1e-7);
        assert!((gmae(&a, &b).unwrap() - 0.4).abs() < 1e-7);
        let combined = combined_image_loss(&a, &b, COMBINED_GMAE_RATIO).unwrap();
        assert!((combined - 2.2178).abs() < 1e-6, "combined {combined}");
    }

    #[test]
    fn losses_are_symmetric() {
        let a = random_volume([6, 6, 6], 4);
        let b = random_volume([6, 6, 6], 5);
        assert_eq!(mae(&a, &b).unwrap(), mae(&b, &a).unwrap());
        assert_eq!(gmae(&a, &b).unwrap(), gmae(&b, &a).unwrap());
    }

    #[test]
    fn dimension_and_ratio_checks() {
        let a = random_volume([4, 4, 4], 6);
        let b = random_volume([4, 4, 5], 7);
        assert!(mae(&a, &b).is_err());
        assert!(gmae(&a, &b).is_err());
        assert!(combined_image_loss(&a, &a, 0.0).is_err());
        assert!(combined_image_loss(&a, &a, f64::NAN).is_err());
    }
}
