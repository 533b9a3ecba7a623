use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::Volume;

/// Cubic window side for structural similarity.
pub const SSIM_WINDOW: usize = 7;
// Standard stabilizers for data range 1.
const SSIM_C1: f64 = 0.01 * 0.01;
const SSIM_C2: f64 = 0.03 * 0.03;

/// Volume-to-volume similarity summary. `psnr_db` is +inf when the inputs
/// are identical (serialized as null).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageMetrics {
    pub mse: f64,
    pub psnr_db: f64,
    pub ssim: f64,
}

fn check_same_shape(a: &Volume, b: &Volume) -> Result<()> {
    if a.dims() != b.dims() || a.frame_count() != b.frame_count() {
        return Err(Error::dims(format!(
            "{:?} x {} frames vs {:?} x {} frames",
            a.dims(),
            a.frame_count(),
            b.dims(),
            b.frame_count()
        )));
    }
    Ok(())
}

fn check_unit_range(v: &Volume) -> Result<()> {
    if v.data().iter().any(|&x| !(0.0..=1.0).contains(&x)) {
        return Err(Error::arg(
            "similarity metrics expect intensities normalized to [0, 1]",
        ));
    }
    Ok(())
}

/// Mean squared difference over every voxel of every frame.
pub fn mse(a: &Volume, b: &Volume) -> Result<f64> {
    check_same_shape(a, b)?;
    let sum: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum();
    Ok(sum / a.data().len() as f64)
}

/// Peak signal-to-noise ratio in dB for data range 1; +inf at zero error.
pub fn psnr_db(mse: f64) -> f64 {
    if mse <= 0.0 {
        f64::INFINITY
    } else {
        -10.0 * mse.log10()
    }
}

/// Integral image with a zero layer in front of each axis, so any box sum
/// is an 8-corner lookup.
fn integral(d: [usize; 3], value: impl Fn(usize) -> f64) -> Vec<f64> {
    let (n1, n2) = (d[1] + 1, d[2] + 1);
    let at = |i: usize, j: usize, k: usize| (i * n1 + j) * n2 + k;
    let mut s = vec![0.0f64; (d[0] + 1) * n1 * n2];
    for i in 1..=d[0] {
        for j in 1..=d[1] {
            for k in 1..=d[2] {
                let v = value(((i - 1) * d[1] + (j - 1)) * d[2] + (k - 1));
                s[at(i, j, k)] = v + s[at(i - 1, j, k)] + s[at(i, j - 1, k)] + s[at(i, j, k - 1)]
                    - s[at(i - 1, j - 1, k)]
                    - s[at(i - 1, j, k - 1)]
                    - s[at(i, j - 1, k - 1)]
                    + s[at(i - 1, j - 1, k - 1)];
            }
        }
    }
    s
}

fn box_sum(s: &[f64], d: [usize; 3], o: [usize; 3], w: usize) -> f64 {
    let (n1, n2) = (d[1] + 1, d[2] + 1);
    let at = |i: usize, j: usize, k: usize| (i * n1 + j) * n2 + k;
    let (i0, j0, k0) = (o[0], o[1], o[2]);
    let (i1, j1, k1) = (o[0] + w, o[1] + w, o[2] + w);
    s[at(i1, j1, k1)] - s[at(i0, j1, k1)] - s[at(i1, j0, k1)] - s[at(i1, j1, k0)]
        + s[at(i0, j0, k1)]
        + s[at(i0, j1, k0)]
        + s[at(i1, j0, k0)]
        - s[at(i0, j0, k0)]
}

fn frame_ssim(a: &[f32], b: &[f32], d: [usize; 3]) -> f64 {
    let sa = integral(d, |i| a[i] as f64);
    let sb = integral(d, |i| b[i] as f64);
    let saa = integral(d, |i| a[i] as f64 * a[i] as f64);
    let sbb = integral(d, |i| b[i] as f64 * b[i] as f64);
    let sab = integral(d, |i| a[i] as f64 * b[i] as f64);

    let w = SSIM_WINDOW;
    let np = (w * w * w) as f64;
    // Sample (not population) moments, the usual SSIM convention.
    let cov_norm = np / (np - 1.0);
    let mut total = 0.0f64;
    let mut count = 0usize;
    for i in 0..=d[0] - w {
        for j in 0..=d[1] - w {
            for k in 0..=d[2] - w {
                let o = [i, j, k];
                let mu_a = box_sum(&sa, d, o, w) / np;
                let mu_b = box_sum(&sb, d, o, w) / np;
                let va = cov_norm * (box_sum(&saa, d, o, w) / np - mu_a * mu_a);
                let vb = cov_norm * (box_sum(&sbb, d, o, w) / np - mu_b * mu_b);
                let cab = cov_norm * (box_sum(&sab, d, o, w) / np - mu_a * mu_b);
                total += (2.0 * mu_a * mu_b + SSIM_C1) * (2.0 * cab + SSIM_C2)
                    / ((mu_a * mu_a + mu_b * mu_b + SSIM_C1) * (va + vb + SSIM_C2));
                count += 1;
            }
        }
    }
    total / count as f64
}

/// Mean structural similarity over all fully contained 7x7x7 windows,
/// averaged across frames. Inputs must be normalized to [0, 1]; the
/// stabilizers assume that data range.
pub fn ssim(a: &Volume, b: &Volume) -> Result<f64> {
    check_same_shape(a, b)?;
    check_unit_range(a)?;
    check_unit_range(b)?;
    let d = a.dims();
    if d.iter().any(|&n| n < SSIM_WINDOW) {
        return Err(Error::arg(format!(
            "dims {d:?} cannot hold a {SSIM_WINDOW}^3 window"
        )));
    }
    let mut acc = 0.0;
    for f in 0..a.frame_count() {
        acc += frame_ssim(a.frame_data(f), b.frame_data(f), d);
    }
    Ok(acc / a.frame_count() as f64)
}

/// MSE, PSNR, and SSIM of a volume pair in one pass.
pub fn image_metrics(a: &Volume, b: &Volume) -> Result<ImageMetrics> {
    let mse = mse(a, b)?;
    let ssim = ssim(a, b)?;
    Ok(ImageMetrics {
        mse,
        psnr_db: psnr_db(mse),
        ssim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn random_volume(seed: u64, dims: [usize; 3], frames: usize) -> Volume {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let data = (0..dims[0] * dims[1] * dims[2] * frames)
            .map(|_| rng.random_range(0.0..=1.0))
            .collect();
        Volume::with_frames(dims, [1.0; 3], Some(frames), None, data).unwrap()
    }

    #[test]
    fn identical_volumes_score_perfectly() {
        let a = random_volume(7, [9, 8, 10], 2);
        let m = image_metrics(&a, &a).unwrap();
        assert_eq!(m.mse, 0.0);
        assert!(m.psnr_db.is_infinite() && m.psnr_db > 0.0);
        assert_eq!(m.ssim, 1.0);
    }

    #[test]
    fn binary_complement_has_unit_mse() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let dims = [8, 8, 8];
        let a_data: Vec<f32> = (0..512)
            .map(|_| if rng.random::<bool>() { 1.0 } else { 0.0 })
            .collect();
        let b_data: Vec<f32> = a_data.iter().map(|v| 1.0 - v).collect();
        let a = Volume::new(dims, [1.0; 3], a_data).unwrap();
        let b = Volume::new(dims, [1.0; 3], b_data).unwrap();
        assert_eq!(mse(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn mse_matches_an_elementwise_oracle_and_is_symmetric() {
        let a = random_volume(3, [6, 7, 5], 2);
        let b = random_volume(4, [6, 7, 5], 2);
        let mut sum = 0.0f64;
        let d = a.dims();
        for f in 0..2 {
            for i in 0..d[0] {
                for j in 0..d[1] {
                    for k in 0..d[2] {
                        let diff = a.at(f, i, j, k) as f64 - b.at(f, i, j, k) as f64;
                        sum += diff * diff;
                    }
                }
            }
        }
        let oracle = sum / (2 * d[0] * d[1] * d[2]) as f64;
        let got = mse(&a, &b).unwrap();
        assert!((got - oracle).abs() <= 1e-15 * oracle.max(1.0));
        assert_eq!(got, mse(&b, &a).unwrap());
    }

    #[test]
    fn ssim_is_symmetric_and_penalizes_differences() {
        let a = random_volume(5, [9, 9, 9], 1);
        let b = random_volume(6, [9, 9, 9], 1);
        let ab = ssim(&a, &b).unwrap();
        assert_eq!(ab, ssim(&b, &a).unwrap());
        assert!(ab < 1.0, "ssim {ab}");
    }

    #[test]
    fn shape_range_and_window_preconditions_are_enforced() {
        let a = random_volume(1, [9, 9, 9], 1);
        let b = random_volume(2, [9, 9, 8], 1);
        assert!(mse(&a, &b).is_err());

        let out_of_range = Volume::new([9, 9, 9], [1.0; 3], vec![1.5; 729]).unwrap();
        assert!(ssim(&a, &out_of_range).is_err());

        let thin = Volume::new([5, 9, 9], [1.0; 3], vec![0.5; 405]).unwrap();
        assert!(mse(&thin, &thin).is_ok());
        assert!(ssim(&thin, &thin).is_err());
    }

    #[test]
    fn psnr_has_the_fixed_unit_range_form() {
        assert_eq!(psnr_db(1.0), 0.0);
        assert!((psnr_db(0.01) - 20.0).abs() < 1e-12);
        assert!(psnr_db(0.0).is_infinite());
    }
}
