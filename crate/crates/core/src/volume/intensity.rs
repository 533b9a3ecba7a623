//! Intensity conditioning: range normalization and slice-wise CLAHE.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::volume::types::Volume;

/// Affine rescale of the whole payload to [0, 1]. A constant volume maps to
/// all zeros rather than dividing by a zero range.
pub fn normalize01(v: &Volume) -> Volume {
    let (mut lo, mut hi) = (f32::INFINITY, f32::NEG_INFINITY);
    for &x in v.data() {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    let range = (hi - lo) as f64;
    v.clone().map_data(|mut data| {
        if range > 0.0 {
            let inv = 1.0 / range;
            for x in &mut data {
                *x = ((*x - lo) as f64 * inv) as f32;
            }
        } else {
            data.fill(0.0);
        }
        data
    })
}

/// Contrast-limited adaptive histogram equalization, applied independently
/// to each (HF, AP) plane along the LR axis.
#[derive(Clone, Debug)]
pub struct ClaheParams {
    /// Tile grid over the (HF, AP) plane.
    pub tiles: [usize; 2],
    /// Histogram clip limit as a multiple of the uniform bin count.
    pub clip_limit: f64,
    /// Histogram resolution.
    pub bins: usize,
}

impl Default for ClaheParams {
    fn default() -> Self {
        ClaheParams {
            tiles: [8, 8],
            clip_limit: 2.0,
            bins: 256,
        }
    }
}

/// Per-axis tile lookup: for every pixel, the two bracketing tile indices
/// and the blend weight toward the second.
fn tile_blend(len: usize, tiles: usize) -> (Vec<usize>, Vec<(usize, usize, f64)>) {
    let tiles = tiles.clamp(1, len);
    let bounds: Vec<usize> = (0..=tiles).map(|t| t * len / tiles).collect();
    let centers: Vec<f64> = (0..tiles)
        .map(|t| (bounds[t] + bounds[t + 1] - 1) as f64 / 2.0)
        .collect();
    let mut blend = Vec::with_capacity(len);
    for p in 0..len {
        let x = p as f64;
        if x <= centers[0] {
            blend.push((0, 0, 0.0));
        } else if x >= centers[tiles - 1] {
            blend.push((tiles - 1, tiles - 1, 0.0));
        } else {
            let t1 = centers.partition_point(|&c| c <= x);
            let t0 = t1 - 1;
            let w = (x - centers[t0]) / (centers[t1] - centers[t0]);
            blend.push((t0, t1, w));
        }
    }
    (bounds, blend)
}

/// Clip a histogram and redistribute the excess uniformly, then return the
/// cumulative mapping to [0, 1].
fn clipped_cdf(hist: &[f64], clip_limit: f64, n_pixels: f64) -> Vec<f64> {
    let bins = hist.len() as f64;
    let limit = clip_limit * n_pixels / bins;
    let mut clipped: Vec<f64> = hist.iter().map(|&h| h.min(limit)).collect();
    let excess: f64 = hist
        .iter()
        .map(|&h| if h > limit { h - limit } else { 0.0 })
        .sum();
    let share = excess / bins;
    let mut acc = 0.0;
    for c in &mut clipped {
        acc += *c + share;
        *c = acc / n_pixels;
    }
    clipped
}

pub fn clahe(v: &Volume, params: &ClaheParams) -> Result<Volume> {
    if params.bins < 2 {
        return Err(Error::arg("clahe needs at least 2 bins"));
    }
    if params.clip_limit <= 0.0 || params.clip_limit.is_nan() {
        return Err(Error::arg("clahe clip limit must be positive"));
    }
    let dims = v.dims();
    let (n_hf, n_ap, n_lr) = (dims[0], dims[1], dims[2]);
    let bins = params.bins;

    let (mut lo, mut hi) = (f32::INFINITY, f32::NEG_INFINITY);
    for &x in v.data() {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    // One global binning keeps slice mappings mutually comparable. A
    // constant volume lands in bin 0 everywhere and stays constant.
    let scale = if hi > lo {
        bins as f64 / (hi - lo) as f64
    } else {
        0.0
    };
    let bin_of = |x: f32| -> usize { (((x - lo) as f64 * scale) as usize).min(bins - 1) };

    let (hf_bounds, hf_blend) = tile_blend(n_hf, params.tiles[0]);
    let (ap_bounds, ap_blend) = tile_blend(n_ap, params.tiles[1]);
    let tc = [hf_bounds.len() - 1, ap_bounds.len() - 1];

    let frames = v.frame_count();
    let per = v.voxels_per_frame();
    let mut out = vec![0.0f32; per * frames];

    // (frame, LR slice) planes are independent; equalize them in parallel.
    let jobs: Vec<(usize, usize)> = (0..frames)
        .flat_map(|f| (0..n_lr).map(move |k| (f, k)))
        .collect();
    let planes: Vec<(usize, usize, Vec<f32>)> = jobs
        .into_par_iter()
        .map(|(f, k)| {
            let frame = v.frame_data(f);
            // Per-tile clipped CDF lookup tables.
            let mut luts = vec![vec![0.0f64; bins]; tc[0] * tc[1]];
            for ti in 0..tc[0] {
                for tj in 0..tc[1] {
                    let mut hist = vec![0.0f64; bins];
                    let mut n_pixels = 0.0;
                    for i in hf_bounds[ti]..hf_bounds[ti + 1] {
                        for j in ap_bounds[tj]..ap_bounds[tj + 1] {
                            hist[bin_of(frame[(i * n_ap + j) * n_lr + k])] += 1.0;
                            n_pixels += 1.0;
                        }
                    }
                    luts[ti * tc[1] + tj] = clipped_cdf(&hist, params.clip_limit, n_pixels);
                }
            }
            let mut plane = vec![0.0f32; n_hf * n_ap];
            for i in 0..n_hf {
                let (t0i, t1i, wi) = hf_blend[i];
                for j in 0..n_ap {
                    let (t0j, t1j, wj) = ap_blend[j];
                    let b = bin_of(frame[(i * n_ap + j) * n_lr + k]);
                    let v00 = luts[t0i * tc[1] + t0j][b];
                    let v01 = luts[t0i * tc[1] + t1j][b];
                    let v10 = luts[t1i * tc[1] + t0j][b];
                    let v11 = luts[t1i * tc[1] + t1j][b];
                    let top = v00 + (v01 - v00) * wj;
                    let bot = v10 + (v11 - v10) * wj;
                    plane[i * n_ap + j] = (top + (bot - top) * wi) as f32;
                }
            }
            (f, k, plane)
        })
        .collect();

    for (f, k, plane) in planes {
        for i in 0..n_hf {
            for j in 0..n_ap {
                out[f * per + (i * n_ap + j) * n_lr + k] = plane[i * n_ap + j];
            }
        }
    }
    v.rebuild(dims, v.spacing_mm(), out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_maps_to_unit_range() {
        let v = Volume::new([1, 1, 4], [1.0; 3], vec![-2.0, 0.0, 2.0, 6.0]).unwrap();
        let n = normalize01(&v);
        assert_eq!(n.data(), &[0.0, 0.25, 0.5, 1.0]);
    }

    #[test]
    fn normalize_constant_gives_zeros() {
        let v = Volume::new([1, 1, 3], [1.0; 3], vec![4.2; 3]).unwrap();
        assert_eq!(normalize01(&v).data(), &[0.0, 0.0, 0.0]);
    }

    fn bimodal(dims: [usize; 3], low: f32, high: f32) -> Volume {
        let mut data = vec![low; dims[0] * dims[1] * dims[2]];
        for i in 0..dims[0] / 2 {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    data[(i * dims[1] + j) * dims[2] + k] = high;
                }
            }
        }
        Volume::new(dims, [1.0; 3], data).unwrap()
    }

    #[test]
    fn clahe_output_stays_in_unit_range() {
        let v = bimodal([16, 16, 4], 0.3, 0.6);
        let e = clahe(&v, &ClaheParams::default()).unwrap();
        for &x in e.data() {
            assert!((0.0..=1.0).contains(&x), "value {x} out of range");
        }
    }

    #[test]
    fn clahe_constant_volume_stays_constant() {
        let v = Volume::new([12, 12, 3], [1.0; 3], vec![0.7; 12 * 12 * 3]).unwrap();
        let e = clahe(&v, &ClaheParams::default()).unwrap();
        let first = e.data()[0];
        assert!(e.data().iter().all(|&x| x == first));
    }

    #[test]
    fn clahe_does_not_reduce_plateau_contrast() {
        let v = bimodal([32, 32, 2], 0.3, 0.6);
        let e = clahe(&v, &ClaheParams::default()).unwrap();
        let dims = v.dims();
        let mean_region = |vol: &Volume, lo: usize, hi: usize| -> f64 {
            let mut s = 0.0;
            let mut n = 0;
            for i in lo..hi {
                for j in 0..dims[1] {
                    for k in 0..dims[2] {
                        s += vol.at(0, i, j, k) as f64;
                        n += 1;
                    }
                }
            }
            s / n as f64
        };
        let before = mean_region(&v, 0, 8) / mean_region(&v, 24, 32);
        let low_after = mean_region(&e, 24, 32);
        let after = if low_after > 0.0 {
            mean_region(&e, 0, 8) / low_after
        } else {
            f64::INFINITY
        };
        assert!(
            after >= before - 1e-9,
            "contrast ratio fell: {before} -> {after}"
        );
    }

    #[test]
    fn clahe_is_deterministic() {
        let v = bimodal([24, 20, 3], 0.1, 0.9);
        let a = clahe(&v, &ClaheParams::default()).unwrap();
        let b = clahe(&v, &ClaheParams::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn clahe_rejects_degenerate_params() {
        let v = Volume::zeros([4, 4, 1], [1.0; 3]).unwrap();
        assert!(clahe(
            &v,
            &ClaheParams {
                bins: 1,
                ..Default::default()
            }
        )
        .is_err());
        assert!(clahe(
            &v,
            &ClaheParams {
                clip_limit: 0.0,
                ..Default::default()
            }
        )
        .is_err());
    }
}
