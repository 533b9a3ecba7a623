use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::respsim::banding::{
    apply_banding, apply_banding_replay, BandingDraw, BANDING_PROBABILITY, BANDING_SCALE_RANGE,
};
use crate::respsim::config::RespiratoryConfig;
use crate::respsim::deform::{apply_deformation, deformation_for_slice, DeformationField};
use crate::respsim::schedule::{build_slice_schedule, Beat};
use crate::respsim::signal::RespiratorySignal;
use crate::volume::{crop_or_pad, rotate_augment, Volume};

/// LR averaging factor taking 1.5 mm acquisitions to 6 mm stacks.
pub const DEFAULT_THICK_FACTOR: usize = 4;

/// Average groups of `factor` adjacent LR slices, multiplying the LR
/// spacing by the factor. A slice count not divisible by the factor is
/// first zero-padded symmetrically to the next multiple.
pub fn simulate_thick_slices(v: &Volume, factor: usize) -> Result<Volume> {
    if factor == 0 {
        return Err(Error::arg("thick-slice factor must be at least 1"));
    }
    if factor == 1 {
        return Ok(v.clone());
    }
    let padded;
    let src = if v.dims()[2] % factor == 0 {
        v
    } else {
        let mut target = v.dims();
        target[2] = target[2].div_ceil(factor) * factor;
        padded = crop_or_pad(v, target)?;
        &padded
    };
    let dims = src.dims();
    let out_lr = dims[2] / factor;
    let frames = src.frame_count();
    let per_out = dims[0] * dims[1] * out_lr;
    let mut out = vec![0.0f32; per_out * frames];
    let inv = 1.0 / factor as f64;
    for f in 0..frames {
        let data = src.frame_data(f);
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                let row = (i * dims[1] + j) * dims[2];
                for g in 0..out_lr {
                    let mut acc = 0.0f64;
                    for m in 0..factor {
                        acc += data[row + g * factor + m] as f64;
                    }
                    out[f * per_out + (i * dims[1] + j) * out_lr + g] = (acc * inv) as f32;
                }
            }
        }
    }
    let mut spacing = src.spacing_mm();
    spacing[2] *= factor as f64;
    v.rebuild([dims[0], dims[1], out_lr], spacing, out)
}

/// Degradation knobs besides the respiratory config itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegradeParams {
    pub thick_factor: usize,
    pub banding_probability: f64,
    pub banding_scale_range: (f64, f64),
    /// Rigid augmentation applied to the input before degradation, if any.
    pub augment_angles_deg: Option<[f64; 3]>,
}

impl Default for DegradeParams {
    fn default() -> Self {
        DegradeParams {
            thick_factor: DEFAULT_THICK_FACTOR,
            banding_probability: BANDING_PROBABILITY,
            banding_scale_range: BANDING_SCALE_RANGE,
            augment_angles_deg: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub start_s: f64,
    pub duration_s: f64,
    pub var1: f64,
    pub var2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceRecord {
    pub index: usize,
    pub t_slice_s: f64,
    /// Respiratory signal value at acquisition time.
    pub amplitude: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandRecord {
    pub banded: bool,
    pub factor: f64,
}

/// Complete record of one degradation: configuration plus every realized
/// draw. Replaying a manifest on the same input reproduces the output bit
/// for bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegradeManifest {
    pub schema_version: u32,
    pub config: RespiratoryConfig,
    pub params: DegradeParams,
    pub input_dims: [usize; 3],
    pub input_spacing_mm: [f64; 3],
    pub output_dims: [usize; 3],
    pub cycles: Vec<CycleRecord>,
    pub beats: Vec<Beat>,
    pub slices: Vec<SliceRecord>,
    pub banding: Vec<BandRecord>,
}

const MANIFEST_SCHEMA_VERSION: u32 = 1;

fn validate_params(params: &DegradeParams) -> Result<()> {
    if params.thick_factor == 0 {
        return Err(Error::arg("thick-slice factor must be at least 1"));
    }
    Ok(())
}

/// Synthesize a free-breathing acquisition from a high-resolution volume:
/// optional rigid augmentation, thick-slice averaging along LR, per-slice
/// respiratory deformation at the slice acquisition times, then banding
/// and renormalization to [0, 1].
pub fn degrade(
    v: &Volume,
    cfg: &RespiratoryConfig,
    params: &DegradeParams,
) -> Result<(Volume, DegradeManifest)> {
    cfg.validate()?;
    validate_params(params)?;

    let augmented;
    let input = match params.augment_angles_deg {
        Some(angles) => {
            augmented = rotate_augment(v, None, angles)?.0;
            &augmented
        }
        None => v,
    };

    let thick = simulate_thick_slices(input, params.thick_factor)?;
    let n_slices = thick.dims()[2];
    let schedule = build_slice_schedule(cfg, n_slices)?;
    let mut signal = RespiratorySignal::new(cfg.clone())?;

    let mut slices = Vec::with_capacity(n_slices);
    let mut fields = Vec::with_capacity(n_slices);
    let in_plane = [thick.dims()[0], thick.dims()[1]];
    for (k, &t) in schedule.slice_times_s.iter().enumerate() {
        let amplitude = signal.value(t);
        slices.push(SliceRecord {
            index: k,
            t_slice_s: t,
            amplitude,
        });
        fields.push(deformation_for_slice(amplitude, in_plane));
    }
    let field = DeformationField::from_slices(fields)?;
    let warped = apply_deformation(&thick, &field)?;

    let (banded, draws) = apply_banding(
        &warped,
        params.banding_probability,
        params.banding_scale_range,
        cfg.seed,
    )?;

    let cycles = signal
        .cycles_until(schedule.total_duration_s())
        .into_iter()
        .map(|c| CycleRecord {
            start_s: c.start_s,
            duration_s: c.duration_s,
            var1: c.var1,
            var2: c.var2,
        })
        .collect();

    let manifest = DegradeManifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        config: cfg.clone(),
        params: params.clone(),
        input_dims: v.dims(),
        input_spacing_mm: v.spacing_mm(),
        output_dims: banded.dims(),
        cycles,
        beats: schedule.beats,
        slices,
        banding: draws
            .iter()
            .map(|d| BandRecord {
                banded: d.banded,
                factor: d.factor,
            })
            .collect(),
    };
    Ok((banded, manifest))
}

/// Re-run a recorded degradation on `v`, consuming only the manifest's
/// realized values (amplitudes and banding factors), never the RNG.
pub fn degrade_replay(v: &Volume, manifest: &DegradeManifest) -> Result<Volume> {
    if manifest.schema_version != MANIFEST_SCHEMA_VERSION {
        return Err(Error::arg(format!(
            "unsupported manifest schema_version {}",
            manifest.schema_version
        )));
    }
    if v.dims() != manifest.input_dims {
        return Err(Error::dims(format!(
            "input dims {:?} do not match manifest {:?}",
            v.dims(),
            manifest.input_dims
        )));
    }
    validate_params(&manifest.params)?;

    let augmented;
    let input = match manifest.params.augment_angles_deg {
        Some(angles) => {
            augmented = rotate_augment(v, None, angles)?.0;
            &augmented
        }
        None => v,
    };

    let thick = simulate_thick_slices(input, manifest.params.thick_factor)?;
    let n_slices = thick.dims()[2];
    if manifest.slices.len() != n_slices {
        return Err(Error::dims(format!(
            "manifest records {} slices, volume has {}",
            manifest.slices.len(),
            n_slices
        )));
    }
    let in_plane = [thick.dims()[0], thick.dims()[1]];
    let field = DeformationField::from_slices(
        manifest
            .slices
            .iter()
            .map(|s| deformation_for_slice(s.amplitude, in_plane))
            .collect(),
    )?;
    let warped = apply_deformation(&thick, &field)?;

    if manifest.banding.len() != n_slices {
        return Err(Error::dims(format!(
            "manifest records {} banding draws, volume has {} slices",
            manifest.banding.len(),
            n_slices
        )));
    }
    let draws: Vec<BandingDraw> = manifest
        .banding
        .iter()
        .map(|b| BandingDraw {
            banded: b.banded,
            factor: b.factor,
        })
        .collect();
    apply_banding_replay(&warped, &draws)
}
