use super::{io_error, parse_f64_3, parse_usize3};
use crate::Format;
use cine3d::volume::{
    load, load_volume, normalize01, save_labels, save_volume, upsample_slice_dir, Interpolation,
    Loaded,
};
use cine3d::{Error, LabelVolume, Result, Structure, Volume, FOREGROUND_STRUCTURES};
use clap::{Args, Subcommand, ValueEnum};
use serde_json::json;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Args)]
pub struct ConvertArgs {
    #[command(subcommand)]
    action: ConvertCmd,
}

#[derive(Clone, Copy, Debug, Eq, PartialEq, ValueEnum)]
enum PayloadKind {
    Intensity,
    Labels,
}

#[derive(Clone, Copy, Debug, Eq, PartialEq, ValueEnum)]
enum Method {
    Nearest,
    Linear,
    Cubic,
}

impl From<Method> for Interpolation {
    fn from(m: Method) -> Interpolation {
        match m {
            Method::Nearest => Interpolation::Nearest,
            Method::Linear => Interpolation::Linear,
            Method::Cubic => Interpolation::Cubic,
        }
    }
}

#[derive(Subcommand)]
enum ConvertCmd {
    /// Wrap a raw little-endian array (frame-major, LR fastest) in a container.
    Import {
        /// Raw payload: f32le intensities or u8 label codes.
        raw: PathBuf,
        /// Output container stem or header path.
        output: PathBuf,
        /// Grid size as HF,AP,LR.
        #[arg(long, value_parser = parse_usize3)]
        dims: [usize; 3],
        /// Voxel spacing in mm as HF,AP,LR.
        #[arg(long, value_parser = parse_f64_3, default_value = "1,1,1")]
        spacing: [f64; 3],
        /// Number of cardiac frames; omit for a static volume.
        #[arg(long)]
        frames: Option<usize>,
        /// Seconds between frames.
        #[arg(long)]
        frame_period_s: Option<f64>,
        #[arg(long, value_enum, default_value_t = PayloadKind::Intensity)]
        kind: PayloadKind,
    },
    /// Unwrap a container payload back into a raw little-endian array.
    Export { input: PathBuf, output: PathBuf },
    /// Print header fields and payload statistics as JSON.
    Info { input: PathBuf },
    /// Upsample the LR axis by an integer factor.
    Upsample {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, default_value_t = 4)]
        factor: usize,
        #[arg(long, value_enum, default_value_t = Method::Cubic)]
        method: Method,
    },
    /// Min-max normalize intensities to the unit interval.
    Normalize { input: PathBuf, output: PathBuf },
}

fn read_raw_f32(path: &Path) -> Result<Vec<f32>> {
    let bytes = fs::read(path).map_err(|e| io_error(path, e))?;
    if bytes.len() % 4 != 0 {
        return Err(Error::InvalidArgument(format!(
            "raw f32 payload {} has {} bytes, not a multiple of 4",
            path.display(),
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

fn info_json(loaded: &Loaded) -> serde_json::Value {
    match loaded {
        Loaded::Intensity(v) => {
            let mut min = f32::INFINITY;
            let mut max = f32::NEG_INFINITY;
            for &x in v.data() {
                min = min.min(x);
                max = max.max(x);
            }
            json!({
                "kind": "intensity",
                "dims": v.dims(),
                "spacing_mm": v.spacing_mm(),
                "frames": v.frames(),
                "frame_period_s": v.frame_period_s(),
                "voxels_per_frame": v.voxels_per_frame(),
                "min": min,
                "max": max,
            })
        }
        Loaded::Labels(m) => {
            let mut counts = [0u64; Structure::COUNT];
            for &c in m.data() {
                counts[c as usize] += 1;
            }
            let mut per_structure = serde_json::Map::new();
            for s in std::iter::once(Structure::Background).chain(FOREGROUND_STRUCTURES) {
                per_structure.insert(s.short_name().to_string(), json!(counts[s.code() as usize]));
            }
            json!({
                "kind": "labels",
                "dims": m.dims(),
                "spacing_mm": m.spacing_mm(),
                "frames": m.frames(),
                "frame_period_s": m.frame_period_s(),
                "voxels_per_frame": m.voxels_per_frame(),
                "voxel_counts": per_structure,
            })
        }
    }
}

pub fn run(args: ConvertArgs, _format: Format) -> Result<()> {
    match args.action {
        ConvertCmd::Import {
            raw,
            output,
            dims,
            spacing,
            frames,
            frame_period_s,
            kind,
        } => match kind {
            PayloadKind::Intensity => {
                let data = read_raw_f32(&raw)?;
                let v = Volume::with_frames(dims, spacing, frames, frame_period_s, data)?;
                save_volume(&v, &output)
            }
            PayloadKind::Labels => {
                let data = fs::read(&raw).map_err(|e| io_error(&raw, e))?;
                let m = LabelVolume::with_frames(dims, spacing, frames, frame_period_s, data)?;
                save_labels(&m, &output)
            }
        },
        ConvertCmd::Export { input, output } => {
            let bytes = match load(&input)? {
                Loaded::Intensity(v) => {
                    let mut out = Vec::with_capacity(v.data().len() * 4);
                    for x in v.data() {
                        out.extend_from_slice(&x.to_le_bytes());
                    }
                    out
                }
                Loaded::Labels(m) => m.data().to_vec(),
            };
            fs::write(&output, bytes).map_err(|e| io_error(&output, e))
        }
        ConvertCmd::Info { input } => {
            let report = info_json(&load(&input)?);
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("info serializes")
            );
            Ok(())
        }
        ConvertCmd::Upsample {
            input,
            output,
            factor,
            method,
        } => {
            let v = load_volume(&input)?;
            save_volume(&upsample_slice_dir(&v, factor, method.into())?, &output)
        }
        ConvertCmd::Normalize { input, output } => {
            let v = load_volume(&input)?;
            save_volume(&normalize01(&v), &output)
        }
    }
}
