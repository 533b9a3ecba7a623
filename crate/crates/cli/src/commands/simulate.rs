use super::{io_error, parse_f64_3};
use cine3d::respsim::{
    degrade, degrade_replay, DegradeManifest, DegradeParams, RespiratoryConfig,
    BANDING_PROBABILITY, BANDING_SCALE_RANGE,
};
use cine3d::volume::{crop_or_pad, load_volume, save_volume};
use cine3d::{Error, Result};
use clap::Args;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Args)]
pub struct SimulateArgs {
    /// Clean high-resolution cine volume.
    input: PathBuf,
    /// Degraded output volume stem.
    output: PathBuf,
    /// Root seed for every random draw.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Respiratory magnitude override.
    #[arg(long, value_name = "MAG")]
    m: Option<f64>,
    /// Breathing period override, seconds.
    #[arg(long, value_name = "SECONDS")]
    b: Option<f64>,
    /// Respiratory phase override, radians.
    #[arg(long, value_name = "RADIANS")]
    phi: Option<f64>,
    /// Mean R-R interval override, seconds.
    #[arg(long, value_name = "SECONDS")]
    rr: Option<f64>,
    /// Crop or pad LR so the degraded output has exactly this many slices.
    #[arg(long, value_name = "N")]
    n_slices: Option<usize>,
    /// LR slice-thickening factor.
    #[arg(long, value_name = "N")]
    factor: Option<usize>,
    /// Per-slice banding probability.
    #[arg(long, value_name = "P")]
    band_prob: Option<f64>,
    /// Rigid augmentation angles about HF,AP,LR in degrees.
    #[arg(long, value_parser = parse_f64_3, value_name = "A,B,C")]
    augment_angles: Option<[f64; 3]>,
    /// Write the realized-draw manifest here.
    #[arg(long, value_name = "PATH")]
    manifest_out: Option<PathBuf>,
    /// Reproduce a previous run from its manifest instead of drawing.
    #[arg(
        long,
        value_name = "MANIFEST",
        conflicts_with_all = [
            "seed", "m", "b", "phi", "rr", "n_slices", "factor", "band_prob",
            "augment_angles",
        ]
    )]
    replay: Option<PathBuf>,
}

fn read_manifest(path: &Path) -> Result<DegradeManifest> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })
}

fn write_manifest(manifest: &DegradeManifest, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(manifest).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    fs::write(path, text).map_err(|e| io_error(path, e))
}

pub fn run(args: SimulateArgs) -> Result<()> {
    let v = load_volume(&args.input)?;

    if let Some(manifest_path) = &args.replay {
        let manifest = read_manifest(manifest_path)?;
        let out = degrade_replay(&v, &manifest)?;
        save_volume(&out, &args.output)?;
        if let Some(p) = &args.manifest_out {
            write_manifest(&manifest, p)?;
        }
        return Ok(());
    }

    let factor = args.factor.unwrap_or(cine3d::respsim::DEFAULT_THICK_FACTOR);
    let input = match args.n_slices {
        Some(0) => {
            return Err(Error::InvalidArgument(
                "--n-slices must be at least 1".into(),
            ))
        }
        Some(n) => {
            let [d0, d1, _] = v.dims();
            crop_or_pad(&v, [d0, d1, n * factor])?
        }
        None => v,
    };

    let config = drawn_config(&args);
    let params = DegradeParams {
        thick_factor: factor,
        banding_probability: args.band_prob.unwrap_or(BANDING_PROBABILITY),
        banding_scale_range: BANDING_SCALE_RANGE,
        augment_angles_deg: args.augment_angles,
    };
    let (out, manifest) = degrade(&input, &config, &params)?;
    save_volume(&out, &args.output)?;
    if let Some(p) = &args.manifest_out {
        write_manifest(&manifest, p)?;
    }
    Ok(())
}

fn drawn_config(args: &SimulateArgs) -> RespiratoryConfig {
    let mut config = RespiratoryConfig::draw(args.seed);
    if let Some(m) = args.m {
        config.m = m;
    }
    if let Some(b) = args.b {
        config.b_s = b;
    }
    if let Some(phi) = args.phi {
        config.phi_rad = phi;
    }
    if let Some(rr) = args.rr {
        config.rr_mean_s = rr;
    }
    config
}
