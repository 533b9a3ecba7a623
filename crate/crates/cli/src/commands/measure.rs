use super::{csv_table, parse_f64_3};
use crate::Format;
use cine3d::segpost::{clean_islands, ventricular_metrics, volume_curve, Connectivity};
use cine3d::vessel::{vessel_report, SelectPoint, VesselLandmark};
use cine3d::volume::load_labels;
use cine3d::{Result, Structure, FOREGROUND_STRUCTURES};
use clap::{Args, Subcommand};
use serde_json::json;
use std::fs;
use std::path::PathBuf;

#[derive(Args)]
pub struct MeasureArgs {
    #[command(subcommand)]
    what: MeasureCmd,
}

#[derive(Subcommand)]
enum MeasureCmd {
    /// Per-frame structure volumes plus EDV/ESV/EF for both ventricles.
    Volumes {
        /// Cine label map.
        input: PathBuf,
        /// Write the frame x structure volume table here as CSV.
        #[arg(long, value_name = "PATH")]
        curves_out: Option<PathBuf>,
        /// Keep only the largest connected component per class and frame first.
        #[arg(long)]
        clean: bool,
    },
    /// Vessel diameters at named centerline landmarks.
    Vessels {
        /// Cine label map.
        input: PathBuf,
        /// Frame to measure on.
        #[arg(long, default_value_t = 30)]
        frame: usize,
        /// name=arc_fraction or name=x,y,z in mm. Names containing "ao"
        /// target the aorta, "pa" the pulmonary artery.
        #[arg(long = "landmark", value_name = "NAME=WHERE", required = true, value_parser = parse_landmark)]
        landmarks: Vec<VesselLandmark>,
        /// Write the landmark table here as CSV instead of stdout.
        #[arg(long, value_name = "PATH")]
        output: Option<PathBuf>,
    },
}

fn parse_landmark(s: &str) -> std::result::Result<VesselLandmark, String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| "expected name=arc_fraction or name=x,y,z".to_string())?;
    let lower = name.to_ascii_lowercase();
    let vessel = if lower.contains("ao") {
        Structure::Aorta
    } else if lower.contains("pa") {
        Structure::PulmonaryArtery
    } else {
        return Err(format!(
            "cannot infer a vessel from {name:?}; include \"ao\" or \"pa\" in the name"
        ));
    };
    let location = if value.contains(',') {
        SelectPoint::NearestTo(parse_f64_3(value)?)
    } else {
        let f: f64 = value
            .trim()
            .parse()
            .map_err(|e| format!("arc fraction {value:?}: {e}"))?;
        SelectPoint::ArcFraction(f)
    };
    Ok(VesselLandmark {
        name: name.to_string(),
        vessel,
        location,
    })
}

fn run_volumes(
    input: PathBuf,
    curves_out: Option<PathBuf>,
    clean: bool,
    format: Format,
) -> Result<()> {
    let mut labels = load_labels(&input)?;
    if clean {
        labels = clean_islands(&labels, Connectivity::TwentySix);
    }
    let curves: Vec<_> = FOREGROUND_STRUCTURES
        .iter()
        .map(|&s| volume_curve(&labels, s))
        .collect();

    if let Some(path) = &curves_out {
        let header = ["frame", "structure", "volume_ml"].map(String::from);
        let mut rows = Vec::new();
        for frame in 0..labels.frame_count() {
            for curve in &curves {
                rows.push(vec![
                    frame.to_string(),
                    curve.structure.short_name().to_string(),
                    curve.volumes_ml[frame].to_string(),
                ]);
            }
        }
        fs::write(path, csv_table(&header, rows)?).map_err(|e| super::io_error(path, e))?;
    }

    let lv = ventricular_metrics(&curves[0])?;
    let rv = ventricular_metrics(&curves[1])?;
    debug_assert_eq!(curves[0].structure, Structure::LeftVentricle);
    debug_assert_eq!(curves[1].structure, Structure::RightVentricle);

    match format {
        Format::Json => {
            let report = json!({ "lv": lv, "rv": rv });
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("metrics serialize")
            );
        }
        Format::Csv => {
            let header = [
                "structure",
                "edv_ml",
                "esv_ml",
                "ef_fraction",
                "edv_frame",
                "esv_frame",
            ]
            .map(String::from);
            let rows = [
                (Structure::LeftVentricle, lv),
                (Structure::RightVentricle, rv),
            ]
            .map(|(s, m)| {
                vec![
                    s.short_name().to_string(),
                    m.edv_ml.to_string(),
                    m.esv_ml.to_string(),
                    m.ef_fraction.to_string(),
                    m.edv_frame.to_string(),
                    m.esv_frame.to_string(),
                ]
            });
            print!("{}", csv_table(&header, rows)?);
        }
    }
    Ok(())
}

fn run_vessels(
    input: PathBuf,
    frame: usize,
    landmarks: Vec<VesselLandmark>,
    output: Option<PathBuf>,
    format: Format,
) -> Result<()> {
    let labels = load_labels(&input)?;
    let report = vessel_report(&labels, frame, &landmarks)?;

    if output.is_none() && format == Format::Json {
        let rows: Vec<_> = report
            .iter()
            .map(|m| {
                json!({
                    "landmark": m.landmark,
                    "diameter_mm": m.diameter_mm,
                    "ray_min_mm": m.ray_min_mm(),
                    "ray_max_mm": m.ray_max_mm(),
                    "point_mm": m.point_mm,
                    "tangent": m.tangent,
                })
            })
            .collect();
        println!(
            "{}",
            serde_json::to_string_pretty(&rows).expect("report serializes")
        );
        return Ok(());
    }

    let header = ["landmark", "diameter_mm", "ray_min_mm", "ray_max_mm"].map(String::from);
    let rows = report.iter().map(|m| {
        vec![
            m.landmark.clone(),
            m.diameter_mm.to_string(),
            m.ray_min_mm().to_string(),
            m.ray_max_mm().to_string(),
        ]
    });
    let table = csv_table(&header, rows)?;
    match &output {
        Some(path) => fs::write(path, table).map_err(|e| super::io_error(path, e)),
        None => {
            print!("{table}");
            Ok(())
        }
    }
}

pub fn run(args: MeasureArgs, format: Format) -> Result<()> {
    match args.what {
        MeasureCmd::Volumes {
            input,
            curves_out,
            clean,
        } => run_volumes(input, curves_out, clean, format),
        MeasureCmd::Vessels {
            input,
            frame,
            landmarks,
            output,
        } => run_vessels(input, frame, landmarks, output, format),
    }
}
