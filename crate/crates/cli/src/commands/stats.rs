use super::{csv_error, csv_table, json_f64};
use crate::Format;
use cine3d::qa::{bland_altman, wilcoxon_signed_rank};
use cine3d::{Error, Result};
use clap::{ArgGroup, Args};
use serde_json::json;
use std::path::{Path, PathBuf};

#[derive(Args)]
#[command(group = ArgGroup::new("analysis").required(true).multiple(true).args(["bland_altman", "wilcoxon"]))]
pub struct StatsArgs {
    /// Bland-Altman limits of agreement over a two-column CSV of pairs.
    #[arg(long, value_name = "PAIRS_CSV")]
    bland_altman: Option<PathBuf>,
    /// Two-sided Wilcoxon signed-rank test over a two-column CSV of pairs.
    #[arg(long, value_name = "PAIRS_CSV")]
    wilcoxon: Option<PathBuf>,
}

/// Paired values from the first two CSV columns. A first line that does
/// not parse as numbers is treated as a header; anything later fails.
fn read_pairs(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut pairs = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(i as u64 + 1, |p| p.line());
        let fail = |what: String| {
            Error::InvalidArgument(format!("{} line {line}: {what}", path.display()))
        };
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if record.len() < 2 {
            return Err(fail("expected two columns".into()));
        }
        let parsed = record[0]
            .parse::<f64>()
            .and_then(|x| record[1].parse::<f64>().map(|y| (x, y)));
        match parsed {
            Ok(pair) => pairs.push(pair),
            Err(_) if i == 0 => continue,
            Err(e) => return Err(fail(e.to_string())),
        }
    }
    if pairs.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "{} holds no numeric pairs",
            path.display()
        )));
    }
    Ok(pairs)
}

pub fn run(args: StatsArgs, format: Format) -> Result<()> {
    let agreement = args
        .bland_altman
        .as_deref()
        .map(|p| bland_altman(&read_pairs(p)?))
        .transpose()?;
    let signed_rank_p = args
        .wilcoxon
        .as_deref()
        .map(|p| wilcoxon_signed_rank(&read_pairs(p)?))
        .transpose()?;

    match format {
        Format::Json => {
            let mut report = serde_json::Map::new();
            if let Some(stats) = &agreement {
                report.insert(
                    "bland_altman".into(),
                    serde_json::to_value(stats).expect("stats serialize"),
                );
            }
            if let Some(p) = signed_rank_p {
                report.insert("wilcoxon".into(), json!({ "p_value": json_f64(p) }));
            }
            println!(
                "{}",
                serde_json::to_string_pretty(&serde_json::Value::Object(report))
                    .expect("report serializes")
            );
        }
        Format::Csv => {
            if let Some(stats) = &agreement {
                let header =
                    ["bias", "sd_diff", "loa_low", "loa_high", "p_value"].map(String::from);
                let row = vec![
                    stats.bias.to_string(),
                    stats.sd_diff.to_string(),
                    stats.loa_low.to_string(),
                    stats.loa_high.to_string(),
                    stats.p_value.to_string(),
                ];
                print!("{}", csv_table(&header, [row])?);
            }
            if let Some(p) = signed_rank_p {
                print!(
                    "{}",
                    csv_table(&["p_value".to_string()], [vec![p.to_string()]])?
                );
            }
        }
    }
    Ok(())
}
