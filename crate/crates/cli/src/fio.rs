//! File I/O helpers: atomic whole-file writes and the feature-matrix CSV
//! schema shared by the subcommands.

use std::fs;
use std::path::Path;

use bioclust::features::FeatureVector;

use crate::error::{CliError, CliResult};

/// Write-temp-then-rename so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let stage = "write-output";
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir).map_err(|e| CliError::internal(stage, e))?;
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name().map(|n| n.to_string_lossy()).unwrap_or_default()
    ));
    fs::write(&tmp, bytes).map_err(|e| CliError::internal(stage, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::internal(stage, e))?;
    Ok(())
}

pub const FEATURE_CSV_HEADER: [&str; 11] = [
    "window_start_s",
    "label",
    "mean",
    "variance",
    "median",
    "skewness",
    "kurtosis",
    "zcr",
    "rms",
    "total_power",
    "highband_power",
];

pub fn features_csv(starts_s: &[f64], labels: &[u8], features: &[FeatureVector]) -> String {
    let mut out = FEATURE_CSV_HEADER.join(",");
    out.push('\n');
    for ((&start, &label), fv) in starts_s.iter().zip(labels).zip(features) {
        let a = fv.to_array();
        out.push_str(&format!("{start},{label}"));
        for v in a {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

pub struct FeatureTable {
    pub starts_s: Vec<f64>,
    pub labels: Vec<u8>,
    pub matrix: Vec<Vec<f64>>,
}

pub fn read_features_csv(path: &Path) -> CliResult<FeatureTable> {
    let stage = "read-features";
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::data(stage, e))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::data(stage, e))?
        .clone();
    for required in FEATURE_CSV_HEADER {
        if !headers.iter().any(|h| h == required) {
            return Err(CliError::data(
                stage,
                format!("missing column `{required}` in {}", path.display()),
            ));
        }
    }
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let start_col = col("window_start_s");
    let label_col = col("label");
    let feature_cols: Vec<usize> = FEATURE_CSV_HEADER[2..].iter().map(|n| col(n)).collect();

    let mut table = FeatureTable {
        starts_s: Vec::new(),
        labels: Vec::new(),
        matrix: Vec::new(),
    };
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| CliError::data(stage, format!("row {row}: {e}")))?;
        let parse = |c: usize| -> CliResult<f64> {
            rec.get(c)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| CliError::data(stage, format!("row {row}: bad numeric field")))
        };
        table.starts_s.push(parse(start_col)?);
        let label = parse(label_col)? as i64;
        if !(0..4).contains(&label) {
            return Err(CliError::data(stage, format!("row {row}: label {label} outside 0..=3")));
        }
        table.labels.push(label as u8);
        let feats: CliResult<Vec<f64>> = feature_cols.iter().map(|&c| parse(c)).collect();
        table.matrix.push(feats?);
    }
    if table.matrix.is_empty() {
        return Err(CliError::data(
            stage,
            format!("{} contains no feature rows", path.display()),
        ));
    }
    Ok(table)
}
