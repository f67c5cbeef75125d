//! Loading, validation and cleaning of labeled biosignal recordings.
//!
//! CSV schema (UTF-8, header row required): `sample_index` (integer,
//! monotone from 0), `value` (decimal), `label` (integer 0-3), optional
//! `timestamp_s` (decimal seconds). The sampling rate is supplied
//! out-of-band. One file per channel per session.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const NUM_CLASSES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Ecg,
    Ppg,
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modality::Ecg => write!(f, "ecg"),
            Modality::Ppg => write!(f, "ppg"),
        }
    }
}

impl std::str::FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ecg" => Ok(Modality::Ecg),
            "ppg" => Ok(Modality::Ppg),
            other => Err(Error::InvalidArgument(format!("unknown modality `{other}`"))),
        }
    }
}

/// A uniformly sampled single-channel series with per-sample ground-truth
/// labels (0 clean, 1 motion, 2 EMG, 3 sensor failure).
#[derive(Debug, Clone, PartialEq)]
pub struct SignalRecord {
    pub samples: Vec<f64>,
    pub fs: f64,
    pub labels: Vec<u8>,
    pub modality: Modality,
    pub source_id: String,
    /// False where a sample must not contribute to any window (non-finite
    /// values, timestamp discontinuities).
    pub valid_mask: Vec<bool>,
}

impl SignalRecord {
    pub fn new(
        samples: Vec<f64>,
        fs: f64,
        labels: Vec<u8>,
        modality: Modality,
        source_id: impl Into<String>,
    ) -> Result<Self> {
        let n = samples.len();
        if n == 0 {
            return Err(Error::EmptyRecord("record has no samples".into()));
        }
        if labels.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: labels.len(),
            });
        }
        if !(fs > 0.0) {
            return Err(Error::InvalidArgument(format!("fs must be positive, got {fs}")));
        }
        if let Some(bad) = labels.iter().find(|&&l| l as usize >= NUM_CLASSES) {
            return Err(Error::InvalidArgument(format!("label {bad} outside 0..=3")));
        }
        Ok(SignalRecord {
            valid_mask: vec![true; n],
            samples,
            fs,
            labels,
            modality,
            source_id: source_id.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.fs
    }
}

/// Load a recording from the CSV schema above. Non-finite values (empty
/// cells, `NaN`) are kept in place for [`drop_invalid`] to mask; anything
/// else malformed is a parse error naming the 1-based data row.
pub fn load_recording(path: impl AsRef<Path>, fs: f64, modality: Modality) -> Result<SignalRecord> {
    let path = path.as_ref();
    if !(fs > 0.0) {
        return Err(Error::InvalidArgument(format!("fs must be positive, got {fs}")));
    }
    let mut reader = csv::Reader::from_path(path).map_err(io_from_csv)?;
    let headers = reader.headers().map_err(|e| Error::Parse {
        row: 0,
        msg: e.to_string(),
    })?;
    let col = |name: &str| headers.iter().position(|h| h == name);
    let idx_col = col("sample_index").ok_or_else(|| Error::Parse {
        row: 0,
        msg: "missing column `sample_index`".into(),
    })?;
    let val_col = col("value").ok_or_else(|| Error::Parse {
        row: 0,
        msg: "missing column `value`".into(),
    })?;
    let lab_col = col("label").ok_or_else(|| Error::Parse {
        row: 0,
        msg: "missing column `label`".into(),
    })?;
    let ts_col = col("timestamp_s");

    let mut samples = Vec::new();
    let mut labels = Vec::new();
    let mut mask = Vec::new();
    let mut prev_ts: Option<f64> = None;
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::Parse {
            row,
            msg: e.to_string(),
        })?;
        let field = |c: usize| {
            rec.get(c).ok_or_else(|| Error::Parse {
                row,
                msg: format!("missing field in column {c}"),
            })
        };
        let idx: usize = field(idx_col)?.trim().parse().map_err(|_| Error::Parse {
            row,
            msg: format!("non-integer sample_index `{}`", rec.get(idx_col).unwrap_or("")),
        })?;
        if idx != i {
            return Err(Error::Parse {
                row,
                msg: format!("sample_index {idx} breaks monotone sequence (expected {i})"),
            });
        }
        let raw_val = field(val_col)?.trim();
        let value: f64 = if raw_val.is_empty() {
            f64::NAN
        } else {
            raw_val.parse().map_err(|_| Error::Parse {
                row,
                msg: format!("non-numeric value `{raw_val}`"),
            })?
        };
        let raw_lab = field(lab_col)?.trim();
        let label: u8 = raw_lab.parse().map_err(|_| Error::Parse {
            row,
            msg: format!("non-integer label `{raw_lab}`"),
        })?;
        if label as usize >= NUM_CLASSES {
            return Err(Error::Parse {
                row,
                msg: format!("label {label} outside 0..=3"),
            });
        }
        let mut valid = true;
        if let Some(c) = ts_col {
            let raw_ts = field(c)?.trim();
            if !raw_ts.is_empty() {
                let ts: f64 = raw_ts.parse().map_err(|_| Error::Parse {
                    row,
                    msg: format!("non-numeric timestamp_s `{raw_ts}`"),
                })?;
                if let Some(prev) = prev_ts {
                    let dt = ts - prev;
                    let nominal = 1.0 / fs;
                    if dt < 0.9 * nominal || dt > 1.1 * nominal {
                        // timestamp gap: both boundary samples are suspect
                        valid = false;
                        if let Some(m) = mask.last_mut() {
                            *m = false;
                        }
                    }
                }
                prev_ts = Some(ts);
            }
        }
        samples.push(value);
        labels.push(label);
        mask.push(valid);
    }
    if samples.is_empty() {
        return Err(Error::EmptyRecord(format!("{} contains no data rows", path.display())));
    }
    let mut record = SignalRecord::new(
        samples,
        fs,
        labels,
        modality,
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string()),
    )?;
    record.valid_mask = mask;
    Ok(record)
}

/// Write a recording in the CSV schema read by [`load_recording`].
/// Values use the shortest round-trip float representation so a
/// write-then-load cycle is bit-exact.
pub fn write_recording(record: &SignalRecord, path: impl AsRef<Path>) -> Result<()> {
    write_recording_to(record, std::fs::File::create(path.as_ref())?)
}

/// Stream the CSV form of a recording to any writer.
pub fn write_recording_to(record: &SignalRecord, out: impl std::io::Write) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer
        .write_record(["sample_index", "value", "label"])
        .map_err(io_from_csv)?;
    for (i, (&v, &l)) in record.samples.iter().zip(&record.labels).enumerate() {
        writer
            .write_record([i.to_string(), format!("{v}"), l.to_string()])
            .map_err(io_from_csv)?;
    }
    writer.flush()?;
    Ok(())
}

fn io_from_csv(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Mark non-finite samples invalid. No finite sample value is altered;
/// downstream windowing excludes any window overlapping a masked sample.
pub fn drop_invalid(mut record: SignalRecord) -> Result<SignalRecord> {
    for (i, &v) in record.samples.iter().enumerate() {
        if !v.is_finite() {
            record.valid_mask[i] = false;
        }
    }
    if record.valid_mask.iter().all(|&m| !m) {
        return Err(Error::EmptyRecord(format!(
            "{}: no valid samples remain",
            record.source_id
        )));
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn tmp_csv(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_well_formed_three_rows() {
        let f = tmp_csv("sample_index,value,label\n0,0.5,0\n1,-0.25,1\n2,1.0,3\n");
        let rec = load_recording(f.path(), 1000.0, Modality::Ecg).unwrap();
        assert_eq!(rec.len(), 3);
        assert_eq!(rec.samples, vec![0.5, -0.25, 1.0]);
        assert_eq!(rec.labels, vec![0, 1, 3]);
        assert!(rec.valid_mask.iter().all(|&m| m));
    }

    #[test]
    fn label_out_of_range_cites_row() {
        let f = tmp_csv("sample_index,value,label\n0,0.5,0\n1,0.5,7\n");
        let err = load_recording(f.path(), 1000.0, Modality::Ecg).unwrap_err();
        match err {
            Error::Parse { row, msg } => {
                assert_eq!(row, 2);
                assert!(msg.contains('7'), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_column_rejected() {
        let f = tmp_csv("sample_index,value\n0,0.5\n");
        let err = load_recording(f.path(), 1000.0, Modality::Ecg).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 0, .. }));
    }

    #[test]
    fn non_monotone_index_rejected() {
        let f = tmp_csv("sample_index,value,label\n0,0.5,0\n2,0.5,0\n");
        let err = load_recording(f.path(), 1000.0, Modality::Ecg).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 2, .. }));
    }

    #[test]
    fn timestamp_gap_marks_boundary_invalid() {
        let f = tmp_csv(
            "sample_index,value,label,timestamp_s\n\
             0,0.1,0,0.000\n1,0.2,0,0.001\n2,0.3,0,0.500\n3,0.4,0,0.501\n",
        );
        let rec = load_recording(f.path(), 1000.0, Modality::Ecg).unwrap();
        assert_eq!(rec.valid_mask, vec![true, false, false, true]);
    }

    #[test]
    fn drop_invalid_identity_on_clean_record() {
        let rec = SignalRecord::new(vec![1.0, 2.0, 3.0], 10.0, vec![0, 0, 0], Modality::Ppg, "t")
            .unwrap();
        let out = drop_invalid(rec.clone()).unwrap();
        assert_eq!(out, rec);
    }

    #[test]
    fn drop_invalid_masks_single_nan() {
        let mut samples = vec![0.0; 10];
        samples[5] = f64::NAN;
        let rec = SignalRecord::new(samples, 10.0, vec![0; 10], Modality::Ecg, "t").unwrap();
        let out = drop_invalid(rec).unwrap();
        for (i, &m) in out.valid_mask.iter().enumerate() {
            assert_eq!(m, i != 5);
        }
    }

    #[test]
    fn drop_invalid_all_nan_is_empty_record() {
        let rec =
            SignalRecord::new(vec![f64::NAN; 4], 10.0, vec![0; 4], Modality::Ecg, "t").unwrap();
        assert!(matches!(drop_invalid(rec), Err(Error::EmptyRecord(_))));
    }

    #[test]
    fn drop_invalid_keeps_finite_values_untouched() {
        let mut samples = vec![0.25, f64::INFINITY, -1.5];
        let rec =
            SignalRecord::new(samples.clone(), 10.0, vec![0; 3], Modality::Ecg, "t").unwrap();
        let out = drop_invalid(rec).unwrap();
        samples[1] = out.samples[1]; // only the masked slot may differ
        assert_eq!(out.samples, samples);
        assert_eq!(out.valid_mask, vec![true, false, true]);
    }
}
