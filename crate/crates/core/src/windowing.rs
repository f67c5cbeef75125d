//! Fixed-length sliding windows over a recording, each carrying the
//! majority ground-truth label of its samples.

use crate::error::{Error, Result};
use crate::ingest::{SignalRecord, NUM_CLASSES};

pub const DEFAULT_WINDOW_S: f64 = 120.0;
pub const DEFAULT_STRIDE_S: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    pub start: usize,
    pub length: usize,
    pub label: u8,
    pub parent: String,
}

impl Window {
    pub fn start_s(&self, fs: f64) -> f64 {
        self.start as f64 / fs
    }

    pub fn samples<'a>(&self, record: &'a SignalRecord) -> &'a [f64] {
        &record.samples[self.start..self.start + self.length]
    }
}

/// Windows at starts 0, stride, 2*stride, ...; the trailing partial window
/// is discarded and windows overlapping any invalid-mask sample are
/// excluded. A window longer than the record yields an empty list.
pub fn slide_windows(
    record: &SignalRecord,
    window_seconds: f64,
    stride_seconds: f64,
) -> Result<Vec<Window>> {
    if !(stride_seconds > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "stride must be positive, got {stride_seconds}"
        )));
    }
    if !(window_seconds > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "window length must be positive, got {window_seconds}"
        )));
    }
    let n = record.len();
    let length = (window_seconds * record.fs).round() as usize;
    let stride = ((stride_seconds * record.fs).round() as usize).max(1);
    if length == 0 {
        return Err(Error::InvalidArgument(
            "window rounds to zero samples".into(),
        ));
    }
    if length > n {
        log::warn!(
            "{}: window of {length} samples exceeds record length {n}; no windows produced",
            record.source_id
        );
        return Ok(Vec::new());
    }
    let mut windows = Vec::new();
    let mut start = 0usize;
    while start + length <= n {
        if record.valid_mask[start..start + length].iter().all(|&m| m) {
            let mut w = Window {
                start,
                length,
                label: 0,
                parent: record.source_id.clone(),
            };
            w.label = assign_window_label(record, &w)?;
            windows.push(w);
        }
        start += stride;
    }
    Ok(windows)
}

/// Modal per-sample label within the window; ties break toward the larger
/// label so noise wins over clean.
pub fn assign_window_label(record: &SignalRecord, window: &Window) -> Result<u8> {
    if window.start + window.length > record.len() {
        return Err(Error::Range(format!(
            "window [{}, {}) exceeds record length {}",
            window.start,
            window.start + window.length,
            record.len()
        )));
    }
    let mut counts = [0usize; NUM_CLASSES];
    for &l in &record.labels[window.start..window.start + window.length] {
        counts[l as usize] += 1;
    }
    let mut best = 0usize;
    for c in 1..NUM_CLASSES {
        if counts[c] >= counts[best] {
            best = c;
        }
    }
    Ok(best as u8)
}
