//! Per-window statistical features and feature-matrix standardization.
//!
//! Nine features per window: mean, variance, median, skewness, kurtosis,
//! zero-crossing rate, RMS, Welch total power and power above 30 Hz.
//! Kurtosis is excess (a normal signal scores 0). RMS is stored rather
//! than energy; energy = n * rms^2 for a window of n samples.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Band edge separating the high-frequency noise band (EMG) from
/// physiological content.
pub const HIGHBAND_EDGE_HZ: f64 = 30.0;

/// Welch segment length in seconds (0.25 Hz resolution at fs 1000).
pub const WELCH_SEGMENT_S: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub mean: f64,
    pub variance: f64,
    pub median: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub zcr: f64,
    pub rms: f64,
    pub total_power: f64,
    pub highband_power: f64,
}

impl FeatureVector {
    pub const DIM: usize = 9;

    pub const NAMES: [&'static str; Self::DIM] = [
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

    pub fn to_array(&self) -> [f64; Self::DIM] {
        [
            self.mean,
            self.variance,
            self.median,
            self.skewness,
            self.kurtosis,
            self.zcr,
            self.rms,
            self.total_power,
            self.highband_power,
        ]
    }

    pub fn from_array(a: &[f64]) -> Result<Self> {
        if a.len() != Self::DIM {
            return Err(Error::DimensionMismatch {
                expected: Self::DIM,
                got: a.len(),
            });
        }
        Ok(FeatureVector {
            mean: a[0],
            variance: a[1],
            median: a[2],
            skewness: a[3],
            kurtosis: a[4],
            zcr: a[5],
            rms: a[6],
            total_power: a[7],
            highband_power: a[8],
        })
    }
}

pub fn extract_features(samples: &[f64], fs: f64) -> Result<FeatureVector> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("empty window".into()));
    }
    if !(fs > 0.0) {
        return Err(Error::InvalidArgument(format!("fs must be positive, got {fs}")));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("window contains non-finite samples".into()));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for &x in samples {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let variance = m2;
    let (skewness, kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };

    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    };

    // strict sign changes of the mean-centered signal
    let mut zcr = 0.0;
    for pair in samples.windows(2) {
        if (pair[0] - mean) * (pair[1] - mean) < 0.0 {
            zcr += 1.0;
        }
    }

    let rms = (samples.iter().map(|x| x * x).sum::<f64>() / n).sqrt();

    let psd = welch_psd(samples, fs, None);
    let df = psd.freq_step;
    let total_power: f64 = psd.power.iter().sum::<f64>() * df;
    let highband_power: f64 = psd
        .power
        .iter()
        .enumerate()
        .filter(|(i, _)| *i as f64 * df > HIGHBAND_EDGE_HZ)
        .map(|(_, p)| p)
        .sum::<f64>()
        * df;

    Ok(FeatureVector {
        mean,
        variance,
        median,
        skewness,
        kurtosis,
        zcr,
        rms,
        total_power,
        highband_power,
    })
}

/// One-sided Welch power spectral density estimate.
#[derive(Debug, Clone)]
pub struct Psd {
    /// Power density per bin, bin i at frequency `i * freq_step`.
    pub power: Vec<f64>,
    pub freq_step: f64,
    pub segments_averaged: usize,
}

/// Welch's method: Hann-windowed segments (default 4 s, clamped to the
/// signal length), 50% overlap, per-segment mean removal, mean averaging
/// of one-sided periodograms.
pub fn welch_psd(samples: &[f64], fs: f64, segment_len: Option<usize>) -> Psd {
    let n = samples.len();
    let nseg = segment_len
        .unwrap_or((WELCH_SEGMENT_S * fs).round() as usize)
        .clamp(2, n.max(2))
        .min(n);
    let step = (nseg / 2).max(1);
    let hann: Vec<f64> = (0..nseg)
        .map(|i| {
            let x = std::f64::consts::PI * i as f64 / nseg as f64;
            x.sin() * x.sin()
        })
        .collect();
    let window_power: f64 = hann.iter().map(|w| w * w).sum();

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(nseg);
    let n_bins = nseg / 2 + 1;
    let mut accum = vec![0.0f64; n_bins];
    let mut count = 0usize;
    let mut buf = vec![Complex::new(0.0, 0.0); nseg];
    let mut start = 0usize;
    while start + nseg <= n {
        let seg = &samples[start..start + nseg];
        let seg_mean = seg.iter().sum::<f64>() / nseg as f64;
        for (i, &x) in seg.iter().enumerate() {
            buf[i] = Complex::new((x - seg_mean) * hann[i], 0.0);
        }
        fft.process(&mut buf);
        for (k, acc) in accum.iter_mut().enumerate() {
            let mag2 = buf[k].norm_sqr();
            // one-sided: double everything except DC and Nyquist
            let scale = if k == 0 || (nseg % 2 == 0 && k == nseg / 2) {
                1.0
            } else {
                2.0
            };
            *acc += scale * mag2 / (fs * window_power);
        }
        count += 1;
        start += step;
    }
    if count == 0 {
        // signal shorter than one segment; cannot happen after the clamp
        return Psd {
            power: vec![0.0; n_bins],
            freq_step: fs / nseg as f64,
            segments_averaged: 0,
        };
    }
    for p in &mut accum {
        *p /= count as f64;
    }
    Psd {
        power: accum,
        freq_step: fs / nseg as f64,
        segments_averaged: count,
    }
}

/// Per-column mean and population standard deviation fitted on a feature
/// matrix. Columns with zero spread transform to exactly 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

pub fn fit_standardizer(x: &[Vec<f64>]) -> Result<Standardizer> {
    if x.is_empty() {
        return Err(Error::InvalidArgument("empty feature matrix".into()));
    }
    let d = x[0].len();
    let n = x.len() as f64;
    let mut means = vec![0.0; d];
    for row in x {
        if row.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: row.len(),
            });
        }
        for (m, &v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= n;
    }
    let mut stds = vec![0.0; d];
    for row in x {
        for ((s, &v), &m) in stds.iter_mut().zip(row).zip(&means) {
            let dlt = v - m;
            *s += dlt * dlt;
        }
    }
    for s in &mut stds {
        *s = (*s / n).sqrt();
    }
    Ok(Standardizer { means, stds })
}

pub fn apply_standardizer(s: &Standardizer, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let d = s.means.len();
    x.iter()
        .map(|row| {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: row.len(),
                });
            }
            Ok(row
                .iter()
                .enumerate()
                .map(|(j, &v)| {
                    if s.stds[j] > 0.0 {
                        (v - s.means[j]) / s.stds[j]
                    } else {
                        0.0
                    }
                })
                .collect())
        })
        .collect()
}
