//! Synthetic ECG/PPG recordings following the alternating rest/activity
//! session protocol, with labeled artifact injection. Gives every pipeline
//! stage a labeled ground truth at desk scale.
//!
//! Waveform template constants are configuration defaults, not contracts;
//! only the labeling and spectral invariants are load-bearing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Modality, SignalRecord};

pub const LABEL_CLEAN: u8 = 0;
pub const LABEL_MOTION: u8 = 1;
pub const LABEL_EMG: u8 = 2;
pub const LABEL_SENSOR_FAILURE: u8 = 3;

/// Alternating rest/activity session schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProtocolConfig {
    pub total_duration: f64,
    pub rest_duration: f64,
    pub activity_duration: f64,
    pub activity_sequence: Vec<u8>,
    pub sampling_rate: f64,
    pub heart_rate: f64,
    pub seed: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            total_duration: 900.0,
            rest_duration: 120.0,
            activity_duration: 60.0,
            activity_sequence: vec![LABEL_MOTION, LABEL_EMG, LABEL_SENSOR_FAILURE, LABEL_MOTION, LABEL_EMG],
            sampling_rate: 1000.0,
            heart_rate: 70.0,
            seed: 42,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sampling_rate > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sampling_rate must be positive, got {}",
                self.sampling_rate
            )));
        }
        if !(30.0..=220.0).contains(&self.heart_rate) {
            return Err(Error::InvalidArgument(format!(
                "heart_rate {} outside [30, 220]",
                self.heart_rate
            )));
        }
        let cycle = self.rest_duration + self.activity_duration;
        if !(cycle > 0.0) || !(self.total_duration > 0.0) {
            return Err(Error::InvalidArgument("durations must be positive".into()));
        }
        let slots = self.total_duration / cycle;
        if (slots - slots.round()).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "total_duration {} is not a multiple of rest+activity {}",
                self.total_duration, cycle
            )));
        }
        if self.activity_sequence.len() != slots.round() as usize {
            return Err(Error::InvalidArgument(format!(
                "activity_sequence length {} does not match {} activity slots",
                self.activity_sequence.len(),
                slots.round() as usize
            )));
        }
        if let Some(&c) = self
            .activity_sequence
            .iter()
            .find(|&&c| !(LABEL_MOTION..=LABEL_SENSOR_FAILURE).contains(&c))
        {
            return Err(Error::InvalidArgument(format!(
                "artifact class {c} outside 1..=3"
            )));
        }
        Ok(())
    }

    pub fn num_slots(&self) -> usize {
        (self.total_duration / (self.rest_duration + self.activity_duration)).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FailureMode {
    Flatline,
    Saturation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub artifact_class: u8,
    /// Artifact RMS relative to the clean RMS of the span.
    pub amplitude_ratio: f64,
    /// EMG band in Hz; lower edge must sit above 30 Hz.
    pub band: Option<(f64, f64)>,
    pub failure_mode: Option<FailureMode>,
}

impl NoiseSpec {
    pub fn motion(amplitude_ratio: f64) -> Self {
        NoiseSpec {
            artifact_class: LABEL_MOTION,
            amplitude_ratio,
            band: None,
            failure_mode: None,
        }
    }

    pub fn emg(amplitude_ratio: f64, band: (f64, f64)) -> Self {
        NoiseSpec {
            artifact_class: LABEL_EMG,
            amplitude_ratio,
            band: Some(band),
            failure_mode: None,
        }
    }

    pub fn sensor_failure(mode: FailureMode) -> Self {
        NoiseSpec {
            artifact_class: LABEL_SENSOR_FAILURE,
            amplitude_ratio: 0.0,
            band: None,
            failure_mode: Some(mode),
        }
    }

    /// Protocol defaults: motion drift at 2x clean RMS, EMG at 1x in
    /// 30-450 Hz, flatline sensor failure.
    pub fn default_for(class: u8) -> Result<Self> {
        match class {
            LABEL_MOTION => Ok(NoiseSpec::motion(2.0)),
            LABEL_EMG => Ok(NoiseSpec::emg(1.0, (30.0, 450.0))),
            LABEL_SENSOR_FAILURE => Ok(NoiseSpec::sensor_failure(FailureMode::Flatline)),
            other => Err(Error::InvalidArgument(format!("artifact class {other} outside 1..=3"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(LABEL_MOTION..=LABEL_SENSOR_FAILURE).contains(&self.artifact_class) {
            return Err(Error::InvalidArgument(format!(
                "artifact class {} outside 1..=3",
                self.artifact_class
            )));
        }
        if !(self.amplitude_ratio >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "amplitude_ratio {} must be >= 0",
                self.amplitude_ratio
            )));
        }
        if let Some((lo, hi)) = self.band {
            if lo < 30.0 || hi <= lo {
                return Err(Error::InvalidArgument(format!(
                    "EMG band [{lo}, {hi}] must sit above 30 Hz with lo < hi"
                )));
            }
        }
        if self.artifact_class == LABEL_SENSOR_FAILURE && self.failure_mode.is_none() {
            return Err(Error::InvalidArgument(
                "sensor failure requires a failure_mode".into(),
            ));
        }
        Ok(())
    }
}

fn check_gen_args(duration: f64, fs: f64, heart_rate: f64) -> Result<usize> {
    if !(duration > 0.0) || !(fs > 0.0) || !(heart_rate > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "duration ({duration}), fs ({fs}) and heart_rate ({heart_rate}) must be positive"
        )));
    }
    Ok((duration * fs).round() as usize)
}

/// Beat onset times with +-3% uniform interval jitter.
fn beat_times(duration: f64, heart_rate: f64, rng: &mut ChaCha8Rng) -> Vec<(f64, f64)> {
    let base = 60.0 / heart_rate;
    let mut times = Vec::new();
    let mut t = 0.3 * base;
    while t < duration + base {
        let interval = base * (1.0 + rng.gen_range(-0.03..0.03));
        times.push((t, interval));
        t += interval;
    }
    times
}

fn gaussian_bump(t: f64, center: f64, width: f64, amp: f64) -> f64 {
    let d = (t - center) / width;
    amp * (-0.5 * d * d).exp()
}

/// Quasi-periodic ECG: a sum-of-Gaussians PQRST template repeated at a
/// jittered beat interval, plus a small sensor-noise floor. All labels 0.
pub fn generate_clean_ecg(duration: f64, fs: f64, heart_rate: f64, seed: u64) -> Result<SignalRecord> {
    let n = check_gen_args(duration, fs, heart_rate)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = vec![0.0f64; n];
    // (offset, width, amplitude) as fractions of the beat interval
    const PQRST: [(f64, f64, f64); 5] = [
        (-0.20, 0.040, 0.15),  // P
        (-0.050, 0.020, -0.10), // Q
        (0.0, 0.028, 0.80),    // R
        (0.050, 0.022, -0.15), // S
        (0.30, 0.070, 0.30),   // T
    ];
    for (t_r, interval) in beat_times(duration, heart_rate, &mut rng) {
        let lo = (((t_r - 0.35 * interval) * fs).floor().max(0.0)) as usize;
        let hi = ((((t_r + 0.55 * interval) * fs).ceil()) as usize).min(n);
        for i in lo..hi {
            let t = i as f64 / fs;
            let mut v = 0.0;
            for &(off, width, amp) in &PQRST {
                v += gaussian_bump(t, t_r + off * interval, width * interval, amp);
            }
            samples[i] += v;
        }
    }
    add_baseline_wander(&mut samples, fs, WANDER_RATIO_ECG, &mut rng);
    let noise = Normal::new(0.0, NOISE_FLOOR_ECG).unwrap();
    for s in &mut samples {
        *s += noise.sample(&mut rng);
    }
    SignalRecord::new(samples, fs, vec![LABEL_CLEAN; n], Modality::Ecg, format!("synth-ecg-{seed}"))
}

/// Smooth pulse waveform: asymmetric systolic peak with a dicrotic bump
/// plus a fundamental component at the beat rate. All labels 0.
pub fn generate_clean_ppg(duration: f64, fs: f64, heart_rate: f64, seed: u64) -> Result<SignalRecord> {
    let n = check_gen_args(duration, fs, heart_rate)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = vec![0.0f64; n];
    for (t_on, interval) in beat_times(duration, heart_rate, &mut rng) {
        let start = t_on - 0.3 * interval;
        let lo = ((start * fs).floor().max(0.0)) as usize;
        let hi = (((start + interval) * fs).ceil() as usize).min(n);
        for i in lo..hi {
            let u = (i as f64 / fs - start) / interval; // beat phase in [0,1)
            let v = gaussian_bump(u, 0.20, 0.10, 1.0)
                + gaussian_bump(u, 0.47, 0.13, 0.35)
                + 0.25 * (2.0 * std::f64::consts::PI * u).sin();
            samples[i] += v;
        }
    }
    add_baseline_wander(&mut samples, fs, WANDER_RATIO_PPG, &mut rng);
    let noise = Normal::new(0.0, NOISE_FLOOR_PPG).unwrap();
    for s in &mut samples {
        *s += noise.sample(&mut rng);
    }
    SignalRecord::new(samples, fs, vec![LABEL_CLEAN; n], Modality::Ppg, format!("synth-ppg-{seed}"))
}

fn span_std(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    (x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

/// Center a noise realization and scale it to the target RMS.
fn center_and_scale(noise: &mut [f64], target_rms: f64) {
    let std = span_std(noise);
    let mean = noise.iter().sum::<f64>() / noise.len() as f64;
    if std > 0.0 {
        let g = target_rms / std;
        for v in noise.iter_mut() {
            *v = (*v - mean) * g;
        }
    } else {
        noise.fill(0.0);
    }
}

/// Low-frequency random-walk drift: white noise, cumulative sum, one-pole
/// low-pass at `fc` (well below 1 Hz).
fn slow_drift(len: usize, fs: f64, fc: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut walk = Vec::with_capacity(len);
    let mut acc = 0.0;
    for _ in 0..len {
        acc += normal.sample(rng);
        walk.push(acc);
    }
    let alpha = (-2.0 * std::f64::consts::PI * fc / fs).exp();
    let mut y = 0.0;
    for v in walk.iter_mut() {
        y = alpha * y + (1.0 - alpha) * *v;
        *v = y;
    }
    walk
}

/// Motion drift: a low-passed random walk band-limited below 1 Hz, with
/// the sub-[`MOTION_HP_HZ`] trend removed so an episode meanders about
/// the baseline instead of walking away from it, the way a limb movement
/// disturbs and then releases the sensor.
fn motion_drift(len: usize, fs: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut d = slow_drift(len, fs, MOTION_FC_HZ, rng);
    let alpha = (-2.0 * std::f64::consts::PI * MOTION_HP_HZ / fs).exp();
    let mut y = d[0];
    for v in d.iter_mut() {
        y = alpha * y + (1.0 - alpha) * *v;
        *v -= y;
    }
    d
}

/// Corner frequency of the clean-signal baseline wander. Deliberately very
/// slow (sub-window): wander then shows up mostly as a per-window baseline
/// offset rather than as in-window power.
const WANDER_FC_HZ: f64 = 0.01;
/// Baseline-wander amplitude as a fraction of the waveform's span std.
const WANDER_RATIO_ECG: f64 = 0.8;
const WANDER_RATIO_PPG: f64 = 0.8;
/// Sensor noise-floor std (raw amplitude units).
const NOISE_FLOOR_ECG: f64 = 0.2;
const NOISE_FLOOR_PPG: f64 = 0.005;
/// Motion drift band: one-pole low-pass corner (keeps the drift < 1 Hz).
const MOTION_FC_HZ: f64 = 0.4;
/// Motion drift trend-removal corner (see [`motion_drift`]).
const MOTION_HP_HZ: f64 = 0.3;
/// Corner frequency of the slow EMG burst envelope.
const EMG_ENV_FC_HZ: f64 = 0.02;
/// Exponent sharpening the EMG envelope: higher values concentrate the
/// muscle noise into sparser, stronger bursts.
const EMG_ENV_POW: f64 = 4.0;

/// Respiratory-band baseline wander mixed into the clean waveforms.
fn add_baseline_wander(samples: &mut [f64], fs: f64, ratio: f64, rng: &mut ChaCha8Rng) {
    let target = ratio * span_std(samples);
    let mut drift = slow_drift(samples.len(), fs, WANDER_FC_HZ, rng);
    center_and_scale(&mut drift, target);
    for (s, d) in samples.iter_mut().zip(&drift) {
        *s += d;
    }
}

/// Band-limited white noise via an FFT brick-wall filter.
fn band_noise(len: usize, fs: f64, band: (f64, f64), rng: &mut ChaCha8Rng) -> Vec<f64> {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut buf: Vec<Complex<f64>> = (0..len)
        .map(|_| Complex::new(normal.sample(rng), 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    let df = fs / len as f64;
    let (lo, hi) = band;
    let hi = hi.min(fs / 2.0);
    for (k, c) in buf.iter_mut().enumerate() {
        let f = if k <= len / 2 { k as f64 * df } else { (len - k) as f64 * df };
        if f < lo || f > hi {
            *c = Complex::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    buf.into_iter().map(|c| c.re / len as f64).collect()
}

/// Overwrite `span` seconds of the record with the requested artifact and
/// set its labels. Rejects spans that overlap an earlier artifact.
pub fn inject_artifact(
    mut record: SignalRecord,
    span: (f64, f64),
    spec: &NoiseSpec,
    seed: u64,
) -> Result<SignalRecord> {
    spec.validate()?;
    let (start_s, end_s) = span;
    let fs = record.fs;
    let i0 = (start_s * fs).round() as isize;
    let i1 = (end_s * fs).round() as isize;
    if i0 < 0 || i1 <= i0 || i1 as usize > record.len() {
        return Err(Error::Range(format!(
            "span [{start_s}, {end_s})s outside record of {}s",
            record.duration_s()
        )));
    }
    let (i0, i1) = (i0 as usize, i1 as usize);
    if record.labels[i0..i1].iter().any(|&l| l != LABEL_CLEAN) {
        return Err(Error::Range(format!(
            "span [{start_s}, {end_s})s overlaps a previously injected artifact"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clean_rms = span_std(&record.samples[i0..i1]);
    match spec.artifact_class {
        LABEL_MOTION => {
            let mut drift = motion_drift(i1 - i0, fs, &mut rng);
            center_and_scale(&mut drift, spec.amplitude_ratio * clean_rms);
            for (s, d) in record.samples[i0..i1].iter_mut().zip(&drift) {
                *s += d;
            }
        }
        LABEL_EMG => {
            let band = spec.band.unwrap_or((30.0, fs / 2.0));
            let mut noise = band_noise(i1 - i0, fs, band, &mut rng);
            // Muscle noise arrives in bursts: modulate by a slow squared-
            // drift envelope, then scale the whole span to the target RMS,
            // so span-level power honors amplitude_ratio while window-level
            // power waxes and wanes.
            let mut env = slow_drift(i1 - i0, fs, EMG_ENV_FC_HZ, &mut rng);
            let env_calib = slow_drift(i1 - i0, fs, EMG_ENV_FC_HZ, &mut rng);
            center_and_scale(&mut env, 1.0);
            let p = EMG_ENV_POW;
            for (v, e) in noise.iter_mut().zip(&env) {
                *v *= e.abs().powf(p);
            }
            // Gauge the modulated noise against an independent calibration
            // envelope so slot-level burst intensity varies around the
            // amplitude_ratio level instead of landing exactly on it.
            let noise_std = span_std(&noise).max(f64::MIN_POSITIVE);
            let env_factor = {
                let mut c = env_calib;
                center_and_scale(&mut c, 1.0);
                let calib_burst: f64 =
                    c.iter().map(|e| e.abs().powf(2.0 * p)).sum::<f64>() / c.len() as f64;
                let real_burst: f64 =
                    env.iter().map(|e| e.abs().powf(2.0 * p)).sum::<f64>() / env.len() as f64;
                (real_burst / calib_burst.max(f64::MIN_POSITIVE)).sqrt()
            };
            let g = spec.amplitude_ratio * clean_rms * env_factor / noise_std;
            for v in noise.iter_mut() {
                *v *= g;
            }
            for (s, d) in record.samples[i0..i1].iter_mut().zip(&noise) {
                *s += d;
            }
        }
        LABEL_SENSOR_FAILURE => match spec.failure_mode.unwrap_or(FailureMode::Flatline) {
            FailureMode::Flatline => {
                let hold = record.samples[i0.saturating_sub(1)];
                record.samples[i0..i1].fill(hold);
            }
            FailureMode::Saturation => {
                let rail = record
                    .samples
                    .iter()
                    .fold(0.0f64, |acc, &v| acc.max(v.abs()));
                record.samples[i0..i1].fill(rail);
            }
        },
        _ => unreachable!("validated above"),
    }
    record.labels[i0..i1].fill(spec.artifact_class);
    Ok(record)
}

/// Full session: clean base waveform with one artifact injected per
/// activity slot, classes taken from `activity_sequence` in order.
pub fn generate_protocol_recording(config: &ProtocolConfig, modality: Modality) -> Result<SignalRecord> {
    generate_protocol_recording_with(config, modality, NoiseSpec::default_for)
}

/// Like [`generate_protocol_recording`] but with caller-chosen noise specs
/// per artifact class.
pub fn generate_protocol_recording_with(
    config: &ProtocolConfig,
    modality: Modality,
    spec_for: impl Fn(u8) -> Result<NoiseSpec>,
) -> Result<SignalRecord> {
    config.validate()?;
    let mut record = match modality {
        Modality::Ecg => generate_clean_ecg(
            config.total_duration,
            config.sampling_rate,
            config.heart_rate,
            config.seed,
        )?,
        Modality::Ppg => generate_clean_ppg(
            config.total_duration,
            config.sampling_rate,
            config.heart_rate,
            config.seed,
        )?,
    };
    let cycle = config.rest_duration + config.activity_duration;
    for (slot, &class) in config.activity_sequence.iter().enumerate() {
        let start = slot as f64 * cycle + config.rest_duration;
        let spec = spec_for(class)?;
        record = inject_artifact(
            record,
            (start, start + config.activity_duration),
            &spec,
            config.seed.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_mul(slot as u64 + 1),
        )?;
    }
    Ok(record)
}
