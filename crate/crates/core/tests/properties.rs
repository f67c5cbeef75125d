//! Property suites for the cross-cutting invariants: windowing bounds,
//! feature shift/scale behavior, clustering monotonicity, PCA structure,
//! evaluation identities, and CSV round-trips.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bioclust::clustering::{agglomerative_fit, kmeans_fit, kmeans_fit_with, KMeansParams};
use bioclust::evaluation::{binary_collapse, class_report, confusion};
use bioclust::features::extract_features;
use bioclust::ingest::{drop_invalid, load_recording, write_recording, Modality, SignalRecord};
use bioclust::pca::pca_fit;
use bioclust::synthgen::{generate_protocol_recording, ProtocolConfig};
use bioclust::windowing::slide_windows;

fn record_with(n: usize, fs: f64) -> SignalRecord {
    let samples = (0..n).map(|i| (i as f64 * 0.1).sin()).collect();
    SignalRecord::new(samples, fs, vec![0; n], Modality::Ecg, "prop").unwrap()
}

proptest! {
    #[test]
    fn window_bounds_and_count(n in 10usize..5000, len in 1usize..600, stride in 1usize..400) {
        let fs = 10.0;
        let rec = record_with(n, fs);
        let ws = slide_windows(&rec, len as f64 / fs, stride as f64 / fs).unwrap();
        if len <= n {
            prop_assert_eq!(ws.len(), (n - len) / stride + 1);
        } else {
            prop_assert!(ws.is_empty());
        }
        for w in &ws {
            prop_assert!(w.start + w.length <= n);
            prop_assert_eq!(w.length, len);
        }
    }

    #[test]
    fn feature_shift_invariance(base in proptest::collection::vec(-10.0f64..10.0, 16..200), c in -5.0f64..5.0) {
        let fs = 100.0;
        let a = extract_features(&base, fs).unwrap();
        let shifted: Vec<f64> = base.iter().map(|v| v + c).collect();
        let b = extract_features(&shifted, fs).unwrap();
        let tol = 1e-9 * (1.0 + a.variance.abs());
        prop_assert!((b.mean - (a.mean + c)).abs() < 1e-9);
        prop_assert!((b.median - (a.median + c)).abs() < 1e-9);
        prop_assert!((b.variance - a.variance).abs() < tol);
        prop_assert!((b.skewness - a.skewness).abs() < 1e-6);
        prop_assert!((b.kurtosis - a.kurtosis).abs() < 1e-6);
        prop_assert_eq!(b.zcr, a.zcr);
    }

    #[test]
    fn feature_scale_covariance(base in proptest::collection::vec(-10.0f64..10.0, 16..200), a in 0.1f64..8.0) {
        let fs = 100.0;
        let f0 = extract_features(&base, fs).unwrap();
        let scaled: Vec<f64> = base.iter().map(|v| v * a).collect();
        let f1 = extract_features(&scaled, fs).unwrap();
        let a2 = a * a;
        let rel = |x: f64, y: f64| (x - y).abs() / (1.0 + y.abs());
        prop_assert!(rel(f1.variance, a2 * f0.variance) < 1e-9);
        prop_assert!(rel(f1.total_power, a2 * f0.total_power) < 1e-9);
        prop_assert!(rel(f1.highband_power, a2 * f0.highband_power) < 1e-9);
        prop_assert!((f1.skewness - f0.skewness).abs() < 1e-6);
        prop_assert!((f1.kurtosis - f0.kurtosis).abs() < 1e-6);
        prop_assert_eq!(f1.zcr, f0.zcr);
    }

    #[test]
    fn highband_never_exceeds_total(samples in proptest::collection::vec(-5.0f64..5.0, 8..400)) {
        let fv = extract_features(&samples, 200.0).unwrap();
        prop_assert!(fv.highband_power <= fv.total_power * (1.0 + 1e-12));
        prop_assert!(fv.highband_power >= 0.0);
    }

    #[test]
    fn kmeans_restart_inertia_monotone(seed in 0u64..5000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(8..60);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)])
            .collect();
        let k = rng.gen_range(2..5.min(n));
        let model = kmeans_fit_with(&x, k, seed, &KMeansParams { restarts: 1, ..Default::default() }).unwrap();
        for pair in model.inertia_trace.windows(2) {
            prop_assert!(pair[1] <= pair[0] + 1e-9 * (1.0 + pair[0]));
        }
    }

    #[test]
    fn confusion_identities(pairs in proptest::collection::vec((0u8..4, 0u8..4), 1..300)) {
        let truth: Vec<u8> = pairs.iter().map(|p| p.0).collect();
        let pred: Vec<u8> = pairs.iter().map(|p| p.1).collect();
        let cm = confusion(&truth, &pred, &[0, 1, 2, 3]).unwrap();
        // row sums = class supports, total = pair count
        for c in 0..4u8 {
            let support: u64 = cm.counts[c as usize].iter().sum();
            prop_assert_eq!(support, truth.iter().filter(|&&t| t == c).count() as u64);
        }
        prop_assert_eq!(cm.total(), pairs.len() as u64);

        let report = class_report(&cm).unwrap();
        // weighted F1 identity
        let weighted: f64 = report.per_class.iter()
            .map(|c| c.support as f64 * c.f1)
            .sum::<f64>() / cm.total() as f64;
        prop_assert!((report.weighted_f1 - weighted).abs() < 1e-12);
        // macro F1 bounded by per-class extremes
        let max = report.per_class.iter().map(|c| c.f1).fold(f64::MIN, f64::max);
        let min = report.per_class.iter().map(|c| c.f1).fold(f64::MAX, f64::min);
        prop_assert!(report.macro_f1 <= max + 1e-12 && report.macro_f1 >= min - 1e-12);

        // collapsed-matrix binary accuracy equals direct binary accuracy
        let bt = binary_collapse(&truth);
        let bp = binary_collapse(&pred);
        let bin_cm = confusion(&bt, &bp, &[0, 1]).unwrap();
        let bin_acc = class_report(&bin_cm).unwrap().accuracy;
        let direct = bt.iter().zip(&bp).filter(|(a, b)| a == b).count() as f64 / bt.len() as f64;
        prop_assert!((bin_acc - direct).abs() < 1e-12);

        // permutation invariance of the metric set
        let mut order: Vec<usize> = (0..pairs.len()).collect();
        order.reverse();
        let truth_p: Vec<u8> = order.iter().map(|&i| truth[i]).collect();
        let pred_p: Vec<u8> = order.iter().map(|&i| pred[i]).collect();
        let cm_p = confusion(&truth_p, &pred_p, &[0, 1, 2, 3]).unwrap();
        prop_assert_eq!(cm_p.counts, cm.counts);
    }

    #[test]
    fn pca_structure_random_matrices(seed in 0u64..2000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(5..60);
        let d = rng.gen_range(2..7);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.gen_range(-4.0..4.0)).collect())
            .collect();
        let p = d.min(n);
        let m = pca_fit(&x, p).unwrap();
        for i in 0..p {
            for j in 0..p {
                let dot: f64 = m.components[i].iter().zip(&m.components[j]).map(|(a, b)| a * b).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot - expect).abs() < 1e-9);
            }
        }
        for pair in m.explained_variance.windows(2) {
            prop_assert!(pair[0] >= pair[1] - 1e-12);
        }
        if p == d && n > d {
            let sum: f64 = m.explained_variance_ratio.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-9);
        }
        for &r in &m.explained_variance_ratio {
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&r));
        }
    }

    #[test]
    fn synth_csv_round_trip(seed in 0u64..300, hr in 50.0f64..110.0) {
        let config = ProtocolConfig {
            total_duration: 9.0,
            rest_duration: 2.0,
            activity_duration: 1.0,
            activity_sequence: vec![1, 2, 3],
            sampling_rate: 100.0,
            heart_rate: hr,
            seed,
        };
        let record = generate_protocol_recording(&config, Modality::Ppg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rt.csv");
        write_recording(&record, &path).unwrap();
        let loaded = load_recording(&path, config.sampling_rate, Modality::Ppg).unwrap();
        prop_assert_eq!(&loaded.samples, &record.samples);
        prop_assert_eq!(&loaded.labels, &record.labels);
        prop_assert_eq!(loaded.fs, record.fs);
        // every sample carries exactly one label in 0..=3
        prop_assert!(record.labels.iter().all(|&l| l <= 3));
    }
}

/// Assignment invariance under row permutation on well-separated data,
/// where every restart reaches the global optimum.
#[test]
fn kmeans_permutation_invariance_on_separated_blobs() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let centers = [(0.0, 0.0), (40.0, 0.0), (0.0, 40.0)];
    let x: Vec<Vec<f64>> = (0..60)
        .map(|i| {
            let (cx, cy) = centers[i % 3];
            vec![cx + rng.gen_range(-1.0..1.0), cy + rng.gen_range(-1.0..1.0)]
        })
        .collect();
    let a = kmeans_fit(&x, 3, 5).unwrap();
    let mut reversed = x.clone();
    reversed.reverse();
    let b = kmeans_fit(&reversed, 3, 5).unwrap();
    assert!((a.inertia - b.inertia).abs() < 1e-9);
    // assignments agree up to relabeling
    let n = x.len();
    for i in 0..n {
        for j in 0..n {
            let same_a = a.assignment[i] == a.assignment[j];
            let same_b = b.assignment[n - 1 - i] == b.assignment[n - 1 - j];
            assert_eq!(same_a, same_b);
        }
    }
}

/// Rank-p optimality: PCA reconstruction error matches the discarded
/// eigenvalue mass and beats random rank-p projections.
#[test]
fn pca_rank_p_optimality() {
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    for _ in 0..10 {
        let n = 30;
        let d = 4;
        let p = 2;
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let full = pca_fit(&x, d).unwrap();
        let m = pca_fit(&x, p).unwrap();
        let recon_err = reconstruction_error(&x, &m.components, &m.column_means);
        let discarded: f64 = full.explained_variance[p..].iter().sum::<f64>() * (n - 1) as f64;
        assert!(
            (recon_err - discarded).abs() < 1e-6 * (1.0 + discarded),
            "reconstruction error {recon_err} vs discarded mass {discarded}"
        );
        // PCA never loses to a random orthonormal rank-p projection
        for _ in 0..20 {
            let basis = random_orthonormal(d, p, &mut rng);
            let err = reconstruction_error(&x, &basis, &m.column_means);
            assert!(recon_err <= err + 1e-9);
        }
    }
}

fn reconstruction_error(x: &[Vec<f64>], basis: &[Vec<f64>], means: &[f64]) -> f64 {
    let d = means.len();
    let mut total = 0.0;
    for row in x {
        let centered: Vec<f64> = row.iter().zip(means).map(|(v, m)| v - m).collect();
        let coeffs: Vec<f64> = basis
            .iter()
            .map(|b| b.iter().zip(&centered).map(|(a, c)| a * c).sum())
            .collect();
        for j in 0..d {
            let recon: f64 = basis.iter().zip(&coeffs).map(|(b, c)| b[j] * c).sum();
            let diff = centered[j] - recon;
            total += diff * diff;
        }
    }
    total
}

fn random_orthonormal(d: usize, p: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    // Gram-Schmidt on random vectors
    let mut basis: Vec<Vec<f64>> = Vec::new();
    while basis.len() < p {
        let mut v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for b in &basis {
            let dot: f64 = b.iter().zip(&v).map(|(a, c)| a * c).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= dot * bi;
            }
        }
        let norm: f64 = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-6 {
            for vi in &mut v {
                *vi /= norm;
            }
            basis.push(v);
        }
    }
    basis
}

/// Ward merge costs stay monotone and flatline spans survive the full
/// synth -> ingest -> drop_invalid path untouched.
#[test]
fn protocol_flatline_invariant_through_ingest() {
    let config = ProtocolConfig {
        total_duration: 9.0,
        rest_duration: 2.0,
        activity_duration: 1.0,
        activity_sequence: vec![3, 3, 3],
        sampling_rate: 200.0,
        heart_rate: 70.0,
        seed: 5,
    };
    let record = generate_protocol_recording(&config, Modality::Ecg).unwrap();
    let record = drop_invalid(record).unwrap();
    for slot in 0..3 {
        let start = ((slot as f64 * 3.0 + 2.0) * 200.0) as usize;
        let span = &record.samples[start..start + 200];
        assert!(span.iter().all(|&v| v == span[0]), "flatline slot {slot} not constant");
    }
}

#[test]
fn agglomerative_matches_kmeans_on_separated_pairs() {
    let x = vec![vec![0.0], vec![1.0], vec![10.0], vec![11.0]];
    let km = kmeans_fit(&x, 2, 0).unwrap();
    let ag = agglomerative_fit(&x, 2).unwrap();
    let same = |a: &[usize]| (a[0] == a[1]) && (a[2] == a[3]) && (a[0] != a[2]);
    assert!(same(&km.assignment));
    assert!(same(&ag.assignment));
}
