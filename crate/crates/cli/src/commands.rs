//! Subcommand implementations. Every output file is written atomically
//! (temp then rename) and every stage error names its stage.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use bioclust::clustering::{
    agglomerative_fit, kmeans_assign, silhouette_sweep, KMeansModelJson, SilhouetteSweep,
};
use bioclust::evaluation::{
    binary_collapse, confusion, evaluate_pipeline, map_clusters_to_labels, ClusterMethod,
    EvalConfig, EvaluationReport, MappingMethod,
};
use bioclust::features::{apply_standardizer, extract_features, fit_standardizer, FeatureVector};
use bioclust::ingest::{drop_invalid, load_recording, write_recording_to, Modality, SignalRecord, NUM_CLASSES};
use bioclust::pca::{pca_fit, pca_transform, PcaModel};
use bioclust::synthgen::{generate_protocol_recording, ProtocolConfig};
use bioclust::windowing::slide_windows;

use crate::error::{CliError, CliResult};
use crate::fio::{features_csv, read_features_csv, write_atomic, FeatureTable};
use crate::plots;

pub const DEFAULT_SEED: u64 = 42;

/// `BIOCLUST_SEED` is the fallback when no `--seed` flag is given.
pub fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("BIOCLUST_SEED")
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or(DEFAULT_SEED)
}

pub fn parse_sweep_range(s: &str) -> CliResult<(usize, usize)> {
    let err = || CliError::config("config", format!("bad sweep range `{s}`, expected A:B"));
    let (a, b) = s.split_once(':').ok_or_else(err)?;
    let lo = a.trim().parse().map_err(|_| err())?;
    let hi = b.trim().parse().map_err(|_| err())?;
    if lo < 2 || hi < lo {
        return Err(err());
    }
    Ok((lo, hi))
}

fn to_json_bytes<T: Serialize>(stage: &str, value: &T) -> CliResult<Vec<u8>> {
    let mut bytes =
        serde_json::to_vec_pretty(value).map_err(|e| CliError::internal(stage, e))?;
    bytes.push(b'\n');
    Ok(bytes)
}

// ---------------------------------------------------------------- synth

#[derive(Debug, Serialize)]
pub struct SynthManifest {
    pub config: ProtocolConfig,
    pub files: Vec<String>,
    pub slots: Vec<SlotEntry>,
}

#[derive(Debug, Serialize)]
pub struct SlotEntry {
    pub index: usize,
    pub start_s: f64,
    pub end_s: f64,
    pub artifact_class: u8,
}

/// Generate one CSV per modality plus a slot manifest.
pub fn cmd_synth(config: &ProtocolConfig, out_dir: &Path) -> CliResult<Vec<PathBuf>> {
    config
        .validate()
        .map_err(|e| CliError::from_core("synth-config", e))?;
    let mut written = Vec::new();
    for modality in [Modality::Ecg, Modality::Ppg] {
        let record = generate_protocol_recording(config, modality)
            .map_err(|e| CliError::from_core("synth", e))?;
        let mut buf = Vec::new();
        write_recording_to(&record, &mut buf).map_err(|e| CliError::internal("synth", e))?;
        let path = out_dir.join(format!("{modality}.csv"));
        write_atomic(&path, &buf)?;
        written.push(path);
    }
    let cycle = config.rest_duration + config.activity_duration;
    let manifest = SynthManifest {
        config: config.clone(),
        files: written
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect(),
        slots: config
            .activity_sequence
            .iter()
            .enumerate()
            .map(|(i, &class)| SlotEntry {
                index: i,
                start_s: i as f64 * cycle + config.rest_duration,
                end_s: i as f64 * cycle + cycle,
                artifact_class: class,
            })
            .collect(),
    };
    let path = out_dir.join("manifest.json");
    write_atomic(&path, &to_json_bytes("synth", &manifest)?)?;
    written.push(path);
    Ok(written)
}

// ------------------------------------------------------------- features

pub struct LoadedInputs {
    pub records: Vec<SignalRecord>,
}

pub fn load_inputs(paths: &[PathBuf], fs: f64, modality: Modality) -> CliResult<LoadedInputs> {
    if paths.is_empty() {
        return Err(CliError::config("ingest", "no input files given"));
    }
    let records = paths
        .iter()
        .map(|p| {
            load_recording(p, fs, modality)
                .and_then(drop_invalid)
                .map_err(|e| CliError::from_core("ingest", e))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(LoadedInputs { records })
}

pub fn cmd_features(
    inputs: &[PathBuf],
    fs: f64,
    modality: Modality,
    window_s: f64,
    stride_s: f64,
    out: &Path,
) -> CliResult<usize> {
    let loaded = load_inputs(inputs, fs, modality)?;
    let mut starts = Vec::new();
    let mut labels = Vec::new();
    let mut features: Vec<FeatureVector> = Vec::new();
    for record in &loaded.records {
        let windows = slide_windows(record, window_s, stride_s)
            .map_err(|e| CliError::from_core("windowing", e))?;
        for w in windows {
            starts.push(w.start_s(record.fs));
            labels.push(w.label);
            features.push(
                extract_features(w.samples(record), record.fs)
                    .map_err(|e| CliError::from_core("features", e))?,
            );
        }
    }
    if features.is_empty() {
        return Err(CliError::data("windowing", "no complete windows in any input"));
    }
    write_atomic(out, features_csv(&starts, &labels, &features).as_bytes())?;
    Ok(features.len())
}

// ------------------------------------------------------------ clustering

fn standardized_matrix(table: &FeatureTable, standardize: bool) -> CliResult<Vec<Vec<f64>>> {
    if !standardize {
        return Ok(table.matrix.clone());
    }
    let s = fit_standardizer(&table.matrix)
        .map_err(|e| CliError::from_core("standardize", e))?;
    apply_standardizer(&s, &table.matrix).map_err(|e| CliError::from_core("standardize", e))
}

#[derive(Debug, Serialize)]
struct AggloModelJson {
    k: usize,
    merges: Vec<(usize, usize, f64)>,
    assignment: Vec<usize>,
}

pub fn cmd_cluster(
    features: &Path,
    k: usize,
    method: ClusterMethod,
    seed: u64,
    standardize: bool,
    out: &Path,
) -> CliResult<()> {
    let table = read_features_csv(features)?;
    let matrix = standardized_matrix(&table, standardize)?;
    match method {
        ClusterMethod::KMeans => {
            let model = bioclust::clustering::kmeans_fit(&matrix, k, seed)
                .map_err(|e| CliError::from_core("clustering", e))?;
            write_atomic(out, &to_json_bytes("clustering", &model.to_json())?)?;
        }
        ClusterMethod::Agglomerative => {
            let model = agglomerative_fit(&matrix, k)
                .map_err(|e| CliError::from_core("clustering", e))?;
            let json = AggloModelJson {
                k,
                merges: model.merges.iter().map(|m| (m.a, m.b, m.cost)).collect(),
                assignment: model.assignment,
            };
            write_atomic(out, &to_json_bytes("clustering", &json)?)?;
        }
    }
    Ok(())
}

pub fn sweep_csv(sweep: &SilhouetteSweep) -> String {
    let mut out = String::from("k,score\n");
    for (&k, &score) in sweep.k_values.iter().zip(&sweep.scores) {
        out.push_str(&format!("{k},{score}\n"));
    }
    out
}

pub fn cmd_sweep(features: &Path, range: (usize, usize), seed: u64, out: &Path) -> CliResult<()> {
    let table = read_features_csv(features)?;
    let matrix = standardized_matrix(&table, true)?;
    let sweep = silhouette_sweep(&matrix, range.0, range.1.min(matrix.len().saturating_sub(1)), seed)
        .map_err(|e| CliError::from_core("sweep", e))?;
    write_atomic(out, sweep_csv(&sweep).as_bytes())?;
    Ok(())
}

// ------------------------------------------------------------------ pca

pub fn pca_scores_csv(scores: &[Vec<f64>], labels: &[u8], clusters: Option<&[usize]>) -> String {
    let mut out = String::from("pc1,pc2,label,cluster\n");
    for (i, (score, &label)) in scores.iter().zip(labels).enumerate() {
        let cluster = clusters.map_or(-1i64, |c| c[i] as i64);
        out.push_str(&format!("{},{},{label},{cluster}\n", score[0], score[1]));
    }
    out
}

pub fn cmd_pca(
    features: &Path,
    model: Option<&Path>,
    out_scores: &Path,
    out_model: &Path,
) -> CliResult<()> {
    let table = read_features_csv(features)?;
    let matrix = standardized_matrix(&table, true)?;
    let pca = pca_fit(&matrix, 2).map_err(|e| CliError::from_core("pca", e))?;
    let scores = pca_transform(&pca, &matrix).map_err(|e| CliError::from_core("pca", e))?;
    let clusters = match model {
        Some(path) => Some(assign_from_model_json(path, &matrix)?),
        None => None,
    };
    write_atomic(
        out_scores,
        pca_scores_csv(&scores, &table.labels, clusters.as_deref()).as_bytes(),
    )?;
    write_atomic(out_model, &to_json_bytes("pca", &pca)?)?;
    Ok(())
}

// ------------------------------------------------------------- evaluate

fn assign_from_model_json(path: &Path, matrix: &[Vec<f64>]) -> CliResult<Vec<usize>> {
    let stage = "read-model";
    let bytes = std::fs::read(path).map_err(|e| CliError::data(stage, e))?;
    let json: KMeansModelJson =
        serde_json::from_slice(&bytes).map_err(|e| CliError::data(stage, e))?;
    let model = json
        .to_model()
        .map_err(|e| CliError::data(stage, e))?;
    if model.dim() != matrix.first().map_or(0, Vec::len) {
        return Err(CliError::data(
            stage,
            format!(
                "field `centroids` has dimension {}, features have {}",
                model.dim(),
                matrix.first().map_or(0, Vec::len)
            ),
        ));
    }
    kmeans_assign(&model, matrix).map_err(|e| CliError::from_core(stage, e))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub method: String,
    pub mapping: String,
    pub k: usize,
    pub best_k: Option<usize>,
    pub seed: u64,
    pub window_s: Option<f64>,
    pub stride_s: Option<f64>,
    pub standardized: bool,
    pub num_windows: usize,
    pub sources: Vec<String>,
    pub cluster_label_map: Vec<u8>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FullReport {
    pub metadata: ReportMetadata,
    pub multi_class: EvaluationReport,
    pub binary: EvaluationReport,
}

pub fn cmd_evaluate(
    features: &Path,
    model: &Path,
    mapping: MappingMethod,
    standardize: bool,
    out: &Path,
) -> CliResult<()> {
    let table = read_features_csv(features)?;
    let matrix = standardized_matrix(&table, standardize)?;
    let cluster_ids = assign_from_model_json(model, &matrix)?;
    let map = map_clusters_to_labels(&table.labels, &cluster_ids, mapping)
        .map_err(|e| CliError::from_core("evaluation", e))?;
    let predicted = map.apply(&cluster_ids);
    let classes: Vec<u8> = (0..NUM_CLASSES as u8).collect();
    let stage_err = |e| CliError::from_core("evaluation", e);
    let multi = confusion(&table.labels, &predicted, &classes)
        .and_then(|cm| EvaluationReport::from_confusion(&cm))
        .map_err(stage_err)?;
    let binary = confusion(
        &binary_collapse(&table.labels),
        &binary_collapse(&predicted),
        &[0, 1],
    )
    .and_then(|cm| EvaluationReport::from_confusion(&cm))
    .map_err(stage_err)?;
    let report = FullReport {
        metadata: ReportMetadata {
            method: "kmeans".into(),
            mapping: mapping_name(mapping),
            k: cluster_ids.iter().max().map_or(0, |&m| m + 1),
            best_k: None,
            seed: 0,
            window_s: None,
            stride_s: None,
            standardized: standardize,
            num_windows: table.labels.len(),
            sources: vec![features.display().to_string()],
            cluster_label_map: map.map,
        },
        multi_class: multi,
        binary,
    };
    write_atomic(out, &to_json_bytes("evaluation", &report)?)?;
    Ok(())
}

fn mapping_name(m: MappingMethod) -> String {
    match m {
        MappingMethod::Majority => "majority".into(),
        MappingMethod::OptimalAssignment => "optimal-assignment".into(),
    }
}

fn method_name(m: ClusterMethod) -> String {
    match m {
        ClusterMethod::KMeans => "kmeans".into(),
        ClusterMethod::Agglomerative => "agglomerative".into(),
    }
}

// ------------------------------------------------------------- pipeline

/// Full pipeline configuration; also accepted as one JSON file with
/// flag overrides.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub input: Vec<PathBuf>,
    pub synth: Option<ProtocolConfig>,
    pub modality: Modality,
    pub fs: f64,
    pub window_s: f64,
    pub stride_s: f64,
    pub k: usize,
    pub k_sweep: Option<(usize, usize)>,
    pub method: ClusterMethod,
    pub mapping: MappingMethod,
    pub standardize: bool,
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            input: Vec::new(),
            synth: None,
            modality: Modality::Ecg,
            fs: 1000.0,
            window_s: 120.0,
            stride_s: 30.0,
            k: 4,
            k_sweep: Some((2, 10)),
            method: ClusterMethod::KMeans,
            mapping: MappingMethod::Majority,
            standardize: true,
            seed: DEFAULT_SEED,
            out: PathBuf::from("out"),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> CliResult<()> {
        if self.input.is_empty() == self.synth.is_none() {
            return Err(CliError::config(
                "config",
                "exactly one of --input and --synth-config must be set",
            ));
        }
        if self.k < 2 {
            return Err(CliError::config("config", format!("k must be >= 2, got {}", self.k)));
        }
        if !(self.fs > 0.0) {
            return Err(CliError::config("config", format!("fs must be positive, got {}", self.fs)));
        }
        Ok(())
    }
}

/// Artifact file names emitted by `pipeline`.
pub const PIPELINE_ARTIFACTS: [&str; 11] = [
    "report.json",
    "features.csv",
    "model.json",
    "silhouette.csv",
    "silhouette.svg",
    "pca_scores.csv",
    "pca_model.json",
    "pca_scatter.svg",
    "confusion_multiclass.svg",
    "confusion_binary.svg",
    "cluster_waveforms.svg",
];

pub struct PipelineOutput {
    pub report: FullReport,
    pub pca: PcaModel,
    pub written: Vec<PathBuf>,
}

pub fn cmd_pipeline(config: &PipelineConfig) -> CliResult<PipelineOutput> {
    config.validate()?;
    let records = if let Some(protocol) = &config.synth {
        protocol
            .validate()
            .map_err(|e| CliError::from_core("synth-config", e))?;
        vec![generate_protocol_recording(protocol, config.modality)
            .map_err(|e| CliError::from_core("synth", e))?]
    } else {
        load_inputs(&config.input, config.fs, config.modality)?.records
    };

    let eval_config = EvalConfig {
        window_s: config.window_s,
        stride_s: config.stride_s,
        k: config.k,
        sweep: config.k_sweep,
        method: config.method,
        mapping: config.mapping,
        standardize: config.standardize,
        seed: config.seed,
    };
    let result = evaluate_pipeline(&records, &eval_config)
        .map_err(|e| CliError::from_core("pipeline", e))?;

    let pca = pca_fit(&result.matrix, 2).map_err(|e| CliError::from_core("pca", e))?;
    let scores = pca_transform(&pca, &result.matrix).map_err(|e| CliError::from_core("pca", e))?;

    let report = FullReport {
        metadata: ReportMetadata {
            method: method_name(config.method),
            mapping: mapping_name(config.mapping),
            k: config.k,
            best_k: result.sweep.as_ref().map(|s| s.best_k),
            seed: config.seed,
            window_s: Some(config.window_s),
            stride_s: Some(config.stride_s),
            standardized: config.standardize,
            num_windows: result.windows.len(),
            sources: records.iter().map(|r| r.source_id.clone()).collect(),
            cluster_label_map: result.mapping.map.clone(),
        },
        multi_class: result.multi_class.clone(),
        binary: result.binary.clone(),
    };

    // per-cluster mean waveforms over the raw window samples
    let k_effective = result.cluster_ids.iter().max().map_or(0, |&m| m + 1);
    let window_len = result.windows.first().map_or(0, |w| w.length);
    let mut mean_waves = vec![vec![0.0f64; window_len]; k_effective];
    let mut counts = vec![0usize; k_effective];
    for ((w, &ri), &c) in result
        .windows
        .iter()
        .zip(&result.window_record)
        .zip(&result.cluster_ids)
    {
        counts[c] += 1;
        for (acc, &v) in mean_waves[c].iter_mut().zip(w.samples(&records[ri])) {
            *acc += v;
        }
    }
    for (wave, &count) in mean_waves.iter_mut().zip(&counts) {
        if count > 0 {
            for v in wave.iter_mut() {
                *v /= count as f64;
            }
        }
    }

    let out = &config.out;
    let mut written = Vec::new();
    let mut emit = |name: &str, bytes: &[u8]| -> CliResult<()> {
        let path = out.join(name);
        write_atomic(&path, bytes)?;
        written.push(path);
        Ok(())
    };

    emit("report.json", &to_json_bytes("report", &report)?)?;
    let starts: Vec<f64> = result
        .windows
        .iter()
        .zip(&result.window_record)
        .map(|(w, &ri)| w.start_s(records[ri].fs))
        .collect();
    emit(
        "features.csv",
        features_csv(&starts, &result.true_labels, &result.features).as_bytes(),
    )?;
    match (&result.kmeans, &result.agglomerative) {
        (Some(model), _) => emit("model.json", &to_json_bytes("report", &model.to_json())?)?,
        (None, Some(model)) => {
            let json = AggloModelJson {
                k: model.cut_k,
                merges: model.merges.iter().map(|m| (m.a, m.b, m.cost)).collect(),
                assignment: model.assignment.clone(),
            };
            emit("model.json", &to_json_bytes("report", &json)?)?;
        }
        (None, None) => unreachable!("pipeline always fits a model"),
    }
    if let Some(sweep) = &result.sweep {
        emit("silhouette.csv", sweep_csv(sweep).as_bytes())?;
        emit("silhouette.svg", plots::silhouette_svg(sweep).as_bytes())?;
    }
    emit(
        "pca_scores.csv",
        pca_scores_csv(&scores, &result.true_labels, Some(&result.cluster_ids)).as_bytes(),
    )?;
    emit("pca_model.json", &to_json_bytes("pca", &pca)?)?;
    emit(
        "pca_scatter.svg",
        plots::pca_scatter_svg(&scores, &result.cluster_ids, &result.true_labels).as_bytes(),
    )?;
    let class_names: Vec<String> = (0..NUM_CLASSES).map(|c| c.to_string()).collect();
    emit(
        "confusion_multiclass.svg",
        plots::confusion_svg(
            &result.multi_class.confusion_counts,
            &class_names,
            "Noise-type confusion matrix",
        )
        .as_bytes(),
    )?;
    emit(
        "confusion_binary.svg",
        plots::confusion_svg(
            &result.binary.confusion_counts,
            &["clean".to_string(), "noisy".to_string()],
            "Clean-vs-noisy confusion matrix",
        )
        .as_bytes(),
    )?;
    emit(
        "cluster_waveforms.svg",
        plots::waveforms_svg(&mean_waves, config.fs).as_bytes(),
    )?;

    Ok(PipelineOutput {
        report,
        pca,
        written,
    })
}
