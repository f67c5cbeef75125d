//! Cluster-to-label mapping, confusion matrices, precision/recall/F1
//! reports, and the end-to-end evaluation pipeline.

use serde::{Deserialize, Serialize};

use crate::clustering::{
    agglomerative_fit, kmeans_fit, silhouette_sweep, AgglomerativeModel, KMeansModel,
    SilhouetteSweep, DEFAULT_K_MAX, DEFAULT_K_MIN,
};
use crate::error::{Error, Result};
use crate::features::{
    apply_standardizer, extract_features, fit_standardizer, FeatureVector, Standardizer,
};
use crate::ingest::{SignalRecord, NUM_CLASSES};
use crate::windowing::{slide_windows, Window};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    /// counts[i][j] = windows with true class i predicted as class j
    pub counts: Vec<Vec<u64>>,
    pub class_names: Vec<String>,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Row-normalized percentages; all-zero rows stay zero.
    pub fn row_pct(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|row| {
                let sum: u64 = row.iter().sum();
                row.iter()
                    .map(|&c| {
                        if sum > 0 {
                            100.0 * c as f64 / sum as f64
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    /// True when a zero denominator forced precision/recall/F1 to 0.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub per_class: Vec<ClassMetrics>,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub weighted_f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MappingMethod {
    Majority,
    OptimalAssignment,
}

impl std::str::FromStr for MappingMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "majority" => Ok(MappingMethod::Majority),
            "optimal" | "optimal-assignment" => Ok(MappingMethod::OptimalAssignment),
            other => Err(Error::InvalidArgument(format!("unknown mapping method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterLabelMap {
    /// cluster id -> ground-truth label
    pub map: Vec<u8>,
    pub method: MappingMethod,
}

impl ClusterLabelMap {
    pub fn apply(&self, cluster_ids: &[usize]) -> Vec<u8> {
        cluster_ids.iter().map(|&c| self.map[c]).collect()
    }
}

/// Majority: each cluster takes the modal true label of its members (ties
/// to the smaller label). Optimal assignment: the label bijection
/// maximizing total matched windows, requiring k = number of classes.
pub fn map_clusters_to_labels(
    true_labels: &[u8],
    cluster_ids: &[usize],
    method: MappingMethod,
) -> Result<ClusterLabelMap> {
    if true_labels.is_empty() || true_labels.len() != cluster_ids.len() {
        return Err(Error::InvalidArgument(
            "labels and cluster ids must be equal-length and non-empty".into(),
        ));
    }
    let k = cluster_ids.iter().max().unwrap() + 1;
    let mut tally = vec![[0u64; NUM_CLASSES]; k];
    for (&c, &l) in cluster_ids.iter().zip(true_labels) {
        tally[c][l as usize] += 1;
    }
    let map = match method {
        MappingMethod::Majority => tally
            .iter()
            .map(|counts| {
                let mut best = 0usize;
                for l in 1..NUM_CLASSES {
                    if counts[l] > counts[best] {
                        best = l;
                    }
                }
                best as u8
            })
            .collect(),
        MappingMethod::OptimalAssignment => {
            if k != NUM_CLASSES {
                return Err(Error::InvalidArgument(format!(
                    "optimal assignment needs k = {NUM_CLASSES} clusters, got {k}"
                )));
            }
            let mut best_perm = None;
            let mut best_matched = 0u64;
            let mut labels: Vec<u8> = (0..NUM_CLASSES as u8).collect();
            permute(&mut labels, 0, &mut |perm| {
                let matched: u64 = perm
                    .iter()
                    .enumerate()
                    .map(|(c, &l)| tally[c][l as usize])
                    .sum();
                if best_perm.is_none() || matched > best_matched {
                    best_matched = matched;
                    best_perm = Some(perm.to_vec());
                }
            });
            best_perm.unwrap()
        }
    };
    Ok(ClusterLabelMap { map, method })
}

fn permute(items: &mut [u8], start: usize, visit: &mut impl FnMut(&[u8])) {
    if start == items.len() {
        visit(items);
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permute(items, start + 1, visit);
        items.swap(start, i);
    }
}

pub fn confusion(true_labels: &[u8], predicted: &[u8], classes: &[u8]) -> Result<ConfusionMatrix> {
    if true_labels.len() != predicted.len() {
        return Err(Error::DimensionMismatch {
            expected: true_labels.len(),
            got: predicted.len(),
        });
    }
    let index_of = |v: u8| -> Result<usize> {
        classes
            .iter()
            .position(|&c| c == v)
            .ok_or_else(|| Error::InvalidArgument(format!("value {v} not in class set")))
    };
    let c = classes.len();
    let mut counts = vec![vec![0u64; c]; c];
    for (&t, &p) in true_labels.iter().zip(predicted) {
        counts[index_of(t)?][index_of(p)?] += 1;
    }
    Ok(ConfusionMatrix {
        counts,
        class_names: classes.iter().map(|c| c.to_string()).collect(),
    })
}

pub fn class_report(cm: &ConfusionMatrix) -> Result<ClassReport> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::InvalidArgument("all-zero confusion matrix".into()));
    }
    let c = cm.counts.len();
    let mut per_class = Vec::with_capacity(c);
    let mut trace = 0u64;
    let mut macro_f1 = 0.0;
    let mut weighted_f1 = 0.0;
    for j in 0..c {
        let tp = cm.counts[j][j];
        trace += tp;
        let row_sum: u64 = cm.counts[j].iter().sum();
        let col_sum: u64 = cm.counts.iter().map(|r| r[j]).sum();
        let precision = if col_sum > 0 { tp as f64 / col_sum as f64 } else { 0.0 };
        let recall = if row_sum > 0 { tp as f64 / row_sum as f64 } else { 0.0 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        macro_f1 += f1;
        weighted_f1 += row_sum as f64 * f1;
        per_class.push(ClassMetrics {
            label: cm.class_names[j].clone(),
            precision,
            recall,
            f1,
            support: row_sum,
            degenerate: col_sum == 0 || row_sum == 0 || precision + recall == 0.0,
        });
    }
    Ok(ClassReport {
        per_class,
        accuracy: trace as f64 / total as f64,
        macro_f1: macro_f1 / c as f64,
        weighted_f1: weighted_f1 / total as f64,
    })
}

/// Clean-vs-noisy collapse: 0 stays 0, every noise label becomes 1.
pub fn binary_collapse(labels: &[u8]) -> Vec<u8> {
    labels.iter().map(|&l| u8::from(l != 0)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub confusion_counts: Vec<Vec<u64>>,
    pub confusion_row_pct: Vec<Vec<f64>>,
    pub per_class: Vec<ClassMetrics>,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub weighted_f1: f64,
}

impl EvaluationReport {
    pub fn from_confusion(cm: &ConfusionMatrix) -> Result<Self> {
        let report = class_report(cm)?;
        Ok(EvaluationReport {
            confusion_counts: cm.counts.clone(),
            confusion_row_pct: cm.row_pct(),
            per_class: report.per_class,
            accuracy: report.accuracy,
            macro_f1: report.macro_f1,
            weighted_f1: report.weighted_f1,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterMethod {
    KMeans,
    Agglomerative,
}

impl std::str::FromStr for ClusterMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kmeans" => Ok(ClusterMethod::KMeans),
            "agglo" | "agglomerative" => Ok(ClusterMethod::Agglomerative),
            other => Err(Error::InvalidArgument(format!("unknown clustering method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub window_s: f64,
    pub stride_s: f64,
    pub k: usize,
    /// When set, also run a silhouette sweep over this inclusive range.
    pub sweep: Option<(usize, usize)>,
    pub method: ClusterMethod,
    pub mapping: MappingMethod,
    pub standardize: bool,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            window_s: crate::windowing::DEFAULT_WINDOW_S,
            stride_s: crate::windowing::DEFAULT_STRIDE_S,
            k: 4,
            sweep: Some((DEFAULT_K_MIN, DEFAULT_K_MAX)),
            method: ClusterMethod::KMeans,
            mapping: MappingMethod::Majority,
            standardize: true,
            seed: 42,
        }
    }
}

/// Everything produced by a full pipeline run, for reporting and plotting.
#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub windows: Vec<Window>,
    /// Index into the input records slice, parallel to `windows`.
    pub window_record: Vec<usize>,
    pub features: Vec<FeatureVector>,
    pub standardizer: Option<Standardizer>,
    /// Clustering input (standardized unless disabled).
    pub matrix: Vec<Vec<f64>>,
    pub sweep: Option<SilhouetteSweep>,
    pub kmeans: Option<KMeansModel>,
    pub agglomerative: Option<AgglomerativeModel>,
    pub cluster_ids: Vec<usize>,
    pub mapping: ClusterLabelMap,
    pub true_labels: Vec<u8>,
    pub predicted_labels: Vec<u8>,
    pub multi_class: EvaluationReport,
    pub binary: EvaluationReport,
}

/// Windows -> features -> standardize -> cluster -> map -> both reports.
/// Deterministic for a fixed (records, config) input.
pub fn evaluate_pipeline(records: &[SignalRecord], config: &EvalConfig) -> Result<PipelineResult> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no input records".into()));
    }
    if config.k < 2 {
        return Err(Error::InvalidArgument(format!("k must be >= 2, got {}", config.k)));
    }
    let mut windows = Vec::new();
    let mut window_record = Vec::new();
    for (ri, record) in records.iter().enumerate() {
        for w in slide_windows(record, config.window_s, config.stride_s)? {
            windows.push(w);
            window_record.push(ri);
        }
    }
    if windows.is_empty() {
        return Err(Error::EmptyRecord("no complete windows in any input".into()));
    }
    let features: Vec<FeatureVector> = windows
        .iter()
        .zip(&window_record)
        .map(|(w, &ri)| extract_features(w.samples(&records[ri]), records[ri].fs))
        .collect::<Result<_>>()?;
    let raw: Vec<Vec<f64>> = features.iter().map(|f| f.to_array().to_vec()).collect();
    let (matrix, standardizer) = if config.standardize {
        let s = fit_standardizer(&raw)?;
        (apply_standardizer(&s, &raw)?, Some(s))
    } else {
        (raw, None)
    };

    let sweep = match config.sweep {
        Some((lo, hi)) => {
            let hi = hi.min(matrix.len().saturating_sub(1));
            if hi >= lo && hi >= 2 {
                Some(silhouette_sweep(&matrix, lo, hi, config.seed)?)
            } else {
                None
            }
        }
        None => None,
    };

    let (cluster_ids, kmeans, agglomerative) = match config.method {
        ClusterMethod::KMeans => {
            let model = kmeans_fit(&matrix, config.k, config.seed)?;
            (model.assignment.clone(), Some(model), None)
        }
        ClusterMethod::Agglomerative => {
            let model = agglomerative_fit(&matrix, config.k)?;
            (model.assignment.clone(), None, Some(model))
        }
    };

    let true_labels: Vec<u8> = windows.iter().map(|w| w.label).collect();
    let mapping = map_clusters_to_labels(&true_labels, &cluster_ids, config.mapping)?;
    let predicted_labels = mapping.apply(&cluster_ids);

    let classes: Vec<u8> = (0..NUM_CLASSES as u8).collect();
    let multi_cm = confusion(&true_labels, &predicted_labels, &classes)?;
    let binary_cm = confusion(
        &binary_collapse(&true_labels),
        &binary_collapse(&predicted_labels),
        &[0, 1],
    )?;

    Ok(PipelineResult {
        multi_class: EvaluationReport::from_confusion(&multi_cm)?,
        binary: EvaluationReport::from_confusion(&binary_cm)?,
        windows,
        window_record,
        features,
        standardizer,
        matrix,
        sweep,
        kmeans,
        agglomerative,
        cluster_ids,
        true_labels,
        predicted_labels,
        mapping,
    })
}
