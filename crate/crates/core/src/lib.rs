//! Biosignal quality screening toolkit.
//!
//! Windows ECG/PPG recordings, extracts a 9-dimensional statistical
//! feature vector per window, clusters windows with K-means or Ward
//! agglomerative clustering, and scores cluster-to-label agreement with
//! multi-class and clean-vs-noisy confusion matrices. A synthetic
//! protocol generator provides labeled ground truth without lab hardware.

pub mod clustering;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod ingest;
pub mod pca;
pub mod synthgen;
pub mod windowing;

pub use error::{Error, Result};
pub use evaluation::{EvalConfig, EvaluationReport, PipelineResult};
pub use features::FeatureVector;
pub use ingest::{Modality, SignalRecord};
pub use synthgen::ProtocolConfig;
pub use windowing::Window;
