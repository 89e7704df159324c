//! Split conformal classification evaluated under multi-user strategies.

pub mod classifiers;
pub mod conformal;
pub mod data;
pub mod error;
pub mod features;
pub mod ingest;
pub mod metrics;
pub mod report;
pub mod stats;
pub mod strategies;
pub mod synth;
pub mod viz;

pub use classifiers::{ClassifierConfig, ForestConfig, Model, ScoreModel};
pub use conformal::{ConformalModel, PredictionRecord, RecordLog};
pub use data::{Matrix, MultiUserDataset, ScaleParams, SplitIndices};
pub use error::{Error, Result};
pub use metrics::{Metric, MetricsReport};
pub use strategies::StrategyKind;
pub use synth::SynthConfig;
