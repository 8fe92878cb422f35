//! Turns two-channel electrooculography recordings into spatial-navigation
//! subscore estimates: signal conditioning, 44 statistical features, a
//! cross-validated greedy index-derivation search, five fixed published
//! scorers, evaluation metrics, and a synthetic generator for desk-scale
//! validation.

pub mod derive;
pub mod features;
pub mod indices;
pub mod metrics;
pub mod model;
pub(crate) mod numeric;
pub mod preprocess;
pub mod report;
pub mod synth;

pub use derive::{cv_pair_score, derive_index, DeriveConfig, DeriveError, IndexModel};
pub use features::{extract_all, feature_table, FeatureConfig, FeatureError};
pub use indices::{feature_importance, score_published, IndexError, PublishedIndex};
pub use metrics::{
    correlate_events, evaluate, spearman, CorrelationGrid, EvaluationReport, MetricsError,
};
pub use model::{
    load_recording, load_subscores, Channel, EventCounts, FeatureAbbr, FeatureKey, FeatureTable,
    FeatureVector, ModelError, Recording, Subscale, SubscoreTable, FEATURE_COUNT,
};
pub use preprocess::{preprocess, PreprocessConfig, PreprocessError};
pub use report::ReportError;
pub use synth::{generate, generate_cohort, GroundTruth, SynthConfig, SynthError};
