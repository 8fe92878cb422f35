//! The five published fixed scorers, stored exactly as printed: inner
//! per-feature coefficients with the outer scale kept separate, plus an
//! additive offset. Also the standardized-coefficient feature-importance
//! table used for reporting.

use std::str::FromStr;

use thiserror::Error;

use crate::derive::IndexModel;
use crate::model::{Channel, FeatureAbbr, FeatureKey, FeatureTable, FeatureVector, Subscale};

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("unknown index '{name}' (expected NO, SA, LR, PS, or PR)")]
    UnknownIndex { name: String },
    #[error("no feature data for importance computation")]
    EmptyInput,
}

/// The five published indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PublishedIndex {
    /// Navigation and orientation.
    NO,
    /// Spatial anxiety.
    SA,
    /// Landmark recognition.
    LR,
    /// Path survey.
    PS,
    /// Path route.
    PR,
}

impl PublishedIndex {
    pub const ALL: [PublishedIndex; 5] = [
        PublishedIndex::NO,
        PublishedIndex::SA,
        PublishedIndex::LR,
        PublishedIndex::PS,
        PublishedIndex::PR,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PublishedIndex::NO => "NO",
            PublishedIndex::SA => "SA",
            PublishedIndex::LR => "LR",
            PublishedIndex::PS => "PS",
            PublishedIndex::PR => "PR",
        }
    }

    pub fn subscale(self) -> Subscale {
        match self {
            PublishedIndex::NO => Subscale::NavigationOrientation,
            PublishedIndex::SA => Subscale::SpatialAnxiety,
            PublishedIndex::LR => Subscale::LandmarkRecognition,
            PublishedIndex::PS => Subscale::PathSurvey,
            PublishedIndex::PR => Subscale::PathRoute,
        }
    }

    /// The scorer as an [`IndexModel`], interchangeable with derived ones.
    pub fn model(self) -> IndexModel {
        let key = |abbr: FeatureAbbr, ch: Channel| FeatureKey::new(abbr, ch);
        use Channel::{Horizontal as H, Vertical as V};
        use FeatureAbbr::*;

        let (terms, scale, offset): (Vec<(FeatureKey, f64)>, f64, f64) = match self {
            PublishedIndex::NO => (
                vec![
                    (key(SB, V), 8000.0),
                    (key(TK, H), 2.0),
                    (key(ZCR, H), -0.14),
                    (key(SK, H), -9.0),
                    (key(MO, H), 8.0),
                    (key(ER, V), -0.02),
                    (key(MA, V), 10.0),
                    (key(RMS, V), -30.0),
                ],
                -1.03,
                110.64,
            ),
            PublishedIndex::SA => (
                vec![
                    (key(TK, V), -3.6),
                    (key(MO, V), -52.0),
                    (key(EN, V), 0.9),
                    (key(ER, V), -0.02),
                    (key(TK, H), -13.0),
                    (key(ZCR, V), -0.02),
                    (key(DFA, V), -31.0),
                ],
                -1.13,
                -1.84,
            ),
            PublishedIndex::LR => (
                vec![
                    (key(EN, V), -0.2),
                    (key(RA, V), -1.4),
                    (key(TK, H), -1.0),
                    (key(DFA, H), -11.0),
                    (key(MI, H), -1.0),
                    (key(MD, V), -26.0),
                ],
                -1.08,
                -18.20,
            ),
            PublishedIndex::PS => (
                vec![
                    (key(SK, H), 1.2),
                    (key(EN, H), -0.4),
                    (key(AUC, V), -4.3),
                    (key(KU, H), 0.16),
                ],
                -0.85,
                -5.22,
            ),
            PublishedIndex::PR => (
                vec![
                    (key(SK, V), 0.34),
                    (key(SMA, V), 0.001),
                    (key(TK, H), 0.71),
                    (key(EN, V), -0.06),
                    (key(ZCR, V), -0.006),
                    (key(DFA, H), -1.6),
                ],
                -1.04,
                -0.48,
            ),
        };

        IndexModel {
            subscale: self.subscale(),
            terms,
            scale,
            offset,
            inner_offsets: Vec::new(),
            derivation_log: Vec::new(),
            config: None,
        }
    }
}

impl FromStr for PublishedIndex {
    type Err = IndexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PublishedIndex::ALL
            .into_iter()
            .find(|idx| idx.name() == s)
            .ok_or_else(|| IndexError::UnknownIndex {
                name: s.to_string(),
            })
    }
}

/// Evaluate one published index against a complete feature vector.
pub fn score_published(which: PublishedIndex, fv: &FeatureVector) -> f64 {
    which.model().score(fv)
}

/// Feature importance per model: |scale * coefficient| times the sample
/// standard deviation of the feature column, zero for absent features.
/// Standardizing by the column spread makes coefficients on differently
/// scaled features comparable.
#[derive(Debug, Clone)]
pub struct ImportanceTable {
    /// Model labels, one column per model.
    pub models: Vec<String>,
    /// One row per feature key in canonical order.
    pub rows: Vec<(FeatureKey, Vec<f64>)>,
}

impl ImportanceTable {
    pub fn get(&self, feature: FeatureKey, model: &str) -> Option<f64> {
        let col = self.models.iter().position(|m| m == model)?;
        self.rows
            .iter()
            .find(|(key, _)| *key == feature)
            .map(|(_, values)| values[col])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("feature");
        for m in &self.models {
            out.push(',');
            out.push_str(m);
        }
        out.push('\n');
        for (key, values) in &self.rows {
            out.push_str(&key.to_string());
            for v in values {
                out.push(',');
                out.push_str(&format!("{v}"));
            }
            out.push('\n');
        }
        out
    }
}

fn sample_sd(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|&v| (v - mean).powi(2)).sum();
    (ss / (n - 1) as f64).sqrt()
}

/// Importance of every feature for each model over a cohort's feature
/// table. Models are labeled by their subscale.
pub fn feature_importance(
    models: &[IndexModel],
    features: &FeatureTable,
) -> Result<ImportanceTable, IndexError> {
    if models.is_empty() || features.rows.is_empty() {
        return Err(IndexError::EmptyInput);
    }

    let model_labels: Vec<String> = models.iter().map(|m| m.subscale.to_string()).collect();
    let mut rows = Vec::new();
    for key in FeatureKey::all() {
        let sd = sample_sd(&features.column(key));
        let values: Vec<f64> = models
            .iter()
            .map(|m| {
                m.terms
                    .iter()
                    .find(|(k, _)| *k == key)
                    .map(|(_, coeff)| (m.scale * coeff).abs() * sd)
                    .unwrap_or(0.0)
            })
            .collect();
        rows.push((key, values));
    }

    Ok(ImportanceTable {
        models: model_labels,
        rows,
    })
}
