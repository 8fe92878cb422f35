//! Estimation quality metrics (MAE, MSE, RMSE, MAPE, R²), Spearman rank
//! correlation with tie handling, and the feature-by-event correlation grid.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{EventCounts, FeatureKey, FeatureTable, Subscale, EVENT_MEASURES};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("MAPE undefined: actual value is zero at index {index}")]
    ZeroActualForMape { index: usize },
    #[error("R² undefined: actual values have zero variance")]
    ConstantActualForR2,
    #[error("Spearman undefined for a constant vector")]
    ConstantVector,
    #[error("subject sets differ between features and events")]
    SubjectMismatch,
}

/// Per-subscale metric bundle with the underlying actual/estimated pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub subscale: Subscale,
    pub r2: f64,
    pub mae: f64,
    pub mse: f64,
    pub rmse: f64,
    /// Percent.
    pub mape: f64,
    pub spearman_rho: f64,
    pub pairs: Vec<(String, f64, f64)>,
}

impl EvaluationReport {
    /// Render as a one-row text table in the canonical column order.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<24} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}\n",
            "Score Name", "R2", "MAE", "MSE", "RMSE", "MAPE", "rho"
        ));
        out.push_str(&format!(
            "{:<24} {:>8.2} {:>8.2} {:>8.2} {:>8.3} {:>8.2} {:>8.2}\n",
            self.subscale.to_string(),
            self.r2,
            self.mae,
            self.mse,
            self.rmse,
            self.mape,
            self.spearman_rho
        ));
        out
    }
}

/// Compute the full metric bundle for paired actual/estimated values.
/// `subject_ids` labels the pairs in the report; pass the estimates in the
/// same order.
pub fn evaluate(
    subscale: Subscale,
    subject_ids: &[String],
    actual: &[f64],
    estimated: &[f64],
) -> Result<EvaluationReport, MetricsError> {
    if actual.len() != estimated.len() {
        return Err(MetricsError::LengthMismatch {
            left: actual.len(),
            right: estimated.len(),
        });
    }
    if actual.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let n = actual.len() as f64;

    let mut abs_sum = 0.0;
    let mut sq_sum = 0.0;
    let mut pct_sum = 0.0;
    for (i, (&a, &e)) in actual.iter().zip(estimated).enumerate() {
        if a == 0.0 {
            return Err(MetricsError::ZeroActualForMape { index: i });
        }
        abs_sum += (a - e).abs();
        sq_sum += (a - e) * (a - e);
        pct_sum += ((a - e) / a).abs();
    }
    let mae = abs_sum / n;
    let mse = sq_sum / n;
    let rmse = mse.sqrt();
    let mape = 100.0 * pct_sum / n;

    let mean_actual = actual.iter().sum::<f64>() / n;
    let total_var: f64 = actual.iter().map(|&a| (a - mean_actual).powi(2)).sum();
    if total_var == 0.0 {
        return Err(MetricsError::ConstantActualForR2);
    }
    let r2 = 1.0 - sq_sum / total_var;

    // A constant estimate carries no rank information; report zero
    // association rather than failing the whole evaluation.
    let spearman_rho = match spearman(actual, estimated) {
        Ok(rho) => rho,
        Err(MetricsError::ConstantVector) => 0.0,
        Err(other) => return Err(other),
    };

    let pairs = subject_ids
        .iter()
        .zip(actual.iter().zip(estimated))
        .map(|(id, (&a, &e))| (id.clone(), a, e))
        .collect();

    Ok(EvaluationReport {
        subscale,
        r2,
        mae,
        mse,
        rmse,
        mape,
        spearman_rho,
        pairs,
    })
}

/// Average ranks, with tied values sharing the mean of their rank range.
fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).expect("finite values"));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        // ranks are 1-based; ties share the mean rank of the run
        let mean_rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = mean_rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation: Pearson correlation of average-ranked values.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, MetricsError> {
    if x.len() != y.len() {
        return Err(MetricsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(MetricsError::EmptyInput);
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);

    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MetricsError::ConstantVector);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Spearman correlation of every feature against every event measure.
/// Constant vectors produce a missing cell rather than a failure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationGrid {
    /// Measure names, in canonical column order.
    pub measures: Vec<String>,
    /// One row per feature: (feature name, per-measure ρ with None for
    /// missing cells).
    pub cells: Vec<(String, Vec<Option<f64>>)>,
}

impl CorrelationGrid {
    pub fn get(&self, feature: FeatureKey, measure: &str) -> Option<f64> {
        let col = self.measures.iter().position(|m| m == measure)?;
        let feature = feature.to_string();
        self.cells
            .iter()
            .find(|(name, _)| *name == feature)
            .and_then(|(_, row)| row[col])
    }

    /// Features ranked by |ρ| against one measure, strongest first —
    /// the per-column presentation order.
    pub fn ranked(&self, measure: &str) -> Vec<(String, f64)> {
        let Some(col) = self.measures.iter().position(|m| m == measure) else {
            return Vec::new();
        };
        let mut rows: Vec<(String, f64)> = self
            .cells
            .iter()
            .filter_map(|(name, row)| row[col].map(|rho| (name.clone(), rho)))
            .collect();
        rows.sort_by(|a, b| {
            b.1.abs()
                .partial_cmp(&a.1.abs())
                .expect("finite rho")
                .then(a.0.cmp(&b.0))
        });
        rows
    }

    /// Grid CSV: feature rows, measure columns, empty cells where ρ is
    /// undefined.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("feature");
        for m in &self.measures {
            out.push(',');
            out.push_str(m);
        }
        out.push('\n');
        for (name, row) in &self.cells {
            out.push_str(name);
            for cell in row {
                out.push(',');
                if let Some(rho) = cell {
                    out.push_str(&format!("{rho}"));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Correlate each of the 44 features with each of the 5 event measures over
/// a cohort. Subjects must match one-to-one between the two tables.
pub fn correlate_events(
    features: &FeatureTable,
    events: &[(String, EventCounts)],
) -> Result<CorrelationGrid, MetricsError> {
    let mut feature_subjects: Vec<&str> = features.subjects();
    feature_subjects.sort_unstable();
    let mut event_subjects: Vec<&str> = events.iter().map(|(id, _)| id.as_str()).collect();
    event_subjects.sort_unstable();
    if feature_subjects != event_subjects {
        return Err(MetricsError::SubjectMismatch);
    }

    // Event measures aligned to the feature-table row order.
    let measure_values: Vec<Vec<f64>> = EVENT_MEASURES
        .iter()
        .map(|m| {
            features
                .rows
                .iter()
                .map(|(id, _)| {
                    let (_, ev) = events
                        .iter()
                        .find(|(eid, _)| eid == id)
                        .expect("subject sets match");
                    ev.measure(m).expect("known measure")
                })
                .collect()
        })
        .collect();

    let mut cells = Vec::new();
    for key in FeatureKey::all() {
        let column = features.column(key);
        let row: Vec<Option<f64>> = measure_values
            .iter()
            .map(|values| match spearman(&column, values) {
                Ok(rho) => Some(rho),
                Err(MetricsError::ConstantVector) => None,
                Err(_) => None,
            })
            .collect();
        cells.push((key.to_string(), row));
    }

    Ok(CorrelationGrid {
        measures: EVENT_MEASURES.iter().map(|m| m.to_string()).collect(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("s{i:02}")).collect()
    }

    #[test]
    fn perfect_fit() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let report = evaluate(Subscale::NavigationOrientation, &ids(4), &a, &a).unwrap();
        assert_eq!(report.mae, 0.0);
        assert_eq!(report.mse, 0.0);
        assert_eq!(report.rmse, 0.0);
        assert_eq!(report.mape, 0.0);
        assert_eq!(report.r2, 1.0);
        assert_eq!(report.spearman_rho, 1.0);
    }

    #[test]
    fn hand_arithmetic_case() {
        let report = evaluate(
            Subscale::NavigationOrientation,
            &ids(3),
            &[1.0, 2.0, 3.0],
            &[2.0, 2.0, 2.0],
        )
        .unwrap();
        assert_relative_eq!(report.mae, 2.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(report.mse, 2.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(report.r2, 0.0, epsilon = 1e-12);
        assert_relative_eq!(report.rmse * report.rmse, report.mse, epsilon = 1e-12);
        assert!(report.mae <= report.rmse);
    }

    #[test]
    fn mape_rejects_zero_actual() {
        assert!(matches!(
            evaluate(
                Subscale::PathRoute,
                &ids(3),
                &[1.0, 0.0, 3.0],
                &[1.0, 1.0, 1.0]
            )
            .unwrap_err(),
            MetricsError::ZeroActualForMape { index: 1 }
        ));
    }

    #[test]
    fn r2_rejects_constant_actual() {
        assert!(matches!(
            evaluate(
                Subscale::PathRoute,
                &ids(3),
                &[2.0, 2.0, 2.0],
                &[1.0, 2.0, 3.0]
            )
            .unwrap_err(),
            MetricsError::ConstantActualForR2
        ));
    }

    #[test]
    fn mse_is_symmetric_r2_is_not() {
        let a = [1.0, 2.0, 3.0, 5.0];
        let e = [1.5, 1.0, 3.5, 4.0];
        let fwd = evaluate(Subscale::PathSurvey, &ids(4), &a, &e).unwrap();
        let rev = evaluate(Subscale::PathSurvey, &ids(4), &e, &a).unwrap();
        assert_relative_eq!(fwd.mse, rev.mse, epsilon = 1e-12);
        assert!((fwd.r2 - rev.r2).abs() > 1e-6);
    }

    #[test]
    fn table_row_rendering_is_format_only() {
        // Fixture values in the published row layout; this checks the
        // renderer, not a numeric reproduction.
        let report = EvaluationReport {
            subscale: Subscale::NavigationOrientation,
            r2: 0.72,
            mae: 4.16,
            mse: 25.58,
            rmse: 5.057,
            mape: 7.76,
            spearman_rho: -0.81,
            pairs: vec![("s01".to_string(), 80.0, 82.0)],
        };
        let table = report.render_table();
        let mut lines = table.lines();
        let header = lines.next().unwrap();
        for (left, right) in ["R2", "MAE", "MSE", "RMSE", "MAPE"]
            .windows(2)
            .map(|w| (w[0], w[1]))
        {
            assert!(header.find(left).unwrap() < header.find(right).unwrap());
        }
        let row = lines.next().unwrap();
        for cell in ["0.72", "4.16", "25.58", "5.057", "7.76", "-0.81"] {
            assert!(row.contains(cell), "missing {cell} in {row}");
        }
    }

    #[test]
    fn spearman_monotone_and_reversed() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap(), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
    }

    #[test]
    fn spearman_ties_match_rank_then_pearson_oracle() {
        let x = [1.0, 2.0, 2.0, 3.0];
        let y = [1.0, 3.0, 2.0, 4.0];
        // Independent oracle: assign average ranks by hand, then Pearson.
        let rx = [1.0, 2.5, 2.5, 4.0];
        let ry = [1.0, 3.0, 2.0, 4.0];
        let n = 4.0;
        let mx = rx.iter().sum::<f64>() / n;
        let my = ry.iter().sum::<f64>() / n;
        let mut sxy = 0.0;
        let mut sxx = 0.0;
        let mut syy = 0.0;
        for (&a, &b) in rx.iter().zip(&ry) {
            sxy += (a - mx) * (b - my);
            sxx += (a - mx) * (a - mx);
            syy += (b - my) * (b - my);
        }
        let oracle = sxy / (sxx * syy).sqrt();
        assert_relative_eq!(spearman(&x, &y).unwrap(), oracle, epsilon = 1e-12);
    }

    #[test]
    fn spearman_invariant_under_monotone_transforms() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let x: Vec<f64> = (0..50).map(|_| rng.random_range(-3.0..3.0)).collect();
        let y: Vec<f64> = (0..50).map(|_| rng.random_range(-3.0..3.0)).collect();
        let base = spearman(&x, &y).unwrap();

        let fx: Vec<f64> = x.iter().map(|&v| v.exp()).collect();
        let gy: Vec<f64> = y.iter().map(|&v| v.powi(3) + 2.0 * v).collect();
        let transformed = spearman(&fx, &gy).unwrap();
        assert_relative_eq!(base, transformed, epsilon = 1e-12);
    }

    #[test]
    fn spearman_rejects_constants() {
        assert!(matches!(
            spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap_err(),
            MetricsError::ConstantVector
        ));
    }

    #[test]
    fn correlation_grid_has_220_cells() {
        use crate::model::{FeatureVector, FEATURE_COUNT};
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let rows: Vec<(String, FeatureVector)> = (0..8)
            .map(|i| {
                let mut vals = [0.0; FEATURE_COUNT];
                for v in vals.iter_mut() {
                    *v = rng.random_range(-1.0..1.0);
                }
                (format!("s{i:02}"), FeatureVector::from_values(vals))
            })
            .collect();
        let features = FeatureTable { rows };
        let events: Vec<(String, EventCounts)> = (0..8)
            .map(|i| {
                (
                    format!("s{i:02}"),
                    EventCounts {
                        blink_count: i + 1,
                        fixation_count: 2 * i + 1,
                        fixation_duration_s: 30.0 - i as f64,
                        saccade_count: i * i + 1,
                        saccade_duration_s: 0.2 * i as f64 + 0.1,
                    },
                )
            })
            .collect();

        let grid = correlate_events(&features, &events).unwrap();
        assert_eq!(grid.measures.len(), 5);
        assert_eq!(grid.cells.len(), 44);
        let total: usize = grid.cells.iter().map(|(_, row)| row.len()).sum();
        assert_eq!(total, 220);
    }

    #[test]
    fn constant_feature_becomes_missing_cell() {
        use crate::model::{FeatureAbbr, FeatureVector, FEATURE_COUNT};
        let rows: Vec<(String, FeatureVector)> = (0..5)
            .map(|i| {
                let mut vals = [0.0; FEATURE_COUNT];
                for (j, v) in vals.iter_mut().enumerate() {
                    *v = (i * j) as f64 + 1.0;
                }
                // ME_h constant across subjects
                vals[0] = 7.0;
                (format!("s{i}"), FeatureVector::from_values(vals))
            })
            .collect();
        let features = FeatureTable { rows };
        let events: Vec<(String, EventCounts)> = (0..5)
            .map(|i| {
                (
                    format!("s{i}"),
                    EventCounts {
                        blink_count: i + 1,
                        fixation_count: i + 2,
                        fixation_duration_s: i as f64 + 0.5,
                        saccade_count: i + 3,
                        saccade_duration_s: i as f64 * 0.3 + 0.1,
                    },
                )
            })
            .collect();
        let grid = correlate_events(&features, &events).unwrap();
        let key = FeatureKey::new(FeatureAbbr::ME, crate::model::Channel::Horizontal);
        assert_eq!(grid.get(key, "blink_count"), None);

        // The grid CSV leaves missing cells empty.
        let csv = grid.to_csv();
        let me_h_line = csv.lines().find(|l| l.starts_with("ME_h,")).unwrap();
        assert!(me_h_line.starts_with("ME_h,,"));
    }

    #[test]
    fn subject_mismatch_rejected() {
        use crate::model::{FeatureVector, FEATURE_COUNT};
        let rows = vec![(
            "s01".to_string(),
            FeatureVector::from_values([1.0; FEATURE_COUNT]),
        )];
        let features = FeatureTable { rows };
        let events = vec![(
            "s02".to_string(),
            EventCounts {
                blink_count: 1,
                fixation_count: 1,
                fixation_duration_s: 1.0,
                saccade_count: 1,
                saccade_duration_s: 1.0,
            },
        )];
        assert!(matches!(
            correlate_events(&features, &events).unwrap_err(),
            MetricsError::SubjectMismatch
        ));
    }
}
