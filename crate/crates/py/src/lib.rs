//! Python bindings exposing the pipeline stages: synthesis, conditioning,
//! feature extraction, index derivation, published-index scoring, and the
//! evaluation metrics. Feature vectors cross the boundary as plain dicts
//! keyed by the canonical `<ABBR>_<h|v>` names; models travel as JSON.

use std::collections::HashMap;
use std::str::FromStr;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use navdex_core::derive::{derive_index as derive_index_core, DeriveConfig, IndexModel};
use navdex_core::features::{extract_all, FeatureConfig};
use navdex_core::indices::PublishedIndex;
use navdex_core::metrics;
use navdex_core::model::{FeatureKey, FeatureVector, Recording, Subscale};
use navdex_core::preprocess::{preprocess as preprocess_core, PreprocessConfig};
use navdex_core::synth::{generate, SynthConfig};

fn value_error<E: std::fmt::Display>(err: E) -> PyErr {
    PyValueError::new_err(err.to_string())
}

fn parse_config<T: serde::de::DeserializeOwned + Default>(json: Option<&str>) -> PyResult<T> {
    match json {
        None => Ok(T::default()),
        Some(text) => serde_json::from_str(text).map_err(value_error),
    }
}

fn feature_vector_from_map(features: &HashMap<String, f64>) -> PyResult<FeatureVector> {
    let mut fv = FeatureVector::zeros();
    for key in FeatureKey::all() {
        let name = key.to_string();
        let value = features
            .get(&name)
            .ok_or_else(|| PyValueError::new_err(format!("missing feature '{name}'")))?;
        fv.set(key, *value);
    }
    Ok(fv)
}

/// Generate a synthetic recording. Returns a dict with the two channels,
/// the sampling rate, and the ground-truth event log.
#[pyfunction]
#[pyo3(signature = (config_json=None, subject_id="s00"))]
fn synth<'py>(
    py: Python<'py>,
    config_json: Option<&str>,
    subject_id: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg: SynthConfig = parse_config(config_json)?;
    let (rec, truth) = generate(&cfg, subject_id).map_err(value_error)?;

    let out = PyDict::new(py);
    out.set_item("subject_id", &rec.subject_id)?;
    out.set_item("fs_hz", rec.fs_hz)?;
    out.set_item("h", &rec.h)?;
    out.set_item("v", &rec.v)?;
    out.set_item("blink_times_s", &truth.blink_times_s)?;
    out.set_item("saccade_times_s", &truth.saccade_times_s)?;
    out.set_item("blink_count", truth.counts.blink_count)?;
    out.set_item("fixation_count", truth.counts.fixation_count)?;
    out.set_item("fixation_duration_s", truth.counts.fixation_duration_s)?;
    out.set_item("saccade_count", truth.counts.saccade_count)?;
    out.set_item("saccade_duration_s", truth.counts.saccade_duration_s)?;
    Ok(out)
}

/// Run the conditioning chain on a two-channel recording; returns the
/// conditioned (h, v) channels.
#[pyfunction]
#[pyo3(signature = (h, v, fs_hz, config_json=None))]
fn preprocess(
    h: Vec<f64>,
    v: Vec<f64>,
    fs_hz: f64,
    config_json: Option<&str>,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let cfg: PreprocessConfig = parse_config(config_json)?;
    let rec = Recording::new("py", fs_hz, h, v).map_err(value_error)?;
    let out = preprocess_core(&rec, &cfg).map_err(value_error)?;
    Ok((out.h, out.v))
}

/// Compute the 44 named features of a (preprocessed) recording.
#[pyfunction]
#[pyo3(signature = (h, v, fs_hz, config_json=None))]
fn extract_features(
    h: Vec<f64>,
    v: Vec<f64>,
    fs_hz: f64,
    config_json: Option<&str>,
) -> PyResult<HashMap<String, f64>> {
    let cfg: FeatureConfig = parse_config(config_json)?;
    let rec = Recording::new("py", fs_hz, h, v).map_err(value_error)?;
    let fv = extract_all(&rec, &cfg).map_err(value_error)?;
    Ok(fv.iter().map(|(k, value)| (k.to_string(), value)).collect())
}

/// Names of the five published indices.
#[pyfunction]
fn published_indices() -> Vec<String> {
    PublishedIndex::ALL
        .iter()
        .map(|idx| idx.name().to_string())
        .collect()
}

/// Published scorer as a model JSON string.
#[pyfunction]
fn published_model_json(index: &str) -> PyResult<String> {
    let idx = PublishedIndex::from_str(index).map_err(value_error)?;
    Ok(idx.model().to_json())
}

/// Score one published index against a complete feature dict.
#[pyfunction]
fn score_published(index: &str, features: HashMap<String, f64>) -> PyResult<f64> {
    let idx = PublishedIndex::from_str(index).map_err(value_error)?;
    idx.model().score_map(&features).map_err(value_error)
}

/// Score a derived model (JSON) against a feature dict.
#[pyfunction]
fn score_model(model_json: &str, features: HashMap<String, f64>) -> PyResult<f64> {
    let model = IndexModel::from_json(model_json).map_err(value_error)?;
    model.score_map(&features).map_err(value_error)
}

/// Derive an index from per-subject feature dicts and targets; returns the
/// model as JSON. Rows must share the full 44-key feature set.
#[pyfunction]
#[pyo3(signature = (rows, y, subscale, config_json=None))]
fn derive_index(
    rows: Vec<HashMap<String, f64>>,
    y: Vec<f64>,
    subscale: &str,
    config_json: Option<&str>,
) -> PyResult<String> {
    let subscale = Subscale::from_str(subscale).map_err(value_error)?;
    let cfg: DeriveConfig = parse_config(config_json)?;
    let vectors: Vec<FeatureVector> = rows
        .iter()
        .map(feature_vector_from_map)
        .collect::<PyResult<_>>()?;
    let names: Vec<FeatureKey> = FeatureKey::all().collect();
    let columns: Vec<Vec<f64>> = names
        .iter()
        .map(|&k| vectors.iter().map(|fv| fv.get(k)).collect())
        .collect();
    let model = derive_index_core(&columns, &names, &y, subscale, &cfg).map_err(value_error)?;
    Ok(model.to_json())
}

/// Metric bundle for paired actual/estimated values: r2, mae, mse, rmse,
/// mape, spearman_rho.
#[pyfunction]
fn evaluate(actual: Vec<f64>, estimated: Vec<f64>) -> PyResult<HashMap<String, f64>> {
    let ids: Vec<String> = (0..actual.len()).map(|i| format!("s{i:02}")).collect();
    let report = metrics::evaluate(Subscale::NavigationOrientation, &ids, &actual, &estimated)
        .map_err(value_error)?;
    Ok(HashMap::from([
        ("r2".to_string(), report.r2),
        ("mae".to_string(), report.mae),
        ("mse".to_string(), report.mse),
        ("rmse".to_string(), report.rmse),
        ("mape".to_string(), report.mape),
        ("spearman_rho".to_string(), report.spearman_rho),
    ]))
}

/// Spearman rank correlation with tie handling.
#[pyfunction]
fn spearman(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    metrics::spearman(&x, &y).map_err(value_error)
}

/// Canonical names of the 44 features, in column order.
#[pyfunction]
fn feature_names() -> Vec<String> {
    FeatureKey::all().map(|k| k.to_string()).collect()
}

#[pymodule]
fn navdex_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(synth, m)?)?;
    m.add_function(wrap_pyfunction!(preprocess, m)?)?;
    m.add_function(wrap_pyfunction!(extract_features, m)?)?;
    m.add_function(wrap_pyfunction!(published_indices, m)?)?;
    m.add_function(wrap_pyfunction!(published_model_json, m)?)?;
    m.add_function(wrap_pyfunction!(score_published, m)?)?;
    m.add_function(wrap_pyfunction!(score_model, m)?)?;
    m.add_function(wrap_pyfunction!(derive_index, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(spearman, m)?)?;
    m.add_function(wrap_pyfunction!(feature_names, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
