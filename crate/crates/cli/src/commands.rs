//! Subcommand implementations. Each command reads its inputs, drives the
//! corresponding library operation, writes outputs atomically, and leaves a
//! run manifest recording config and input hashes.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use navdex_core::derive::{derive_index, DeriveConfig, IndexModel};
use navdex_core::features::{feature_table, FeatureConfig};
use navdex_core::indices::{feature_importance, PublishedIndex};
use navdex_core::metrics::{correlate_events, evaluate};
use navdex_core::model::{
    load_events, load_feature_table, load_recording, load_subscores, save_events,
    save_feature_table, save_recording, FeatureKey, Recording, Subscale,
};
use navdex_core::preprocess::{preprocess, PreprocessConfig};
use navdex_core::report::{grouped_bar_plot, importance_plot, scatter_plot};
use navdex_core::synth::{generate, generate_cohort, SynthConfig};

use crate::manifest::{atomic_write, RunManifest};
use crate::CliError;

fn load_config<T: serde::de::DeserializeOwned + Default>(
    path: Option<&Path>,
) -> Result<T, CliError> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            Ok(serde_json::from_str(&text)?)
        }
    }
}

fn ensure_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

/// Recording CSVs in a directory, identified by a sibling
/// `<stem>.manifest.json`, in lexicographic path order.
fn scan_recordings(dir: &Path) -> Result<Vec<(PathBuf, PathBuf)>, CliError> {
    let mut pairs = Vec::new();
    let entries = fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| CliError::io(dir, e))?;
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) != Some("csv") {
            continue;
        }
        let manifest = path.with_extension("manifest.json");
        if manifest.exists() {
            pairs.push((path, manifest));
        }
    }
    if pairs.is_empty() {
        return Err(CliError::validation(format!(
            "no recording CSV + manifest pairs found in {}",
            dir.display()
        )));
    }
    pairs.sort();
    Ok(pairs)
}

fn load_recordings(dir: &Path) -> Result<Vec<Recording>, CliError> {
    let pairs = scan_recordings(dir)?;
    let mut recordings = pairs
        .iter()
        .map(|(csv, manifest)| Ok(load_recording(csv, manifest)?))
        .collect::<Result<Vec<Recording>, CliError>>()?;
    recordings.sort_by(|a, b| a.subject_id.cmp(&b.subject_id));
    Ok(recordings)
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

pub fn cmd_synth(
    out: &Path,
    config: Option<&Path>,
    seed: Option<u64>,
    cohort: usize,
    sweep: Option<&str>,
) -> Result<(), CliError> {
    let start = Instant::now();
    let mut cfg: SynthConfig = load_config(config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    ensure_dir(out)?;

    let generated = match sweep {
        Some(spec) => {
            let mut parts = spec.split(':');
            let (name, lo, hi) = (parts.next(), parts.next(), parts.next());
            let (Some(name), Some(lo), Some(hi)) = (name, lo, hi) else {
                return Err(CliError::validation(format!(
                    "sweep must be `parameter:lo:hi`, got '{spec}'"
                )));
            };
            let lo: f64 = lo
                .parse()
                .map_err(|_| CliError::validation(format!("bad sweep bound '{lo}'")))?;
            let hi: f64 = hi
                .parse()
                .map_err(|_| CliError::validation(format!("bad sweep bound '{hi}'")))?;
            generate_cohort(cohort, &cfg, name, (lo, hi))?
        }
        None => {
            let mut rows = Vec::with_capacity(cohort);
            for i in 0..cohort {
                let mut one = cfg.clone();
                one.seed = cfg.seed.wrapping_add(i as u64);
                rows.push(generate(&one, &format!("s{i:02}"))?);
            }
            rows
        }
    };

    let mut events = Vec::new();
    for (rec, truth) in &generated {
        let csv_path = out.join(format!("{}.csv", rec.subject_id));
        let man_path = out.join(format!("{}.manifest.json", rec.subject_id));
        save_recording(rec, &csv_path, &man_path)?;
        let truth_path = out.join(format!("{}.truth.json", rec.subject_id));
        atomic_write(
            &truth_path,
            serde_json::to_string_pretty(truth).expect("serializes").as_bytes(),
        )?;
        events.push((rec.subject_id.clone(), truth.counts));
    }
    save_events(&events, &out.join("events.csv"))?;

    let mut manifest = RunManifest::new("synth", serde_json::to_value(&cfg)?);
    if let Some(cfg_path) = config {
        manifest.record_input(cfg_path)?;
    }
    manifest.write(out, start.elapsed().as_millis())?;
    println!("synth: wrote {} recording(s) to {}", generated.len(), out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// preprocess
// ---------------------------------------------------------------------------

pub fn cmd_preprocess(input: &Path, out: &Path, config: Option<&Path>) -> Result<(), CliError> {
    let start = Instant::now();
    let cfg: PreprocessConfig = load_config(config)?;
    ensure_dir(out)?;

    let recordings = load_recordings(input)?;
    let processed = recordings
        .par_iter()
        .map(|rec| Ok(preprocess(rec, &cfg)?))
        .collect::<Result<Vec<Recording>, CliError>>()?;

    for rec in &processed {
        let csv_path = out.join(format!("{}.csv", rec.subject_id));
        let man_path = out.join(format!("{}.manifest.json", rec.subject_id));
        save_recording(rec, &csv_path, &man_path)?;
    }

    let mut manifest = RunManifest::new("preprocess", serde_json::to_value(&cfg)?);
    for (csv, _) in scan_recordings(input)? {
        manifest.record_input(&csv)?;
    }
    if let Some(cfg_path) = config {
        manifest.record_input(cfg_path)?;
    }
    manifest.write(out, start.elapsed().as_millis())?;
    println!(
        "preprocess: conditioned {} recording(s) into {}",
        processed.len(),
        out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// features
// ---------------------------------------------------------------------------

pub fn cmd_features(input: &Path, out: &Path, config: Option<&Path>) -> Result<(), CliError> {
    let start = Instant::now();
    let cfg: FeatureConfig = load_config(config)?;

    let recordings = load_recordings(input)?;
    let table = feature_table(&recordings, &cfg)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    save_feature_table(&table, out)?;

    let mut manifest = RunManifest::new("features", serde_json::to_value(&cfg)?);
    for (csv, _) in scan_recordings(input)? {
        manifest.record_input(&csv)?;
    }
    if let Some(cfg_path) = config {
        manifest.record_input(cfg_path)?;
    }
    manifest.write(out, start.elapsed().as_millis())?;
    println!(
        "features: {} row(s) x {} columns -> {}",
        table.rows.len(),
        navdex_core::FEATURE_COUNT + 1,
        out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// derive
// ---------------------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
pub fn cmd_derive(
    features: &Path,
    subscores: &Path,
    subscale: &str,
    lambda: Option<f64>,
    folds: Option<usize>,
    threshold: Option<f64>,
    seed: Option<u64>,
    out: &Path,
) -> Result<(), CliError> {
    let start = Instant::now();
    let subscale = Subscale::from_str(subscale)?;
    let mut cfg = DeriveConfig::default();
    if let Some(lambda) = lambda {
        cfg.lambda_reg = lambda;
    }
    if let Some(folds) = folds {
        cfg.folds_k = folds;
    }
    if let Some(threshold) = threshold {
        cfg.stop_threshold = threshold;
    }
    cfg.shuffle_seed = seed;

    let mut table = load_feature_table(features)?;
    // Canonical (lexicographic) subject order fixes the fold layout.
    table.rows.sort_by(|a, b| a.0.cmp(&b.0));
    let targets = load_subscores(subscores)?;
    let y = table
        .rows
        .iter()
        .map(|(id, _)| targets.get(id, subscale))
        .collect::<Result<Vec<f64>, _>>()?;

    let names: Vec<FeatureKey> = FeatureKey::all().collect();
    let columns: Vec<Vec<f64>> = names.iter().map(|&k| table.column(k)).collect();
    let model = derive_index(&columns, &names, &y, subscale, &cfg)?;

    atomic_write(out, model.to_json().as_bytes())?;
    let mut manifest = RunManifest::new("derive", serde_json::to_value(&cfg)?);
    manifest.record_input(features)?;
    manifest.record_input(subscores)?;
    manifest.write(out, start.elapsed().as_millis())?;

    let accepted = model.derivation_log.iter().filter(|r| r.accepted).count();
    println!(
        "derive: {subscale} model with {} term(s) after {accepted} iteration(s) -> {}",
        model.terms.len(),
        out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// score
// ---------------------------------------------------------------------------

fn collect_scorers(
    index_names: &[String],
    model_paths: &[PathBuf],
) -> Result<Vec<IndexModel>, CliError> {
    let mut scorers = Vec::new();
    if index_names.is_empty() && model_paths.is_empty() {
        scorers.extend(PublishedIndex::ALL.iter().map(|idx| idx.model()));
    }
    for name in index_names {
        scorers.push(PublishedIndex::from_str(name)?.model());
    }
    for path in model_paths {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        scorers.push(IndexModel::from_json(&text)?);
    }
    let mut seen = std::collections::BTreeSet::new();
    for model in &scorers {
        if !seen.insert(model.subscale) {
            return Err(CliError::validation(format!(
                "two scorers target {}; estimates would collide",
                model.subscale
            )));
        }
    }
    Ok(scorers)
}

pub fn cmd_score(
    features: &Path,
    index_names: &[String],
    model_paths: &[PathBuf],
    out: &Path,
) -> Result<(), CliError> {
    let start = Instant::now();
    let scorers = collect_scorers(index_names, model_paths)?;
    let table = load_feature_table(features)?;

    let mut body = String::from("subject_id");
    for model in &scorers {
        body.push(',');
        body.push_str(model.subscale.name());
    }
    body.push('\n');
    for (subject, fv) in &table.rows {
        body.push_str(subject);
        for model in &scorers {
            body.push(',');
            body.push_str(&format!("{}", model.score(fv)));
        }
        body.push('\n');
    }
    atomic_write(out, body.as_bytes())?;

    let labels: Vec<String> = scorers.iter().map(|m| m.subscale.to_string()).collect();
    let mut manifest = RunManifest::new("score", serde_json::json!({ "scorers": labels }));
    manifest.record_input(features)?;
    for path in model_paths {
        manifest.record_input(path)?;
    }
    manifest.write(out, start.elapsed().as_millis())?;
    println!(
        "score: {} subject(s) x {} scorer(s) -> {}",
        table.rows.len(),
        scorers.len(),
        out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

/// Matched per-subject (ids, actual, estimated) vectors for one subscale.
type MatchedPairs = (Vec<String>, Vec<f64>, Vec<f64>);

/// Matched vectors for one subscale, in lexicographic subject order.
fn matched_pairs(
    estimates_path: &Path,
    actuals_path: &Path,
    subscale: Subscale,
) -> Result<MatchedPairs, CliError> {
    let estimates = load_subscores(estimates_path)?;
    let actuals = load_subscores(actuals_path)?;
    let subjects = estimates.subjects();
    let mut actual = Vec::with_capacity(subjects.len());
    let mut estimated = Vec::with_capacity(subjects.len());
    for subject in &subjects {
        estimated.push(estimates.get(subject, subscale)?);
        actual.push(actuals.get(subject, subscale)?);
    }
    Ok((subjects, actual, estimated))
}

pub fn cmd_evaluate(
    estimates: &Path,
    actuals: &Path,
    subscale: &str,
    out: &Path,
) -> Result<(), CliError> {
    let start = Instant::now();
    let subscale = Subscale::from_str(subscale)?;
    let (subjects, actual, estimated) = matched_pairs(estimates, actuals, subscale)?;
    let report = evaluate(subscale, &subjects, &actual, &estimated)?;

    atomic_write(
        out,
        serde_json::to_string_pretty(&report).expect("serializes").as_bytes(),
    )?;
    let mut manifest = RunManifest::new(
        "evaluate",
        serde_json::json!({ "subscale": subscale.name() }),
    );
    manifest.record_input(estimates)?;
    manifest.record_input(actuals)?;
    manifest.write(out, start.elapsed().as_millis())?;

    print!("{}", report.render_table());
    Ok(())
}

// ---------------------------------------------------------------------------
// correlate
// ---------------------------------------------------------------------------

pub fn cmd_correlate(features: &Path, events: &Path, out: &Path) -> Result<(), CliError> {
    let start = Instant::now();
    let table = load_feature_table(features)?;
    let event_rows = load_events(events)?;
    let grid = correlate_events(&table, &event_rows)?;

    atomic_write(out, grid.to_csv().as_bytes())?;
    let mut manifest = RunManifest::new("correlate", serde_json::json!({}));
    manifest.record_input(features)?;
    manifest.record_input(events)?;
    manifest.write(out, start.elapsed().as_millis())?;

    for measure in &grid.measures {
        let top: Vec<String> = grid
            .ranked(measure)
            .into_iter()
            .take(5)
            .map(|(name, rho)| format!("{name} ({rho:+.2})"))
            .collect();
        println!("{measure}: {}", top.join("  "));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

pub fn cmd_report(
    estimates_path: &Path,
    actuals_path: &Path,
    features_path: &Path,
    model_paths: &[PathBuf],
    out: &Path,
) -> Result<(), CliError> {
    let start = Instant::now();
    ensure_dir(out)?;

    let estimates = load_subscores(estimates_path)?;
    let subscales = estimates.subscales();
    if subscales.is_empty() || estimates.subjects().is_empty() {
        return Err(navdex_core::ReportError::EmptyInput.into());
    }

    let mut written = 0usize;
    for subscale in subscales {
        let (subjects, actual, estimated) =
            matched_pairs(estimates_path, actuals_path, subscale)?;
        let pairs: Vec<(String, f64, f64)> = subjects
            .into_iter()
            .zip(actual.iter().zip(&estimated))
            .map(|(s, (&a, &e))| (s, a, e))
            .collect();

        // Discrete subscales read better as grouped bars.
        let discrete = matches!(subscale, Subscale::LandmarkRecognition | Subscale::PathRoute);
        let (svg, csv) = if discrete {
            grouped_bar_plot(subscale.name(), &pairs)?
        } else {
            scatter_plot(subscale.name(), &pairs)?
        };
        let kind = if discrete { "bar" } else { "scatter" };
        atomic_write(&out.join(format!("{}_{kind}.svg", subscale.name())), svg.as_bytes())?;
        atomic_write(&out.join(format!("{}_{kind}.csv", subscale.name())), csv.as_bytes())?;
        written += 1;
    }

    // Importance chart over the supplied models (or the published five).
    let features = load_feature_table(features_path)?;
    let models = collect_models_for_report(model_paths)?;
    let importance = feature_importance(&models, &features)?;
    let (svg, csv) = importance_plot(&importance)?;
    atomic_write(&out.join("feature_importance.svg"), svg.as_bytes())?;
    atomic_write(&out.join("feature_importance.csv"), csv.as_bytes())?;

    let mut manifest = RunManifest::new("report", serde_json::json!({}));
    manifest.record_input(estimates_path)?;
    manifest.record_input(actuals_path)?;
    manifest.record_input(features_path)?;
    for path in model_paths {
        manifest.record_input(path)?;
    }
    manifest.write(out, start.elapsed().as_millis())?;
    println!(
        "report: {written} figure(s) + importance chart -> {}",
        out.display()
    );
    Ok(())
}

fn collect_models_for_report(model_paths: &[PathBuf]) -> Result<Vec<IndexModel>, CliError> {
    if model_paths.is_empty() {
        return Ok(PublishedIndex::ALL.iter().map(|idx| idx.model()).collect());
    }
    model_paths
        .iter()
        .map(|path| {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            Ok(IndexModel::from_json(&text)?)
        })
        .collect()
}
