//! Domain types shared across the toolkit: recordings, channels, subscales,
//! subscore tables, feature vectors, and event counts, plus the CSV/JSON
//! loaders and writers that move them on and off disk.
//!
//! File formats:
//! - recording CSV: header `sample_index,h_uV,v_uV`, one row per sample
//! - manifest JSON: `{"subject_id": ..., "fs_hz": ...}`
//! - subscore CSV: header `subject_id,<subscale>...` with canonical names
//! - feature CSV: `subject_id` plus 44 columns named `<ABBR>_<h|v>`

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Minimum sample count for a valid recording.
pub const MIN_RECORDING_LEN: usize = 16;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("malformed CSV at {path}: {detail}")]
    MalformedCsv { path: String, detail: String },
    #[error("non-finite sample in {channel} at row {row}")]
    NonFiniteSample { channel: String, row: usize },
    #[error("channel length mismatch: h has {h_len}, v has {v_len}")]
    LengthMismatch { h_len: usize, v_len: usize },
    #[error("recording too short: {len} samples (minimum {MIN_RECORDING_LEN})")]
    TooShort { len: usize },
    #[error("invalid sampling rate {fs_hz}")]
    InvalidSamplingRate { fs_hz: f64 },
    #[error("unknown subscale column '{name}'")]
    UnknownSubscale { name: String },
    #[error("duplicate subject '{subject_id}'")]
    DuplicateSubject { subject_id: String },
    #[error("missing value for subject '{subject_id}', column '{column}'")]
    MissingValue { subject_id: String, column: String },
    #[error("unknown feature column '{name}'")]
    UnknownFeature { name: String },
    #[error("subject '{subject_id}' has no value for subscale {subscale}")]
    SubjectNotFound {
        subject_id: String,
        subscale: Subscale,
    },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path, source: std::io::Error) -> ModelError {
    ModelError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Write via a temp file in the target directory and rename into place, so
/// readers never observe a half-written file.
fn write_atomic(path: &Path, contents: &str) -> Result<(), ModelError> {
    use std::sync::atomic::{AtomicU64, Ordering};
    static COUNTER: AtomicU64 = AtomicU64::new(0);

    let n = COUNTER.fetch_add(1, Ordering::Relaxed);
    let tmp_name = format!(
        ".{}.tmp-{}-{n}",
        path.file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_else(|| "out".to_string()),
        std::process::id(),
    );
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, contents).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

// ---------------------------------------------------------------------------
// Channel
// ---------------------------------------------------------------------------

/// The two EOG channels. Feature names are suffixed `_h` / `_v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Channel {
    Horizontal,
    Vertical,
}

impl Channel {
    pub const ALL: [Channel; 2] = [Channel::Horizontal, Channel::Vertical];

    pub fn suffix(self) -> &'static str {
        match self {
            Channel::Horizontal => "h",
            Channel::Vertical => "v",
        }
    }

    pub fn index(self) -> usize {
        match self {
            Channel::Horizontal => 0,
            Channel::Vertical => 1,
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.suffix())
    }
}

// ---------------------------------------------------------------------------
// Recording
// ---------------------------------------------------------------------------

/// A two-channel EOG recording. Amplitudes are microvolts in files; the
/// numeric pipeline itself is unit-agnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub subject_id: String,
    pub fs_hz: f64,
    pub h: Vec<f64>,
    pub v: Vec<f64>,
}

impl Recording {
    /// Build a recording, enforcing the type invariants: equal channel
    /// lengths >= 16, positive sampling rate, all samples finite.
    pub fn new(
        subject_id: impl Into<String>,
        fs_hz: f64,
        h: Vec<f64>,
        v: Vec<f64>,
    ) -> Result<Self, ModelError> {
        if !(fs_hz.is_finite() && fs_hz > 0.0) {
            return Err(ModelError::InvalidSamplingRate { fs_hz });
        }
        if h.len() != v.len() {
            return Err(ModelError::LengthMismatch {
                h_len: h.len(),
                v_len: v.len(),
            });
        }
        if h.len() < MIN_RECORDING_LEN {
            return Err(ModelError::TooShort { len: h.len() });
        }
        for (name, chan) in [("h", &h), ("v", &v)] {
            if let Some(row) = chan.iter().position(|x| !x.is_finite()) {
                return Err(ModelError::NonFiniteSample {
                    channel: name.to_string(),
                    row,
                });
            }
        }
        Ok(Recording {
            subject_id: subject_id.into(),
            fs_hz,
            h,
            v,
        })
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.fs_hz
    }

    pub fn channel(&self, channel: Channel) -> &[f64] {
        match channel {
            Channel::Horizontal => &self.h,
            Channel::Vertical => &self.v,
        }
    }
}

/// Sidecar manifest carrying the metadata the sample CSV does not.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecordingManifest {
    pub subject_id: String,
    pub fs_hz: f64,
}

/// Load a recording from a sample CSV plus its manifest JSON.
pub fn load_recording(path: &Path, manifest_path: &Path) -> Result<Recording, ModelError> {
    let manifest_text = fs::read_to_string(manifest_path).map_err(|e| io_err(manifest_path, e))?;
    let manifest: RecordingManifest =
        serde_json::from_str(&manifest_text).map_err(|e| ModelError::MalformedCsv {
            path: manifest_path.display().to_string(),
            detail: format!("bad manifest JSON: {e}"),
        })?;

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| ModelError::MalformedCsv {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;

    let headers = reader
        .headers()
        .map_err(|e| ModelError::MalformedCsv {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?
        .clone();
    let expected = ["sample_index", "h_uV", "v_uV"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(ModelError::MalformedCsv {
            path: path.display().to_string(),
            detail: format!("expected header sample_index,h_uV,v_uV, got {headers:?}"),
        });
    }

    let mut h = Vec::new();
    let mut v = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| ModelError::MalformedCsv {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        if record.len() != 3 {
            return Err(ModelError::MalformedCsv {
                path: path.display().to_string(),
                detail: format!("row {row} has {} fields, expected 3", record.len()),
            });
        }
        let parse = |idx: usize, channel: &str| -> Result<f64, ModelError> {
            let text = record.get(idx).unwrap_or("");
            let value: f64 = text.parse().map_err(|_| ModelError::MalformedCsv {
                path: path.display().to_string(),
                detail: format!("row {row}: cannot parse '{text}' as a number"),
            })?;
            if !value.is_finite() {
                return Err(ModelError::NonFiniteSample {
                    channel: channel.to_string(),
                    row,
                });
            }
            Ok(value)
        };
        h.push(parse(1, "h")?);
        v.push(parse(2, "v")?);
    }

    Recording::new(manifest.subject_id, manifest.fs_hz, h, v)
}

/// Write a recording as sample CSV + manifest JSON. Floats use Rust's
/// shortest round-trip formatting, so a reload is bit-identical.
pub fn save_recording(
    rec: &Recording,
    path: &Path,
    manifest_path: &Path,
) -> Result<(), ModelError> {
    let mut out = String::from("sample_index,h_uV,v_uV\n");
    for (i, (h, v)) in rec.h.iter().zip(&rec.v).enumerate() {
        out.push_str(&format!("{i},{h},{v}\n"));
    }
    write_atomic(path, &out)?;

    let manifest = RecordingManifest {
        subject_id: rec.subject_id.clone(),
        fs_hz: rec.fs_hz,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_atomic(manifest_path, &text)
}

// ---------------------------------------------------------------------------
// Subscales and subscore tables
// ---------------------------------------------------------------------------

/// The seven questionnaire/test subscales scored by the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Subscale {
    NavigationOrientation,
    SpatialAnxiety,
    DistanceEstimation,
    LandmarkRecognition,
    PathRoute,
    PathSurvey,
    LocationAllocentric,
}

impl Subscale {
    pub const ALL: [Subscale; 7] = [
        Subscale::NavigationOrientation,
        Subscale::SpatialAnxiety,
        Subscale::DistanceEstimation,
        Subscale::LandmarkRecognition,
        Subscale::PathRoute,
        Subscale::PathSurvey,
        Subscale::LocationAllocentric,
    ];

    /// Canonical column name used in subscore CSV files.
    pub fn name(self) -> &'static str {
        match self {
            Subscale::NavigationOrientation => "NavigationOrientation",
            Subscale::SpatialAnxiety => "SpatialAnxiety",
            Subscale::DistanceEstimation => "DistanceEstimation",
            Subscale::LandmarkRecognition => "LandmarkRecognition",
            Subscale::PathRoute => "PathRoute",
            Subscale::PathSurvey => "PathSurvey",
            Subscale::LocationAllocentric => "LocationAllocentric",
        }
    }
}

impl fmt::Display for Subscale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subscale {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Subscale::ALL
            .into_iter()
            .find(|sub| sub.name() == s)
            .ok_or_else(|| ModelError::UnknownSubscale {
                name: s.to_string(),
            })
    }
}

/// Ground-truth subscore values per subject and subscale.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SubscoreTable {
    values: BTreeMap<String, BTreeMap<Subscale, f64>>,
}

impl SubscoreTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(
        &mut self,
        subject_id: impl Into<String>,
        subscale: Subscale,
        value: f64,
    ) -> Result<(), ModelError> {
        let subject_id = subject_id.into();
        if !value.is_finite() {
            return Err(ModelError::MissingValue {
                subject_id,
                column: subscale.name().to_string(),
            });
        }
        self.values
            .entry(subject_id)
            .or_default()
            .insert(subscale, value);
        Ok(())
    }

    pub fn get(&self, subject_id: &str, subscale: Subscale) -> Result<f64, ModelError> {
        self.values
            .get(subject_id)
            .and_then(|row| row.get(&subscale))
            .copied()
            .ok_or_else(|| ModelError::SubjectNotFound {
                subject_id: subject_id.to_string(),
                subscale,
            })
    }

    /// Subject ids in lexicographic order — the canonical ordering used for
    /// deterministic fold splits.
    pub fn subjects(&self) -> Vec<String> {
        self.values.keys().cloned().collect()
    }

    /// Subscales covered by at least one subject, in canonical order.
    pub fn subscales(&self) -> Vec<Subscale> {
        Subscale::ALL
            .into_iter()
            .filter(|sub| self.values.values().any(|row| row.contains_key(sub)))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.values.values().map(|row| row.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Load a subscore CSV: `subject_id` plus any subset of the seven canonical
/// subscale columns. Unknown columns, duplicate subjects, and empty cells
/// are errors.
pub fn load_subscores(path: &Path) -> Result<SubscoreTable, ModelError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| ModelError::MalformedCsv {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;

    let headers = reader
        .headers()
        .map_err(|e| ModelError::MalformedCsv {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?
        .clone();
    let mut columns = headers.iter();
    if columns.next() != Some("subject_id") {
        return Err(ModelError::MalformedCsv {
            path: path.display().to_string(),
            detail: "first column must be subject_id".to_string(),
        });
    }
    let subscales: Vec<Subscale> = columns
        .map(Subscale::from_str)
        .collect::<Result<_, _>>()?;

    let mut table = SubscoreTable::new();
    let mut seen = std::collections::BTreeSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| ModelError::MalformedCsv {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        let subject_id = record.get(0).unwrap_or("").to_string();
        if !seen.insert(subject_id.clone()) {
            return Err(ModelError::DuplicateSubject { subject_id });
        }
        for (idx, &subscale) in subscales.iter().enumerate() {
            let cell = record.get(idx + 1).unwrap_or("");
            if cell.is_empty() {
                return Err(ModelError::MissingValue {
                    subject_id,
                    column: subscale.name().to_string(),
                });
            }
            let value: f64 = cell.parse().map_err(|_| ModelError::MissingValue {
                subject_id: subject_id.clone(),
                column: subscale.name().to_string(),
            })?;
            table.insert(subject_id.clone(), subscale, value)?;
        }
    }
    Ok(table)
}

// ---------------------------------------------------------------------------
// Feature keys and vectors
// ---------------------------------------------------------------------------

/// The 22 per-channel statistic abbreviations, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FeatureAbbr {
    ME,
    MD,
    MO,
    VA,
    SD,
    SK,
    KU,
    MI,
    MA,
    RA,
    IQR,
    RMS,
    SMA,
    ER,
    EN,
    ZCR,
    AUC,
    SC,
    SB,
    LE,
    DFA,
    TK,
}

impl FeatureAbbr {
    pub const ALL: [FeatureAbbr; 22] = [
        FeatureAbbr::ME,
        FeatureAbbr::MD,
        FeatureAbbr::MO,
        FeatureAbbr::VA,
        FeatureAbbr::SD,
        FeatureAbbr::SK,
        FeatureAbbr::KU,
        FeatureAbbr::MI,
        FeatureAbbr::MA,
        FeatureAbbr::RA,
        FeatureAbbr::IQR,
        FeatureAbbr::RMS,
        FeatureAbbr::SMA,
        FeatureAbbr::ER,
        FeatureAbbr::EN,
        FeatureAbbr::ZCR,
        FeatureAbbr::AUC,
        FeatureAbbr::SC,
        FeatureAbbr::SB,
        FeatureAbbr::LE,
        FeatureAbbr::DFA,
        FeatureAbbr::TK,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureAbbr::ME => "ME",
            FeatureAbbr::MD => "MD",
            FeatureAbbr::MO => "MO",
            FeatureAbbr::VA => "VA",
            FeatureAbbr::SD => "SD",
            FeatureAbbr::SK => "SK",
            FeatureAbbr::KU => "KU",
            FeatureAbbr::MI => "MI",
            FeatureAbbr::MA => "MA",
            FeatureAbbr::RA => "RA",
            FeatureAbbr::IQR => "IQR",
            FeatureAbbr::RMS => "RMS",
            FeatureAbbr::SMA => "SMA",
            FeatureAbbr::ER => "ER",
            FeatureAbbr::EN => "EN",
            FeatureAbbr::ZCR => "ZCR",
            FeatureAbbr::AUC => "AUC",
            FeatureAbbr::SC => "SC",
            FeatureAbbr::SB => "SB",
            FeatureAbbr::LE => "LE",
            FeatureAbbr::DFA => "DFA",
            FeatureAbbr::TK => "TK",
        }
    }

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&a| a == self).expect("member")
    }
}

/// Number of entries in a full feature vector (22 statistics x 2 channels).
pub const FEATURE_COUNT: usize = FeatureAbbr::ALL.len() * 2;

/// One named feature: statistic abbreviation plus channel, e.g. `TK_h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct FeatureKey {
    pub abbr: FeatureAbbr,
    pub channel: Channel,
}

impl FeatureKey {
    pub fn new(abbr: FeatureAbbr, channel: Channel) -> Self {
        FeatureKey { abbr, channel }
    }

    /// Canonical column order: abbreviation-major, h before v.
    pub fn all() -> impl Iterator<Item = FeatureKey> {
        FeatureAbbr::ALL
            .into_iter()
            .flat_map(|abbr| Channel::ALL.into_iter().map(move |ch| FeatureKey::new(abbr, ch)))
    }

    pub fn index(self) -> usize {
        self.abbr.index() * 2 + self.channel.index()
    }

    pub fn from_index(index: usize) -> Self {
        let abbr = FeatureAbbr::ALL[index / 2];
        let channel = Channel::ALL[index % 2];
        FeatureKey::new(abbr, channel)
    }
}

impl fmt::Display for FeatureKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.abbr.name(), self.channel.suffix())
    }
}

impl FromStr for FeatureKey {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || ModelError::UnknownFeature {
            name: s.to_string(),
        };
        let (abbr_text, suffix) = s.rsplit_once('_').ok_or_else(unknown)?;
        let channel = match suffix {
            "h" => Channel::Horizontal,
            "v" => Channel::Vertical,
            _ => return Err(unknown()),
        };
        let abbr = FeatureAbbr::ALL
            .into_iter()
            .find(|a| a.name() == abbr_text)
            .ok_or_else(unknown)?;
        Ok(FeatureKey::new(abbr, channel))
    }
}

impl TryFrom<String> for FeatureKey {
    type Error = ModelError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<FeatureKey> for String {
    fn from(key: FeatureKey) -> Self {
        key.to_string()
    }
}

/// The 44 named scalar features for one recording, stored dense in
/// canonical column order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    values: [f64; FEATURE_COUNT],
}

impl FeatureVector {
    pub fn from_values(values: [f64; FEATURE_COUNT]) -> Self {
        FeatureVector { values }
    }

    pub fn zeros() -> Self {
        FeatureVector {
            values: [0.0; FEATURE_COUNT],
        }
    }

    /// All-zero vector with a single key set — handy for coefficient probes.
    pub fn basis(key: FeatureKey, value: f64) -> Self {
        let mut fv = Self::zeros();
        fv.set(key, value);
        fv
    }

    pub fn get(&self, key: FeatureKey) -> f64 {
        self.values[key.index()]
    }

    pub fn set(&mut self, key: FeatureKey, value: f64) {
        self.values[key.index()] = value;
    }

    pub fn values(&self) -> &[f64; FEATURE_COUNT] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (FeatureKey, f64)> + '_ {
        FeatureKey::all().map(move |k| (k, self.values[k.index()]))
    }
}

// ---------------------------------------------------------------------------
// Feature tables (per-subject rows)
// ---------------------------------------------------------------------------

/// Feature vectors for a cohort, one row per subject.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub rows: Vec<(String, FeatureVector)>,
}

impl FeatureTable {
    /// Values of one feature across subjects, in row order.
    pub fn column(&self, key: FeatureKey) -> Vec<f64> {
        self.rows.iter().map(|(_, fv)| fv.get(key)).collect()
    }

    pub fn subjects(&self) -> Vec<&str> {
        self.rows.iter().map(|(id, _)| id.as_str()).collect()
    }
}

/// Write a feature table as CSV. Shortest round-trip float formatting keeps
/// reloads lossless.
pub fn save_feature_table(table: &FeatureTable, path: &Path) -> Result<(), ModelError> {
    let mut out = String::from("subject_id");
    for key in FeatureKey::all() {
        out.push(',');
        out.push_str(&key.to_string());
    }
    out.push('\n');
    for (subject, fv) in &table.rows {
        out.push_str(subject);
        for key in FeatureKey::all() {
            out.push(',');
            out.push_str(&format!("{}", fv.get(key)));
        }
        out.push('\n');
    }
    write_atomic(path, &out)
}

/// Load a feature CSV produced by [`save_feature_table`]. Columns may be in
/// any order but must cover exactly the 44 canonical keys.
pub fn load_feature_table(path: &Path) -> Result<FeatureTable, ModelError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| ModelError::MalformedCsv {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;

    let headers = reader
        .headers()
        .map_err(|e| ModelError::MalformedCsv {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?
        .clone();
    let mut columns = headers.iter();
    if columns.next() != Some("subject_id") {
        return Err(ModelError::MalformedCsv {
            path: path.display().to_string(),
            detail: "first column must be subject_id".to_string(),
        });
    }
    let keys: Vec<FeatureKey> = columns.map(FeatureKey::from_str).collect::<Result<_, _>>()?;
    if keys.len() != FEATURE_COUNT {
        return Err(ModelError::MalformedCsv {
            path: path.display().to_string(),
            detail: format!("expected {FEATURE_COUNT} feature columns, got {}", keys.len()),
        });
    }

    let mut rows = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| ModelError::MalformedCsv {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        let subject_id = record.get(0).unwrap_or("").to_string();
        if !seen.insert(subject_id.clone()) {
            return Err(ModelError::DuplicateSubject { subject_id });
        }
        let mut fv = FeatureVector::zeros();
        for (idx, &key) in keys.iter().enumerate() {
            let cell = record.get(idx + 1).unwrap_or("");
            let value: f64 = cell.parse().map_err(|_| ModelError::MissingValue {
                subject_id: subject_id.clone(),
                column: key.to_string(),
            })?;
            fv.set(key, value);
        }
        rows.push((subject_id, fv));
    }
    Ok(FeatureTable { rows })
}

// ---------------------------------------------------------------------------
// Event counts
// ---------------------------------------------------------------------------

/// Ground-truth eye-movement event summary for one recording. Produced by
/// the synthetic generator or ingested from an annotation file — never
/// detected from the signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventCounts {
    pub blink_count: u32,
    pub fixation_count: u32,
    pub fixation_duration_s: f64,
    pub saccade_count: u32,
    pub saccade_duration_s: f64,
}

/// The five event measures, in the column order used by event CSV files.
pub const EVENT_MEASURES: [&str; 5] = [
    "blink_count",
    "fixation_count",
    "fixation_duration_s",
    "saccade_count",
    "saccade_duration_s",
];

impl EventCounts {
    pub fn measure(&self, name: &str) -> Option<f64> {
        match name {
            "blink_count" => Some(f64::from(self.blink_count)),
            "fixation_count" => Some(f64::from(self.fixation_count)),
            "fixation_duration_s" => Some(self.fixation_duration_s),
            "saccade_count" => Some(f64::from(self.saccade_count)),
            "saccade_duration_s" => Some(self.saccade_duration_s),
            _ => None,
        }
    }
}

/// Load an event-count CSV: `subject_id` plus the five measure columns.
pub fn load_events(path: &Path) -> Result<Vec<(String, EventCounts)>, ModelError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| ModelError::MalformedCsv {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
    let headers = reader
        .headers()
        .map_err(|e| ModelError::MalformedCsv {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?
        .clone();
    let mut expected = vec!["subject_id"];
    expected.extend(EVENT_MEASURES);
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(ModelError::MalformedCsv {
            path: path.display().to_string(),
            detail: format!("expected header {expected:?}"),
        });
    }

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| ModelError::MalformedCsv {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        let subject_id = record.get(0).unwrap_or("").to_string();
        let field = |idx: usize| -> Result<f64, ModelError> {
            record
                .get(idx)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| ModelError::MissingValue {
                    subject_id: subject_id.clone(),
                    column: EVENT_MEASURES[idx - 1].to_string(),
                })
        };
        rows.push((
            subject_id.clone(),
            EventCounts {
                blink_count: field(1)? as u32,
                fixation_count: field(2)? as u32,
                fixation_duration_s: field(3)?,
                saccade_count: field(4)? as u32,
                saccade_duration_s: field(5)?,
            },
        ));
    }
    Ok(rows)
}

/// Write an event-count CSV.
pub fn save_events(rows: &[(String, EventCounts)], path: &Path) -> Result<(), ModelError> {
    let mut out = String::from("subject_id");
    for m in EVENT_MEASURES {
        out.push(',');
        out.push_str(m);
    }
    out.push('\n');
    for (subject, ev) in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            subject,
            ev.blink_count,
            ev.fixation_count,
            ev.fixation_duration_s,
            ev.saccade_count,
            ev.saccade_duration_s
        ));
    }
    write_atomic(path, &out)
}
