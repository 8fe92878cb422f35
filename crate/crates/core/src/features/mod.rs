//! The 22 per-channel signal statistics and the 44-entry feature vector.
//!
//! Conventions (the formulas are prose in the source material, so every
//! choice is pinned here): population (1/N) moments, excess kurtosis,
//! a shared 64-bin histogram for mode and entropy, linear-interpolation
//! quantiles, zero-crossings per second with zeros inheriting the previous
//! nonzero sign, and a signed trapezoidal time integral.

mod nonlinear;
mod spectral;

pub use nonlinear::{dfa_alpha, lyapunov_rosenstein, teager_kaiser_mean};
pub use spectral::{welch_psd, WelchSpectrum};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    Channel, FeatureAbbr, FeatureKey, FeatureTable, FeatureVector, Recording,
};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("degenerate signal on channel {channel} of '{subject_id}': zero variance")]
    DegenerateSignal { subject_id: String, channel: Channel },
    #[error("'{subject_id}' too short for feature extraction: {len} samples, need {need}")]
    TooShort {
        subject_id: String,
        len: usize,
        need: usize,
    },
    #[error("duplicate subject '{subject_id}' in feature table input")]
    DuplicateSubject { subject_id: String },
}

/// Histogram bin count shared by the mode and entropy features.
pub const HIST_BINS: usize = 64;

/// Minimum channel length for the spectral / DFA / Lyapunov features.
pub const MIN_FEATURE_LEN: usize = 256;

/// Tunables for the spectral and nonlinear features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub hist_bins: usize,
    pub psd_segment: usize,
    pub psd_overlap: f64,
    pub lyap_embed_dim: usize,
    pub lyap_delay: usize,
    pub lyap_fit_len: usize,
    pub dfa_min_box: usize,
    pub dfa_num_boxes: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            hist_bins: HIST_BINS,
            psd_segment: 1024,
            psd_overlap: 0.5,
            lyap_embed_dim: 5,
            lyap_delay: 4,
            lyap_fit_len: 50,
            dfa_min_box: 4,
            dfa_num_boxes: 16,
        }
    }
}

// ---------------------------------------------------------------------------
// Scalar statistics (each a pure function of one channel)
// ---------------------------------------------------------------------------

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn median(x: &[f64]) -> f64 {
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

fn histogram(x: &[f64], bins: usize) -> Option<Vec<usize>> {
    let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return None;
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in x {
        let bin = (((v - lo) / width) as usize).min(bins - 1);
        counts[bin] += 1;
    }
    Some(counts)
}

/// Center of the most populated histogram bin; ties go to the lowest bin.
/// A constant signal is its own mode.
pub fn mode(x: &[f64], bins: usize) -> f64 {
    let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    match histogram(x, bins) {
        None => lo,
        Some(counts) => {
            let best = counts
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
                .map(|(i, _)| i)
                .unwrap_or(0);
            let width = (hi - lo) / bins as f64;
            lo + (best as f64 + 0.5) * width
        }
    }
}

pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|&v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
}

pub fn skewness(x: &[f64]) -> Option<f64> {
    let m = mean(x);
    let sd = variance(x).sqrt();
    if sd == 0.0 {
        return None;
    }
    Some(x.iter().map(|&v| ((v - m) / sd).powi(3)).sum::<f64>() / x.len() as f64)
}

/// Excess kurtosis (normal distribution scores 0).
pub fn kurtosis(x: &[f64]) -> Option<f64> {
    let m = mean(x);
    let sd = variance(x).sqrt();
    if sd == 0.0 {
        return None;
    }
    Some(x.iter().map(|&v| ((v - m) / sd).powi(4)).sum::<f64>() / x.len() as f64 - 3.0)
}

/// Linear-interpolation quantile (q in [0, 1]) of the sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = pos - lo as f64;
        sorted[lo] * (1.0 - frac) + sorted[hi] * frac
    }
}

pub fn interquartile_range(x: &[f64]) -> f64 {
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    quantile(&sorted, 0.75) - quantile(&sorted, 0.25)
}

pub fn root_mean_square(x: &[f64]) -> f64 {
    (x.iter().map(|&v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

/// Normalized integral of the absolute amplitude: mean |x|.
pub fn signal_magnitude_area(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum::<f64>() / x.len() as f64
}

/// Total energy: sum of squared amplitudes.
pub fn energy(x: &[f64]) -> f64 {
    x.iter().map(|&v| v * v).sum()
}

/// Shannon entropy (natural log) of the histogram probability vector.
/// Empty bins contribute nothing; a constant signal has entropy 0.
pub fn entropy(x: &[f64], bins: usize) -> f64 {
    match histogram(x, bins) {
        None => 0.0,
        Some(counts) => {
            let n = x.len() as f64;
            counts
                .iter()
                .filter(|&&c| c > 0)
                .map(|&c| {
                    let p = c as f64 / n;
                    -p * p.ln()
                })
                .sum()
        }
    }
}

/// Strict sign changes per second. Zeros inherit the previous nonzero sign,
/// so touching zero never counts as a crossing.
pub fn zero_crossing_rate(x: &[f64], fs_hz: f64) -> f64 {
    let mut prev_sign = 0i8;
    let mut crossings = 0usize;
    for &v in x {
        let sign = if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            prev_sign
        };
        if sign != 0 && prev_sign != 0 && sign != prev_sign {
            crossings += 1;
        }
        if sign != 0 {
            prev_sign = sign;
        }
    }
    crossings as f64 / (x.len() as f64 / fs_hz)
}

/// Signed trapezoidal integral of amplitude against time (amplitude-seconds).
pub fn area_under_curve(x: &[f64], fs_hz: f64) -> f64 {
    x.windows(2).map(|w| (w[0] + w[1]) / 2.0).sum::<f64>() / fs_hz
}

// ---------------------------------------------------------------------------
// Full per-channel extraction
// ---------------------------------------------------------------------------

fn extract_channel(
    subject_id: &str,
    channel: Channel,
    x: &[f64],
    fs_hz: f64,
    cfg: &FeatureConfig,
) -> Result<[f64; 22], FeatureError> {
    if x.len() < MIN_FEATURE_LEN {
        return Err(FeatureError::TooShort {
            subject_id: subject_id.to_string(),
            len: x.len(),
            need: MIN_FEATURE_LEN,
        });
    }
    let degenerate = || FeatureError::DegenerateSignal {
        subject_id: subject_id.to_string(),
        channel,
    };

    let mi = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let ma = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let va = variance(x);
    let sk = skewness(x).ok_or_else(degenerate)?;
    let ku = kurtosis(x).ok_or_else(degenerate)?;
    let spectrum = welch_psd(x, fs_hz, cfg.psd_segment, cfg.psd_overlap);

    let mut out = [0.0; 22];
    for abbr in FeatureAbbr::ALL {
        out[abbr.index()] = match abbr {
            FeatureAbbr::ME => mean(x),
            FeatureAbbr::MD => median(x),
            FeatureAbbr::MO => mode(x, cfg.hist_bins),
            FeatureAbbr::VA => va,
            FeatureAbbr::SD => va.sqrt(),
            FeatureAbbr::SK => sk,
            FeatureAbbr::KU => ku,
            FeatureAbbr::MI => mi,
            FeatureAbbr::MA => ma,
            FeatureAbbr::RA => ma - mi,
            FeatureAbbr::IQR => interquartile_range(x),
            FeatureAbbr::RMS => root_mean_square(x),
            FeatureAbbr::SMA => signal_magnitude_area(x),
            FeatureAbbr::ER => energy(x),
            FeatureAbbr::EN => entropy(x, cfg.hist_bins),
            FeatureAbbr::ZCR => zero_crossing_rate(x, fs_hz),
            FeatureAbbr::AUC => area_under_curve(x, fs_hz),
            FeatureAbbr::SC => spectrum.centroid_hz,
            FeatureAbbr::SB => spectrum.bandwidth_hz,
            FeatureAbbr::LE => {
                lyapunov_rosenstein(x, cfg.lyap_embed_dim, cfg.lyap_delay, cfg.lyap_fit_len)
            }
            FeatureAbbr::DFA => dfa_alpha(x, cfg.dfa_min_box, cfg.dfa_num_boxes),
            FeatureAbbr::TK => teager_kaiser_mean(x),
        };
    }
    Ok(out)
}

/// Compute all 44 features (22 per channel) for one recording. The
/// recording is expected to be preprocessed already.
pub fn extract_all(rec: &Recording, cfg: &FeatureConfig) -> Result<FeatureVector, FeatureError> {
    let h = extract_channel(&rec.subject_id, Channel::Horizontal, &rec.h, rec.fs_hz, cfg)?;
    let v = extract_channel(&rec.subject_id, Channel::Vertical, &rec.v, rec.fs_hz, cfg)?;
    let mut fv = FeatureVector::zeros();
    for abbr in FeatureAbbr::ALL {
        fv.set(FeatureKey::new(abbr, Channel::Horizontal), h[abbr.index()]);
        fv.set(FeatureKey::new(abbr, Channel::Vertical), v[abbr.index()]);
    }
    Ok(fv)
}

/// Feature vectors for a cohort, one row per recording in input order.
/// Recordings are processed in parallel; the output order is fixed, so the
/// result is identical regardless of thread count.
pub fn feature_table(
    recordings: &[Recording],
    cfg: &FeatureConfig,
) -> Result<FeatureTable, FeatureError> {
    let mut seen = std::collections::BTreeSet::new();
    for rec in recordings {
        if !seen.insert(rec.subject_id.as_str()) {
            return Err(FeatureError::DuplicateSubject {
                subject_id: rec.subject_id.clone(),
            });
        }
    }
    let rows = recordings
        .par_iter()
        .map(|rec| Ok((rec.subject_id.clone(), extract_all(rec, cfg)?)))
        .collect::<Result<Vec<_>, FeatureError>>()?;
    Ok(FeatureTable { rows })
}
