//! Signal conditioning for raw EOG channels: linear detrend, zero-phase
//! band-limiting, median and Savitzky-Golay smoothing, and BIC-selected
//! polynomial baseline removal. Every stage preserves length and is a pure
//! function of its input, so channels can be processed in parallel.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ModelError, Recording};
use crate::numeric;

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("signal too short: {len} samples, need at least {need}")]
    TooShort { len: usize, need: usize },
    #[error("invalid cutoff: high-pass {hp_hz} Hz, low-pass {lp_hz} Hz at fs {fs_hz} Hz")]
    InvalidCutoff { hp_hz: f64, lp_hz: f64, fs_hz: f64 },
    #[error("median kernel must be odd, got {kernel}")]
    EvenKernel { kernel: usize },
    #[error("polynomial order {order} must be below window {window}")]
    OrderTooHigh { order: usize, window: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Conditioning-chain parameters. Defaults: 20 Hz low-pass, 0.05 Hz
/// high-pass, median kernel 5, SG window 7 / order 2, baseline degrees 1-10.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    pub lp_cutoff_hz: f64,
    pub hp_cutoff_hz: f64,
    pub median_kernel: usize,
    pub sg_window: usize,
    pub sg_order: usize,
    pub baseline_degree_max: usize,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            lp_cutoff_hz: 20.0,
            hp_cutoff_hz: 0.05,
            median_kernel: 5,
            sg_window: 7,
            sg_order: 2,
            baseline_degree_max: 10,
        }
    }
}

/// Butterworth order used for both band edges.
const FILTER_ORDER: usize = 4;

// ---------------------------------------------------------------------------
// Linear detrend
// ---------------------------------------------------------------------------

/// Subtract the least-squares line from the signal.
pub fn detrend_linear(x: &[f64]) -> Result<Vec<f64>, PreprocessError> {
    if x.len() < 2 {
        return Err(PreprocessError::TooShort {
            len: x.len(),
            need: 2,
        });
    }
    let t: Vec<f64> = (0..x.len()).map(|i| i as f64).collect();
    let (slope, intercept) = numeric::linear_fit(&t, x);
    Ok(x.iter()
        .zip(&t)
        .map(|(&xi, &ti)| xi - (slope * ti + intercept))
        .collect())
}

// ---------------------------------------------------------------------------
// Zero-phase Butterworth band-limiting
// ---------------------------------------------------------------------------

/// One second-order section in direct form II transposed.
#[derive(Debug, Clone, Copy)]
struct Biquad {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
}

impl Biquad {
    fn dc_gain(&self) -> f64 {
        (self.b0 + self.b1 + self.b2) / (1.0 + self.a1 + self.a2)
    }

    /// Filter in place with the internal state initialized to the
    /// steady-state response for a constant input at `level`. Seeding with
    /// the signal mean keeps constants exact and avoids exciting the very
    /// slow high-pass modes at the edges, which would otherwise ring for
    /// thousands of samples at a 0.05 Hz cutoff.
    fn filter(&self, x: &mut [f64], level: f64) {
        let y_ss = self.dc_gain() * level;
        let mut z2 = self.b2 * level - self.a2 * y_ss;
        let mut z1 = self.b1 * level + z2 - self.a1 * y_ss;
        for sample in x.iter_mut() {
            let xi = *sample;
            let y = self.b0 * xi + z1;
            z1 = self.b1 * xi - self.a1 * y + z2;
            z2 = self.b2 * xi - self.a2 * y;
            *sample = y;
        }
    }
}

/// Stage Q values for a 4th-order Butterworth split into two biquads.
const BUTTER4_Q: [f64; 2] = [0.541_196_100_146_197, 1.306_562_964_876_377];

fn butter_lowpass(cutoff_hz: f64, fs_hz: f64) -> [Biquad; 2] {
    let w0 = 2.0 * std::f64::consts::PI * cutoff_hz / fs_hz;
    let (sin_w0, cos_w0) = w0.sin_cos();
    BUTTER4_Q.map(|q| {
        let alpha = sin_w0 / (2.0 * q);
        let a0 = 1.0 + alpha;
        Biquad {
            b0: (1.0 - cos_w0) / 2.0 / a0,
            b1: (1.0 - cos_w0) / a0,
            b2: (1.0 - cos_w0) / 2.0 / a0,
            a1: -2.0 * cos_w0 / a0,
            a2: (1.0 - alpha) / a0,
        }
    })
}

fn butter_highpass(cutoff_hz: f64, fs_hz: f64) -> [Biquad; 2] {
    let w0 = 2.0 * std::f64::consts::PI * cutoff_hz / fs_hz;
    let (sin_w0, cos_w0) = w0.sin_cos();
    BUTTER4_Q.map(|q| {
        let alpha = sin_w0 / (2.0 * q);
        let a0 = 1.0 + alpha;
        Biquad {
            b0: (1.0 + cos_w0) / 2.0 / a0,
            b1: -(1.0 + cos_w0) / a0,
            b2: (1.0 + cos_w0) / 2.0 / a0,
            a1: -2.0 * cos_w0 / a0,
            a2: (1.0 - alpha) / a0,
        }
    })
}

fn run_cascade(sections: &[Biquad], x: &mut [f64]) {
    for section in sections {
        let level = x.iter().sum::<f64>() / x.len() as f64;
        section.filter(x, level);
    }
}

/// Forward-backward filtering with reflected padding of 3x the filter order
/// at each edge, giving zero phase and a squared magnitude response. The
/// reflection is anti-symmetric about the endpoint values, which keeps the
/// edge slope continuous so the narrow high-pass sees no artificial corner.
fn filtfilt(sections: &[Biquad], x: &[f64]) -> Result<Vec<f64>, PreprocessError> {
    let pad = 3 * FILTER_ORDER;
    if x.len() <= pad {
        return Err(PreprocessError::TooShort {
            len: x.len(),
            need: pad + 1,
        });
    }

    let n = x.len();
    let mut ext = Vec::with_capacity(n + 2 * pad);
    for i in (1..=pad).rev() {
        ext.push(2.0 * x[0] - x[i]);
    }
    ext.extend_from_slice(x);
    for i in 1..=pad {
        ext.push(2.0 * x[n - 1] - x[n - 1 - i]);
    }

    run_cascade(sections, &mut ext);
    ext.reverse();
    run_cascade(sections, &mut ext);
    ext.reverse();

    Ok(ext[pad..pad + n].to_vec())
}

/// Zero-phase band-pass: 4th-order Butterworth low-pass then high-pass,
/// each applied forward and backward.
pub fn bandpass(x: &[f64], fs_hz: f64, cfg: &PreprocessConfig) -> Result<Vec<f64>, PreprocessError> {
    if !(cfg.hp_cutoff_hz > 0.0 && cfg.hp_cutoff_hz < cfg.lp_cutoff_hz && cfg.lp_cutoff_hz < fs_hz / 2.0)
    {
        return Err(PreprocessError::InvalidCutoff {
            hp_hz: cfg.hp_cutoff_hz,
            lp_hz: cfg.lp_cutoff_hz,
            fs_hz,
        });
    }
    if x.len() <= 6 * FILTER_ORDER {
        return Err(PreprocessError::TooShort {
            len: x.len(),
            need: 6 * FILTER_ORDER + 1,
        });
    }
    let low = filtfilt(&butter_lowpass(cfg.lp_cutoff_hz, fs_hz), x)?;
    filtfilt(&butter_highpass(cfg.hp_cutoff_hz, fs_hz), &low)
}

// ---------------------------------------------------------------------------
// Median smoothing
// ---------------------------------------------------------------------------

/// Sliding-window median with replicate padding at the edges.
pub fn median_smooth(x: &[f64], kernel: usize) -> Result<Vec<f64>, PreprocessError> {
    if kernel.is_multiple_of(2) || kernel == 0 {
        return Err(PreprocessError::EvenKernel { kernel });
    }
    if x.len() < kernel {
        return Err(PreprocessError::TooShort {
            len: x.len(),
            need: kernel,
        });
    }
    let half = kernel / 2;
    let n = x.len() as isize;
    let mut window = vec![0.0; kernel];
    let mut out = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        for (w, offset) in window.iter_mut().zip(-(half as isize)..=(half as isize)) {
            let idx = (i as isize + offset).clamp(0, n - 1) as usize;
            *w = x[idx];
        }
        window.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
        out.push(window[half]);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Savitzky-Golay smoothing
// ---------------------------------------------------------------------------

/// Convolution kernel that evaluates the local least-squares polynomial of
/// the given order at the window center.
fn savgol_kernel(window: usize, order: usize) -> Vec<f64> {
    let half = (window / 2) as isize;
    let x: Vec<f64> = (-half..=half).map(|i| i as f64).collect();
    // Kernel weight for tap j: value at 0 of the polynomial fit to the unit
    // impulse at j. Equivalent to the center row of the SG projection matrix.
    let mut kernel = vec![0.0; window];
    for (j, k) in kernel.iter_mut().enumerate() {
        let mut impulse = vec![0.0; window];
        impulse[j] = 1.0;
        let coeffs = numeric::polyfit(&x, &impulse, order);
        *k = coeffs[0];
    }
    kernel
}

/// Savitzky-Golay smoothing with replicate padding.
pub fn savitzky_golay(x: &[f64], window: usize, order: usize) -> Result<Vec<f64>, PreprocessError> {
    if window.is_multiple_of(2) || window == 0 {
        return Err(PreprocessError::EvenKernel { kernel: window });
    }
    if order >= window {
        return Err(PreprocessError::OrderTooHigh { order, window });
    }
    if x.len() < window {
        return Err(PreprocessError::TooShort {
            len: x.len(),
            need: window,
        });
    }
    let kernel = savgol_kernel(window, order);
    let half = (window / 2) as isize;
    let n = x.len() as isize;
    let mut out = Vec::with_capacity(x.len());
    for i in 0..n {
        let mut acc = 0.0;
        for (j, &k) in kernel.iter().enumerate() {
            let idx = (i + j as isize - half).clamp(0, n - 1) as usize;
            acc += k * x[idx];
        }
        out.push(acc);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// BIC baseline removal
// ---------------------------------------------------------------------------

/// Fit polynomials of degree 1..=degree_max over an abscissa normalized to
/// [-1, 1], pick the degree minimizing BIC(d) = N ln(RSS/N) + (d+1) ln N,
/// and subtract that fit. Ties go to the lower degree.
pub fn bic_baseline_remove(
    x: &[f64],
    degree_max: usize,
) -> Result<(Vec<f64>, usize), PreprocessError> {
    let n = x.len();
    if n <= degree_max + 2 {
        return Err(PreprocessError::TooShort {
            len: n,
            need: degree_max + 3,
        });
    }
    let t: Vec<f64> = (0..n)
        .map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64)
        .collect();
    let scale = x.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
    // Residual sums below rounding level are indistinguishable; flooring the
    // RSS turns them into exact BIC ties so the lowest degree wins.
    let rss_floor = (n as f64 * (1e-12 * scale).powi(2)).max(1e-300);

    let nf = n as f64;
    let mut best_degree = 1;
    let mut best_bic = f64::INFINITY;
    let mut best_fit: Option<Vec<f64>> = None;
    for degree in 1..=degree_max {
        let coeffs = numeric::polyfit(&t, x, degree);
        let mut rss = 0.0;
        for (&ti, &xi) in t.iter().zip(x) {
            let r = xi - numeric::polyval(&coeffs, ti);
            rss += r * r;
        }
        let bic = nf * (rss.max(rss_floor) / nf).ln() + (degree as f64 + 1.0) * nf.ln();
        if bic < best_bic {
            best_bic = bic;
            best_degree = degree;
            best_fit = Some(coeffs);
        }
    }

    let coeffs = best_fit.expect("degree range nonempty");
    let residual = t
        .iter()
        .zip(x)
        .map(|(&ti, &xi)| xi - numeric::polyval(&coeffs, ti))
        .collect();
    Ok((residual, best_degree))
}

// ---------------------------------------------------------------------------
// Full chain
// ---------------------------------------------------------------------------

fn preprocess_channel(
    x: &[f64],
    fs_hz: f64,
    cfg: &PreprocessConfig,
) -> Result<Vec<f64>, PreprocessError> {
    let stage = detrend_linear(x)?;
    let stage = bandpass(&stage, fs_hz, cfg)?;
    let stage = median_smooth(&stage, cfg.median_kernel)?;
    let stage = savitzky_golay(&stage, cfg.sg_window, cfg.sg_order)?;
    let (stage, _degree) = bic_baseline_remove(&stage, cfg.baseline_degree_max)?;
    Ok(stage)
}

/// Run the full conditioning chain on both channels:
/// detrend -> band-pass -> median -> Savitzky-Golay -> BIC baseline removal.
pub fn preprocess(rec: &Recording, cfg: &PreprocessConfig) -> Result<Recording, PreprocessError> {
    let h = preprocess_channel(&rec.h, rec.fs_hz, cfg)?;
    let v = preprocess_channel(&rec.v, rec.fs_hz, cfg)?;
    Ok(Recording::new(rec.subject_id.clone(), rec.fs_hz, h, v)?)
}
