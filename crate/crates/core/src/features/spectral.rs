//! Welch power spectral density and the spectral centroid / bandwidth
//! features computed from it.

use rustfft::{num_complex::Complex, FftPlanner};

/// One-sided Welch PSD plus the two spectral moments.
#[derive(Debug, Clone)]
pub struct WelchSpectrum {
    /// Bin center frequencies in Hz (0 to Nyquist inclusive).
    pub freqs_hz: Vec<f64>,
    /// Power density per bin.
    pub power: Vec<f64>,
    /// Power-weighted mean frequency.
    pub centroid_hz: f64,
    /// Power-weighted standard deviation around the centroid.
    pub bandwidth_hz: f64,
}

fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos()))
        .collect()
}

/// Welch's averaged periodogram with a Hann window. When the requested
/// segment exceeds the signal length it shrinks to the largest power of two
/// that fits. Each segment has its mean removed before windowing.
pub fn welch_psd(x: &[f64], fs_hz: f64, segment: usize, overlap: f64) -> WelchSpectrum {
    let seg_len = if segment <= x.len() {
        segment
    } else {
        let mut p = 1usize;
        while p * 2 <= x.len() {
            p *= 2;
        }
        p
    };
    let seg_len = seg_len.max(8).min(x.len());
    let hop = ((seg_len as f64) * (1.0 - overlap)).max(1.0) as usize;

    let window = hann(seg_len);
    let window_power: f64 = window.iter().map(|w| w * w).sum::<f64>() / seg_len as f64;

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(seg_len);

    let bins = seg_len / 2 + 1;
    let mut power = vec![0.0; bins];
    let mut segments = 0usize;
    let mut start = 0;
    let mut buffer = vec![Complex::new(0.0, 0.0); seg_len];
    while start + seg_len <= x.len() {
        let seg = &x[start..start + seg_len];
        let seg_mean = seg.iter().sum::<f64>() / seg_len as f64;
        for (b, (&s, &w)) in buffer.iter_mut().zip(seg.iter().zip(&window)) {
            *b = Complex::new((s - seg_mean) * w, 0.0);
        }
        fft.process(&mut buffer);
        for (k, p) in power.iter_mut().enumerate() {
            let mag_sq = buffer[k].norm_sqr();
            // One-sided density: double everything except DC and Nyquist.
            let factor = if k == 0 || (seg_len % 2 == 0 && k == bins - 1) {
                1.0
            } else {
                2.0
            };
            *p += factor * mag_sq;
        }
        segments += 1;
        start += hop;
    }

    if segments > 0 {
        let scale = 1.0 / (fs_hz * window_power * seg_len as f64 * segments as f64);
        for p in power.iter_mut() {
            *p *= scale;
        }
    }

    let freqs_hz: Vec<f64> = (0..bins).map(|k| k as f64 * fs_hz / seg_len as f64).collect();

    let total: f64 = power.iter().sum();
    let (centroid_hz, bandwidth_hz) = if total > 0.0 {
        let centroid = freqs_hz
            .iter()
            .zip(&power)
            .map(|(&f, &p)| f * p)
            .sum::<f64>()
            / total;
        let spread = freqs_hz
            .iter()
            .zip(&power)
            .map(|(&f, &p)| (f - centroid) * (f - centroid) * p)
            .sum::<f64>()
            / total;
        (centroid, spread.sqrt())
    } else {
        (0.0, 0.0)
    };

    WelchSpectrum {
        freqs_hz,
        power,
        centroid_hz,
        bandwidth_hz,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn sine(freq: f64, fs: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * freq * i as f64 / fs).sin())
            .collect()
    }

    #[test]
    fn centroid_tracks_a_pure_tone() {
        let fs = 250.0;
        let x = sine(10.0, fs, 8192);
        let spec = welch_psd(&x, fs, 1024, 0.5);
        let resolution = fs / 1024.0;
        assert!(
            (spec.centroid_hz - 10.0).abs() < 2.0 * resolution,
            "centroid {}",
            spec.centroid_hz
        );
        assert!(spec.bandwidth_hz < 2.0, "bandwidth {}", spec.bandwidth_hz);
    }

    #[test]
    fn two_tones_center_between_them() {
        let fs = 250.0;
        let n = 8192;
        let x: Vec<f64> = sine(10.0, fs, n)
            .iter()
            .zip(&sine(30.0, fs, n))
            .map(|(a, b)| a + b)
            .collect();
        let spec = welch_psd(&x, fs, 1024, 0.5);
        assert!(
            (spec.centroid_hz - 20.0).abs() < 1.0,
            "centroid {}",
            spec.centroid_hz
        );
        // Equal power at +-10 Hz around the centroid.
        assert!(
            (spec.bandwidth_hz - 10.0).abs() < 1.0,
            "bandwidth {}",
            spec.bandwidth_hz
        );
    }

    #[test]
    fn segment_shrinks_for_short_signals() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x: Vec<f64> = (0..300).map(|_| rng.random_range(-1.0..1.0)).collect();
        let spec = welch_psd(&x, 250.0, 1024, 0.5);
        // 256 is the largest power of two <= 300.
        assert_eq!(spec.power.len(), 256 / 2 + 1);
        assert!(spec.centroid_hz.is_finite());
    }

    #[test]
    fn parseval_power_matches_variance() {
        // Integrated PSD approximates the signal variance for white noise.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x: Vec<f64> = (0..16384)
            .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let fs = 250.0;
        let spec = welch_psd(&x, fs, 1024, 0.5);
        let df = fs / 1024.0;
        let integrated: f64 = spec.power.iter().sum::<f64>() * df;
        let var = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
        assert!(
            (integrated / var - 1.0).abs() < 0.1,
            "integrated {integrated} vs variance {var}"
        );
    }
}
