//! Nonlinear dynamics features: detrended fluctuation analysis, the
//! Rosenstein largest-Lyapunov-exponent estimate, and the Teager-Kaiser
//! energy operator.

use crate::numeric;

/// DFA-1 scaling exponent: integrate the mean-removed signal, measure the
/// RMS of linearly detrended fluctuations in non-overlapping boxes whose
/// sizes are log-spaced between `min_box` and N/4, and return the slope of
/// log F(s) against log s.
pub fn dfa_alpha(x: &[f64], min_box: usize, num_boxes: usize) -> f64 {
    let n = x.len();
    let max_box = (n / 4).max(min_box + 1);

    // Log-spaced box sizes, deduplicated after rounding.
    let mut sizes = Vec::with_capacity(num_boxes);
    let lo = (min_box as f64).ln();
    let hi = (max_box as f64).ln();
    for k in 0..num_boxes {
        let t = if num_boxes > 1 {
            k as f64 / (num_boxes - 1) as f64
        } else {
            0.0
        };
        let s = (lo + t * (hi - lo)).exp().round() as usize;
        if sizes.last() != Some(&s) && s >= min_box.max(4) {
            sizes.push(s);
        }
    }

    let m = x.iter().sum::<f64>() / n as f64;
    let mut profile = Vec::with_capacity(n);
    let mut acc = 0.0;
    for &v in x {
        acc += v - m;
        profile.push(acc);
    }

    let mut log_s = Vec::with_capacity(sizes.len());
    let mut log_f = Vec::with_capacity(sizes.len());
    for &s in &sizes {
        let boxes = n / s;
        if boxes == 0 {
            continue;
        }
        let t: Vec<f64> = (0..s).map(|i| i as f64).collect();
        let mut total_sq = 0.0;
        for b in 0..boxes {
            let seg = &profile[b * s..(b + 1) * s];
            let (slope, intercept) = numeric::linear_fit(&t, seg);
            for (i, &v) in seg.iter().enumerate() {
                let r = v - (slope * i as f64 + intercept);
                total_sq += r * r;
            }
        }
        let fluct = (total_sq / (boxes * s) as f64).sqrt();
        if fluct > 0.0 {
            log_s.push((s as f64).ln());
            log_f.push(fluct.ln());
        }
    }

    if log_s.len() < 2 {
        return 0.0;
    }
    numeric::linear_fit(&log_s, &log_f).0
}

/// Mean Teager-Kaiser energy: psi[n] = x[n]^2 - x[n-1] x[n+1], averaged over
/// the interior samples.
pub fn teager_kaiser_mean(x: &[f64]) -> f64 {
    if x.len() < 3 {
        return 0.0;
    }
    let mut sum = 0.0;
    for i in 1..x.len() - 1 {
        sum += x[i] * x[i] - x[i - 1] * x[i + 1];
    }
    sum / (x.len() - 2) as f64
}

/// Largest Lyapunov exponent via the Rosenstein method, in nats per sample
/// step: delay-embed the series, follow each point's nearest neighbor
/// (outside a Theiler window), and fit the slope of the mean log divergence
/// over the first `fit_len` steps.
///
/// Reference points are strided down to at most 1024 so long recordings
/// stay tractable; the stride is deterministic.
pub fn lyapunov_rosenstein(x: &[f64], embed_dim: usize, delay: usize, fit_len: usize) -> f64 {
    const MAX_REF_POINTS: usize = 1024;

    let span = (embed_dim - 1) * delay;
    if x.len() <= span + fit_len + 2 {
        return 0.0;
    }
    let m = x.len() - span;
    let point = |i: usize, d: usize| x[i + d * delay];
    let dist_sq = |i: usize, j: usize| -> f64 {
        let mut s = 0.0;
        for d in 0..embed_dim {
            let diff = point(i, d) - point(j, d);
            s += diff * diff;
        }
        s
    };

    let theiler = span.max(1);
    let usable = m.saturating_sub(fit_len);
    if usable < 2 {
        return 0.0;
    }
    let stride = usable.div_ceil(MAX_REF_POINTS).max(1);

    // Mean log distance at each divergence step.
    let mut log_sum = vec![0.0; fit_len + 1];
    let mut log_count = vec![0usize; fit_len + 1];

    let mut i = 0;
    while i < usable {
        // Nearest neighbor outside the Theiler window that can also be
        // followed for fit_len steps.
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for j in 0..usable {
            if j.abs_diff(i) <= theiler {
                continue;
            }
            let d = dist_sq(i, j);
            if d < best_d {
                best_d = d;
                best = j;
            }
        }
        if best != usize::MAX && best_d > 0.0 {
            for (k, (ls, lc)) in log_sum.iter_mut().zip(log_count.iter_mut()).enumerate() {
                let d = dist_sq(i + k, best + k);
                if d > 0.0 {
                    *ls += 0.5 * d.ln();
                    *lc += 1;
                }
            }
        }
        i += stride;
    }

    let mut ks = Vec::new();
    let mut ys = Vec::new();
    for (k, (&ls, &lc)) in log_sum.iter().zip(&log_count).enumerate() {
        if lc > 0 {
            ks.push(k as f64);
            ys.push(ls / lc as f64);
        }
    }
    if ks.len() < 2 {
        return 0.0;
    }
    numeric::linear_fit(&ks, &ys).0
}
