//! Small dense least-squares kernels shared by the preprocessing, feature,
//! and derivation code. Systems here are tiny (at most a dozen unknowns), so
//! normal equations plus a Jacobi-eigendecomposition fallback cover every
//! case, including rank-deficient designs where the minimum-norm solution is
//! required for determinism.

/// Result of a least-squares fit.
#[derive(Debug, Clone)]
pub struct Lstsq {
    /// Coefficients in column order (intercept last when requested).
    pub coeffs: Vec<f64>,
    /// True when the normal equations were rank-deficient and the
    /// minimum-norm pseudo-inverse solution was used instead.
    pub singular: bool,
}

/// Relative eigenvalue cutoff for treating a direction as null space.
const RANK_TOL: f64 = 1e-10;

/// Least squares of `y` against the given columns, optionally with an
/// intercept appended as the last coefficient. Falls back to the
/// minimum-norm solution when the design is rank-deficient.
pub fn lstsq(columns: &[&[f64]], y: &[f64], intercept: bool) -> Lstsq {
    let n = y.len();
    let p = columns.len() + usize::from(intercept);
    debug_assert!(columns.iter().all(|c| c.len() == n));

    // Gram matrix G = X'X and right-hand side X'y, with the intercept
    // treated as an all-ones column.
    let col = |j: usize, i: usize| -> f64 {
        if j < columns.len() {
            columns[j][i]
        } else {
            1.0
        }
    };
    let mut gram = vec![0.0; p * p];
    let mut rhs = vec![0.0; p];
    for a in 0..p {
        for b in a..p {
            let mut s = 0.0;
            for i in 0..n {
                s += col(a, i) * col(b, i);
            }
            gram[a * p + b] = s;
            gram[b * p + a] = s;
        }
        let mut s = 0.0;
        for (i, &yi) in y.iter().enumerate() {
            s += col(a, i) * yi;
        }
        rhs[a] = s;
    }

    match solve_spd(&gram, &rhs, p) {
        Some(coeffs) => Lstsq {
            coeffs,
            singular: false,
        },
        None => Lstsq {
            coeffs: pinv_solve(&gram, &rhs, p),
            singular: true,
        },
    }
}

/// Cholesky solve of a symmetric positive-definite system. Returns None when
/// a pivot falls below the rank tolerance (rank-deficient or indefinite).
fn solve_spd(a: &[f64], b: &[f64], p: usize) -> Option<Vec<f64>> {
    let max_diag = (0..p).map(|i| a[i * p + i].abs()).fold(0.0_f64, f64::max);
    if max_diag == 0.0 {
        return None;
    }
    let tol = RANK_TOL * max_diag;

    // Lower-triangular Cholesky factor.
    let mut l = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..=i {
            let mut s = a[i * p + j];
            for k in 0..j {
                s -= l[i * p + k] * l[j * p + k];
            }
            if i == j {
                if s <= tol {
                    return None;
                }
                l[i * p + i] = s.sqrt();
            } else {
                l[i * p + j] = s / l[j * p + j];
            }
        }
    }

    // Forward then backward substitution.
    let mut x = b.to_vec();
    for i in 0..p {
        for k in 0..i {
            x[i] -= l[i * p + k] * x[k];
        }
        x[i] /= l[i * p + i];
    }
    for i in (0..p).rev() {
        for k in i + 1..p {
            x[i] -= l[k * p + i] * x[k];
        }
        x[i] /= l[i * p + i];
    }
    Some(x)
}

/// Minimum-norm solution via eigendecomposition of the Gram matrix:
/// x = V diag(1/lambda_i) V' b with small eigenvalues zeroed.
fn pinv_solve(a: &[f64], b: &[f64], p: usize) -> Vec<f64> {
    let (vals, vecs) = jacobi_eigen(a, p);
    let max_val = vals.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
    let tol = RANK_TOL * max_val;

    let mut x = vec![0.0; p];
    for (k, &lambda) in vals.iter().enumerate() {
        if lambda.abs() <= tol {
            continue;
        }
        let mut dot = 0.0;
        for i in 0..p {
            dot += vecs[i * p + k] * b[i];
        }
        let scale = dot / lambda;
        for i in 0..p {
            x[i] += scale * vecs[i * p + k];
        }
    }
    x
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
/// (eigenvalues, eigenvectors as columns). Plenty for p <= 12.
fn jacobi_eigen(a: &[f64], p: usize) -> (Vec<f64>, Vec<f64>) {
    let mut m = a.to_vec();
    let mut v = vec![0.0; p * p];
    for i in 0..p {
        v[i * p + i] = 1.0;
    }

    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..p {
            for j in i + 1..p {
                off += m[i * p + j] * m[i * p + j];
            }
        }
        if off.sqrt() < 1e-14 * (1.0 + frobenius(&m, p)) {
            break;
        }
        for i in 0..p {
            for j in i + 1..p {
                let apq = m[i * p + j];
                if apq == 0.0 {
                    continue;
                }
                let app = m[i * p + i];
                let aqq = m[j * p + j];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..p {
                    let mik = m[i * p + k];
                    let mjk = m[j * p + k];
                    m[i * p + k] = c * mik - s * mjk;
                    m[j * p + k] = s * mik + c * mjk;
                }
                for k in 0..p {
                    let mki = m[k * p + i];
                    let mkj = m[k * p + j];
                    m[k * p + i] = c * mki - s * mkj;
                    m[k * p + j] = s * mki + c * mkj;
                    let vki = v[k * p + i];
                    let vkj = v[k * p + j];
                    v[k * p + i] = c * vki - s * vkj;
                    v[k * p + j] = s * vki + c * vkj;
                }
            }
        }
    }

    let vals = (0..p).map(|i| m[i * p + i]).collect();
    (vals, v)
}

fn frobenius(m: &[f64], p: usize) -> f64 {
    m.iter().take(p * p).map(|x| x * x).sum::<f64>().sqrt()
}

/// Slope and intercept of the least-squares line through (x, y).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    debug_assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// Least-squares polynomial coefficients (ascending powers) of y over the
/// given abscissa.
pub fn polyfit(x: &[f64], y: &[f64], degree: usize) -> Vec<f64> {
    let powers: Vec<Vec<f64>> = (0..=degree)
        .map(|d| x.iter().map(|&xi| xi.powi(d as i32)).collect())
        .collect();
    let cols: Vec<&[f64]> = powers.iter().map(|c| c.as_slice()).collect();
    lstsq(&cols, y, false).coeffs
}

/// Evaluate ascending-power polynomial coefficients at x (Horner).
pub fn polyval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}
