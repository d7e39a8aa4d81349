//! Brute-force reference implementations used as oracles by the property
//! and acceptance tests. Everything here is written independently of the
//! library code paths it checks: plain dense arithmetic, explicit Gaussian
//! elimination, direct numerical quadrature.

#![allow(dead_code)]

/// Solve A x = b by Gaussian elimination with partial pivoting. Intended for
/// tiny systems (dim <= 8). Returns None when the pivot collapses.
pub fn solve_dense(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = a[i].clone();
            row.push(b[i]);
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| m[r][col].abs().total_cmp(&m[s][col].abs()))?;
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        for row in 0..n {
            if row != col {
                let f = m[row][col] / m[col][col];
                for k in col..=n {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

/// Least squares with intercept by explicit normal equations: columns are
/// dense predictor vectors. Returns (intercept, coefficients).
pub fn ols_normal_equations(cols: &[Vec<f64>], y: &[f64]) -> Option<(f64, Vec<f64>)> {
    let n = y.len();
    let k = cols.len() + 1;
    let design: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = vec![1.0];
            row.extend(cols.iter().map(|c| c[i]));
            row
        })
        .collect();
    let mut ata = vec![vec![0.0; k]; k];
    let mut aty = vec![0.0; k];
    for row in 0..n {
        for a in 0..k {
            aty[a] += design[row][a] * y[row];
            for b in 0..k {
                ata[a][b] += design[row][a] * design[row][b];
            }
        }
    }
    let sol = solve_dense(&ata, &aty)?;
    Some((sol[0], sol[1..].to_vec()))
}

fn normal_pdf(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive_simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = normal_pdf(lm);
    let frm = normal_pdf(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * eps {
        left + right + (left + right - whole) / 15.0
    } else {
        adaptive_simpson(a, m, fa, flm, fm, left, eps / 2.0, depth - 1)
            + adaptive_simpson(m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
    }
}

/// Standard normal CDF by adaptive Simpson quadrature of the density over
/// [0, |x|], exploiting symmetry so that Phi(-x) = 1 - Phi(x) exactly.
pub fn normal_cdf_oracle(x: f64) -> f64 {
    let ax = x.abs().min(40.0);
    if ax == 0.0 {
        return 0.5;
    }
    let fa = normal_pdf(0.0);
    let fb = normal_pdf(ax);
    let fm = normal_pdf(0.5 * ax);
    let whole = simpson(0.0, ax, fa, fm, fb);
    let integral = adaptive_simpson(0.0, ax, fa, fm, fb, whole, 1e-14, 48);
    if x >= 0.0 {
        0.5 + integral
    } else {
        0.5 - integral
    }
}

/// Direct probit comparison: class 1 iff 1 - Phi((b - m)/sigma) >= Phi((a - m)/sigma).
pub fn probit_decision_oracle(m: f64, sigma: f64, a: f64, b: f64) -> u8 {
    let p_hi = 1.0 - normal_cdf_oracle((b - m) / sigma);
    let p_lo = normal_cdf_oracle((a - m) / sigma);
    u8::from(p_hi >= p_lo)
}

/// Nearest class mean under the S_w Mahalanobis metric; ties go to class 1.
/// `scores` is row-major n x t, classes are 0/1.
pub fn mahalanobis_classify_oracle(
    scores: &[Vec<f64>],
    classes: &[u8],
    x: &[f64],
    jitter: f64,
) -> Option<u8> {
    let t = x.len();
    let mean = |cls: u8| -> Option<Vec<f64>> {
        let rows: Vec<&Vec<f64>> = scores
            .iter()
            .zip(classes)
            .filter(|(_, &c)| c == cls)
            .map(|(r, _)| r)
            .collect();
        if rows.is_empty() {
            return None;
        }
        let mut m = vec![0.0; t];
        for r in &rows {
            for j in 0..t {
                m[j] += r[j];
            }
        }
        for v in m.iter_mut() {
            *v /= rows.len() as f64;
        }
        Some(m)
    };
    let m1 = mean(1)?;
    let m0 = mean(0)?;
    let n = scores.len();
    let mut sw = vec![vec![0.0; t]; t];
    for (row, &c) in scores.iter().zip(classes) {
        let m = if c == 1 { &m1 } else { &m0 };
        for a in 0..t {
            for b in 0..t {
                sw[a][b] += (row[a] - m[a]) * (row[b] - m[b]);
            }
        }
    }
    let denom = (n as f64 - 2.0).max(1.0);
    let mut trace = 0.0;
    for a in 0..t {
        for b in 0..t {
            sw[a][b] /= denom;
        }
        trace += sw[a][a];
    }
    for a in 0..t {
        sw[a][a] += jitter * trace / t as f64;
    }
    let quad = |mu: &[f64]| -> Option<f64> {
        let d: Vec<f64> = (0..t).map(|j| x[j] - mu[j]).collect();
        let s = solve_dense(&sw, &d)?;
        Some(d.iter().zip(&s).map(|(a, b)| a * b).sum())
    };
    let d1 = quad(&m1)?;
    let d0 = quad(&m0)?;
    Some(u8::from(d1 <= d0))
}

/// Weighted lasso objective on a dense design with per-group intercepts:
/// (1/2n) sum_i (y_i - mu_{g_i} - z_i . coef)^2 + lambda * sum_j w_j |coef_j|.
pub fn dense_objective(
    cols: &[Vec<f64>],
    y: &[f64],
    groups: &[usize],
    mu: &[f64],
    coef: &[f64],
    lambda: f64,
    w: &[f64],
) -> f64 {
    let n = y.len();
    let mut rss = 0.0;
    for i in 0..n {
        let mut fit = mu[groups[i]];
        for (j, c) in cols.iter().enumerate() {
            fit += c[i] * coef[j];
        }
        rss += (y[i] - fit) * (y[i] - fit);
    }
    let pen: f64 = coef.iter().zip(w).map(|(b, wj)| wj * b.abs()).sum();
    rss / (2.0 * n as f64) + lambda * pen
}

/// Exact soft threshold used by the closed-form single-column check.
pub fn soft_threshold_oracle(z: f64, t: f64) -> f64 {
    z.signum() * (z.abs() - t).max(0.0)
}

/// Distinct (row, col) incidence count through a hash set; oracle for nnz.
pub fn nnz_set_oracle(pairs: impl IntoIterator<Item = (usize, usize)>) -> usize {
    let set: std::collections::HashSet<(usize, usize)> = pairs.into_iter().collect();
    set.len()
}

/// True when consecutive ratios of a positive decreasing sequence are equal
/// up to `tol` (geometric spacing).
pub fn is_geometric(values: &[f64], tol: f64) -> bool {
    if values.len() < 3 {
        return true;
    }
    let r0 = values[1] / values[0];
    values
        .windows(2)
        .all(|w| (w[1] / w[0] - r0).abs() <= tol * r0.abs())
}

/// Sample median (averages the middle pair for even lengths).
pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}
