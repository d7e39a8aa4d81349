//! Weighted lasso by cyclic coordinate descent over a warm-started lambda
//! grid, the data-shared augmented design, and least-squares refitting.
//!
//! The data-shared model
//!
//! ```text
//! y_i = mu_{g_i} + x_i' (beta + Delta_{g_i}) + eps_i
//! ```
//!
//! with penalty `lambda (||w . beta||_1 + sum_g r_g ||w . Delta_g||_1)`
//! reduces to a single weighted lasso on the augmented design
//! `Z = [X | X^(1) | ... | X^(G)]`, where `X^(g)` keeps the rows of group g
//! scaled by `1/r_g` and zeroes everything else. The stacked block
//! coefficients `gamma_g` recover `Delta_g = gamma_g / r_g`. Intercepts are
//! never penalized; they are updated as a block in every sweep.

use nalgebra::{DMatrix, DVector};

use crate::sparse::SparseBinaryMatrix;
use crate::{Error, Result};

/// Soft threshold: sign(z) (|z| - t)_+ with the boundary |z| = t mapping to
/// exactly zero.
pub fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Sparse column-major design for the coordinate-descent solver, with the
/// per-column penalty weights and the per-row group labels it needs.
#[derive(Debug, Clone)]
pub struct DslDesign {
    pub n: usize,
    /// Number of original features p; the stacked design has p(G+1) columns.
    /// Zero for generic designs built by [`DslDesign::from_dense`].
    pub p_base: usize,
    pub g_count: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<u32>,
    values: Vec<f64>,
    /// Penalty weight per stacked column.
    pub penalty: Vec<f64>,
    col_sq: Vec<f64>,
    /// Scale divided out of each column (all ones unless standardized).
    col_scale: Vec<f64>,
    /// Group of each design row.
    pub row_group: Vec<u32>,
    group_rows: Vec<Vec<u32>>,
    pub r: Vec<f64>,
}

impl DslDesign {
    pub fn n_cols(&self) -> usize {
        self.col_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    /// Value of the (dense) entry, for small tests.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        let (lo, hi) = (self.col_ptr[col], self.col_ptr[col + 1]);
        match self.row_idx[lo..hi].binary_search(&(row as u32)) {
            Ok(k) => self.values[lo + k] * self.col_scale[col],
            Err(_) => 0.0,
        }
    }

    fn finish(
        n: usize,
        p_base: usize,
        g_count: usize,
        cols: Vec<Vec<(u32, f64)>>,
        penalty: Vec<f64>,
        row_group: Vec<u32>,
        r: Vec<f64>,
        standardize: bool,
    ) -> Self {
        let mut col_ptr = Vec::with_capacity(cols.len() + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0usize);
        for col in &cols {
            for &(i, v) in col {
                row_idx.push(i);
                values.push(v);
            }
            col_ptr.push(row_idx.len());
        }
        let mut col_scale = vec![1.0; cols.len()];
        if standardize && n >= 2 {
            for j in 0..cols.len() {
                let (lo, hi) = (col_ptr[j], col_ptr[j + 1]);
                let (mut s, mut s2) = (0.0, 0.0);
                for k in lo..hi {
                    s += values[k];
                    s2 += values[k] * values[k];
                }
                let var = (s2 - s * s / n as f64) / (n as f64 - 1.0);
                if var > 1e-24 {
                    let sd = var.sqrt();
                    for k in lo..hi {
                        values[k] /= sd;
                    }
                    col_scale[j] = sd;
                }
            }
        }
        let col_sq: Vec<f64> = (0..cols.len())
            .map(|j| values[col_ptr[j]..col_ptr[j + 1]].iter().map(|v| v * v).sum())
            .collect();
        let mut group_rows = vec![Vec::new(); g_count];
        for (i, &g) in row_group.iter().enumerate() {
            group_rows[g as usize].push(i as u32);
        }
        DslDesign {
            n,
            p_base,
            g_count,
            col_ptr,
            row_idx,
            values,
            penalty,
            col_sq,
            col_scale,
            row_group,
            group_rows,
            r,
        }
    }

    /// Generic sparse design from dense columns, for direct solver use.
    pub fn from_dense(
        columns: &[Vec<f64>],
        penalty: &[f64],
        row_group: Vec<u32>,
        g_count: usize,
    ) -> Result<Self> {
        let n = row_group.len();
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::config("all columns must have one entry per row"));
        }
        if penalty.len() != columns.len() {
            return Err(Error::config("one penalty weight per column is required"));
        }
        let cols: Vec<Vec<(u32, f64)>> = columns
            .iter()
            .map(|c| {
                c.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(i, &v)| (i as u32, v))
                    .collect()
            })
            .collect();
        Ok(Self::finish(
            n,
            0,
            g_count,
            cols,
            penalty.to_vec(),
            row_group,
            vec![1.0; g_count],
            false,
        ))
    }
}

/// Build the augmented data-shared design over the given row multiset.
/// `groups` is indexed by original row id; `rows` may repeat rows (bootstrap
/// samples). The result has p(G+1) columns and exactly twice the nonzeros of
/// the selected rows of X.
pub fn build_dsl_design(
    x: &SparseBinaryMatrix,
    rows: &[usize],
    groups: &[u32],
    r: &[f64],
    w: &[f64],
    standardize: bool,
) -> Result<DslDesign> {
    let p = x.n_cols();
    let g_count = r.len();
    if w.len() != p {
        return Err(Error::config("one feature weight per column is required"));
    }
    if groups.len() != x.n_rows() {
        return Err(Error::config("one group label per design row is required"));
    }
    if r.iter().any(|&v| !(v > 0.0)) || w.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::config("penalty and group weights must be positive"));
    }
    let mut cols: Vec<Vec<(u32, f64)>> = vec![Vec::new(); p * (g_count + 1)];
    let mut row_group = Vec::with_capacity(rows.len());
    for (i, &orig) in rows.iter().enumerate() {
        let g = groups[orig] as usize;
        if g >= g_count {
            return Err(Error::config(format!("row {orig}: group id {g} out of range")));
        }
        row_group.push(g as u32);
        let scale = 1.0 / r[g];
        for &j in x.row(orig) {
            cols[j as usize].push((i as u32, 1.0));
            cols[p * (1 + g) + j as usize].push((i as u32, scale));
        }
    }
    let mut penalty = Vec::with_capacity(p * (g_count + 1));
    for _ in 0..=g_count {
        penalty.extend_from_slice(w);
    }
    Ok(DslDesign::finish(
        rows.len(),
        p,
        g_count,
        cols,
        penalty,
        row_group,
        r.to_vec(),
        standardize,
    ))
}

/// Strictly decreasing, log-spaced penalty grid.
#[derive(Debug, Clone)]
pub struct LambdaGrid {
    pub values: Vec<f64>,
}

/// Grid from lambda_max (the smallest lambda with an all-zero solution)
/// down to eps * lambda_max in k log-spaced steps. The response is centered
/// per group, matching the unpenalized intercepts.
pub fn make_lambda_grid(design: &DslDesign, y: &[f64], k: usize, eps: f64) -> Result<LambdaGrid> {
    if k < 2 {
        return Err(Error::config("lambda grid needs at least 2 values"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::config("grid eps must lie in (0, 1)"));
    }
    if y.len() != design.n {
        return Err(Error::config("response length must match the design"));
    }
    let y_centered = center_per_group(design, y);
    let n = design.n as f64;
    let mut lambda_max = 0.0f64;
    for j in 0..design.n_cols() {
        if design.col_sq[j] <= 0.0 {
            continue;
        }
        let (lo, hi) = (design.col_ptr[j], design.col_ptr[j + 1]);
        let mut dot = 0.0;
        for t in lo..hi {
            dot += design.values[t] * y_centered[design.row_idx[t] as usize];
        }
        lambda_max = lambda_max.max(dot.abs() / (n * design.penalty[j]));
    }
    if !(lambda_max > 0.0) {
        return Err(Error::config(
            "response is uncorrelated with every design column; cannot build a lambda grid",
        ));
    }
    // Pad past the rounding error of the correlations so the head of the
    // grid always thresholds every coefficient to zero.
    lambda_max *= 1.0 + 1e-10;
    let values = (0..k)
        .map(|i| lambda_max * eps.powf(i as f64 / (k - 1) as f64))
        .collect();
    Ok(LambdaGrid { values })
}

fn center_per_group(design: &DslDesign, y: &[f64]) -> Vec<f64> {
    let mut sums = vec![0.0; design.g_count];
    for (i, &g) in design.row_group.iter().enumerate() {
        sums[g as usize] += y[i];
    }
    let means: Vec<f64> = sums
        .iter()
        .zip(&design.group_rows)
        .map(|(s, rows)| if rows.is_empty() { 0.0 } else { s / rows.len() as f64 })
        .collect();
    y.iter()
        .zip(&design.row_group)
        .map(|(&v, &g)| v - means[g as usize])
        .collect()
}

/// One point of the solution path, in solver column scale.
#[derive(Debug, Clone)]
pub struct PathFit {
    pub lambda: f64,
    /// Per-group unpenalized intercepts.
    pub mu: Vec<f64>,
    /// Stacked coefficients on the (possibly standardized) design columns.
    pub coefs: Vec<f64>,
    pub converged: bool,
    pub sweeps: usize,
    pub objective: f64,
}

/// Data-shared view of a path point: shared effects, per-group offsets and
/// the per-group active sets S_g = { j : beta_j + Delta_{g,j} != 0 }.
#[derive(Debug, Clone)]
pub struct LassoFit {
    pub lambda: f64,
    pub intercepts: Vec<f64>,
    pub beta_shared: Vec<f64>,
    pub deltas: Vec<Vec<f64>>,
    pub active_per_group: Vec<Vec<usize>>,
    pub converged: bool,
}

impl LassoFit {
    /// Union of the per-group active sets, sorted.
    pub fn pooled_support(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.active_per_group.iter().flatten().copied().collect();
        all.sort_unstable();
        all.dedup();
        all
    }
}

impl DslDesign {
    /// Coefficients rescaled to the solver's input columns (undoes the
    /// standardization scale).
    pub fn original_coefs(&self, fit: &PathFit) -> Vec<f64> {
        fit.coefs
            .iter()
            .zip(&self.col_scale)
            .map(|(c, s)| c / s)
            .collect()
    }

    /// Per-group active sets without materializing the dense view.
    pub fn active_sets(&self, fit: &PathFit) -> Vec<Vec<usize>> {
        assert!(self.p_base > 0, "active sets need a data-shared design");
        let p = self.p_base;
        let shared: Vec<usize> = (0..p).filter(|&j| fit.coefs[j] != 0.0).collect();
        (0..self.g_count)
            .map(|g| {
                let base = p * (1 + g);
                let mut js: Vec<usize> = shared.clone();
                js.extend((0..p).filter(|&j| fit.coefs[base + j] != 0.0));
                js.sort_unstable();
                js.dedup();
                js.retain(|&j| {
                    let beta = fit.coefs[j] / self.col_scale[j];
                    let delta =
                        fit.coefs[base + j] / (self.col_scale[base + j] * self.r[g]);
                    beta + delta != 0.0
                });
                js
            })
            .collect()
    }

    /// Full data-shared view of a path point.
    pub fn dsl_view(&self, fit: &PathFit) -> LassoFit {
        assert!(self.p_base > 0, "dsl_view needs a data-shared design");
        let p = self.p_base;
        let orig = self.original_coefs(fit);
        let beta_shared: Vec<f64> = orig[..p].to_vec();
        let deltas: Vec<Vec<f64>> = (0..self.g_count)
            .map(|g| {
                let base = p * (1 + g);
                (0..p).map(|j| orig[base + j] / self.r[g]).collect()
            })
            .collect();
        LassoFit {
            lambda: fit.lambda,
            intercepts: fit.mu.clone(),
            beta_shared,
            deltas,
            active_per_group: self.active_sets(fit),
            converged: fit.converged,
        }
    }

    /// Fitted value for design row `i` under a path fit.
    pub fn fitted_row(&self, fit: &PathFit, i: usize) -> f64 {
        let mut v = fit.mu[self.row_group[i] as usize];
        for j in 0..self.n_cols() {
            if fit.coefs[j] != 0.0 {
                let (lo, hi) = (self.col_ptr[j], self.col_ptr[j + 1]);
                if let Ok(k) = self.row_idx[lo..hi].binary_search(&(i as u32)) {
                    v += self.values[lo + k] * fit.coefs[j];
                }
            }
        }
        v
    }
}

struct Solver<'a> {
    design: &'a DslDesign,
    coefs: Vec<f64>,
    mu: Vec<f64>,
    residual: Vec<f64>,
}

impl<'a> Solver<'a> {
    fn new(design: &'a DslDesign, y: &[f64]) -> Self {
        let mut mu = vec![0.0; design.g_count];
        for (g, rows) in design.group_rows.iter().enumerate() {
            if !rows.is_empty() {
                mu[g] = rows.iter().map(|&i| y[i as usize]).sum::<f64>() / rows.len() as f64;
            }
        }
        let residual = y
            .iter()
            .zip(&design.row_group)
            .map(|(&v, &g)| v - mu[g as usize])
            .collect();
        Solver {
            design,
            coefs: vec![0.0; design.n_cols()],
            mu,
            residual,
        }
    }

    fn update_intercepts(&mut self) -> f64 {
        let mut max_change = 0.0f64;
        for (g, rows) in self.design.group_rows.iter().enumerate() {
            if rows.is_empty() {
                continue;
            }
            let shift = rows.iter().map(|&i| self.residual[i as usize]).sum::<f64>()
                / rows.len() as f64;
            if shift != 0.0 {
                self.mu[g] += shift;
                for &i in rows {
                    self.residual[i as usize] -= shift;
                }
                max_change = max_change.max(shift.abs());
            }
        }
        max_change
    }

    fn sweep(&mut self, lambda: f64, cols: &[usize]) -> f64 {
        let d = self.design;
        let n = d.n as f64;
        let mut max_change = 0.0f64;
        for &j in cols {
            let cs = d.col_sq[j];
            if cs <= 0.0 {
                continue;
            }
            let (lo, hi) = (d.col_ptr[j], d.col_ptr[j + 1]);
            let mut dot = 0.0;
            for k in lo..hi {
                dot += d.values[k] * self.residual[d.row_idx[k] as usize];
            }
            let rho = (dot + cs * self.coefs[j]) / n;
            let new = soft_threshold(rho, lambda * d.penalty[j]) * n / cs;
            let delta = new - self.coefs[j];
            if delta != 0.0 {
                for k in lo..hi {
                    self.residual[d.row_idx[k] as usize] -= d.values[k] * delta;
                }
                self.coefs[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        max_change.max(self.update_intercepts())
    }

    /// Full sweep, then iterate the active set, then confirm with another
    /// full sweep; converged when a full sweep moves nothing beyond tol.
    fn fit(&mut self, lambda: f64, tol: f64, max_iter: usize) -> (bool, usize) {
        let all: Vec<usize> = (0..self.design.n_cols()).collect();
        let mut sweeps = 0usize;
        loop {
            let moved = self.sweep(lambda, &all);
            sweeps += 1;
            if moved < tol {
                return (true, sweeps);
            }
            if sweeps >= max_iter {
                return (false, sweeps);
            }
            let active: Vec<usize> = (0..self.design.n_cols())
                .filter(|&j| self.coefs[j] != 0.0)
                .collect();
            loop {
                let moved = self.sweep(lambda, &active);
                sweeps += 1;
                if moved < tol {
                    break;
                }
                if sweeps >= max_iter {
                    return (false, sweeps);
                }
            }
        }
    }

    fn objective(&self, lambda: f64) -> f64 {
        let rss: f64 = self.residual.iter().map(|r| r * r).sum();
        let pen: f64 = self
            .coefs
            .iter()
            .zip(&self.design.penalty)
            .map(|(c, w)| w * c.abs())
            .sum();
        rss / (2.0 * self.design.n as f64) + lambda * pen
    }

    fn snapshot(&self, lambda: f64, converged: bool, sweeps: usize) -> PathFit {
        PathFit {
            lambda,
            mu: self.mu.clone(),
            coefs: self.coefs.clone(),
            converged,
            sweeps,
            objective: self.objective(lambda),
        }
    }
}

/// Convergence tolerance derived from the response scale.
pub fn default_tol(y: &[f64]) -> f64 {
    1e-7 * sample_sd(y).max(1e-12)
}

pub(crate) fn sample_sd(y: &[f64]) -> f64 {
    if y.len() < 2 {
        return 0.0;
    }
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    var.max(0.0).sqrt()
}

/// Solve the whole grid with warm starts: the solution at grid[i] seeds
/// grid[i + 1].
pub fn fit_path(
    design: &DslDesign,
    y: &[f64],
    grid: &LambdaGrid,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<PathFit>> {
    if y.len() != design.n {
        return Err(Error::config("response length must match the design"));
    }
    if !(tol > 0.0) {
        return Err(Error::config("solver tolerance must be positive"));
    }
    let mut solver = Solver::new(design, y);
    let mut fits = Vec::with_capacity(grid.values.len());
    for &lambda in &grid.values {
        let (converged, sweeps) = solver.fit(lambda, tol, max_iter);
        if !converged {
            log::warn!("lambda {lambda:.6e}: no convergence after {sweeps} sweeps");
        }
        fits.push(solver.snapshot(lambda, converged, sweeps));
    }
    Ok(fits)
}

/// Cold solve at a single lambda, starting from the all-zero model.
pub fn fit_single(
    design: &DslDesign,
    y: &[f64],
    lambda: f64,
    tol: f64,
    max_iter: usize,
) -> Result<PathFit> {
    if y.len() != design.n {
        return Err(Error::config("response length must match the design"));
    }
    let mut solver = Solver::new(design, y);
    let (converged, sweeps) = solver.fit(lambda, tol, max_iter);
    Ok(solver.snapshot(lambda, converged, sweeps))
}

/// Maximum stationarity violation of a fit: subgradient slack at zero
/// coefficients, gradient residual at nonzero ones, and the per-group mean
/// residuals for the unpenalized intercepts.
pub fn kkt_violation(design: &DslDesign, y: &[f64], fit: &PathFit) -> f64 {
    let n = design.n as f64;
    let mut residual: Vec<f64> = y
        .iter()
        .zip(&design.row_group)
        .map(|(&v, &g)| v - fit.mu[g as usize])
        .collect();
    for j in 0..design.n_cols() {
        if fit.coefs[j] != 0.0 {
            let (lo, hi) = (design.col_ptr[j], design.col_ptr[j + 1]);
            for k in lo..hi {
                residual[design.row_idx[k] as usize] -= design.values[k] * fit.coefs[j];
            }
        }
    }
    let mut worst = 0.0f64;
    for j in 0..design.n_cols() {
        if design.col_sq[j] <= 0.0 {
            continue;
        }
        let (lo, hi) = (design.col_ptr[j], design.col_ptr[j + 1]);
        let mut dot = 0.0;
        for k in lo..hi {
            dot += design.values[k] * residual[design.row_idx[k] as usize];
        }
        let grad = dot / n;
        let thr = fit.lambda * design.penalty[j];
        let v = if fit.coefs[j] == 0.0 {
            (grad.abs() - thr).max(0.0)
        } else {
            (grad - thr * fit.coefs[j].signum()).abs()
        };
        worst = worst.max(v);
    }
    for rows in &design.group_rows {
        if rows.is_empty() {
            continue;
        }
        let mean = rows.iter().map(|&i| residual[i as usize]).sum::<f64>() / rows.len() as f64;
        worst = worst.max(mean.abs());
    }
    worst
}

/// Ordinary least squares with intercept, fitted per group on the rows of
/// that group, all groups sharing the same support columns.
#[derive(Debug, Clone)]
pub struct LinearFit {
    pub intercept: f64,
    /// Aligned with the support the fit was computed on.
    pub coefs: Vec<f64>,
    /// Residual standard deviation, floored away from zero.
    pub sigma: f64,
    /// True when the normal matrix needed a ridge jitter.
    pub ridged: bool,
    pub n_rows: usize,
}

impl LinearFit {
    /// Predicted mean for a sparse row given the support the fit used.
    pub fn mean(&self, support: &[usize], row: &[u32]) -> f64 {
        let mut m = self.intercept;
        let mut k = 0usize;
        for &j in row {
            let j = j as usize;
            while k < support.len() && support[k] < j {
                k += 1;
            }
            if k == support.len() {
                break;
            }
            if support[k] == j {
                m += self.coefs[k];
                k += 1;
            }
        }
        m
    }
}

/// Least squares on one row set. Normal equations solved by Cholesky; a
/// singular system falls back to a ridge jitter of 1e-8 (escalated if the
/// factorization still fails) and flags the fit.
pub fn ols_fit_rows(
    x: &SparseBinaryMatrix,
    rows: &[usize],
    y: &[f64],
    support: &[usize],
) -> Result<LinearFit> {
    let s = support.len();
    let k = s + 1;
    let n = rows.len();
    if n == 0 {
        return Err(Error::config("least squares needs at least one row"));
    }
    let mut ata = DMatrix::<f64>::zeros(k, k);
    let mut aty = DVector::<f64>::zeros(k);
    let mut positions = Vec::new();
    for &row in rows {
        let yv = y[row];
        positions.clear();
        collect_support_positions(x.row(row), support, &mut positions);
        ata[(0, 0)] += 1.0;
        aty[0] += yv;
        for &a in &positions {
            let a1 = a + 1;
            ata[(0, a1)] += 1.0;
            ata[(a1, 0)] += 1.0;
            aty[a1] += yv;
            for &b in &positions {
                ata[(a1, b + 1)] += 1.0;
            }
        }
    }
    let mut ridged = false;
    let mut jitter = 0.0f64;
    let chol = loop {
        let mut m = ata.clone();
        if jitter > 0.0 {
            for d in 0..k {
                m[(d, d)] += jitter;
            }
        }
        match m.cholesky() {
            Some(c) => break c,
            None => {
                ridged = true;
                jitter = if jitter == 0.0 { 1e-8 } else { jitter * 100.0 };
                if jitter > 1.0 {
                    return Err(Error::Singular(format!(
                        "normal matrix of size {k} not factorizable even with ridge jitter"
                    )));
                }
            }
        }
    };
    let sol = chol.solve(&aty);
    let intercept = sol[0];
    let coefs: Vec<f64> = (0..s).map(|j| sol[j + 1]).collect();
    let mut rss = 0.0;
    let mut y_rows = Vec::with_capacity(n);
    for &row in rows {
        positions.clear();
        collect_support_positions(x.row(row), support, &mut positions);
        let fit = intercept + positions.iter().map(|&a| coefs[a]).sum::<f64>();
        let e = y[row] - fit;
        rss += e * e;
        y_rows.push(y[row]);
    }
    let dof = (n as f64 - s as f64 - 1.0).max(1.0);
    let scale = sample_sd(&y_rows);
    let sigma = (rss / dof).sqrt().max(1e-6 * scale).max(1e-12);
    Ok(LinearFit {
        intercept,
        coefs,
        sigma,
        ridged,
        n_rows: n,
    })
}

fn collect_support_positions(row: &[u32], support: &[usize], out: &mut Vec<usize>) {
    let mut k = 0usize;
    for &j in row {
        let j = j as usize;
        while k < support.len() && support[k] < j {
            k += 1;
        }
        if k == support.len() {
            break;
        }
        if support[k] == j {
            out.push(k);
            k += 1;
        }
    }
}

/// Per-group least squares on a shared support. Rows may repeat (bootstrap
/// multisets). A group absent from `rows` falls back to the pooled fit over
/// all rows, with a warning.
pub fn ols_refit(
    x: &SparseBinaryMatrix,
    rows: &[usize],
    y: &[f64],
    groups: &[u32],
    g_count: usize,
    support: &[usize],
) -> Result<Vec<LinearFit>> {
    let mut by_group: Vec<Vec<usize>> = vec![Vec::new(); g_count];
    for &row in rows {
        by_group[groups[row] as usize].push(row);
    }
    let mut pooled: Option<LinearFit> = None;
    let mut fits = Vec::with_capacity(g_count);
    for (g, rows_g) in by_group.iter().enumerate() {
        if rows_g.is_empty() {
            log::warn!("group {g} has no rows in this resample; using the pooled fit");
            if pooled.is_none() {
                pooled = Some(ols_fit_rows(x, rows, y, support)?);
            }
            fits.push(pooled.clone().unwrap());
        } else {
            fits.push(ols_fit_rows(x, rows_g, y, support)?);
        }
    }
    Ok(fits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_design() -> (SparseBinaryMatrix, Vec<u32>) {
        // two rows, two columns, two groups of one row each
        let x = SparseBinaryMatrix::from_rows(2, &[vec![0], vec![1]]).unwrap();
        (x, vec![0, 1])
    }

    #[test]
    fn augmented_block_pattern() {
        let (x, groups) = toy_design();
        let d = build_dsl_design(&x, &[0, 1], &groups, &[2.0, 4.0], &[1.0, 1.0], false).unwrap();
        assert_eq!(d.n_cols(), 6);
        assert_eq!(d.nnz(), 2 * x.nnz());
        // shared block mirrors X
        assert_eq!(d.get(0, 0), 1.0);
        assert_eq!(d.get(1, 1), 1.0);
        // group blocks carry 1/r_g on their own rows only
        assert_eq!(d.get(0, 2), 0.5);
        assert_eq!(d.get(1, 3), 0.0);
        assert_eq!(d.get(1, 5), 0.25);
        assert_eq!(d.get(0, 4), 0.0);
    }

    // two groups of two rows each, with within-group response variation so
    // per-group centering leaves signal for the penalized columns
    fn grid_design() -> (DslDesign, Vec<f64>) {
        let x =
            SparseBinaryMatrix::from_rows(2, &[vec![0], vec![1], vec![0], vec![1]]).unwrap();
        let groups = vec![0, 0, 1, 1];
        let d =
            build_dsl_design(&x, &[0, 1, 2, 3], &groups, &[1.0, 1.0], &[1.0, 1.0], false).unwrap();
        (d, vec![3.0, -2.0, 1.0, 0.0])
    }

    #[test]
    fn lambda_max_gives_empty_model() {
        let (d, y) = grid_design();
        let grid = make_lambda_grid(&d, &y, 5, 0.01).unwrap();
        let fits = fit_path(&d, &y, &grid, 1e-10, 1000).unwrap();
        assert!(fits[0].coefs.iter().all(|&c| c == 0.0));
        assert!(fits[0].converged);
    }

    #[test]
    fn grid_is_geometric_and_decreasing() {
        let (d, y) = grid_design();
        let grid = make_lambda_grid(&d, &y, 100, 1e-3).unwrap();
        assert_eq!(grid.values.len(), 100);
        let ratio = grid.values[1] / grid.values[0];
        for w in grid.values.windows(2) {
            assert!(w[1] < w[0]);
            assert!((w[1] / w[0] - ratio).abs() < 1e-12);
        }
        let last = *grid.values.last().unwrap();
        assert!((last / grid.values[0] - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn single_column_soft_threshold_closed_form() {
        // orthonormal-ish single column: ||z||^2 = n
        let n = 8usize;
        let col: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let y: Vec<f64> = (0..n).map(|i| col[i] * 0.9 + if i < 4 { 0.1 } else { -0.1 }).collect();
        let d = DslDesign::from_dense(&[col.clone()], &[1.0], vec![0; n], 1).unwrap();
        let z: f64 = col.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() / n as f64;
        // y has zero mean so the intercept stays 0 and the coordinate update
        // is exactly one soft threshold
        for lambda in [0.05, 0.3, z.abs() + 0.1] {
            let fit = fit_single(&d, &y, lambda, 1e-12, 1000).unwrap();
            let expect = soft_threshold(z, lambda);
            assert!(
                (fit.coefs[0] - expect).abs() < 1e-10,
                "lambda {lambda}: got {} want {expect}",
                fit.coefs[0]
            );
        }
    }

    #[test]
    fn ols_single_column_exact_fit() {
        let x = SparseBinaryMatrix::from_rows(1, &[vec![0], vec![0], vec![], vec![]]).unwrap();
        let y = vec![1.0, 1.0, 0.0, 0.0];
        let fit = ols_fit_rows(&x, &[0, 1, 2, 3], &y, &[0]).unwrap();
        assert!((fit.coefs[0] - 1.0).abs() < 1e-10);
        assert!(fit.intercept.abs() < 1e-10);
        assert!(fit.sigma > 0.0, "sigma must stay positive after flooring");
    }

    #[test]
    fn ols_intercept_only_is_group_mean() {
        let x = SparseBinaryMatrix::from_rows(1, &[vec![], vec![], vec![]]).unwrap();
        let y = vec![1.0, 2.0, 6.0];
        let fit = ols_fit_rows(&x, &[0, 1, 2], &y, &[]).unwrap();
        assert!((fit.intercept - 3.0).abs() < 1e-12);
    }

    #[test]
    fn duplicate_column_forces_ridge_flag() {
        // two identical columns make the normal matrix singular
        let x = SparseBinaryMatrix::from_rows(2, &[vec![0, 1], vec![0, 1], vec![], vec![]]).unwrap();
        let y = vec![2.0, 2.0, 0.0, 1.0];
        let fit = ols_fit_rows(&x, &[0, 1, 2, 3], &y, &[0, 1]).unwrap();
        assert!(fit.ridged);
    }

    #[test]
    fn dsl_view_reconstructs_fitted_values() {
        let x = SparseBinaryMatrix::from_rows(
            3,
            &[vec![0, 2], vec![1], vec![0], vec![2], vec![1, 2], vec![0, 1]],
        )
        .unwrap();
        let groups = vec![0, 0, 1, 1, 0, 1];
        let rows: Vec<usize> = (0..6).collect();
        let r = [0.7, 1.3];
        let w = [1.0, 0.5, 2.0];
        let d = build_dsl_design(&x, &rows, &groups, &r, &w, false).unwrap();
        let y = vec![1.0, -0.5, 2.0, 0.3, 1.7, -0.2];
        let grid = make_lambda_grid(&d, &y, 20, 0.01).unwrap();
        let fits = fit_path(&d, &y, &grid, 1e-11, 5000).unwrap();
        let fit = fits.last().unwrap();
        let view = d.dsl_view(fit);
        for (i, &row) in rows.iter().enumerate() {
            let g = groups[row] as usize;
            let mut m = view.intercepts[g];
            for &j in x.row(row) {
                m += view.beta_shared[j as usize] + view.deltas[g][j as usize];
            }
            let direct = d.fitted_row(fit, i);
            assert!((m - direct).abs() < 1e-9, "row {i}: {m} vs {direct}");
        }
    }
}
