//! Baseline classifier: principal components of the correlation matrix
//! (variance- or entropy-ordered), a variance-explained stopping rule, and
//! Fisher linear discrimination on the component scores.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::misclassification_error;
use crate::dataset::{stratified_split, GroupedDataset};
use crate::rng::{stage_rng, Stage};
use crate::sparse::SparseBinaryMatrix;
use crate::{Error, Result};

/// Display order of the components. Entropy ranks by the Shannon entropy of
/// the squared loadings, most concentrated vectors first; the descending
/// variant exists for sensitivity checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PcOrdering {
    Variance,
    Entropy,
    EntropyDesc,
}

impl PcOrdering {
    pub fn name(self) -> &'static str {
        match self {
            PcOrdering::Variance => "variance",
            PcOrdering::Entropy => "entropy",
            PcOrdering::EntropyDesc => "entropy-desc",
        }
    }
}

impl std::str::FromStr for PcOrdering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "variance" => Ok(PcOrdering::Variance),
            "entropy" => Ok(PcOrdering::Entropy),
            "entropy-desc" => Ok(PcOrdering::EntropyDesc),
            other => Err(Error::config(format!(
                "unknown component ordering '{other}' (expected variance, entropy or entropy-desc)"
            ))),
        }
    }
}

/// Principal component basis of the centered, unit-variance-scaled training
/// design. Zero-variance columns are dropped before the decomposition; all
/// stored vectors are aligned with `kept_cols`.
#[derive(Debug, Clone)]
pub struct PcBasis {
    /// Original column ids that survived the variance filter, ascending.
    pub kept_cols: Vec<usize>,
    pub dropped: Vec<usize>,
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    /// Unit loading vectors, stored in display order.
    pub components: Vec<Vec<f64>>,
    /// Variance along each stored component, aligned with `components`.
    pub eigenvalues: Vec<f64>,
    pub entropy: Vec<f64>,
    pub ordering: PcOrdering,
    /// Trace of the correlation matrix: the number of kept columns.
    pub total_variance: f64,
    pub n_train: usize,
    /// Original column -> position in `kept_cols`.
    col_pos: Vec<Option<u32>>,
    /// Projection offset per component: sum_j u_j m_j / s_j.
    offsets: Vec<f64>,
}

fn loading_entropy(u: &[f64]) -> f64 {
    -u.iter()
        .map(|&v| {
            let q = v * v;
            if q > 0.0 {
                q * q.ln()
            } else {
                0.0
            }
        })
        .sum::<f64>()
}

/// Flip each vector so its largest-magnitude entry is positive. Purely a
/// sign convention, for reproducible output.
fn canonical_sign(u: &mut [f64]) {
    let mut best = 0usize;
    for (j, v) in u.iter().enumerate() {
        if v.abs() > u[best].abs() {
            best = j;
        }
    }
    if u[best] < 0.0 {
        for v in u.iter_mut() {
            *v = -*v;
        }
    }
}

impl PcBasis {
    fn assemble(
        kept_cols: Vec<usize>,
        dropped: Vec<usize>,
        mean: Vec<f64>,
        scale: Vec<f64>,
        mut components: Vec<Vec<f64>>,
        mut eigenvalues: Vec<f64>,
        ordering: PcOrdering,
        n_train: usize,
        p_total: usize,
    ) -> Self {
        for u in &mut components {
            canonical_sign(u);
        }
        let mut entropy: Vec<f64> = components.iter().map(|u| loading_entropy(u)).collect();
        let order: Vec<usize> = {
            let mut idx: Vec<usize> = (0..components.len()).collect();
            match ordering {
                PcOrdering::Variance => {} // already sorted by variance
                PcOrdering::Entropy => {
                    idx.sort_by(|&a, &b| entropy[a].partial_cmp(&entropy[b]).unwrap().then(a.cmp(&b)));
                }
                PcOrdering::EntropyDesc => {
                    idx.sort_by(|&a, &b| entropy[b].partial_cmp(&entropy[a]).unwrap().then(a.cmp(&b)));
                }
            }
            idx
        };
        components = order.iter().map(|&i| std::mem::take(&mut components[i])).collect();
        eigenvalues = order.iter().map(|&i| eigenvalues[i]).collect();
        entropy = order.iter().map(|&i| entropy[i]).collect();
        let mut col_pos = vec![None; p_total];
        for (pos, &j) in kept_cols.iter().enumerate() {
            col_pos[j] = Some(pos as u32);
        }
        let offsets: Vec<f64> = components
            .iter()
            .map(|u| {
                u.iter()
                    .zip(mean.iter().zip(&scale))
                    .map(|(uj, (m, s))| uj * m / s)
                    .sum()
            })
            .collect();
        let total_variance = kept_cols.len() as f64;
        PcBasis {
            kept_cols,
            dropped,
            mean,
            scale,
            components,
            eigenvalues,
            entropy,
            ordering,
            total_variance,
            n_train,
            col_pos,
            offsets,
        }
    }

    /// Same component set under a different display ordering.
    pub fn reordered(&self, ordering: PcOrdering) -> PcBasis {
        let mut idx: Vec<usize> = (0..self.components.len()).collect();
        match ordering {
            PcOrdering::Variance => idx.sort_by(|&a, &b| {
                self.eigenvalues[b]
                    .partial_cmp(&self.eigenvalues[a])
                    .unwrap()
                    .then(a.cmp(&b))
            }),
            PcOrdering::Entropy => idx.sort_by(|&a, &b| {
                self.entropy[a].partial_cmp(&self.entropy[b]).unwrap().then(a.cmp(&b))
            }),
            PcOrdering::EntropyDesc => idx.sort_by(|&a, &b| {
                self.entropy[b].partial_cmp(&self.entropy[a]).unwrap().then(a.cmp(&b))
            }),
        }
        PcBasis {
            kept_cols: self.kept_cols.clone(),
            dropped: self.dropped.clone(),
            mean: self.mean.clone(),
            scale: self.scale.clone(),
            components: idx.iter().map(|&i| self.components[i].clone()).collect(),
            eigenvalues: idx.iter().map(|&i| self.eigenvalues[i]).collect(),
            entropy: idx.iter().map(|&i| self.entropy[i]).collect(),
            ordering,
            total_variance: self.total_variance,
            n_train: self.n_train,
            col_pos: self.col_pos.clone(),
            offsets: idx.iter().map(|&i| self.offsets[i]).collect(),
        }
    }

    /// Scores of one sparse binary row on the first `t` stored components.
    pub fn score(&self, row: &[u32], t: usize) -> Vec<f64> {
        let t = t.min(self.components.len());
        let mut out = Vec::with_capacity(t);
        for k in 0..t {
            let u = &self.components[k];
            let mut v = -self.offsets[k];
            for &j in row {
                if let Some(pos) = self.col_pos[j as usize] {
                    let pos = pos as usize;
                    v += u[pos] / self.scale[pos];
                }
            }
            out.push(v);
        }
        out
    }
}

/// Column means, sample standard deviations and the zero-variance filter
/// over the selected rows.
fn column_stats(
    x: &SparseBinaryMatrix,
    rows: &[usize],
) -> (Vec<usize>, Vec<usize>, Vec<f64>, Vec<f64>) {
    let n = rows.len();
    let mut counts = vec![0usize; x.n_cols()];
    for &i in rows {
        for &j in x.row(i) {
            counts[j as usize] += 1;
        }
    }
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    let mut mean = Vec::new();
    let mut scale = Vec::new();
    for (j, &c) in counts.iter().enumerate() {
        if c == 0 || c == n {
            dropped.push(j);
        } else {
            let m = c as f64 / n as f64;
            kept.push(j);
            mean.push(m);
            scale.push((c as f64 * (1.0 - m) / (n as f64 - 1.0)).sqrt());
        }
    }
    (kept, dropped, mean, scale)
}

/// Number of components the decomposition keeps: everything on the exact
/// path, a fixed budget on the iterative one.
pub const ITERATIVE_MIN_COMPONENTS: usize = 300;
const DENSE_LIMIT: usize = 500;
const OVERSAMPLE: usize = 10;
const POWER_ITERATIONS: usize = 2;

/// Principal components of the correlation matrix of the selected rows.
/// Exact symmetric eigendecomposition when at most [`DENSE_LIMIT`] columns
/// survive the variance filter; a randomized range-finder otherwise, keeping
/// the top `max(budget, ITERATIVE_MIN_COMPONENTS)` components.
pub fn fit_pca(
    x: &SparseBinaryMatrix,
    rows: &[usize],
    ordering: PcOrdering,
    budget: usize,
    seed: u64,
) -> Result<PcBasis> {
    if rows.len() < 2 {
        return Err(Error::config("principal components need at least 2 training rows"));
    }
    let (kept, dropped, mean, scale) = column_stats(x, rows);
    if kept.is_empty() {
        return Err(Error::config("every column is constant on the training rows"));
    }
    if !dropped.is_empty() {
        log::info!("dropping {} constant columns before the decomposition", dropped.len());
    }
    let p = kept.len();
    let (components, eigenvalues) = if p <= DENSE_LIMIT {
        dense_eigen(x, rows, &kept, &mean, &scale)
    } else {
        randomized_eigen(x, rows, &kept, &mean, &scale, budget, seed)
    };
    Ok(PcBasis::assemble(
        kept,
        dropped,
        mean,
        scale,
        components,
        eigenvalues,
        ordering,
        rows.len(),
        x.n_cols(),
    ))
}

/// Exact path: correlation matrix from co-occurrence counts, then a
/// symmetric eigendecomposition, sorted by descending eigenvalue.
fn dense_eigen(
    x: &SparseBinaryMatrix,
    rows: &[usize],
    kept: &[usize],
    mean: &[f64],
    scale: &[f64],
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let p = kept.len();
    let n = rows.len() as f64;
    let mut pos = vec![usize::MAX; x.n_cols()];
    for (k, &j) in kept.iter().enumerate() {
        pos[j] = k;
    }
    let mut cooc = DMatrix::<f64>::zeros(p, p);
    let mut buf: Vec<usize> = Vec::new();
    for &i in rows {
        buf.clear();
        buf.extend(x.row(i).iter().map(|&j| pos[j as usize]).filter(|&k| k != usize::MAX));
        for &a in &buf {
            for &b in &buf {
                cooc[(a, b)] += 1.0;
            }
        }
    }
    let mut corr = DMatrix::<f64>::zeros(p, p);
    for a in 0..p {
        for b in 0..p {
            corr[(a, b)] =
                (cooc[(a, b)] - n * mean[a] * mean[b]) / ((n - 1.0) * scale[a] * scale[b]);
        }
    }
    let eig = nalgebra::linalg::SymmetricEigen::new(corr);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let components: Vec<Vec<f64>> = order
        .iter()
        .map(|&k| eig.eigenvectors.column(k).iter().copied().collect())
        .collect();
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k].max(0.0)).collect();
    (components, eigenvalues)
}

/// Sparse operator for the standardized train matrix A (rows x kept
/// columns) without materializing it: A = (X - 1 m') D^{-1}.
struct StandardizedOp {
    row_cols: Vec<Vec<u32>>,
    col_rows: Vec<Vec<u32>>,
    inv_scale: Vec<f64>,
    mean: Vec<f64>,
    n: usize,
    p: usize,
}

impl StandardizedOp {
    fn new(x: &SparseBinaryMatrix, rows: &[usize], kept: &[usize], mean: &[f64], scale: &[f64]) -> Self {
        let mut pos = vec![u32::MAX; x.n_cols()];
        for (k, &j) in kept.iter().enumerate() {
            pos[j] = k as u32;
        }
        let mut row_cols = Vec::with_capacity(rows.len());
        let mut col_rows = vec![Vec::new(); kept.len()];
        for (i, &orig) in rows.iter().enumerate() {
            let mut cols: Vec<u32> = x
                .row(orig)
                .iter()
                .map(|&j| pos[j as usize])
                .filter(|&k| k != u32::MAX)
                .collect();
            cols.sort_unstable();
            for &k in &cols {
                col_rows[k as usize].push(i as u32);
            }
            row_cols.push(cols);
        }
        StandardizedOp {
            row_cols,
            col_rows,
            inv_scale: scale.iter().map(|s| 1.0 / s).collect(),
            mean: mean.to_vec(),
            n: rows.len(),
            p: kept.len(),
        }
    }

    /// Y = A V for V with `l` columns. Parallel over output rows, which
    /// keeps the summation order fixed.
    fn apply(&self, v: &DMatrix<f64>) -> DMatrix<f64> {
        let l = v.ncols();
        let offsets: Vec<f64> = (0..l)
            .map(|c| {
                (0..self.p)
                    .map(|j| v[(j, c)] * self.mean[j] * self.inv_scale[j])
                    .sum()
            })
            .collect();
        let rows: Vec<Vec<f64>> = (0..self.n)
            .into_par_iter()
            .map(|i| {
                let mut out = vec![0.0; l];
                for &k in &self.row_cols[i] {
                    let j = k as usize;
                    let w = self.inv_scale[j];
                    for (c, o) in out.iter_mut().enumerate() {
                        *o += v[(j, c)] * w;
                    }
                }
                for (c, o) in out.iter_mut().enumerate() {
                    *o -= offsets[c];
                }
                out
            })
            .collect();
        DMatrix::from_fn(self.n, l, |i, c| rows[i][c])
    }

    /// Z = A' U for U with `l` columns. Parallel over output columns.
    fn apply_t(&self, u: &DMatrix<f64>) -> DMatrix<f64> {
        let l = u.ncols();
        let col_sums: Vec<f64> = (0..l).map(|c| u.column(c).sum()).collect();
        let rows: Vec<Vec<f64>> = (0..self.p)
            .into_par_iter()
            .map(|j| {
                let mut out = vec![0.0; l];
                for &i in &self.col_rows[j] {
                    for (c, o) in out.iter_mut().enumerate() {
                        *o += u[(i as usize, c)];
                    }
                }
                let w = self.inv_scale[j];
                let m = self.mean[j];
                for (c, o) in out.iter_mut().enumerate() {
                    *o = (*o - m * col_sums[c]) * w;
                }
                out
            })
            .collect();
        DMatrix::from_fn(self.p, l, |j, c| rows[j][c])
    }
}

fn thin_q(m: DMatrix<f64>) -> DMatrix<f64> {
    nalgebra::linalg::QR::new(m).q()
}

/// Randomized truncated decomposition of the standardized design: gaussian
/// range finder with a fixed oversample and two power iterations, then an
/// exact factorization of the projected matrix. Eigenvalues are the squared
/// singular values over n - 1.
fn randomized_eigen(
    x: &SparseBinaryMatrix,
    rows: &[usize],
    kept: &[usize],
    mean: &[f64],
    scale: &[f64],
    budget: usize,
    seed: u64,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let op = StandardizedOp::new(x, rows, kept, mean, scale);
    let want = budget.max(ITERATIVE_MIN_COMPONENTS);
    let l = (want + OVERSAMPLE).min(op.n).min(op.p);
    let mut rng = stage_rng(seed, Stage::Svd, 0);
    let omega = DMatrix::from_fn(op.p, l, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut y = op.apply(&omega);
    for _ in 0..POWER_ITERATIONS {
        let q = thin_q(y);
        let z = thin_q(op.apply_t(&q));
        y = op.apply(&z);
    }
    let q = thin_q(y);
    // b = Q' A, factored exactly; right singular vectors approximate the
    // leading components of A
    let b = op.apply_t(&q).transpose();
    let svd = nalgebra::linalg::SVD::new(b, false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let keep = want.min(order.len());
    let denom = op.n as f64 - 1.0;
    let components: Vec<Vec<f64>> = order[..keep]
        .iter()
        .map(|&k| v_t.row(k).iter().copied().collect())
        .collect();
    let eigenvalues: Vec<f64> = order[..keep]
        .iter()
        .map(|&k| {
            let s = svd.singular_values[k];
            s * s / denom
        })
        .collect();
    (components, eigenvalues)
}

/// Smallest t whose stored-order cumulative variance reaches the target
/// fraction of the total. Errors when a truncated basis cannot reach it.
pub fn threshold_pcs(basis: &PcBasis, target_var: f64) -> Result<usize> {
    if !(target_var > 0.0 && target_var <= 1.0) {
        return Err(Error::config("target variance fraction must lie in (0, 1]"));
    }
    let mut cum = 0.0;
    for (i, &w) in basis.eigenvalues.iter().enumerate() {
        cum += w;
        if cum / basis.total_variance >= target_var {
            return Ok(i + 1);
        }
    }
    Err(Error::config(format!(
        "the {} stored components explain only {:.1}% of the variance; raise the component \
         budget or lower the target",
        basis.eigenvalues.len(),
        100.0 * cum / basis.total_variance
    )))
}

/// Fisher discriminant on score vectors.
#[derive(Debug, Clone)]
pub struct LdModel {
    pub t: usize,
    pub direction: Vec<f64>,
    pub cutpoint: f64,
}

impl LdModel {
    /// Class decision for one score vector; the boundary goes to class 1.
    pub fn classify(&self, v: &[f64]) -> u8 {
        let s: f64 = self.direction.iter().zip(v).map(|(b, x)| b * x).sum();
        u8::from(s >= self.cutpoint)
    }
}

/// Fisher's rule: b = S_w^{-1} (mean_1 - mean_0) with the pooled
/// within-class covariance (denominator n - 2, diagonal jitter
/// 1e-8 trace / t), cut at the midpoint of the projected class means.
pub fn fit_lda(scores: &[Vec<f64>], classes: &[u8]) -> Result<LdModel> {
    let n = scores.len();
    if n != classes.len() || n < 3 {
        return Err(Error::config("discriminant needs at least 3 scored rows with labels"));
    }
    let t = scores[0].len();
    if t == 0 || scores.iter().any(|v| v.len() != t) {
        return Err(Error::config("score vectors must share a positive length"));
    }
    let mut counts = [0usize; 2];
    let mut means = vec![DVector::<f64>::zeros(t); 2];
    for (v, &c) in scores.iter().zip(classes) {
        let c = c as usize;
        counts[c] += 1;
        for j in 0..t {
            means[c][j] += v[j];
        }
    }
    if counts[0] == 0 || counts[1] == 0 {
        return Err(Error::config("both classes must appear in the training scores"));
    }
    for c in 0..2 {
        means[c] /= counts[c] as f64;
    }
    let mut sw = DMatrix::<f64>::zeros(t, t);
    for (v, &c) in scores.iter().zip(classes) {
        let m = &means[c as usize];
        for a in 0..t {
            let da = v[a] - m[a];
            for b in a..t {
                sw[(a, b)] += da * (v[b] - m[b]);
            }
        }
    }
    let denom = (n - 2) as f64;
    for a in 0..t {
        for b in a..t {
            sw[(a, b)] /= denom;
            sw[(b, a)] = sw[(a, b)];
        }
    }
    let jitter = 1e-8 * sw.trace() / t as f64;
    for d in 0..t {
        sw[(d, d)] += jitter;
    }
    let chol = sw
        .cholesky()
        .ok_or_else(|| Error::Singular("within-class covariance is singular even after jitter".into()))?;
    let diff = &means[1] - &means[0];
    let direction = chol.solve(&diff);
    let mid = (&means[1] + &means[0]) * 0.5;
    let cutpoint = direction.dot(&mid);
    Ok(LdModel {
        t,
        direction: direction.iter().copied().collect(),
        cutpoint,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineConfig {
    pub seed: u64,
    /// Variance-explained stopping fraction.
    pub var_explained: f64,
    /// Component budget for the iterative decomposition path.
    pub component_budget: usize,
    pub orderings: Vec<PcOrdering>,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            seed: 0,
            var_explained: 0.30,
            component_budget: ITERATIVE_MIN_COMPONENTS,
            orderings: vec![PcOrdering::Variance, PcOrdering::Entropy],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderingReport {
    pub ordering: String,
    pub t: usize,
    /// Fraction of the total variance the first t components explain.
    pub cumulative_variance: f64,
    pub test_me: f64,
    pub per_group_test_me: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PcaLdaReport {
    pub seed: u64,
    pub var_explained: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub dropped_columns: usize,
    pub group_names: Vec<String>,
    pub orderings: Vec<OrderingReport>,
}

/// Fit and evaluate the baseline: components on the pooled core plus
/// validation rows (same split stream as the main pipeline), discriminant
/// on their scores, error on the test rows.
pub fn run_baseline(ds: &GroupedDataset, config: &BaselineConfig) -> Result<PcaLdaReport> {
    if config.orderings.is_empty() {
        return Err(Error::config("at least one component ordering is required"));
    }
    let split = stratified_split(ds, config.seed)?;
    let train = split.core_and_validation();
    if split.test.is_empty() {
        return Err(Error::config("dataset too small: the stratified split left the test set empty"));
    }
    let base = fit_pca(&ds.x, &train, PcOrdering::Variance, config.component_budget, config.seed)?;
    let classes: Vec<u8> = train.iter().map(|&i| ds.class_of(i)).collect();
    let mut orderings = Vec::with_capacity(config.orderings.len());
    for &ordering in &config.orderings {
        let basis = if ordering == PcOrdering::Variance {
            base.clone()
        } else {
            base.reordered(ordering)
        };
        let t = threshold_pcs(&basis, config.var_explained)?;
        let cumulative_variance =
            basis.eigenvalues[..t].iter().sum::<f64>() / basis.total_variance;
        let scores: Vec<Vec<f64>> = train.iter().map(|&i| basis.score(ds.x.row(i), t)).collect();
        let model = fit_lda(&scores, &classes)?;
        let preds: Vec<u8> = split
            .test
            .iter()
            .map(|&i| model.classify(&basis.score(ds.x.row(i), t)))
            .collect();
        let truth: Vec<u8> = split.test.iter().map(|&i| ds.class_of(i)).collect();
        let test_me = misclassification_error(&preds, &truth)?;
        let mut per_group_test_me = Vec::with_capacity(ds.n_groups());
        for g in 0..ds.n_groups() {
            let idx: Vec<usize> = (0..split.test.len())
                .filter(|&k| ds.groups[split.test[k]] as usize == g)
                .collect();
            if idx.is_empty() {
                per_group_test_me.push(None);
            } else {
                let p: Vec<u8> = idx.iter().map(|&k| preds[k]).collect();
                let tr: Vec<u8> = idx.iter().map(|&k| truth[k]).collect();
                per_group_test_me.push(Some(misclassification_error(&p, &tr)?));
            }
        }
        orderings.push(OrderingReport {
            ordering: ordering.name().to_string(),
            t,
            cumulative_variance,
            test_me,
            per_group_test_me,
        });
    }
    Ok(PcaLdaReport {
        seed: config.seed,
        var_explained: config.var_explained,
        n_train: train.len(),
        n_test: split.test.len(),
        dropped_columns: base.dropped.len(),
        group_names: ds.group_names.clone(),
        orderings,
    })
}

pub fn write_baseline_report(path: &Path, report: &PcaLdaReport) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "{}", serde_json::to_string_pretty(report)?)?;
    Ok(())
}
