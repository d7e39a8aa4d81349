//! End-to-end driver: stratified split, penalty tuning against the
//! validation set, bootstrap aggregation of the selected supports, cutoff
//! tuning and the final test evaluation, plus the tabular outputs.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{misclassification_error, ProbitModel};
use crate::dataset::{bootstrap_resample, stratified_split, GroupedDataset, SplitIndex};
use crate::lasso::{
    build_dsl_design, default_tol, fit_path, make_lambda_grid, ols_fit_rows, ols_refit,
    LambdaGrid,
};
use crate::rng::{stage_rng, Stage};
use crate::weights::{PenaltyWeights, Scheme};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub scheme: Scheme,
    /// Group sharing weights when `scheme` is `custom`.
    pub custom_r: Option<Vec<f64>>,
    pub b_replicates: usize,
    pub grid_k: usize,
    pub grid_eps: f64,
    pub seed: u64,
    pub polarity_tol: f64,
    pub standardize: bool,
    /// Sweep budget per penalty value.
    pub max_iter: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            scheme: Scheme::Ws3,
            custom_r: None,
            b_replicates: 100,
            grid_k: 100,
            grid_eps: 1e-3,
            seed: 0,
            polarity_tol: 1e-5,
            standardize: false,
            max_iter: 100_000,
        }
    }
}

impl PipelineConfig {
    pub fn new(seed: u64) -> Self {
        PipelineConfig {
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.b_replicates == 0 {
            problems.push("b_replicates must be at least 1".to_string());
        }
        if self.grid_k < 2 {
            problems.push("grid_k must be at least 2".to_string());
        }
        if !(self.grid_eps > 0.0 && self.grid_eps < 1.0) {
            problems.push("grid_eps must lie in (0, 1)".to_string());
        }
        if !(self.polarity_tol > 0.0) {
            problems.push("polarity_tol must be positive".to_string());
        }
        if self.max_iter == 0 {
            problems.push("max_iter must be positive".to_string());
        }
        match (self.scheme, &self.custom_r) {
            (Scheme::Custom, None) => {
                problems.push("scheme custom requires custom_r".to_string())
            }
            (s, Some(_)) if s != Scheme::Custom => {
                problems.push("custom_r is only accepted with scheme custom".to_string())
            }
            _ => {}
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::config(problems.join("; ")))
        }
    }
}

/// One grid point of the penalty sweep.
#[derive(Debug, Clone, Serialize)]
pub struct LambdaPoint {
    pub lambda: f64,
    pub support_size: usize,
    pub validation_me: f64,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct LambdaSelection {
    pub lambda_opt: f64,
    /// Index of the winner in the (descending) grid.
    pub index: usize,
    pub points: Vec<LambdaPoint>,
    pub grid: LambdaGrid,
}

fn per_group_sizes(rows: &[usize], groups: &[u32], g_count: usize) -> Vec<usize> {
    let mut sizes = vec![0usize; g_count];
    for &i in rows {
        sizes[groups[i] as usize] += 1;
    }
    sizes
}

fn subset_y(ds: &GroupedDataset, rows: &[usize]) -> Vec<f64> {
    rows.iter().map(|&i| ds.y[i]).collect()
}

/// Misclassification error of a model over the given rows.
fn rows_me(ds: &GroupedDataset, rows: &[usize], model: &ProbitModel) -> Result<f64> {
    let mut preds = Vec::with_capacity(rows.len());
    let mut truth = Vec::with_capacity(rows.len());
    for &i in rows {
        preds.push(model.classify(ds.x.row(i), ds.groups[i] as usize)?);
        truth.push(ds.class_of(i));
    }
    misclassification_error(&preds, &truth)
}

/// Per-group least squares on `fit_rows` followed by probit scoring of
/// `score_rows`; the cache key is the support itself.
fn me_for_support(
    ds: &GroupedDataset,
    fit_rows: &[usize],
    score_rows: &[usize],
    support: &[usize],
    cache: &mut HashMap<Vec<usize>, f64>,
) -> Result<f64> {
    if let Some(&me) = cache.get(support) {
        return Ok(me);
    }
    let fits = ols_refit(&ds.x, fit_rows, &ds.y, &ds.groups, ds.n_groups(), support)?;
    let model = ProbitModel::per_group(support.to_vec(), fits, ds.a, ds.b)?;
    let me = rows_me(ds, score_rows, &model)?;
    cache.insert(support.to_vec(), me);
    Ok(me)
}

/// Winner of one penalty-path selection run.
struct PathSelection {
    /// Index of the winning penalty in the (descending) grid.
    index: usize,
    /// Pooled support at the winner.
    support: Vec<usize>,
    points: Vec<LambdaPoint>,
}

/// Fit the penalty path on `fit_rows` (repeats allowed), refit each pooled
/// support by per-group least squares on the same rows, and pick the penalty
/// whose refit minimizes the misclassification error on the validation rows.
/// Ties go to the larger penalty (the sparser model).
fn select_on_rows(
    ds: &GroupedDataset,
    fit_rows: &[usize],
    validation: &[usize],
    grid: &LambdaGrid,
    weights: &PenaltyWeights,
    config: &PipelineConfig,
) -> Result<PathSelection> {
    let design = build_dsl_design(
        &ds.x,
        fit_rows,
        &ds.groups,
        &weights.r,
        &weights.w,
        config.standardize,
    )?;
    let y = subset_y(ds, fit_rows);
    let tol = default_tol(&y);
    let path = fit_path(&design, &y, grid, tol, config.max_iter)?;

    let mut cache: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut points = Vec::with_capacity(path.len());
    let mut best: Option<(usize, f64)> = None;
    let mut best_support = Vec::new();
    for (idx, fit) in path.iter().enumerate() {
        let support = {
            let mut all: Vec<usize> = design.active_sets(fit).into_iter().flatten().collect();
            all.sort_unstable();
            all.dedup();
            all
        };
        let me = me_for_support(ds, fit_rows, validation, &support, &mut cache)?;
        points.push(LambdaPoint {
            lambda: fit.lambda,
            support_size: support.len(),
            validation_me: me,
            converged: fit.converged,
        });
        if best.map_or(true, |(_, b)| me < b) {
            best = Some((idx, me));
            best_support = support;
        }
    }
    let (index, _) = best.expect("grid is nonempty");
    Ok(PathSelection {
        index,
        support: best_support,
        points,
    })
}

/// Build the penalty grid on the core rows, then pick the grid value whose
/// pooled support minimizes the validation misclassification error.
pub fn optimize_lambda(
    ds: &GroupedDataset,
    split: &SplitIndex,
    weights: &PenaltyWeights,
    config: &PipelineConfig,
) -> Result<LambdaSelection> {
    let design = build_dsl_design(
        &ds.x,
        &split.core,
        &ds.groups,
        &weights.r,
        &weights.w,
        config.standardize,
    )?;
    let y_core = subset_y(ds, &split.core);
    let grid = make_lambda_grid(&design, &y_core, config.grid_k, config.grid_eps)?;
    let sel = select_on_rows(ds, &split.core, &split.validation, &grid, weights, config)?;
    Ok(LambdaSelection {
        lambda_opt: grid.values[sel.index],
        index: sel.index,
        points: sel.points,
        grid,
    })
}

#[derive(Debug, Clone)]
pub struct BaggingResult {
    /// Pooled support of each replicate, in replicate order.
    pub supports: Vec<Vec<usize>>,
    /// Replicates that stayed unconverged even after the retry draw.
    pub flagged: usize,
}

/// Rerun the whole penalty selection on class-stratified bootstrap
/// resamples of the core rows: each replicate walks the shared grid on its
/// own sample and contributes the pooled support at its own optimum. A
/// replicate whose winning fit does not converge is redrawn once from its
/// own retry stream; if that also fails the fit is kept and counted in
/// `flagged`.
pub fn run_bagging(
    ds: &GroupedDataset,
    split: &SplitIndex,
    weights: &PenaltyWeights,
    grid: &LambdaGrid,
    config: &PipelineConfig,
) -> Result<BaggingResult> {
    let fit_replicate = |stage: Stage, index: u64| -> Result<(Vec<usize>, bool)> {
        let mut rng = stage_rng(config.seed, stage, index);
        let sample = bootstrap_resample(&split.core, |i| ds.class_of(i), &mut rng);
        let sel = select_on_rows(ds, &sample, &split.validation, grid, weights, config)?;
        let converged = sel.points[sel.index].converged;
        Ok((sel.support, converged))
    };
    let replicates: Vec<(Vec<usize>, bool)> = (0..config.b_replicates)
        .into_par_iter()
        .map(|l| {
            let (support, converged) = fit_replicate(Stage::Bootstrap, l as u64)?;
            if converged {
                Ok((support, true))
            } else {
                log::warn!("replicate {l}: unconverged fit, redrawing");
                fit_replicate(Stage::BootstrapRetry, l as u64)
            }
        })
        .collect::<Result<_>>()?;
    let flagged = replicates.iter().filter(|(_, ok)| !ok).count();
    if flagged > 0 {
        log::warn!("{flagged} bootstrap replicates left unconverged after retries");
    }
    Ok(BaggingResult {
        supports: replicates.into_iter().map(|(s, _)| s).collect(),
        flagged,
    })
}

/// Bootstrap feature distribution: how many replicates selected each
/// feature.
#[derive(Debug, Clone, Serialize)]
pub struct BfdTable {
    /// Selection count per feature, each in 0..=b.
    pub freq: Vec<u32>,
    pub b: usize,
}

impl BfdTable {
    pub fn from_supports(p: usize, supports: &[Vec<usize>]) -> Self {
        let mut freq = vec![0u32; p];
        for support in supports {
            for &j in support {
                freq[j] += 1;
            }
        }
        BfdTable {
            freq,
            b: supports.len(),
        }
    }

    /// Features kept by at least `c` replicates, ascending. These sets are
    /// nested: raising `c` can only drop features.
    pub fn cutoff_set(&self, c: usize) -> Vec<usize> {
        (0..self.freq.len())
            .filter(|&j| self.freq[j] as usize >= c)
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CutoffPoint {
    pub c: usize,
    pub size: usize,
    pub validation_me: f64,
    pub test_me: f64,
}

#[derive(Debug, Clone)]
pub struct CutoffSweep {
    pub points: Vec<CutoffPoint>,
    /// Loess-smoothed validation column, for display only.
    pub smoothed_validation: Vec<f64>,
    pub c_star: usize,
}

/// Scan every cutoff from 1 to B. The validation error uses per-group least
/// squares on the core rows; the test error shown alongside refits pooled
/// least squares on core plus validation. The chosen cutoff minimizes the
/// raw validation error, ties going to the larger cutoff (smaller model).
pub fn cutoff_sweep(
    ds: &GroupedDataset,
    split: &SplitIndex,
    bfd: &BfdTable,
    _config: &PipelineConfig,
) -> Result<CutoffSweep> {
    let train = split.core_and_validation();
    let mut val_cache: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut test_cache: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut points = Vec::with_capacity(bfd.b);
    let mut best: Option<(usize, f64)> = None;
    for c in 1..=bfd.b {
        let support = bfd.cutoff_set(c);
        let val_me = me_for_support(ds, &split.core, &split.validation, &support, &mut val_cache)?;
        let test_me = match test_cache.get(&support) {
            Some(&me) => me,
            None => {
                let model = pooled_model(ds, &train, &support)?;
                let me = rows_me(ds, &split.test, &model)?;
                test_cache.insert(support.clone(), me);
                me
            }
        };
        points.push(CutoffPoint {
            c,
            size: support.len(),
            validation_me: val_me,
            test_me,
        });
        if best.map_or(true, |(_, b)| val_me <= b) {
            best = Some((c, val_me));
        }
    }
    let (c_star, _) = best.expect("cutoff range is nonempty");
    let xs: Vec<f64> = points.iter().map(|p| p.c as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.validation_me).collect();
    let smoothed_validation = loess_smooth(&xs, &ys, 0.3);
    Ok(CutoffSweep {
        points,
        smoothed_validation,
        c_star,
    })
}

fn pooled_model(ds: &GroupedDataset, rows: &[usize], support: &[usize]) -> Result<ProbitModel> {
    let fit = ols_fit_rows(&ds.x, rows, &ds.y, support)?;
    ProbitModel::pooled(support.to_vec(), fit, ds.a, ds.b)
}

/// Local linear regression with tricube weights over the `span` fraction of
/// nearest points. Falls back to the weighted mean where the local design
/// is degenerate.
pub fn loess_smooth(xs: &[f64], ys: &[f64], span: f64) -> Vec<f64> {
    let n = xs.len();
    assert_eq!(n, ys.len());
    if n == 0 {
        return Vec::new();
    }
    let q = ((span * n as f64).ceil() as usize).clamp(2.min(n), n);
    let mut out = Vec::with_capacity(n);
    let mut order: Vec<usize> = (0..n).collect();
    for i in 0..n {
        let x0 = xs[i];
        order.sort_unstable_by(|&a, &b| {
            (xs[a] - x0)
                .abs()
                .partial_cmp(&(xs[b] - x0).abs())
                .unwrap()
                .then(a.cmp(&b))
        });
        let window = &order[..q];
        let h = (xs[window[q - 1]] - x0).abs();
        let (mut sw, mut swx, mut swy, mut swxx, mut swxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &j in window {
            let d = if h > 0.0 { ((xs[j] - x0) / h).abs() } else { 0.0 };
            if d >= 1.0 {
                continue;
            }
            let t = 1.0 - d * d * d;
            let w = t * t * t;
            let dx = xs[j] - x0;
            sw += w;
            swx += w * dx;
            swy += w * ys[j];
            swxx += w * dx * dx;
            swxy += w * dx * ys[j];
        }
        if sw <= 0.0 {
            out.push(ys[i]);
            continue;
        }
        let det = sw * swxx - swx * swx;
        if det.abs() > 1e-12 * (sw * swxx).abs().max(1e-300) {
            // local line evaluated at dx = 0
            out.push((swxx * swy - swx * swxy) / det);
        } else {
            out.push(swy / sw);
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct TestEvaluation {
    pub support: Vec<usize>,
    pub model: ProbitModel,
    pub test_me: f64,
    /// Per-group test error; a group without test rows yields None.
    pub per_group_test_me: Vec<Option<f64>>,
}

/// Final model at the chosen cutoff: pooled least squares over core plus
/// validation, scored on the held-out test rows.
pub fn evaluate_test(
    ds: &GroupedDataset,
    split: &SplitIndex,
    support: &[usize],
) -> Result<TestEvaluation> {
    let train = split.core_and_validation();
    let model = pooled_model(ds, &train, support)?;
    let test_me = rows_me(ds, &split.test, &model)?;
    let mut per_group_test_me = Vec::with_capacity(ds.n_groups());
    for g in 0..ds.n_groups() {
        let rows: Vec<usize> = split
            .test
            .iter()
            .copied()
            .filter(|&i| ds.groups[i] as usize == g)
            .collect();
        if rows.is_empty() {
            per_group_test_me.push(None);
        } else {
            per_group_test_me.push(Some(rows_me(ds, &rows, &model)?));
        }
    }
    Ok(TestEvaluation {
        support: support.to_vec(),
        model,
        test_me,
        per_group_test_me,
    })
}

/// Summary of one pipeline run, serialized as `report.json`.
#[derive(Debug, Clone, Serialize)]
pub struct ModelReport {
    pub scheme: String,
    pub seed: u64,
    pub b_replicates: usize,
    pub lambda_opt: f64,
    pub lambda_index: usize,
    pub c_star: usize,
    pub model_size: usize,
    pub support: Vec<usize>,
    pub support_tokens: Vec<String>,
    pub validation_me_at_c_star: f64,
    pub test_me: f64,
    pub group_names: Vec<String>,
    pub per_group_test_me: Vec<Option<f64>>,
    pub flagged_replicates: usize,
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub split: SplitIndex,
    pub weights: PenaltyWeights,
    pub lambda: LambdaSelection,
    pub bfd: BfdTable,
    pub sweep: CutoffSweep,
    pub test: TestEvaluation,
    pub report: ModelReport,
}

/// Run the whole pipeline on one dataset.
pub fn run_pipeline(ds: &GroupedDataset, config: &PipelineConfig) -> Result<PipelineResult> {
    config.validate()?;
    let split = stratified_split(ds, config.seed)?;
    if split.validation.is_empty() || split.test.is_empty() {
        return Err(Error::config(
            "dataset too small: the stratified split left validation or test empty",
        ));
    }
    let core_sizes = per_group_sizes(&split.core, &ds.groups, ds.n_groups());
    let weights = match (config.scheme, &config.custom_r) {
        (Scheme::Custom, Some(r)) => {
            PenaltyWeights::custom(r.clone(), &ds.polarity, config.polarity_tol)?
        }
        _ => PenaltyWeights::from_scheme(
            config.scheme,
            &ds.polarity,
            config.polarity_tol,
            &core_sizes,
        )?,
    };
    let lambda = optimize_lambda(ds, &split, &weights, config)?;
    let bagging = run_bagging(ds, &split, &weights, &lambda.grid, config)?;
    let bfd = BfdTable::from_supports(ds.n_cols(), &bagging.supports);
    let sweep = cutoff_sweep(ds, &split, &bfd, config)?;
    let support = bfd.cutoff_set(sweep.c_star);
    let test = evaluate_test(ds, &split, &support)?;
    let validation_me_at_c_star = sweep.points[sweep.c_star - 1].validation_me;
    let report = ModelReport {
        scheme: weights.scheme.name().to_string(),
        seed: config.seed,
        b_replicates: config.b_replicates,
        lambda_opt: lambda.lambda_opt,
        lambda_index: lambda.index,
        c_star: sweep.c_star,
        model_size: support.len(),
        support: support.clone(),
        support_tokens: support
            .iter()
            .map(|&j| ds.feature_names[j].clone())
            .collect(),
        validation_me_at_c_star,
        test_me: test.test_me,
        group_names: ds.group_names.clone(),
        per_group_test_me: test.per_group_test_me.clone(),
        flagged_replicates: bagging.flagged,
    };
    Ok(PipelineResult {
        split,
        weights,
        lambda,
        bfd,
        sweep,
        test,
        report,
    })
}

/// Write the run artifacts: `report.json`, `bfd.tsv`, `lambda_sweep.tsv`,
/// `cutoff_sweep.tsv`, `wordcloud.tsv` (the always-selected features with
/// their pooled coefficients) and `predictions.tsv` for the test rows.
pub fn write_outputs(
    dir: &Path,
    ds: &GroupedDataset,
    result: &PipelineResult,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut report = std::fs::File::create(dir.join("report.json"))?;
    writeln!(report, "{}", serde_json::to_string_pretty(&result.report)?)?;

    let mut bfd = std::fs::File::create(dir.join("bfd.tsv"))?;
    writeln!(bfd, "feature\ttoken\tfrequency")?;
    for j in 0..ds.n_cols() {
        writeln!(bfd, "{j}\t{}\t{}", ds.feature_names[j], result.bfd.freq[j])?;
    }

    let mut sweep = std::fs::File::create(dir.join("lambda_sweep.tsv"))?;
    writeln!(sweep, "lambda\tsize\tval_me\tconverged")?;
    for p in &result.lambda.points {
        writeln!(
            sweep,
            "{}\t{}\t{}\t{}",
            p.lambda, p.support_size, p.validation_me, p.converged
        )?;
    }

    let mut cut = std::fs::File::create(dir.join("cutoff_sweep.tsv"))?;
    writeln!(cut, "c\tsize\tval_me\ttest_me\tval_me_smooth")?;
    for (p, s) in result.sweep.points.iter().zip(&result.sweep.smoothed_validation) {
        writeln!(
            cut,
            "{}\t{}\t{}\t{}\t{}",
            p.c, p.size, p.validation_me, p.test_me, s
        )?;
    }

    let always = result.bfd.cutoff_set(result.bfd.b);
    let train = result.split.core_and_validation();
    let cloud_fit = ols_fit_rows(&ds.x, &train, &ds.y, &always)?;
    let mut cloud = std::fs::File::create(dir.join("wordcloud.tsv"))?;
    writeln!(cloud, "token\tcoef\tsign")?;
    for (k, &j) in always.iter().enumerate() {
        let c = cloud_fit.coefs[k];
        writeln!(
            cloud,
            "{}\t{}\t{}",
            ds.feature_names[j],
            c,
            if c >= 0.0 { "+" } else { "-" }
        )?;
    }

    let mut preds = std::fs::File::create(dir.join("predictions.tsv"))?;
    writeln!(preds, "row_id\tgroup\tmean\tp_hi\tp_lo\tclass")?;
    for &i in &result.split.test {
        let g = ds.groups[i] as usize;
        let p = result.test.model.predict(ds.x.row(i), g)?;
        writeln!(
            preds,
            "{i}\t{}\t{}\t{}\t{}\t{}",
            ds.group_names[g], p.mean, p.p_hi, p.p_lo, p.class
        )?;
    }
    Ok(())
}
