//! Synthetic benchmark generator: 77 Bernoulli features in four blocks, a
//! sparse true coefficient vector, Gaussian noise, and removal of the
//! response band around the sample mean so that the two classes sit on the
//! opposite sides of it.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::GroupedDataset;
use crate::rng::{stage_rng, Stage};
use crate::sparse::SparseBinaryMatrix;
use crate::{Error, Result};

pub const SIM_P: usize = 77;
/// Rows kept per class after the band removal; the standard 2:1:1 split of
/// the resulting 400 rows gives (200, 100, 100) with balanced classes.
pub const KEEP_PER_CLASS: usize = 200;

/// Bernoulli probability of each feature block (1-based inclusive ranges).
const BLOCKS: [(usize, usize, f64); 4] = [
    (1, 2, 0.1),
    (3, 65, 0.2),
    (66, 75, 0.03),
    (76, 77, 0.029),
];

/// True signal: features 1..8 and 76..77 (1-based).
const TRUE_BETA: [(usize, f64); 10] = [
    (1, -1.0),
    (2, 1.0),
    (3, -1.0),
    (4, 1.0),
    (5, 0.5),
    (6, -0.5),
    (7, -0.25),
    (8, -0.125),
    (76, 1.25),
    (77, -1.25),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolarityVariant {
    /// All polarity scores equal one: the adaptive weights collapse to a
    /// constant and the fit reduces to a plain lasso.
    Equal,
    /// Block-structured scores loosely tracking the true signal.
    Structured,
}

impl std::str::FromStr for PolarityVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "equal" => Ok(PolarityVariant::Equal),
            "structured" => Ok(PolarityVariant::Structured),
            other => Err(Error::config(format!(
                "unknown polarity variant '{other}' (expected equal or structured)"
            ))),
        }
    }
}

/// Polarity scores for the 77 features.
///
/// The structured blocks are 1..8 (the true leading weights), 9..20 (twelve
/// moderate scores), 21..25 (0.2 each; the source block arithmetic leaves
/// index 21 unassigned, it is filled with 0.2 and logged), 26..75 (1/i with
/// i the feature index) and 76..77 (1.25).
pub fn polarity_variant(variant: PolarityVariant) -> Vec<f64> {
    match variant {
        PolarityVariant::Equal => vec![1.0; SIM_P],
        PolarityVariant::Structured => {
            let mut p = vec![0.0; SIM_P];
            let block_a = [-1.0, 1.0, -1.0, 1.0, 0.5, -0.5, -0.25, -0.125];
            for (i, v) in block_a.iter().enumerate() {
                p[i] = *v;
            }
            let block_b = [
                0.25, 0.33, 0.33, 0.20, 0.20, 0.25, 0.20, 0.20, 0.20, 0.20, 0.20, 0.20,
            ];
            for (i, v) in block_b.iter().enumerate() {
                p[8 + i] = *v;
            }
            log::debug!("polarity index 21 filled with 0.2 (unassigned by the block layout)");
            for j in 21..=25 {
                p[j - 1] = 0.2;
            }
            for j in 26..=75 {
                p[j - 1] = 1.0 / j as f64;
            }
            p[75] = 1.25;
            p[76] = 1.25;
            p
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    /// Rows drawn before the band removal.
    pub n: usize,
    pub noise_var: f64,
    pub mu: f64,
    pub beta: Vec<f64>,
    pub variant: PolarityVariant,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(seed: u64, variant: PolarityVariant) -> Self {
        let mut beta = vec![0.0; SIM_P];
        for &(j, v) in &TRUE_BETA {
            beta[j - 1] = v;
        }
        SimConfig {
            n: 1000,
            noise_var: 0.3,
            mu: 0.0,
            beta,
            variant,
            seed,
        }
    }

    /// 0-based indices of the nonzero true coefficients.
    pub fn true_support(&self) -> Vec<usize> {
        (0..SIM_P).filter(|&j| self.beta[j] != 0.0).collect()
    }
}

fn block_probabilities() -> Vec<f64> {
    let mut probs = vec![0.0; SIM_P];
    for &(lo, hi, p) in &BLOCKS {
        for j in lo..=hi {
            probs[j - 1] = p;
        }
    }
    probs
}

/// Generate the dataset: X ~ independent Bernoulli per block,
/// y = mu + X beta + eps with eps ~ N(0, noise_var); rows with y strictly
/// inside (ybar - s, ybar + s), s = sqrt(noise_var), are removed (ybar is
/// the pre-removal mean) and the first [`KEEP_PER_CLASS`] survivors per
/// class are kept. The band edges become the class thresholds (a, b).
pub fn generate(config: &SimConfig) -> Result<(GroupedDataset, Vec<usize>)> {
    if config.beta.len() != SIM_P {
        return Err(Error::config(format!("beta must have length {SIM_P}")));
    }
    if config.noise_var < 0.0 {
        return Err(Error::config("noise variance must be nonnegative"));
    }
    let probs = block_probabilities();
    let mut rng = stage_rng(config.seed, Stage::Simulate, 0);
    let noise = Normal::new(0.0, config.noise_var.sqrt())
        .map_err(|e| Error::config(format!("bad noise distribution: {e}")))?;
    let mut rows: Vec<Vec<u32>> = Vec::with_capacity(config.n);
    let mut y = Vec::with_capacity(config.n);
    for _ in 0..config.n {
        let mut cols = Vec::new();
        let mut signal = config.mu;
        for (j, &p) in probs.iter().enumerate() {
            if rng.random::<f64>() < p {
                cols.push(j as u32);
                signal += config.beta[j];
            }
        }
        y.push(signal + noise.sample(&mut rng));
        rows.push(cols);
    }
    let ybar = y.iter().sum::<f64>() / config.n as f64;
    let s = config.noise_var.sqrt();
    let (a, b) = (ybar - s, ybar + s);

    let mut kept = Vec::new();
    let mut per_class = [0usize; 2];
    for i in 0..config.n {
        let class = if y[i] >= b {
            1usize
        } else if y[i] <= a {
            0usize
        } else {
            continue;
        };
        if per_class[class] < KEEP_PER_CLASS {
            per_class[class] += 1;
            kept.push(i);
        }
    }
    if per_class[0] < KEEP_PER_CLASS || per_class[1] < KEEP_PER_CLASS {
        return Err(Error::Generation(format!(
            "only {} low and {} high responses survive the band ({KEEP_PER_CLASS} per class \
             needed); try another seed or a larger n",
            per_class[0], per_class[1]
        )));
    }
    let x = SparseBinaryMatrix::from_rows(SIM_P, &kept.iter().map(|&i| rows[i].clone()).collect::<Vec<_>>())?;
    let y_kept: Vec<f64> = kept.iter().map(|&i| y[i]).collect();
    let groups = vec![0u32; kept.len()];
    let feature_names = (1..=SIM_P).map(|j| format!("f{j}")).collect();
    let ds = GroupedDataset::new(
        x,
        y_kept,
        groups,
        vec!["1".into()],
        a,
        b,
        feature_names,
        polarity_variant(config.variant),
    )?;
    Ok((ds, config.true_support()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structured_polarity_blocks() {
        let p = polarity_variant(PolarityVariant::Structured);
        assert_eq!(p.len(), SIM_P);
        assert_eq!(p[0], -1.0);
        assert_eq!(p[7], -0.125);
        assert_eq!(p[8], 0.25);
        assert_eq!(p[20], 0.2);
        assert_eq!(p[24], 0.2);
        assert!((p[49] - 1.0 / 50.0).abs() < 1e-15);
        assert_eq!(p[75], 1.25);
        assert_eq!(p[76], 1.25);
    }

    #[test]
    fn equal_polarity_is_flat() {
        assert!(polarity_variant(PolarityVariant::Equal).iter().all(|&v| v == 1.0));
    }

    #[test]
    fn generator_is_deterministic_and_balanced() {
        let cfg = SimConfig::new(9, PolarityVariant::Structured);
        let (d1, support) = generate(&cfg).unwrap();
        let (d2, _) = generate(&cfg).unwrap();
        assert_eq!(d1.y, d2.y);
        assert_eq!(d1.x, d2.x);
        assert_eq!(d1.n_rows(), 2 * KEEP_PER_CLASS);
        let ones = (0..d1.n_rows()).filter(|&i| d1.class_of(i) == 1).count();
        assert_eq!(ones, KEEP_PER_CLASS);
        assert_eq!(support, vec![0, 1, 2, 3, 4, 5, 6, 7, 75, 76]);
    }

    #[test]
    fn band_sides_match_thresholds() {
        let cfg = SimConfig::new(3, PolarityVariant::Equal);
        let (ds, _) = generate(&cfg).unwrap();
        for i in 0..ds.n_rows() {
            assert!(ds.y[i] <= ds.a || ds.y[i] >= ds.b);
        }
        assert!((ds.b - ds.a - 2.0 * 0.3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn degenerate_band_errors() {
        let mut cfg = SimConfig::new(1, PolarityVariant::Equal);
        cfg.beta = vec![0.0; SIM_P];
        cfg.noise_var = 0.0;
        assert!(generate(&cfg).is_err());
    }
}
