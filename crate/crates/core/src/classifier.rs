//! Two-class probit rule on top of least-squares fits, and the pooled
//! "shrinkage" variant that ignores group labels.
//!
//! The rule compares the tail probabilities 1 - Phi((b - m)/sigma) and
//! Phi((a - m)/sigma). By symmetry of Phi this is exactly equivalent to
//! m >= (a + b)/2 for every sigma > 0, so the decision is computed from the
//! midpoint comparison (exact, scale-free); the CDF is evaluated only for
//! the reported probabilities.

use crate::lasso::LinearFit;
use crate::{Error, Result};

/// Standard normal CDF via erfc, accurate to about 1e-15.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Probit classifier: per-group least-squares fits on a common support, or
/// a single pooled fit when `pooled` is set.
#[derive(Debug, Clone)]
pub struct ProbitModel {
    /// Sorted feature indices the coefficient vectors are aligned with.
    pub support: Vec<usize>,
    pub fits: Vec<LinearFit>,
    pub pooled: bool,
    pub a: f64,
    pub b: f64,
}

/// One scored observation: predicted mean, the two tail probabilities and
/// the class decision.
#[derive(Debug, Clone, Copy)]
pub struct Prediction {
    pub mean: f64,
    pub p_hi: f64,
    pub p_lo: f64,
    pub class: u8,
}

impl ProbitModel {
    pub fn per_group(support: Vec<usize>, fits: Vec<LinearFit>, a: f64, b: f64) -> Result<Self> {
        if fits.is_empty() {
            return Err(Error::config("probit model needs at least one group fit"));
        }
        Self::validate(a, b, &fits)?;
        Ok(ProbitModel {
            support,
            fits,
            pooled: false,
            a,
            b,
        })
    }

    pub fn pooled(support: Vec<usize>, fit: LinearFit, a: f64, b: f64) -> Result<Self> {
        Self::validate(a, b, std::slice::from_ref(&fit))?;
        Ok(ProbitModel {
            support,
            fits: vec![fit],
            pooled: true,
            a,
            b,
        })
    }

    fn validate(a: f64, b: f64, fits: &[LinearFit]) -> Result<()> {
        if a >= b {
            return Err(Error::config("thresholds must satisfy a < b"));
        }
        if fits.iter().any(|f| !(f.sigma > 0.0)) {
            return Err(Error::config("residual scales must be positive"));
        }
        Ok(())
    }

    fn fit_for(&self, g: usize) -> Result<&LinearFit> {
        if self.pooled {
            Ok(&self.fits[0])
        } else {
            self.fits.get(g).ok_or_else(|| {
                Error::config(format!(
                    "group {g} was never fitted; route it to the pooled model"
                ))
            })
        }
    }

    /// Predicted mean for a sparse row (sorted column indices).
    pub fn mean(&self, row: &[u32], g: usize) -> Result<f64> {
        Ok(self.fit_for(g)?.mean(&self.support, row))
    }

    /// Class decision: 1 iff the predicted mean reaches the band midpoint,
    /// which is the probit comparison in closed form (ties to class 1).
    pub fn classify(&self, row: &[u32], g: usize) -> Result<u8> {
        Ok(u8::from(self.mean(row, g)? >= 0.5 * (self.a + self.b)))
    }

    /// Full scored prediction with tail probabilities.
    pub fn predict(&self, row: &[u32], g: usize) -> Result<Prediction> {
        let fit = self.fit_for(g)?;
        let m = fit.mean(&self.support, row);
        let p_hi = 1.0 - normal_cdf((self.b - m) / fit.sigma);
        let p_lo = normal_cdf((self.a - m) / fit.sigma);
        Ok(Prediction {
            mean: m,
            p_hi,
            p_lo,
            class: u8::from(m >= 0.5 * (self.a + self.b)),
        })
    }

    /// Pooled-rule prediction regardless of group; only valid on pooled
    /// models (the shrinkage classifier).
    pub fn shrinkage_predict(&self, row: &[u32]) -> Result<u8> {
        if !self.pooled {
            return Err(Error::config("shrinkage prediction needs a pooled model"));
        }
        self.classify(row, 0)
    }
}

/// Mean absolute disagreement between two class vectors.
pub fn misclassification_error(predictions: &[u8], truth: &[u8]) -> Result<f64> {
    if predictions.is_empty() || predictions.len() != truth.len() {
        return Err(Error::config(
            "predictions and truth must be nonempty and equally long",
        ));
    }
    let wrong = predictions
        .iter()
        .zip(truth)
        .filter(|(p, t)| p != t)
        .count();
    Ok(wrong as f64 / predictions.len() as f64)
}
