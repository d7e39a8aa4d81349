//! Adaptive penalty weights: per-feature weights from polarity scores and
//! per-group sharing weights (schemes WS1..WS6).

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default tolerance added to |polarity| before inversion.
pub const POLARITY_TOL: f64 = 1e-5;

/// Group sharing weight schemes. All logarithms are natural.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Ws1,
    Ws2,
    Ws3,
    Ws4,
    Ws5,
    Ws6,
    Custom,
}

impl Scheme {
    pub const ALL_FORMULAS: [Scheme; 6] = [
        Scheme::Ws1,
        Scheme::Ws2,
        Scheme::Ws3,
        Scheme::Ws4,
        Scheme::Ws5,
        Scheme::Ws6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Ws1 => "ws1",
            Scheme::Ws2 => "ws2",
            Scheme::Ws3 => "ws3",
            Scheme::Ws4 => "ws4",
            Scheme::Ws5 => "ws5",
            Scheme::Ws6 => "ws6",
            Scheme::Custom => "custom",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ws1" => Ok(Scheme::Ws1),
            "ws2" => Ok(Scheme::Ws2),
            "ws3" => Ok(Scheme::Ws3),
            "ws4" => Ok(Scheme::Ws4),
            "ws5" => Ok(Scheme::Ws5),
            "ws6" => Ok(Scheme::Ws6),
            "custom" => Ok(Scheme::Custom),
            other => Err(Error::config(format!(
                "unknown scheme '{other}' (expected ws1..ws6 or custom)"
            ))),
        }
    }
}

/// Per-feature penalty weights w_j = 1 / (|polarity_j| + tol).
pub fn inverse_polarity_weights(polarity: &[f64], tol: f64) -> Result<Vec<f64>> {
    if tol <= 0.0 {
        return Err(Error::config("polarity tolerance must be positive"));
    }
    polarity
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            if p.is_finite() {
                Ok(1.0 / (p.abs() + tol))
            } else {
                Err(Error::Feature {
                    index: j,
                    message: "non-finite polarity".into(),
                })
            }
        })
        .collect()
}

/// Per-group sharing weights r_g for the formula schemes. `n_g` are the
/// per-group core training sizes; the reference size N is their sum.
pub fn group_weights(scheme: Scheme, n_g: &[usize]) -> Result<Vec<f64>> {
    if n_g.is_empty() {
        return Err(Error::config("group sizes must be nonempty"));
    }
    for (g, &n) in n_g.iter().enumerate() {
        if n < 2 {
            return Err(Error::config(format!(
                "group {g} has size {n}; at least 2 observations per group are required"
            )));
        }
    }
    let total: usize = n_g.iter().sum();
    let log_total = (total as f64).ln();
    let r: Vec<f64> = n_g
        .iter()
        .map(|&n| {
            let n = n as f64;
            match scheme {
                Scheme::Ws1 => (1.0f64 / 3.0).sqrt(),
                Scheme::Ws2 => (n / total as f64).sqrt(),
                Scheme::Ws3 => (n.ln() / log_total).sqrt(),
                Scheme::Ws4 => n.ln() / log_total,
                Scheme::Ws5 => (log_total / n.ln()).sqrt(),
                Scheme::Ws6 => ((n.ln() * total as f64) / (log_total * n)).sqrt(),
                Scheme::Custom => f64::NAN,
            }
        })
        .collect();
    if scheme == Scheme::Custom {
        return Err(Error::config(
            "custom scheme requires explicit group weights in the configuration",
        ));
    }
    let sum: f64 = r.iter().sum();
    if sum <= 1.0 {
        log::warn!("sum of group weights is {sum:.4} <= 1; the sharing condition is violated");
    }
    Ok(r)
}

/// Bundle of feature and group weights actually handed to the solver.
#[derive(Debug, Clone)]
pub struct PenaltyWeights {
    pub w: Vec<f64>,
    pub r: Vec<f64>,
    pub scheme: Scheme,
}

impl PenaltyWeights {
    pub fn from_scheme(scheme: Scheme, polarity: &[f64], tol: f64, n_g: &[usize]) -> Result<Self> {
        Ok(PenaltyWeights {
            w: inverse_polarity_weights(polarity, tol)?,
            r: group_weights(scheme, n_g)?,
            scheme,
        })
    }

    pub fn custom(r: Vec<f64>, polarity: &[f64], tol: f64) -> Result<Self> {
        if r.is_empty() || r.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::config("custom group weights must all be positive"));
        }
        let sum: f64 = r.iter().sum();
        if sum <= 1.0 {
            log::warn!("sum of group weights is {sum:.4} <= 1; the sharing condition is violated");
        }
        Ok(PenaltyWeights {
            w: inverse_polarity_weights(polarity, tol)?,
            r,
            scheme: Scheme::Custom,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_polarity_examples() {
        let w = inverse_polarity_weights(&[0.0, 1.25, -1.0, 0.5], POLARITY_TOL).unwrap();
        assert!((w[0] - 1e5).abs() < 1e-6);
        assert!((w[1] - 1.0 / (1.25 + 1e-5)).abs() < 1e-15);
        assert!((w[2] - 1.0 / (1.0 + 1e-5)).abs() < 1e-15);
        assert!(w[2] < w[3]);
    }

    #[test]
    fn non_finite_polarity_is_rejected() {
        let err = inverse_polarity_weights(&[0.1, f64::NAN], POLARITY_TOL).unwrap_err();
        assert!(err.to_string().contains("feature 1"));
    }

    #[test]
    fn ws1_is_constant() {
        let r = group_weights(Scheme::Ws1, &[8561, 4901, 3235]).unwrap();
        for v in r {
            assert!((v - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn ws2_single_group_is_one() {
        let r = group_weights(Scheme::Ws2, &[400]).unwrap();
        assert!((r[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scheme_identities() {
        let sizes = [8561usize, 4901, 3235];
        let w2 = group_weights(Scheme::Ws2, &sizes).unwrap();
        let w3 = group_weights(Scheme::Ws3, &sizes).unwrap();
        let w4 = group_weights(Scheme::Ws4, &sizes).unwrap();
        let w5 = group_weights(Scheme::Ws5, &sizes).unwrap();
        let w6 = group_weights(Scheme::Ws6, &sizes).unwrap();
        for g in 0..sizes.len() {
            assert!((w3[g] * w5[g] - 1.0).abs() < 1e-12);
            assert!((w4[g] - w3[g] * w3[g]).abs() < 1e-12);
            assert!((w6[g] - w3[g] / w2[g]).abs() < 1e-12);
        }
    }

    #[test]
    fn tiny_groups_are_rejected() {
        assert!(group_weights(Scheme::Ws3, &[10, 1]).is_err());
    }
}
