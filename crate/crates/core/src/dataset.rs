//! Dataset container, class labeling, stratified 2:1:1 splitting and
//! class-stratified bootstrap resampling.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::rng::{stage_rng, Stage};
use crate::sparse::SparseBinaryMatrix;
use crate::{Error, Result};

/// Class label from the two thresholds. Rows strictly inside (a, b) belong
/// to the removed middle band and are rejected.
pub fn label_class(y: f64, a: f64, b: f64) -> Result<u8> {
    if y >= b {
        Ok(1)
    } else if y <= a {
        Ok(0)
    } else {
        Err(Error::MiddleBand { value: y, a, b })
    }
}

/// Responses, sparse binary design, group labels and class thresholds.
/// Groups are stored as contiguous ids 0..G with their display names kept
/// alongside.
#[derive(Debug, Clone)]
pub struct GroupedDataset {
    pub x: SparseBinaryMatrix,
    pub y: Vec<f64>,
    pub groups: Vec<u32>,
    pub group_names: Vec<String>,
    pub a: f64,
    pub b: f64,
    pub feature_names: Vec<String>,
    pub polarity: Vec<f64>,
}

impl GroupedDataset {
    pub fn new(
        x: SparseBinaryMatrix,
        y: Vec<f64>,
        groups: Vec<u32>,
        group_names: Vec<String>,
        a: f64,
        b: f64,
        feature_names: Vec<String>,
        polarity: Vec<f64>,
    ) -> Result<Self> {
        if a >= b {
            return Err(Error::config(format!("thresholds must satisfy a < b (got {a}, {b})")));
        }
        if y.len() != x.n_rows() || groups.len() != x.n_rows() {
            return Err(Error::config("y and groups must have one entry per design row"));
        }
        if polarity.len() != x.n_cols() || feature_names.len() != x.n_cols() {
            return Err(Error::config("polarity and feature names must have one entry per column"));
        }
        if group_names.is_empty() {
            return Err(Error::config("at least one group is required"));
        }
        for (i, &g) in groups.iter().enumerate() {
            if g as usize >= group_names.len() {
                return Err(Error::config(format!("row {i}: group id {g} out of range")));
            }
        }
        for &v in &y {
            label_class(v, a, b)?;
        }
        Ok(GroupedDataset {
            x,
            y,
            groups,
            group_names,
            a,
            b,
            feature_names,
            polarity,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.x.n_rows()
    }

    pub fn n_cols(&self) -> usize {
        self.x.n_cols()
    }

    pub fn n_groups(&self) -> usize {
        self.group_names.len()
    }

    /// Class of row `i`. Construction guarantees this cannot hit the band.
    pub fn class_of(&self, i: usize) -> u8 {
        u8::from(self.y[i] >= self.b)
    }

    /// Midpoint of the excluded band, the probit decision threshold.
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.b)
    }
}

/// Disjoint core / validation / test row sets covering the dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndex {
    pub core: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitIndex {
    pub fn core_and_validation(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.core.iter().chain(&self.validation).copied().collect();
        all.sort_unstable();
        all
    }
}

/// Per-cell 2:1:1 apportionment by largest remainder. Exact quarters go
/// where they belong; the half-seat of an odd cell goes to core; when a
/// single seat is tied between validation and test the global toggle
/// alternates the winner across cells.
fn cell_counts(n: usize, toggle: &mut bool) -> (usize, usize, usize) {
    let mut core = n / 2;
    let mut val = n / 4;
    let mut test = n / 4;
    match n % 4 {
        1 => core += 1,
        2 => {
            if *toggle {
                test += 1;
            } else {
                val += 1;
            }
            *toggle = !*toggle;
        }
        3 => {
            val += 1;
            test += 1;
        }
        _ => {}
    }
    (core, val, test)
}

/// Stratified 2:1:1 split: within every (group, class) cell the rows are
/// shuffled and dealt to core/validation/test in ratio 2:1:1 up to integer
/// rounding. Deterministic given the seed.
pub fn stratified_split(ds: &GroupedDataset, seed: u64) -> Result<SplitIndex> {
    let mut rng = stage_rng(seed, Stage::Split, 0);
    let mut core = Vec::new();
    let mut validation = Vec::new();
    let mut test = Vec::new();
    let mut toggle = false;
    for g in 0..ds.n_groups() {
        for class in 0..2u8 {
            let mut cell: Vec<usize> = (0..ds.n_rows())
                .filter(|&i| ds.groups[i] as usize == g && ds.class_of(i) == class)
                .collect();
            if cell.is_empty() {
                return Err(Error::EmptyCell {
                    group: ds.group_names[g].clone(),
                    class,
                });
            }
            shuffle(&mut cell, &mut rng);
            let (nc, nv, _nt) = cell_counts(cell.len(), &mut toggle);
            core.extend_from_slice(&cell[..nc]);
            validation.extend_from_slice(&cell[nc..nc + nv]);
            test.extend_from_slice(&cell[nc + nv..]);
        }
    }
    core.sort_unstable();
    validation.sort_unstable();
    test.sort_unstable();
    Ok(SplitIndex {
        core,
        validation,
        test,
    })
}

fn shuffle(items: &mut [usize], rng: &mut ChaCha8Rng) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}

/// Class-stratified bootstrap: each class contributes exactly its original
/// count, drawn with replacement from its own rows. The result is a row
/// multiset of the same size as `core`.
pub fn bootstrap_resample<F>(core: &[usize], class_of: F, rng: &mut ChaCha8Rng) -> Vec<usize>
where
    F: Fn(usize) -> u8,
{
    let mut sample = Vec::with_capacity(core.len());
    for class in 0..2u8 {
        let rows: Vec<usize> = core.iter().copied().filter(|&i| class_of(i) == class).collect();
        for _ in 0..rows.len() {
            sample.push(rows[rng.random_range(0..rows.len())]);
        }
    }
    sample
}
