//! Mixture proportions over templates.
//!
//! The objective is average downstream accuracy under a linearity assumption,
//! plus an entropy term weighted by `eta`:
//!
//! ```text
//! F(p) = (1/m) * sum_j sum_i p_i * A_ij  +  eta * H(p)
//! ```
//!
//! Its maximizer over the simplex has a closed form: the softmax of the row
//! means of `A` scaled by `1/eta`. Sample counts follow by largest-remainder
//! rounding so the total is preserved exactly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MixerError {
    #[error("accuracy matrix must be non-empty")]
    EmptyMatrix,
    #[error("row {row} has {got} entries, expected {expected}")]
    RaggedRow {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("entry ({row}, {col}) = {value} is outside [0, 1]")]
    EntryOutOfRange { row: usize, col: usize, value: f64 },
    #[error("proportions have {got} entries, matrix has {expected} rows")]
    ShapeError { got: usize, expected: usize },
    #[error("entropy weight eta must be strictly positive, got {0}")]
    InvalidEta(f64),
    #[error("proportions must be nonnegative and sum to 1, got sum {0}")]
    NotASimplexPoint(f64),
    #[error("accuracy CSV: {0}")]
    Csv(String),
}

/// Whether accuracies arrive as fractions in `[0, 1]` or percentages in
/// `[0, 100]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccuracyScale {
    Fraction,
    Percent,
}

/// Per-template, per-task accuracy grid. Rows are templates, columns are
/// evaluation tasks; entries are fractions in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyMatrix {
    template_names: Vec<String>,
    task_names: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl AccuracyMatrix {
    pub fn new(
        template_names: Vec<String>,
        task_names: Vec<String>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self, MixerError> {
        if rows.is_empty() || task_names.is_empty() || template_names.len() != rows.len() {
            return Err(MixerError::EmptyMatrix);
        }
        let m = task_names.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(MixerError::RaggedRow {
                    row: i,
                    got: row.len(),
                    expected: m,
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&v) || v.is_nan() {
                    return Err(MixerError::EntryOutOfRange {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
            }
        }
        Ok(AccuracyMatrix {
            template_names,
            task_names,
            rows,
        })
    }

    pub fn num_templates(&self) -> usize {
        self.rows.len()
    }

    pub fn num_tasks(&self) -> usize {
        self.task_names.len()
    }

    pub fn template_names(&self) -> &[String] {
        &self.template_names
    }

    pub fn task_names(&self) -> &[String] {
        &self.task_names
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row_means(&self) -> Vec<f64> {
        let m = self.num_tasks() as f64;
        self.rows
            .iter()
            .map(|row| row.iter().sum::<f64>() / m)
            .collect()
    }

    /// Parses the accuracy CSV: header `template,<task1>,...,<taskm>`, one
    /// row per template. `Percent` entries are divided by 100.
    pub fn from_csv(text: &str, scale: AccuracyScale) -> Result<Self, MixerError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or(MixerError::EmptyMatrix)?;
        let mut cols = header.split(',');
        let first = cols.next().unwrap_or_default();
        if first != "template" {
            return Err(MixerError::Csv(format!(
                "header must start with \"template\", got {first:?}"
            )));
        }
        let task_names: Vec<String> = cols.map(str::to_string).collect();
        let mut template_names = Vec::new();
        let mut rows = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let mut cells = line.split(',');
            let name = cells
                .next()
                .ok_or_else(|| MixerError::Csv(format!("row {} is empty", lineno + 2)))?;
            template_names.push(name.to_string());
            let row: Result<Vec<f64>, MixerError> = cells
                .map(|c| {
                    c.trim().parse::<f64>().map_err(|e| {
                        MixerError::Csv(format!("row {}: bad number {c:?}: {e}", lineno + 2))
                    })
                })
                .collect();
            let mut row = row?;
            if scale == AccuracyScale::Percent {
                for v in &mut row {
                    *v /= 100.0;
                }
            }
            rows.push(row);
        }
        AccuracyMatrix::new(template_names, task_names, rows)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("template");
        for t in &self.task_names {
            out.push(',');
            out.push_str(t);
        }
        out.push('\n');
        for (name, row) in self.template_names.iter().zip(&self.rows) {
            out.push_str(name);
            for v in row {
                out.push(',');
                out.push_str(&format!("{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// A point on the probability simplex plus the entropy weight that produced
/// it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureProportions {
    p: Vec<f64>,
    eta: f64,
}

const SIMPLEX_TOL: f64 = 1e-12;

impl MixtureProportions {
    pub fn new(p: Vec<f64>, eta: f64) -> Result<Self, MixerError> {
        if eta <= 0.0 || eta.is_nan() {
            return Err(MixerError::InvalidEta(eta));
        }
        let sum: f64 = p.iter().sum();
        if p.iter().any(|&v| v < 0.0 || v.is_nan()) || (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(MixerError::NotASimplexPoint(sum));
        }
        Ok(MixtureProportions { p, eta })
    }

    pub fn proportions(&self) -> &[f64] {
        &self.p
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

/// Shannon entropy in nats, with `0 * ln 0 = 0`.
pub fn entropy(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| -v * v.ln())
        .sum()
}

/// The entropy-regularized average-accuracy objective.
pub fn objective(a: &AccuracyMatrix, p: &[f64], eta: f64) -> Result<f64, MixerError> {
    if p.len() != a.num_templates() {
        return Err(MixerError::ShapeError {
            got: p.len(),
            expected: a.num_templates(),
        });
    }
    let linear: f64 = a
        .row_means()
        .iter()
        .zip(p)
        .map(|(mean, pi)| mean * pi)
        .sum();
    Ok(linear + eta * entropy(p))
}

/// Closed-form maximizer of the objective: softmax of `row_means / eta`,
/// computed with max subtraction. Requires `eta > 0`.
pub fn optimal_proportions(a: &AccuracyMatrix, eta: f64) -> Result<MixtureProportions, MixerError> {
    if eta <= 0.0 || eta.is_nan() {
        return Err(MixerError::InvalidEta(eta));
    }
    let scaled: Vec<f64> = a.row_means().iter().map(|mean| mean / eta).collect();
    let max = scaled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scaled.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    let mut p: Vec<f64> = exps.iter().map(|e| e / total).collect();
    // Pin the sum to exactly 1 so downstream simplex checks cannot drift.
    let sum: f64 = p.iter().sum();
    for v in &mut p {
        *v /= sum;
    }
    MixtureProportions::new(p, eta)
}

/// Largest-remainder rounding of `n * p_i`: nonnegative counts summing to
/// exactly `n`, remainder ties broken by lower index.
pub fn allocate_counts(p: &MixtureProportions, n: u64) -> Vec<u64> {
    let shares: Vec<f64> = p.proportions().iter().map(|pi| pi * n as f64).collect();
    let mut counts: Vec<u64> = shares.iter().map(|s| s.floor() as u64).collect();
    let assigned: u64 = counts.iter().sum();
    let mut order: Vec<usize> = (0..shares.len()).collect();
    order.sort_by(|&i, &j| {
        let ri = shares[i] - shares[i].floor();
        let rj = shares[j] - shares[j].floor();
        rj.partial_cmp(&ri)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    for &i in order.iter().take(n.saturating_sub(assigned) as usize) {
        counts[i] += 1;
    }
    counts
}

/// Does the mixture accuracy fall between the two single-template
/// accuracies?
pub fn interpolation_check(acc_i: f64, acc_j: f64, acc_mix: f64) -> bool {
    let (lo, hi) = if acc_i <= acc_j {
        (acc_i, acc_j)
    } else {
        (acc_j, acc_i)
    };
    (lo..=hi).contains(&acc_mix)
}

/// Absolute difference between the mixture accuracy and the average of the
/// two single-template accuracies.
pub fn mixture_deviation(acc_i: f64, acc_j: f64, acc_mix: f64) -> f64 {
    (acc_mix - (acc_i + acc_j) / 2.0).abs()
}
