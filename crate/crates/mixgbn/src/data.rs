//! Observation matrix with optional variable names and known class labels.

use nalgebra::{DMatrix, DVector};

use crate::error::Error;
use crate::Result;

/// An `m x n` real data matrix: rows are observations, columns are variables.
///
/// `labels`, when present, carries a known class label per observation (e.g.
/// a species column from a benchmark CSV); it is never part of the variable
/// matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    data: DMatrix<f64>,
    names: Vec<String>,
    labels: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(data: DMatrix<f64>, names: Vec<String>, labels: Option<Vec<String>>) -> Result<Self> {
        if names.len() != data.ncols() {
            return Err(Error::Dimension(format!(
                "{} names for {} columns",
                names.len(),
                data.ncols()
            )));
        }
        if let Some(l) = &labels {
            if l.len() != data.nrows() {
                return Err(Error::Dimension(format!(
                    "{} labels for {} rows",
                    l.len(),
                    data.nrows()
                )));
            }
        }
        Ok(Dataset { data, names, labels })
    }

    /// Builds from rows with default names `x0..x{n-1}`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Dimension("no rows".into()));
        }
        let n = rows[0].len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        let m = rows.len();
        let data = DMatrix::from_fn(m, n, |i, j| rows[i][j]);
        let names = (0..n).map(|j| format!("x{j}")).collect();
        Ok(Dataset { data, names, labels: None })
    }

    pub fn n_obs(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_vars(&self) -> usize {
        self.data.ncols()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn set_labels(&mut self, labels: Option<Vec<String>>) {
        self.labels = labels;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)]
    }

    /// Observation `i` as a column vector.
    pub fn obs(&self, i: usize) -> DVector<f64> {
        self.data.row(i).transpose()
    }

    /// Observation `i` restricted to the given variable subset.
    pub fn obs_subset(&self, i: usize, subset: &[usize]) -> DVector<f64> {
        DVector::from_fn(subset.len(), |a, _| self.data[(i, subset[a])])
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    /// Maps the known labels onto contiguous zero-based component indices in
    /// order of first appearance.
    pub fn label_assignment(&self) -> Result<Vec<usize>> {
        let labels = self
            .labels
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("dataset has no label column".into()))?;
        let mut seen: Vec<&str> = Vec::new();
        let mut z = Vec::with_capacity(labels.len());
        for l in labels {
            let idx = match seen.iter().position(|s| *s == l.as_str()) {
                Some(i) => i,
                None => {
                    seen.push(l.as_str());
                    seen.len() - 1
                }
            };
            z.push(idx);
        }
        Ok(z)
    }

    /// Z-score standardizes every column in place to sample mean 0 and
    /// sample variance 1, with the `m - 1` denominator. Fails on a constant
    /// column. Idempotent up to floating-point noise.
    pub fn standardize(&mut self) -> Result<()> {
        let m = self.n_obs();
        if m < 2 {
            return Err(Error::InvalidConfig(
                "standardization needs at least two rows".into(),
            ));
        }
        for j in 0..self.n_vars() {
            let col = self.data.column(j);
            let mean = col.sum() / m as f64;
            let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m as f64 - 1.0);
            if var <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "column '{}' is constant; cannot standardize",
                    self.names[j]
                )));
            }
            let sd = var.sqrt();
            for i in 0..m {
                self.data[(i, j)] = (self.data[(i, j)] - mean) / sd;
            }
        }
        Ok(())
    }
}
