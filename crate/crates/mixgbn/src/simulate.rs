//! Synthetic tied-covariance mixture data and benchmark CSV ingestion.
//!
//! The generator draws a random DAG over variables in topological order
//! (`X_j -> X_i` with `j < i`, each edge present independently with
//! probability `expected_edges / (n(n-1)/2)`), samples structural-equation
//! parameters from `Uniform[1,2]` with random signs, rescales them per node
//! so that `sigma_i^2 + sum_j b_ij^2 = 1`, draws zero-mean base observations
//! from the implied joint Gaussian, and shifts each observation by one of
//! `K` component means drawn from a standard normal.

use std::fs::File;
use std::io::Write as _;
use std::path::Path;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::Error;
use crate::graph::{Cpdag, Dag};
use crate::numkern::{RngStream, StreamKind, SymMatrix};
use crate::Result;

/// Generator configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    /// Expected number of edges in the random DAG (default 20).
    pub expected_edges: f64,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(n: usize, m: usize, k: usize, seed: u64) -> Self {
        SimConfig {
            n,
            m,
            k,
            expected_edges: 20.0,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidConfig("n must be at least 2".into()));
        }
        if self.k < 1 || self.m < self.k {
            return Err(Error::InvalidConfig("need m >= K >= 1".into()));
        }
        let zeta = (self.n * (self.n - 1) / 2) as f64;
        if self.expected_edges <= 0.0 || self.expected_edges > zeta {
            return Err(Error::InvalidConfig(format!(
                "expected_edges must lie in (0, {zeta}]"
            )));
        }
        Ok(())
    }
}

/// Everything the generator knows about a simulated dataset, written as the
/// JSON sidecar next to the data. Node indices are zero-based; component
/// labels in `z` are one-based.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruth {
    pub n: usize,
    /// True DAG edges `[j, i]` meaning `X_j -> X_i`.
    pub edges: Vec<[usize; 2]>,
    pub cpdag_directed: Vec<[usize; 2]>,
    pub cpdag_undirected: Vec<[usize; 2]>,
    /// Structural coefficients per node: `(parent, b)` pairs.
    pub coefficients: Vec<Vec<(usize, f64)>>,
    /// Residual noise variances per node.
    pub noise_var: Vec<f64>,
    /// Implied joint covariance, row-major.
    pub sigma_row_major: Vec<f64>,
    /// Component means.
    pub mu: Vec<Vec<f64>>,
    /// True component label per observation (one-based).
    pub z: Vec<usize>,
}

impl GroundTruth {
    pub fn dag(&self) -> Result<Dag> {
        let edges: Vec<(usize, usize)> = self.edges.iter().map(|e| (e[0], e[1])).collect();
        Dag::from_edges(self.n, &edges)
    }

    pub fn cpdag(&self) -> Cpdag {
        Cpdag::new(
            self.n,
            self.cpdag_directed.iter().map(|e| (e[0], e[1])).collect(),
            self.cpdag_undirected.iter().map(|e| (e[0], e[1])).collect(),
        )
    }

    pub fn sigma(&self) -> Result<SymMatrix> {
        SymMatrix::from_row_major(self.n, &self.sigma_row_major)
    }

    /// Zero-based assignment labels.
    pub fn assignment_labels(&self) -> Vec<usize> {
        self.z.iter().map(|&l| l - 1).collect()
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut f = File::create(path)?;
        serde_json::to_writer_pretty(&mut f, self)?;
        f.write_all(b"\n")?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<GroundTruth> {
        let f = File::open(path)?;
        Ok(serde_json::from_reader(f)?)
    }
}

/// Joint covariance implied by the structural equations, assembled by
/// forward substitution in the natural (topological) variable order.
pub fn covariance_from_structural(
    n: usize,
    coefficients: &[Vec<(usize, f64)>],
    noise_var: &[f64],
) -> SymMatrix {
    let mut sigma = SymMatrix::zeros(n);
    for i in 0..n {
        // cov(X_i, X_j) for j < i
        for j in 0..i {
            let mut c = 0.0;
            for &(p, b) in &coefficients[i] {
                c += b * sigma.get(p, j);
            }
            sigma.set(i, j, c);
        }
        let mut var = noise_var[i];
        for &(p, b) in &coefficients[i] {
            for &(q, d) in &coefficients[i] {
                var += b * d * sigma.get(p, q);
            }
        }
        sigma.set(i, i, var);
    }
    sigma
}

/// Generates one dataset plus its ground truth. Deterministic in the seed.
pub fn simulate_dataset(cfg: &SimConfig) -> Result<(Dataset, GroundTruth)> {
    cfg.validate()?;
    let mut rng = RngStream::substream(cfg.seed, StreamKind::Simulation, 0);
    let n = cfg.n;
    let zeta = (n * (n - 1) / 2) as f64;
    let p = cfg.expected_edges / zeta;

    // (i) edges X_j -> X_i with j < i
    let mut parent_sets: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 1..n {
        for j in 0..i {
            if rng.uniform() < p {
                parent_sets[i].push(j);
            }
        }
    }

    // (ii) coefficients and noise scales from Uniform[1,2], random signs on
    // the coefficients, rescaled per node to unit Euclidean norm
    let mut coefficients: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut noise_var = vec![0.0; n];
    for i in 0..n {
        let mut bs: Vec<f64> = Vec::with_capacity(parent_sets[i].len());
        for _ in &parent_sets[i] {
            let mag = 1.0 + rng.uniform();
            let sign = if rng.uniform() < 0.5 { -1.0 } else { 1.0 };
            bs.push(sign * mag);
        }
        let sd = 1.0 + rng.uniform();
        let norm = (sd * sd + bs.iter().map(|b| b * b).sum::<f64>()).sqrt();
        let sd = sd / norm;
        noise_var[i] = sd * sd;
        coefficients[i] = parent_sets[i]
            .iter()
            .zip(bs.iter())
            .map(|(&j, &b)| (j, b / norm))
            .collect();
    }

    // (iii) implied joint covariance
    let sigma = covariance_from_structural(n, &coefficients, &noise_var);

    // (iv) base observations via the structural equations
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(cfg.m);
    for _ in 0..cfg.m {
        let mut x = vec![0.0; n];
        for i in 0..n {
            let mut v: f64 = coefficients[i].iter().map(|&(j, b)| b * x[j]).sum();
            let eps: f64 = StandardNormal.sample(&mut rng);
            v += noise_var[i].sqrt() * eps;
            x[i] = v;
        }
        rows.push(x);
    }

    // (v) component means from a standard normal
    let mu: Vec<Vec<f64>> = (0..cfg.k)
        .map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();

    // (vi) uniform assignment, then shift by the component mean
    let mut z = Vec::with_capacity(cfg.m);
    for row in rows.iter_mut() {
        let k = rng.below(cfg.k);
        for j in 0..n {
            row[j] += mu[k][j];
        }
        z.push(k + 1);
    }

    let mut data = Dataset::from_rows(&rows)?;
    data.set_labels(Some(z.iter().map(|l| l.to_string()).collect()));

    let edges: Vec<[usize; 2]> = (0..n)
        .flat_map(|i| parent_sets[i].iter().map(move |&j| [j, i]))
        .collect();
    let dag = Dag::from_edges(
        n,
        &edges.iter().map(|e| (e[0], e[1])).collect::<Vec<_>>(),
    )?;
    let cpdag = dag.to_cpdag();
    let truth = GroundTruth {
        n,
        edges,
        cpdag_directed: cpdag.directed().iter().map(|&(j, i)| [j, i]).collect(),
        cpdag_undirected: cpdag.undirected().iter().map(|&(j, i)| [j, i]).collect(),
        coefficients,
        noise_var,
        sigma_row_major: sigma.to_row_major(),
        mu,
        z,
    };
    Ok((data, truth))
}

/// Reads an RFC-4180-style CSV with a header row. `label_column`, when given,
/// names a column stored as known class labels and excluded from the
/// variable matrix. With `standardize`, every variable column is z-scored to
/// sample mean 0 and sample variance 1 (denominator `m - 1`).
pub fn load_csv(path: &Path, standardize: bool, label_column: Option<&str>) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    let label_idx = match label_column {
        Some(name) => Some(headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::InvalidConfig(format!("label column '{name}' not found in header"))
        })?),
        None => None,
    };
    let var_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != label_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != headers.len() {
            return Err(Error::Parse(format!(
                "row {}: {} fields, expected {}",
                r + 2,
                record.len(),
                headers.len()
            )));
        }
        let mut row = Vec::with_capacity(var_names.len());
        for (c, field) in record.iter().enumerate() {
            if Some(c) == label_idx {
                labels.push(field.to_owned());
            } else {
                row.push(field.trim().parse::<f64>().map_err(|_| {
                    Error::Parse(format!(
                        "row {}, column '{}': non-numeric cell '{field}'",
                        r + 2,
                        headers[c]
                    ))
                })?);
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("CSV has no data rows".into()));
    }
    let m = rows.len();
    let mat = nalgebra::DMatrix::from_fn(m, var_names.len(), |i, j| rows[i][j]);
    let mut data = Dataset::new(mat, var_names, label_idx.map(|_| labels))?;
    if standardize {
        data.standardize()?;
    }
    Ok(data)
}

/// Writes a dataset as CSV; with `include_labels`, the label column is
/// appended as a final `component` column.
pub fn write_csv(data: &Dataset, path: &Path, include_labels: bool) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let labels = data.labels();
    let with_labels = include_labels && labels.is_some();
    let mut header: Vec<String> = data.names().to_vec();
    if with_labels {
        header.push("component".into());
    }
    w.write_record(&header)?;
    for i in 0..data.n_obs() {
        let mut rec: Vec<String> = (0..data.n_vars())
            .map(|j| format!("{}", data.get(i, j)))
            .collect();
        if with_labels {
            rec.push(labels.unwrap()[i].clone());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
