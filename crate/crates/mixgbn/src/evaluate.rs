//! Posterior-sample evaluation: pairwise co-allocation probabilities,
//! marginal edge posteriors (via CPDAGs, an undirected edge counting for both
//! orientations), thresholded network prediction, precision–recall AUC, and
//! a relative structural Hamming distance.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::graph::Cpdag;
use crate::mcmc::PosteriorSample;
use crate::Result;

/// `n x n` matrix of marginal edge posterior probabilities; entry `(j, i)`
/// estimates the posterior probability of `X_j -> X_i`, where an undirected
/// CPDAG edge counts for both orientations. Diagonal is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeScoreMatrix {
    n: usize,
    p: Vec<f64>,
}

impl EdgeScoreMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, j: usize, i: usize) -> f64 {
        self.p[j * self.n + i]
    }

    /// CSV with a header row `,x0,x1,...`; row labels in the first column.
    pub fn to_csv(&self, names: &[String]) -> String {
        let mut s = String::new();
        s.push_str(&format!(",{}\n", names.join(",")));
        for j in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|i| format!("{}", self.get(j, i))).collect();
            s.push_str(&format!("{},{}\n", names[j], row.join(",")));
        }
        s
    }
}

/// `m x m` symmetric matrix of co-assignment probabilities with unit
/// diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CoAllocationMatrix {
    m: usize,
    p: Vec<f64>,
}

impl CoAllocationMatrix {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.m + j]
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let header: Vec<String> = (0..self.m).map(|i| format!("obs{i}")).collect();
        s.push_str(&format!(",{}\n", header.join(",")));
        for i in 0..self.m {
            let row: Vec<String> = (0..self.m).map(|j| format!("{}", self.get(i, j))).collect();
            s.push_str(&format!("obs{i},{}\n", row.join(",")));
        }
        s
    }
}

/// Pairwise co-allocation probabilities: entry `(i, j)` is the fraction of
/// draws in which observations `i` and `j` share a component.
pub fn coallocation(sample: &PosteriorSample) -> Result<CoAllocationMatrix> {
    let r = sample.draws.len();
    if r == 0 {
        return Err(Error::InvalidConfig("empty posterior sample".into()));
    }
    let m = sample.draws[0].z.m();
    let mut counts = vec![0u64; m * m];
    for draw in &sample.draws {
        let z = draw.z.labels();
        for i in 0..m {
            for j in (i + 1)..m {
                if z[i] == z[j] {
                    counts[i * m + j] += 1;
                }
            }
        }
    }
    let mut p = vec![0.0; m * m];
    for i in 0..m {
        p[i * m + i] = 1.0;
        for j in (i + 1)..m {
            let v = counts[i * m + j] as f64 / r as f64;
            p[i * m + j] = v;
            p[j * m + i] = v;
        }
    }
    Ok(CoAllocationMatrix { m, p })
}

/// Marginal edge posterior probabilities: each sampled DAG is replaced by its
/// CPDAG; a directed edge contributes to one orientation, an undirected edge
/// to both.
pub fn edge_scores(sample: &PosteriorSample) -> Result<EdgeScoreMatrix> {
    let r = sample.draws.len();
    if r == 0 {
        return Err(Error::InvalidConfig("empty posterior sample".into()));
    }
    let n = sample.draws[0].g.n();
    let mut counts = vec![0u64; n * n];
    for draw in &sample.draws {
        let cpdag = draw.g.to_cpdag();
        for &(j, i) in cpdag.directed() {
            counts[j * n + i] += 1;
        }
        for &(j, i) in cpdag.undirected() {
            counts[j * n + i] += 1;
            counts[i * n + j] += 1;
        }
    }
    let p = counts.iter().map(|&c| c as f64 / r as f64).collect();
    Ok(EdgeScoreMatrix { n, p })
}

/// A thresholded network prediction: directed and undirected edges, rendered
/// with the same edge-list text format as CPDAGs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedNetwork {
    pub n: usize,
    pub directed: Vec<(usize, usize)>,
    pub undirected: Vec<(usize, usize)>,
}

impl PredictedNetwork {
    pub fn edge_count(&self) -> usize {
        self.directed.len() + self.undirected.len()
    }

    pub fn to_edge_list_text(&self) -> String {
        let mut s = String::new();
        for &(j, i) in &self.directed {
            s.push_str(&format!("{j} -> {i}\n"));
        }
        for &(j, i) in &self.undirected {
            s.push_str(&format!("{j} -- {i}\n"));
        }
        s
    }
}

impl fmt::Display for PredictedNetwork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_edge_list_text())
    }
}

impl From<&Cpdag> for PredictedNetwork {
    fn from(c: &Cpdag) -> Self {
        PredictedNetwork {
            n: c.n(),
            directed: c.directed().iter().cloned().collect(),
            undirected: c.undirected().iter().cloned().collect(),
        }
    }
}

/// Thresholded prediction: a pair enters when `max(p_ji, p_ij) > psi`;
/// it is rendered undirected when the two orientations score within 0.25 of
/// each other, otherwise directed toward the larger score.
pub fn predict_network(scores: &EdgeScoreMatrix, psi: f64) -> PredictedNetwork {
    let n = scores.n();
    let mut directed = Vec::new();
    let mut undirected = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            let fwd = scores.get(a, b);
            let bwd = scores.get(b, a);
            if fwd.max(bwd) > psi {
                if (fwd - bwd).abs() < 0.25 {
                    undirected.push((a, b));
                } else if fwd > bwd {
                    directed.push((a, b));
                } else {
                    directed.push((b, a));
                }
            }
        }
    }
    PredictedNetwork { n, directed, undirected }
}

/// Area under the precision–recall curve for edge recovery.
///
/// Every ordered pair `(j, i)` is an instance with score `p_ji`; it is a
/// positive when the true CPDAG implies `X_j -> X_i` (either orientation of
/// an undirected edge counts). Thresholds sweep the distinct score values
/// from high to low — tied scores enter together — and precision is
/// integrated over recall with step interpolation.
pub fn auc_pr(scores: &EdgeScoreMatrix, truth: &Cpdag) -> Result<f64> {
    let n = scores.n();
    if truth.n() != n {
        return Err(Error::Dimension(format!(
            "scores on {n} nodes vs truth on {}",
            truth.n()
        )));
    }
    let mut pairs: Vec<(f64, bool)> = Vec::with_capacity(n * (n - 1));
    let mut positives = 0u64;
    for j in 0..n {
        for i in 0..n {
            if i == j {
                continue;
            }
            let label = truth.implies_edge(j, i);
            positives += label as u64;
            pairs.push((scores.get(j, i), label));
        }
    }
    if positives == 0 {
        return Err(Error::UndefinedMetric(
            "AUC undefined: the true graph has no edges".into(),
        ));
    }
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("scores are finite"));

    let mut auc = 0.0;
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut last_recall = 0.0;
    let mut idx = 0;
    while idx < pairs.len() {
        // advance over the whole tied-score group at once
        let threshold = pairs[idx].0;
        while idx < pairs.len() && pairs[idx].0 == threshold {
            if pairs[idx].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            idx += 1;
        }
        let recall = tp as f64 / positives as f64;
        let precision = tp as f64 / (tp + fp) as f64;
        auc += (recall - last_recall) * precision;
        last_recall = recall;
    }
    Ok(auc)
}

/// Relative structural Hamming distance: the fraction of node pairs whose
/// edge status (absent / undirected / directed-with-orientation) differs
/// between the prediction and the true CPDAG, normalized by `n(n-1)/2`.
pub fn rshd(prediction: &PredictedNetwork, truth: &Cpdag) -> Result<f64> {
    let n = truth.n();
    if prediction.n != n {
        return Err(Error::Dimension(format!(
            "prediction on {} nodes vs truth on {n}",
            prediction.n
        )));
    }

    #[derive(PartialEq)]
    enum Status {
        Absent,
        Undirected,
        Directed(bool), // true: low -> high
    }

    let status_pred = |a: usize, b: usize| -> Status {
        if prediction.undirected.contains(&(a, b)) {
            Status::Undirected
        } else if prediction.directed.contains(&(a, b)) {
            Status::Directed(true)
        } else if prediction.directed.contains(&(b, a)) {
            Status::Directed(false)
        } else {
            Status::Absent
        }
    };
    let status_truth = |a: usize, b: usize| -> Status {
        if truth.undirected().contains(&(a, b)) {
            Status::Undirected
        } else if truth.directed().contains(&(a, b)) {
            Status::Directed(true)
        } else if truth.directed().contains(&(b, a)) {
            Status::Directed(false)
        } else {
            Status::Absent
        }
    };

    let mut mismatches = 0usize;
    for a in 0..n {
        for b in (a + 1)..n {
            if status_pred(a, b) != status_truth(a, b) {
                mismatches += 1;
            }
        }
    }
    Ok(mismatches as f64 / (n * (n - 1) / 2) as f64)
}
