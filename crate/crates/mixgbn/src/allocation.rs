//! Component-assignment bookkeeping, the priors over assignments and the
//! number of components, and the collapsed Gibbs reallocation weights.
//!
//! Assignments are vectors of component labels with no empty components and
//! contiguous labels (internally `0..K`; serialized one-based). The prior on
//! assignments is the Dirichlet–multinomial conditioned on non-empty
//! components,
//!
//! `p(z) = C(m-1, K-1)^{-1} * prod_k m_k! / m!`,
//!
//! and the number of components carries a Poisson(lambda) prior.

use statrs::function::gamma::ln_gamma;

use crate::data::Dataset;
use crate::error::Error;
use crate::graph::Dag;
use crate::numkern::{logsumexp, RngStream};
use crate::scoring::{
    dag_logml_from_scorer, stats_for_rows, ComponentStats, Hyperparameters, Model, ScoreCache,
    SubsetScorer,
};
use crate::Result;

/// A length-`m` vector of component labels in `0..K` with derived counts.
/// Invariants: every component non-empty, labels contiguous.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    z: Vec<usize>,
    counts: Vec<usize>,
}

impl Assignment {
    /// Validates contiguity (`0..K` all present) and non-emptiness.
    pub fn new(z: Vec<usize>) -> Result<Self> {
        if z.is_empty() {
            return Err(Error::InvalidAssignment("no observations".into()));
        }
        let k = z.iter().max().unwrap() + 1;
        let mut counts = vec![0usize; k];
        for &label in &z {
            counts[label] += 1;
        }
        if let Some(empty) = counts.iter().position(|&c| c == 0) {
            return Err(Error::InvalidAssignment(format!(
                "component {empty} is empty"
            )));
        }
        Ok(Assignment { z, counts })
    }

    /// All `m` observations in one component.
    pub fn single(m: usize) -> Self {
        Assignment {
            z: vec![0; m],
            counts: vec![m],
        }
    }

    pub fn m(&self) -> usize {
        self.z.len()
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.z
    }

    pub fn label(&self, i: usize) -> usize {
        self.z[i]
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Row indices of component `k`, ascending.
    pub fn members(&self, k: usize) -> Vec<usize> {
        (0..self.m()).filter(|&i| self.z[i] == k).collect()
    }

    /// Relabels by order of first appearance; the canonical form of the
    /// partition the labeled vector represents.
    pub fn canonical_labels(&self) -> Vec<usize> {
        let mut map: Vec<Option<usize>> = vec![None; self.k()];
        let mut next = 0;
        let mut out = Vec::with_capacity(self.m());
        for &l in &self.z {
            let c = *map[l].get_or_insert_with(|| {
                let c = next;
                next += 1;
                c
            });
            out.push(c);
        }
        out
    }

    /// Hash of the multiset of per-component row-index sets; invariant under
    /// component relabeling. Used as the score-cache key component.
    pub fn fingerprint(&self) -> u64 {
        use std::collections::hash_map::DefaultHasher;
        use std::hash::{Hash, Hasher};
        let mut per_comp: Vec<u64> = (0..self.k())
            .map(|k| {
                let mut h = DefaultHasher::new();
                for i in 0..self.m() {
                    if self.z[i] == k {
                        i.hash(&mut h);
                    }
                }
                h.finish()
            })
            .collect();
        per_comp.sort_unstable();
        let mut h = DefaultHasher::new();
        per_comp.hash(&mut h);
        h.finish()
    }
}

/// An assignment with one observation removed; labels above a deleted
/// component are already decremented. `z[obs]` is `None`.
#[derive(Debug, Clone)]
pub struct PartialAssignment {
    z: Vec<Option<usize>>,
    counts: Vec<usize>,
}

impl PartialAssignment {
    /// Number of components after the removal (the paper's `K~`).
    pub fn tilde_k(&self) -> usize {
        self.counts.len()
    }

    pub fn m(&self) -> usize {
        self.z.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Completes with `obs` placed in component `s`; `s == tilde_k()` opens a
    /// fresh singleton component.
    pub fn complete(&self, obs: usize, s: usize) -> Assignment {
        assert!(s <= self.tilde_k(), "component {s} out of range");
        let mut z = Vec::with_capacity(self.z.len());
        for (i, l) in self.z.iter().enumerate() {
            if i == obs {
                z.push(s);
            } else {
                z.push(l.expect("only obs is removed"));
            }
        }
        let mut counts = self.counts.clone();
        if s == counts.len() {
            counts.push(1);
        } else {
            counts[s] += 1;
        }
        Assignment { z, counts }
    }

    /// Row indices of component `k` (the removed observation excluded).
    pub fn members(&self, k: usize) -> Vec<usize> {
        (0..self.z.len())
            .filter(|&i| self.z[i] == Some(k))
            .collect()
    }
}

/// Log prior of an assignment vector under the Dirichlet–multinomial
/// conditioned on non-empty components.
pub fn log_p_z(a: &Assignment) -> f64 {
    let m = a.m() as f64;
    let k = a.k() as f64;
    // -ln C(m-1, K-1) = -[lnG(m) - lnG(K) - lnG(m-K+1)]
    let log_binom = ln_gamma(m) - ln_gamma(k) - ln_gamma(m - k + 1.0);
    let mut s = -log_binom - ln_gamma(m + 1.0);
    for &mk in a.counts() {
        s += ln_gamma(mk as f64 + 1.0);
    }
    s
}

/// Log pmf of the Poisson(`lambda`) prior on the number of components.
pub fn log_p_k(k: usize, lambda: f64) -> f64 {
    let kf = k as f64;
    kf * lambda.ln() - lambda - ln_gamma(kf + 1.0)
}

/// Uniformly selects a component, then uniformly one of its observations,
/// and removes it. A component emptied by the removal is deleted and all
/// higher labels are decremented.
pub fn gibbs_select(rng: &mut RngStream, a: &Assignment) -> (usize, PartialAssignment) {
    let k = rng.below(a.k());
    let members = a.members(k);
    let obs = members[rng.below(members.len())];

    let mut z: Vec<Option<usize>> = a.labels().iter().map(|&l| Some(l)).collect();
    z[obs] = None;
    let mut counts = a.counts().to_vec();
    counts[k] -= 1;
    if counts[k] == 0 {
        counts.remove(k);
        for l in z.iter_mut().flatten() {
            if *l > k {
                *l -= 1;
            }
        }
    }
    (obs, PartialAssignment { z, counts })
}

/// Reallocation weights for one removed observation.
#[derive(Debug, Clone)]
pub struct GibbsWeights {
    /// Normalized probabilities over components `0..=tilde_k` (the last entry
    /// opens a fresh component). Sums to one.
    pub probs: Vec<f64>,
    /// Marginal log likelihood of each completed candidate assignment.
    pub logml: Vec<f64>,
    /// The completed candidate assignments, in the same order.
    pub candidates: Vec<Assignment>,
    /// The candidate scorers (the sampler adopts the chosen one).
    pub scorers: Vec<SubsetScorer>,
}

/// Computes the collapsed Gibbs weights for re-allocating observation `obs`:
///
/// * existing component `s`: `w_s = (m - K~)/K~ * p(K~) * p(D | G, z_-i, z_i = s)`,
/// * fresh component: `w = K~ * p(K~ + 1) * p(D | G, z_-i, z_i = K~ + 1)`,
///
/// evaluated in log space and normalized with a log-sum-exp guard.
/// Requires `tilde_k >= 1`; the degenerate single-observation case is decided
/// by the caller (the only valid successor re-creates component one).
///
/// `minus_stats`, when given, are the component statistics of the
/// post-removal assignment (a chain maintains them incrementally); otherwise
/// they are computed here. Each candidate then updates only the receiving
/// component's statistics.
pub fn gibbs_weights(
    data: &Dataset,
    g: &Dag,
    hp: &Hyperparameters,
    model: Model,
    partial: &PartialAssignment,
    obs: usize,
    minus_stats: Option<Vec<ComponentStats>>,
    cache: Option<&ScoreCache>,
) -> Result<GibbsWeights> {
    let tilde_k = partial.tilde_k();
    if tilde_k == 0 {
        return Err(Error::InvalidAssignment(
            "gibbs weights need at least one remaining component".into(),
        ));
    }
    let m = partial.m() as f64;
    let kf = tilde_k as f64;
    let existing_prefactor = ((m - kf) / kf).ln() + log_p_k(tilde_k, hp.lambda);
    let fresh_prefactor = kf.ln() + log_p_k(tilde_k + 1, hp.lambda);

    let minus = match minus_stats {
        Some(v) => {
            debug_assert_eq!(v.len(), tilde_k);
            v
        }
        None => (0..tilde_k)
            .map(|k| stats_for_rows(data, &partial.members(k), hp, k))
            .collect::<Result<_>>()?,
    };
    let x = data.obs(obs);

    let mut logw = Vec::with_capacity(tilde_k + 1);
    let mut logml = Vec::with_capacity(tilde_k + 1);
    let mut candidates = Vec::with_capacity(tilde_k + 1);
    let mut scorers = Vec::with_capacity(tilde_k + 1);
    for s in 0..=tilde_k {
        let cand = partial.complete(obs, s);
        let mut stats = minus.clone();
        if s < tilde_k {
            stats[s] = minus[s].with_point_added(obs, &x);
        } else {
            stats.push(stats_for_rows(data, &[obs], hp, s)?);
        }
        let scorer = SubsetScorer::from_stats(
            data.n_vars(),
            data.n_obs(),
            stats,
            hp,
            model,
            cand.fingerprint(),
        )?;
        let ml = dag_logml_from_scorer(&scorer, g, cache)?;
        let prefactor = if s < tilde_k {
            existing_prefactor
        } else {
            fresh_prefactor
        };
        logw.push(prefactor + ml);
        logml.push(ml);
        candidates.push(cand);
        scorers.push(scorer);
    }
    let norm = logsumexp(&logw);
    let probs: Vec<f64> = logw.iter().map(|w| (w - norm).exp()).collect();
    Ok(GibbsWeights {
        probs,
        logml,
        candidates,
        scorers,
    })
}
