//! Closed-form marginal likelihoods for Gaussian Bayesian networks under
//! Normal–Wishart priors: the homogeneous score (H), the full-covariance
//! mixture score (M1, one Wishart per component, factorizes over components)
//! and the tied-covariance mixture score (M2, one shared Wishart coupling all
//! components).
//!
//! # Wishart parameterization
//!
//! Throughout the crate, `W ~ Wishart(alpha_w, T)` means the density is
//! proportional to `det(W)^{(alpha_w - n - 1)/2} * exp(-tr(T W) / 2)`, i.e.
//! `T` is the *inverse-scale (parametric) matrix* and `E[W] = alpha_w T^{-1}`.
//! This is the convention under which the posterior update is additive,
//! `T_posterior = T_prior + sum_k T_[k]`, matching the determinant ratio
//! `det(T_prior)^{alpha_w/2} / det(T_posterior)^{(alpha_w+m)/2}` in the
//! scores below.
//!
//! Scores for an arbitrary DAG factorize over nodes as ratios of subset
//! marginals (`subset_logml({X_i} u Pa_i) - subset_logml(Pa_i)`), with the
//! empty-set marginal defined as zero.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::RwLock;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::allocation::Assignment;
use crate::data::Dataset;
use crate::error::Error;
use crate::graph::Dag;
use crate::numkern::{log_multigamma, SymMatrix};
use crate::Result;

/// Marginal-likelihood model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Homogeneous Gaussian Bayesian network; the assignment is ignored.
    H,
    /// Full-covariance mixture: component-specific Wishart posteriors.
    M1,
    /// Tied-covariance mixture: one Wishart shared by all components.
    M2,
}

impl std::str::FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "h" => Ok(Model::H),
            "m1" => Ok(Model::M1),
            "m2" => Ok(Model::M2),
            other => Err(Error::InvalidConfig(format!(
                "unknown model '{other}' (expected h, m1 or m2)"
            ))),
        }
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Model::H => write!(f, "h"),
            Model::M1 => write!(f, "m1"),
            Model::M2 => write!(f, "m2"),
        }
    }
}

/// Full prior specification.
///
/// Shared values apply to every component; the optional per-component
/// overrides (`t_dagger_k`, `nu_k`, `alpha_mu_k`) are only meaningful when
/// the number of components is fixed (known-label mode) and are rejected by
/// the sampler when the assignment is latent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Hyperparameters {
    /// Parametric matrix of the Wishart prior (inverse-scale convention).
    pub t_dagger: SymMatrix,
    /// Prior mean of the component means.
    pub nu: Vec<f64>,
    /// Wishart degrees of freedom; must exceed `n - 1`.
    pub alpha_w: f64,
    /// Prior equivalent sample size of the mean.
    pub alpha_mu: f64,
    /// Rate of the Poisson prior on the number of components.
    pub lambda: f64,
    /// Per-component parametric matrices (full-covariance model only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_dagger_k: Option<Vec<SymMatrix>>,
    /// Per-component prior means.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_k: Option<Vec<Vec<f64>>>,
    /// Per-component prior equivalent sample sizes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_mu_k: Option<Vec<f64>>,
}

impl Hyperparameters {
    /// Weakly informative defaults: `T = I`, `nu = 0`, `alpha_w = n + 1`,
    /// `alpha_mu = 1`, `lambda = 1`.
    pub fn default_for(n: usize) -> Self {
        Hyperparameters {
            t_dagger: SymMatrix::identity(n),
            nu: vec![0.0; n],
            alpha_w: n as f64 + 1.0,
            alpha_mu: 1.0,
            lambda: 1.0,
            t_dagger_k: None,
            nu_k: None,
            alpha_mu_k: None,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        self.validate_scalars(n)?;
        self.t_dagger.cholesky().map_err(|_| {
            Error::InvalidConfig("t_dagger must be positive definite".into())
        })?;
        Ok(())
    }

    fn validate_scalars(&self, n: usize) -> Result<()> {
        if self.t_dagger.order() != n {
            return Err(Error::Dimension(format!(
                "t_dagger order {} vs n = {n}",
                self.t_dagger.order()
            )));
        }
        if self.nu.len() != n {
            return Err(Error::Dimension(format!("nu length {} vs n = {n}", self.nu.len())));
        }
        if self.alpha_w <= n as f64 - 1.0 {
            return Err(Error::InvalidConfig(format!(
                "alpha_w = {} must exceed n - 1 = {}",
                self.alpha_w,
                n - 1
            )));
        }
        if self.alpha_mu <= 0.0 {
            return Err(Error::InvalidConfig("alpha_mu must be positive".into()));
        }
        if self.lambda <= 0.0 {
            return Err(Error::InvalidConfig("lambda must be positive".into()));
        }
        if let Some(alphas) = &self.alpha_mu_k {
            if alphas.iter().any(|a| *a <= 0.0) {
                return Err(Error::InvalidConfig("alpha_mu_k must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn has_component_overrides(&self) -> bool {
        self.t_dagger_k.is_some() || self.nu_k.is_some() || self.alpha_mu_k.is_some()
    }

    pub fn nu_for(&self, k: usize) -> DVector<f64> {
        match &self.nu_k {
            Some(nus) if k < nus.len() => DVector::from_row_slice(&nus[k]),
            _ => DVector::from_row_slice(&self.nu),
        }
    }

    pub fn alpha_mu_for(&self, k: usize) -> f64 {
        match &self.alpha_mu_k {
            Some(a) if k < a.len() => a[k],
            _ => self.alpha_mu,
        }
    }

    pub fn t_dagger_for(&self, k: usize) -> &SymMatrix {
        match &self.t_dagger_k {
            Some(ts) if k < ts.len() => &ts[k],
            _ => &self.t_dagger,
        }
    }
}

/// Sufficient statistics of one component: count, empirical mean, scatter
/// matrix, and the prior-adjusted scatter
/// `T_[k] = S_[k] + (alpha_mu_k m_k / (alpha_mu_k + m_k)) (nu_k - xbar)(nu_k - xbar)^T`.
#[derive(Debug, Clone)]
pub struct ComponentStats {
    pub m_k: usize,
    pub xbar: DVector<f64>,
    pub scatter: SymMatrix,
    pub t: SymMatrix,
    /// Smallest member row index; components are summed in this canonical
    /// order so scores are exactly label-permutation invariant.
    pub first_row: usize,
    pub alpha_mu: f64,
    pub nu: DVector<f64>,
}

impl ComponentStats {
    fn refresh_t(&mut self) {
        let mut t = self.scatter.clone();
        let coef = self.alpha_mu * self.m_k as f64 / (self.alpha_mu + self.m_k as f64);
        let dev = &self.nu - &self.xbar;
        t.add_scaled_outer(coef, &dev);
        self.t = t;
    }

    /// Statistics with observation `(row, x)` added, via the one-point mean
    /// and scatter updates. Exact up to floating-point rounding; samplers
    /// that lean on this refresh their statistics from scratch periodically.
    pub fn with_point_added(&self, row: usize, x: &DVector<f64>) -> ComponentStats {
        let m_new = self.m_k + 1;
        let diff = x - &self.xbar;
        let xbar = &self.xbar + &diff / m_new as f64;
        let mut scatter = self.scatter.clone();
        scatter.add_scaled_outer(self.m_k as f64 / m_new as f64, &diff);
        let mut out = ComponentStats {
            m_k: m_new,
            xbar,
            scatter,
            t: SymMatrix::zeros(x.len()),
            first_row: self.first_row.min(row),
            alpha_mu: self.alpha_mu,
            nu: self.nu.clone(),
        };
        out.refresh_t();
        out
    }

    /// Statistics with observation `x` removed; `first_row` is the smallest
    /// remaining member row (the caller knows the membership). Requires
    /// `m_k >= 2`.
    pub fn with_point_removed(&self, x: &DVector<f64>, first_row: usize) -> ComponentStats {
        assert!(self.m_k >= 2, "cannot remove from a singleton component");
        let m_new = self.m_k - 1;
        let diff = x - &self.xbar;
        let mut scatter = self.scatter.clone();
        scatter.add_scaled_outer(-(self.m_k as f64) / m_new as f64, &diff);
        let xbar = (&self.xbar * self.m_k as f64 - x) / m_new as f64;
        let mut out = ComponentStats {
            m_k: m_new,
            xbar,
            scatter,
            t: SymMatrix::zeros(x.len()),
            first_row,
            alpha_mu: self.alpha_mu,
            nu: self.nu.clone(),
        };
        out.refresh_t();
        out
    }
}

/// Two-pass (mean-subtracted) statistics of the given rows for component `k`.
pub fn stats_for_rows(
    data: &Dataset,
    rows: &[usize],
    hp: &Hyperparameters,
    k: usize,
) -> Result<ComponentStats> {
    if rows.is_empty() {
        return Err(Error::InvalidAssignment(format!("component {k} is empty")));
    }
    let n = data.n_vars();
    let m_k = rows.len();
    let mut xbar = DVector::zeros(n);
    for &r in rows {
        xbar += data.obs(r);
    }
    xbar /= m_k as f64;
    let mut scatter = SymMatrix::zeros(n);
    for &r in rows {
        let d = data.obs(r) - &xbar;
        scatter.add_scaled_outer(1.0, &d);
    }
    let alpha_mu = hp.alpha_mu_for(k);
    let nu = hp.nu_for(k);
    if nu.len() != n {
        return Err(Error::Dimension(format!("nu length {} vs n = {n}", nu.len())));
    }
    let mut t = scatter.clone();
    let coef = alpha_mu * m_k as f64 / (alpha_mu + m_k as f64);
    let dev = &nu - &xbar;
    t.add_scaled_outer(coef, &dev);
    Ok(ComponentStats {
        m_k,
        xbar,
        scatter,
        t,
        first_row: rows[0],
        alpha_mu,
        nu,
    })
}

/// Per-component sufficient statistics for an assignment.
pub fn component_stats(
    data: &Dataset,
    z: &Assignment,
    hp: &Hyperparameters,
) -> Result<Vec<ComponentStats>> {
    if z.m() != data.n_obs() {
        return Err(Error::Dimension(format!(
            "assignment length {} vs {} rows",
            z.m(),
            data.n_obs()
        )));
    }
    (0..z.k())
        .map(|k| stats_for_rows(data, &z.members(k), hp, k))
        .collect()
}

/// Everything needed to evaluate variable-subset marginals at a fixed
/// assignment: component statistics plus the assembled posterior parametric
/// matrices. Building it costs one pass over the data; subset evaluations
/// are then submatrix Cholesky factorizations.
#[derive(Debug, Clone)]
pub struct SubsetScorer {
    model: Model,
    n_full: usize,
    m_total: usize,
    alpha_w: f64,
    comps: Vec<ComponentStats>,
    /// Component indices in canonical (smallest-member-first) order.
    canon: Vec<usize>,
    /// Shared-Wishart matrices (H and M2): prior and posterior.
    t_dagger: SymMatrix,
    t_ddagger: SymMatrix,
    /// Per-component matrices (M1): `(T_dagger_k, T_ddagger_k)`.
    per_comp: Vec<(SymMatrix, SymMatrix)>,
    fingerprint: u64,
}

impl SubsetScorer {
    /// Builds a scorer for `(data, z, hp, model)`. For [`Model::H`] the
    /// assignment is ignored and all rows form one component.
    pub fn build(
        data: &Dataset,
        z: &Assignment,
        hp: &Hyperparameters,
        model: Model,
    ) -> Result<Self> {
        let trivial;
        let z_eff = if model == Model::H {
            trivial = Assignment::single(data.n_obs());
            &trivial
        } else {
            z
        };
        let comps = component_stats(data, z_eff, hp)?;
        Self::from_stats(data.n_vars(), data.n_obs(), comps, hp, model, z_eff.fingerprint())
    }

    /// Assembles posterior matrices from precomputed statistics.
    pub fn from_stats(
        n_full: usize,
        m_total: usize,
        comps: Vec<ComponentStats>,
        hp: &Hyperparameters,
        model: Model,
        fingerprint: u64,
    ) -> Result<Self> {
        hp.validate_scalars(n_full)?;
        let mut canon: Vec<usize> = (0..comps.len()).collect();
        canon.sort_by_key(|&k| comps[k].first_row);

        let t_dagger = hp.t_dagger.clone();
        let mut t_ddagger = t_dagger.clone();
        let mut per_comp = Vec::new();
        match model {
            Model::H | Model::M2 => {
                for &k in &canon {
                    t_ddagger = t_ddagger.add(&comps[k].t);
                }
            }
            Model::M1 => {
                for (k, c) in comps.iter().enumerate() {
                    let td = hp.t_dagger_for(k).clone();
                    let tdd = td.add(&c.t);
                    per_comp.push((td, tdd));
                }
            }
        }
        Ok(SubsetScorer {
            model,
            n_full,
            m_total,
            alpha_w: hp.alpha_w,
            comps,
            canon,
            t_dagger,
            t_ddagger,
            per_comp,
            fingerprint,
        })
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn stats(&self) -> &[ComponentStats] {
        &self.comps
    }

    /// Posterior parametric matrix of the shared Wishart (H / M2).
    pub fn t_ddagger(&self) -> &SymMatrix {
        &self.t_ddagger
    }

    /// Posterior parametric matrix of component `k`'s Wishart (M1).
    pub fn t_ddagger_k(&self, k: usize) -> &SymMatrix {
        &self.per_comp[k].1
    }

    /// Log marginal likelihood of the data restricted to the variable subset
    /// `L` (ascending indices) under the complete DAG on `L`. The
    /// degrees-of-freedom shift uses the ambient dimension `n_full`.
    pub fn subset_logml(&self, subset: &[usize]) -> Result<f64> {
        if subset.is_empty() {
            return Ok(0.0);
        }
        let l = subset.len() as f64;
        let n = self.n_full as f64;
        let ln_pi = std::f64::consts::PI.ln();
        match self.model {
            Model::H | Model::M2 => {
                let m = self.m_total as f64;
                let mut s = -(l * m / 2.0) * ln_pi;
                for &k in &self.canon {
                    let c = &self.comps[k];
                    s += (l / 2.0) * (c.alpha_mu / (c.alpha_mu + c.m_k as f64)).ln();
                }
                s += log_multigamma(subset.len(), (self.alpha_w - n + l + m) / 2.0)?;
                s -= log_multigamma(subset.len(), (self.alpha_w - n + l) / 2.0)?;
                s += self.alpha_w / 2.0 * self.t_dagger.submatrix(subset)?.chol_logdet()?;
                s -= (self.alpha_w + m) / 2.0
                    * self.t_ddagger.submatrix(subset)?.chol_logdet().map_err(|_| {
                        Error::NotPositiveDefinite(
                            "posterior parametric matrix is degenerate on this subset".into(),
                        )
                    })?;
                Ok(s)
            }
            Model::M1 => {
                let mut s = 0.0;
                for &k in &self.canon {
                    let c = &self.comps[k];
                    let mk = c.m_k as f64;
                    let (td, tdd) = &self.per_comp[k];
                    s += -(l * mk / 2.0) * ln_pi
                        + (l / 2.0) * (c.alpha_mu / (c.alpha_mu + mk)).ln();
                    s += log_multigamma(subset.len(), (self.alpha_w - n + l + mk) / 2.0)?;
                    s -= log_multigamma(subset.len(), (self.alpha_w - n + l) / 2.0)?;
                    s += self.alpha_w / 2.0 * td.submatrix(subset)?.chol_logdet()?;
                    s -= (self.alpha_w + mk) / 2.0
                        * tdd.submatrix(subset)?.chol_logdet().map_err(|_| {
                            Error::NotPositiveDefinite(
                                "posterior parametric matrix is degenerate on this subset".into(),
                            )
                        })?;
                }
                Ok(s)
            }
        }
    }

    fn cached_subset(&self, subset: &[usize], cache: Option<&ScoreCache>) -> Result<f64> {
        match cache {
            Some(c) => c.get_or_compute(self.model, subset, self.fingerprint, || {
                self.subset_logml(subset)
            }),
            None => self.subset_logml(subset),
        }
    }

    /// The node factor `subset_logml({i} u Pa_i) - subset_logml(Pa_i)` for
    /// node `i` with the given sorted parent set.
    pub fn node_term(
        &self,
        node: usize,
        parents: &[usize],
        cache: Option<&ScoreCache>,
    ) -> Result<f64> {
        let mut with_node: Vec<usize> = Vec::with_capacity(parents.len() + 1);
        with_node.extend_from_slice(parents);
        let pos = with_node.partition_point(|&p| p < node);
        with_node.insert(pos, node);
        let top = self.cached_subset(&with_node, cache)?;
        if parents.is_empty() {
            Ok(top)
        } else {
            Ok(top - self.cached_subset(parents, cache)?)
        }
    }

    /// Log marginal likelihood of the data given a DAG, via the node-wise
    /// factorization into subset-marginal ratios.
    pub fn dag_logml(&self, g: &Dag, cache: Option<&ScoreCache>) -> Result<f64> {
        if g.n() != self.n_full {
            return Err(Error::Dimension(format!(
                "graph on {} nodes vs {} variables",
                g.n(),
                self.n_full
            )));
        }
        let mut s = 0.0;
        for i in 0..g.n() {
            s += self.node_term(i, g.parents(i), cache)?;
        }
        Ok(s)
    }
}

/// Spec-level convenience: the tied-covariance subset marginal for the data
/// restricted to `subset`.
pub fn m2_subset_logml(
    data: &Dataset,
    subset: &[usize],
    z: &Assignment,
    hp: &Hyperparameters,
) -> Result<f64> {
    SubsetScorer::build(data, z, hp, Model::M2)?.subset_logml(subset)
}

/// Full-covariance subset marginal (sum of complete per-component factors).
pub fn m1_subset_logml(
    data: &Dataset,
    subset: &[usize],
    z: &Assignment,
    hp: &Hyperparameters,
) -> Result<f64> {
    SubsetScorer::build(data, z, hp, Model::M1)?.subset_logml(subset)
}

/// Homogeneous subset marginal (assignment ignored).
pub fn h_subset_logml(data: &Dataset, subset: &[usize], hp: &Hyperparameters) -> Result<f64> {
    let z = Assignment::single(data.n_obs());
    SubsetScorer::build(data, &z, hp, Model::H)?.subset_logml(subset)
}

/// Log marginal likelihood of a DAG under the chosen model. For
/// [`Model::H`] the assignment is ignored.
pub fn dag_logml(
    data: &Dataset,
    z: &Assignment,
    g: &Dag,
    hp: &Hyperparameters,
    model: Model,
    cache: Option<&ScoreCache>,
) -> Result<f64> {
    let scorer = SubsetScorer::build(data, z, hp, model)?;
    scorer.dag_logml(g, cache)
}

/// Scores a DAG against a prebuilt scorer (shared by the samplers).
pub fn dag_logml_from_scorer(
    scorer: &SubsetScorer,
    g: &Dag,
    cache: Option<&ScoreCache>,
) -> Result<f64> {
    scorer.dag_logml(g, cache)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct CacheKey {
    model: Model,
    subset: Box<[u16]>,
    fingerprint: u64,
}

/// Memo table for subset marginals keyed by `(model, subset, assignment
/// fingerprint)`. Hits return the stored value, which is bit-identical to
/// recomputation because [`SubsetScorer::subset_logml`] is deterministic.
/// Reads take a shared lock, inserts an exclusive one, so chains may share a
/// cache or own private ones with identical results.
#[derive(Debug, Default)]
pub struct ScoreCache {
    map: RwLock<HashMap<CacheKey, f64>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl ScoreCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_compute(
        &self,
        model: Model,
        subset: &[usize],
        fingerprint: u64,
        compute: impl FnOnce() -> Result<f64>,
    ) -> Result<f64> {
        let key = CacheKey {
            model,
            subset: subset.iter().map(|&i| i as u16).collect(),
            fingerprint,
        };
        if let Some(v) = self.map.read().expect("cache lock poisoned").get(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(*v);
        }
        let v = compute()?;
        self.misses.fetch_add(1, Ordering::Relaxed);
        self.map
            .write()
            .expect("cache lock poisoned")
            .insert(key, v);
        Ok(v)
    }

    pub fn clear(&self) {
        self.map.write().expect("cache lock poisoned").clear();
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }
}
