//! Posterior parameter draws with covariance matrices coherent with a
//! sampled DAG, and predictive-probability computation on held-out data.
//!
//! A Wishart posterior draw corresponds to a complete DAG (it encodes no
//! conditional independencies). To make a draw consistent with an arbitrary
//! DAG, the covariance is projected through the DAG's structural equations:
//! regression coefficients and residual variances are read off the
//! complete-DAG covariance, and the implied joint covariance of the linear
//! system is reassembled. The result is SPD and Markov with respect to the
//! DAG, and depends only on the independence model (equivalent DAGs project
//! identically).

use nalgebra::DVector;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::allocation::Assignment;
use crate::data::Dataset;
use crate::error::Error;
use crate::graph::Dag;
use crate::numkern::{logdensity_mvn, logsumexp, sample_mvn, sample_wishart, RngStream, SymMatrix};
use crate::scoring::{component_stats, Hyperparameters, Model};
use crate::Result;

/// Covariance part of a parameter draw: shared across components
/// (tied-covariance and homogeneous models) or one per component
/// (full-covariance model).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceDraw {
    Tied(SymMatrix),
    PerComponent(Vec<SymMatrix>),
}

/// One posterior draw of the mixture parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThetaDraw {
    /// Mixture weights on the simplex (all positive, sum to one).
    pub weights: Vec<f64>,
    /// Component means.
    pub means: Vec<Vec<f64>>,
    pub covariance: CovarianceDraw,
    pub k: usize,
}

impl ThetaDraw {
    fn covariance_for(&self, k: usize) -> &SymMatrix {
        match &self.covariance {
            CovarianceDraw::Tied(s) => s,
            CovarianceDraw::PerComponent(v) => &v[k],
        }
    }

    /// Log mixture density of one observation under this draw.
    pub fn log_density(&self, x: &DVector<f64>) -> Result<f64> {
        let mut terms = Vec::with_capacity(self.k);
        for k in 0..self.k {
            let mean = DVector::from_row_slice(&self.means[k]);
            let ld = logdensity_mvn(x, &mean, self.covariance_for(k))?;
            terms.push(self.weights[k].ln() + ld);
        }
        Ok(logsumexp(&terms))
    }
}

/// Posterior Dirichlet parameters of the mixture weights given an
/// assignment: `alpha_k = m_k + 1`.
pub fn dirichlet_posterior_alphas(a: &Assignment) -> Vec<f64> {
    a.counts().iter().map(|&mk| mk as f64 + 1.0).collect()
}

/// Dirichlet draw via normalized Gamma variates (the parameter vector may
/// have any length, including one).
fn sample_dirichlet(rng: &mut RngStream, alphas: &[f64]) -> Result<Vec<f64>> {
    let mut draws = Vec::with_capacity(alphas.len());
    for &a in alphas {
        let g = Gamma::new(a, 1.0).map_err(|e| Error::Domain(format!("gamma: {e}")))?;
        draws.push(g.sample(rng));
    }
    let total: f64 = draws.iter().sum();
    Ok(draws.into_iter().map(|d| d / total).collect())
}

/// Projects a complete-DAG covariance onto the independence model of `g`.
///
/// For each node `i` (in topological order) the regression of `X_i` on its
/// parents is read from `sigma_complete`: coefficients
/// `b_i = (S^{Pa,Pa})^{-1} S^{Pa,i}` and residual variance
/// `v_i = S_ii - S^{i,Pa} (S^{Pa,Pa})^{-1} S^{Pa,i}`. The covariance implied
/// by the linear system `X_i = sum_j b_ij X_j + e_i` is then reassembled by
/// forward substitution.
pub fn dag_coherent_covariance(sigma_complete: &SymMatrix, g: &Dag) -> Result<SymMatrix> {
    let n = sigma_complete.order();
    if g.n() != n {
        return Err(Error::Dimension(format!(
            "graph on {} nodes vs covariance order {n}",
            g.n()
        )));
    }
    let order = g
        .topological_order()
        .ok_or_else(|| Error::Cycle("graph is not acyclic".into()))?;
    let mut out = SymMatrix::zeros(n);
    let mut processed: Vec<usize> = Vec::with_capacity(n);
    for &i in &order {
        let parents = g.parents(i);
        if parents.is_empty() {
            // root: marginal variance; covariances with earlier nodes stay 0
            out.set(i, i, sigma_complete.get(i, i));
        } else {
            let spp = sigma_complete.submatrix(parents)?;
            let spi = DVector::from_fn(parents.len(), |a, _| {
                sigma_complete.get(parents[a], i)
            });
            let chol = spp.cholesky()?;
            let b = chol.solve(&spi);
            let v = sigma_complete.get(i, i) - spi.dot(&b);
            // cov(X_i, X_j) = sum_p b_p * cov_out(X_p, X_j) for processed j
            for &j in &processed {
                let mut cov_ij = 0.0;
                for (a, &p) in parents.iter().enumerate() {
                    cov_ij += b[a] * out.get(p, j);
                }
                out.set(i, j, cov_ij);
            }
            // var(X_i) = b^T cov_out(Pa,Pa) b + v
            let mut var = v;
            for (a, &p) in parents.iter().enumerate() {
                for (c, &q) in parents.iter().enumerate() {
                    var += b[a] * out.get(p, q) * b[c];
                }
            }
            out.set(i, i, var);
        }
        processed.push(i);
    }
    Ok(out)
}

/// Draws mixture parameters for one posterior state `(g, a)`:
/// weights from `Dirichlet(m_1 + 1, ..., m_K + 1)`, the precision from its
/// Wishart posterior (shared for the tied-covariance and homogeneous models,
/// per-component for the full-covariance model), the covariance projected to
/// DAG coherence, and each mean from its Gaussian posterior using the
/// coherent precision.
pub fn sample_posterior_params(
    rng: &mut RngStream,
    data: &Dataset,
    g: &Dag,
    a: &Assignment,
    hp: &Hyperparameters,
    model: Model,
) -> Result<ThetaDraw> {
    let n = data.n_vars();
    hp.validate(n)?;
    let a_eff = if model == Model::H {
        Assignment::single(data.n_obs())
    } else {
        a.clone()
    };
    let stats = component_stats(data, &a_eff, hp)?;
    let k = stats.len();

    let alphas = dirichlet_posterior_alphas(&a_eff);
    let weights = if k == 1 {
        vec![1.0]
    } else {
        sample_dirichlet(rng, &alphas)?
    };

    // covariance draws (complete-DAG posterior), then projection
    let coherent: Vec<SymMatrix>;
    let tied: bool;
    match model {
        Model::H | Model::M2 => {
            let mut t_dd = hp.t_dagger.clone();
            let mut canon: Vec<usize> = (0..k).collect();
            canon.sort_by_key(|&c| stats[c].first_row);
            for &c in &canon {
                t_dd = t_dd.add(&stats[c].t);
            }
            let w = sample_wishart(rng, hp.alpha_w + data.n_obs() as f64, &t_dd)?;
            let sigma = w.chol_inverse()?;
            coherent = vec![dag_coherent_covariance(&sigma, g)?];
            tied = true;
        }
        Model::M1 => {
            let mut per = Vec::with_capacity(k);
            for (c, st) in stats.iter().enumerate() {
                let t_dd = hp.t_dagger_for(c).add(&st.t);
                let w = sample_wishart(rng, hp.alpha_w + st.m_k as f64, &t_dd)?;
                let sigma = w.chol_inverse()?;
                per.push(dag_coherent_covariance(&sigma, g)?);
            }
            coherent = per;
            tied = false;
        }
    }

    // means, drawn with the DAG-coherent precision
    let mut means = Vec::with_capacity(k);
    for (c, st) in stats.iter().enumerate() {
        let am = st.alpha_mu;
        let mk = st.m_k as f64;
        let nu = hp.nu_for(c);
        let post_mean = (nu * am + &st.xbar * mk) / (am + mk);
        let sigma_c = if tied { &coherent[0] } else { &coherent[c] };
        // covariance ((alpha_mu + m_k) W)^{-1} = Sigma / (alpha_mu + m_k)
        let mean_cov = SymMatrix::from_fn(n, |i, j| sigma_c.get(i, j) / (am + mk));
        let mu = sample_mvn(rng, &post_mean, &mean_cov)?;
        means.push(mu.iter().cloned().collect());
    }

    Ok(ThetaDraw {
        weights,
        means,
        covariance: if tied {
            CovarianceDraw::Tied(coherent.into_iter().next().expect("one shared matrix"))
        } else {
            CovarianceDraw::PerComponent(coherent)
        },
        k,
    })
}

/// Geometric-mean log predictive probability of held-out data:
/// `(1/m*) ln[(1/R) sum_r prod_i p(x*_i | Theta_r)]`, with the inner product
/// in log space and the outer average via log-sum-exp.
pub fn predictive_logprob(theta_draws: &[ThetaDraw], d_star: &Dataset) -> Result<f64> {
    if theta_draws.is_empty() {
        return Err(Error::InvalidConfig("no parameter draws".into()));
    }
    let m_star = d_star.n_obs();
    if m_star == 0 {
        return Err(Error::Dimension("empty held-out dataset".into()));
    }
    let mut per_draw = Vec::with_capacity(theta_draws.len());
    for theta in theta_draws {
        let mut s = 0.0;
        for i in 0..m_star {
            s += theta.log_density(&d_star.obs(i))?;
        }
        per_draw.push(s);
    }
    let avg = logsumexp(&per_draw) - (theta_draws.len() as f64).ln();
    Ok(avg / m_star as f64)
}

/// Per-observation log mixture densities averaged over draws:
/// `ln[(1/R) sum_r p(x*_i | Theta_r)]` for each held-out row.
pub fn per_observation_logprob(theta_draws: &[ThetaDraw], d_star: &Dataset) -> Result<Vec<f64>> {
    if theta_draws.is_empty() {
        return Err(Error::InvalidConfig("no parameter draws".into()));
    }
    let r = theta_draws.len() as f64;
    let mut out = Vec::with_capacity(d_star.n_obs());
    for i in 0..d_star.n_obs() {
        let x = d_star.obs(i);
        let terms: Vec<f64> = theta_draws
            .iter()
            .map(|t| t.log_density(&x))
            .collect::<Result<_>>()?;
        out.push(logsumexp(&terms) - r.ln());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use approx::assert_relative_eq;
    use rand_distr::StandardNormal;

    fn toy_data(m: usize, n: usize, seed: u64) -> Dataset {
        let mut rng = RngStream::new(seed);
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        Dataset::from_rows(&rows).unwrap()
    }

    fn spd(n: usize, seed: u64) -> SymMatrix {
        let mut rng = RngStream::new(seed);
        let a = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
        SymMatrix::symmetrize(a.transpose() * &a + DMatrix::identity(n, n) * 0.5)
    }

    #[test]
    fn projection_on_empty_dag_is_diagonal() {
        let sigma = spd(3, 1);
        let out = dag_coherent_covariance(&sigma, &Dag::empty(3)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    assert_relative_eq!(out.get(i, i), sigma.get(i, i), max_relative = 1e-12);
                } else {
                    assert_eq!(out.get(i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn projection_on_complete_dag_is_identity_map() {
        let sigma = spd(4, 2);
        let out = dag_coherent_covariance(&sigma, &Dag::complete(4)).unwrap();
        assert!(out.max_abs_diff(&sigma) < 1e-10);
    }

    #[test]
    fn chain_projection_has_markov_precision_zero() {
        // chain 0 -> 1 -> 2: precision entry (0, 2) must vanish
        let sigma = spd(3, 3);
        let g = Dag::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let out = dag_coherent_covariance(&sigma, &g).unwrap();
        let prec = out.chol_inverse().unwrap();
        assert!(prec.get(0, 2).abs() < 1e-10, "precision (0,2) = {}", prec.get(0, 2));
    }

    #[test]
    fn equivalent_dags_project_identically() {
        let sigma = spd(3, 4);
        let chain = Dag::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let fork = Dag::from_edges(3, &[(1, 0), (1, 2)]).unwrap();
        let reversed = Dag::from_edges(3, &[(2, 1), (1, 0)]).unwrap();
        let a = dag_coherent_covariance(&sigma, &chain).unwrap();
        let b = dag_coherent_covariance(&sigma, &fork).unwrap();
        let c = dag_coherent_covariance(&sigma, &reversed).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-10);
        assert!(a.max_abs_diff(&c) < 1e-10);
    }

    #[test]
    fn posterior_mean_shrinkage_in_draws() {
        // alpha_mu = 1, m_k = 1, nu = 0: posterior mean of mu is xbar / 2;
        // with a tiny covariance the draw concentrates there
        let data = Dataset::from_rows(&[vec![2.0]]).unwrap();
        let mut hp = Hyperparameters::default_for(1);
        hp.t_dagger = SymMatrix::scaled_identity(1, 1e-12);
        hp.alpha_w = 1e12;
        let mut rng = RngStream::new(5);
        let theta = sample_posterior_params(
            &mut rng,
            &data,
            &Dag::empty(1),
            &Assignment::single(1),
            &hp,
            Model::M2,
        )
        .unwrap();
        // W ~ Wishart(1e12 + 1, 1e-12 I) concentrates near 1e24 * I, so the
        // mean draw is pinned at the posterior mean 2.0 / 2 = 1.0
        assert!((theta.means[0][0] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn dirichlet_with_one_component_is_degenerate() {
        let data = toy_data(5, 2, 6);
        let hp = Hyperparameters::default_for(2);
        let mut rng = RngStream::new(7);
        let theta = sample_posterior_params(
            &mut rng,
            &data,
            &Dag::empty(2),
            &Assignment::single(5),
            &hp,
            Model::M2,
        )
        .unwrap();
        assert_eq!(theta.weights, vec![1.0]);
        assert_eq!(theta.k, 1);
    }

    #[test]
    fn dirichlet_weights_sum_to_one() {
        let data = toy_data(9, 2, 8);
        let hp = Hyperparameters::default_for(2);
        let z = Assignment::new(vec![0, 1, 2, 0, 1, 2, 0, 1, 2]).unwrap();
        let mut rng = RngStream::new(9);
        for _ in 0..50 {
            let theta = sample_posterior_params(
                &mut rng,
                &data,
                &Dag::empty(2),
                &z,
                &hp,
                Model::M1,
            )
            .unwrap();
            let total: f64 = theta.weights.iter().sum();
            assert_relative_eq!(total, 1.0, max_relative = 1e-12);
            assert!(theta.weights.iter().all(|w| *w > 0.0));
            assert!(matches!(theta.covariance, CovarianceDraw::PerComponent(ref v) if v.len() == 3));
        }
    }

    #[test]
    fn wishart_posterior_moment_for_tied_model() {
        // Monte Carlo mean of W draws ~ (alpha_w + m) T_ddagger^{-1}
        let data = toy_data(6, 2, 10);
        let hp = Hyperparameters::default_for(2);
        let z = Assignment::single(6);
        let stats = component_stats(&data, &z, &hp).unwrap();
        let t_dd = hp.t_dagger.add(&stats[0].t);
        let dof = hp.alpha_w + 6.0;
        let want = t_dd.chol_inverse().unwrap();
        let mut rng = RngStream::new(11);
        let draws = 50_000;
        let mut acc = SymMatrix::zeros(2);
        for _ in 0..draws {
            let w = sample_wishart(&mut rng, dof, &t_dd).unwrap();
            acc = acc.add(&w);
        }
        for i in 0..2 {
            for j in 0..2 {
                let got = acc.get(i, j) / draws as f64;
                let target = dof * want.get(i, j);
                assert!(
                    (got - target).abs() < 0.02 * dof * want.get(i, i).max(want.get(j, j)),
                    "entry ({i},{j}): {got} vs {target}"
                );
            }
        }
    }

    #[test]
    fn predictive_single_standard_normal_point() {
        let theta = ThetaDraw {
            weights: vec![1.0],
            means: vec![vec![0.0]],
            covariance: CovarianceDraw::Tied(SymMatrix::identity(1)),
            k: 1,
        };
        let d = Dataset::from_rows(&[vec![0.0]]).unwrap();
        let v = predictive_logprob(&[theta], &d).unwrap();
        assert_relative_eq!(v, -0.9189385332046727, max_relative = 1e-12);
    }

    #[test]
    fn predictive_duplicate_draw_is_idempotent() {
        let theta = ThetaDraw {
            weights: vec![0.5, 0.5],
            means: vec![vec![0.0, 0.0], vec![1.0, -1.0]],
            covariance: CovarianceDraw::Tied(SymMatrix::identity(2)),
            k: 2,
        };
        let d = Dataset::from_rows(&[vec![0.2, 0.3], vec![-0.4, 1.0]]).unwrap();
        let once = predictive_logprob(&[theta.clone()], &d).unwrap();
        let twice = predictive_logprob(&[theta.clone(), theta], &d).unwrap();
        assert_relative_eq!(once, twice, max_relative = 1e-12);
    }

    #[test]
    fn predictive_two_points_is_mean_of_log_densities() {
        let theta = ThetaDraw {
            weights: vec![1.0],
            means: vec![vec![0.0]],
            covariance: CovarianceDraw::Tied(SymMatrix::identity(1)),
            k: 1,
        };
        let d = Dataset::from_rows(&[vec![0.5], vec![-1.5]]).unwrap();
        let v = predictive_logprob(&[theta.clone()], &d).unwrap();
        let l1 = theta.log_density(&d.obs(0)).unwrap();
        let l2 = theta.log_density(&d.obs(1)).unwrap();
        assert_relative_eq!(v, (l1 + l2) / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn predictive_is_permutation_invariant() {
        let mut rng = RngStream::new(12);
        let data = toy_data(6, 2, 13);
        let hp = Hyperparameters::default_for(2);
        let g = Dag::from_edges(2, &[(0, 1)]).unwrap();
        let z = Assignment::new(vec![0, 0, 0, 1, 1, 1]).unwrap();
        let draws: Vec<ThetaDraw> = (0..4)
            .map(|_| {
                sample_posterior_params(&mut rng, &data, &g, &z, &hp, Model::M2).unwrap()
            })
            .collect();
        let holdout = toy_data(3, 2, 14);
        let v1 = predictive_logprob(&draws, &holdout).unwrap();
        let mut rev = draws.clone();
        rev.reverse();
        let v2 = predictive_logprob(&rev, &holdout).unwrap();
        assert_relative_eq!(v1, v2, max_relative = 1e-12);
        // held-out row permutation
        let rows: Vec<Vec<f64>> = (0..3)
            .rev()
            .map(|i| (0..2).map(|j| holdout.get(i, j)).collect())
            .collect();
        let v3 = predictive_logprob(&draws, &Dataset::from_rows(&rows).unwrap()).unwrap();
        assert_relative_eq!(v1, v3, max_relative = 1e-12);
    }

    #[test]
    fn predictive_rejects_dimension_mismatch() {
        let theta = ThetaDraw {
            weights: vec![1.0],
            means: vec![vec![0.0]],
            covariance: CovarianceDraw::Tied(SymMatrix::identity(1)),
            k: 1,
        };
        let d = Dataset::from_rows(&[vec![0.0, 1.0]]).unwrap();
        assert!(predictive_logprob(&[theta], &d).is_err());
    }
}
