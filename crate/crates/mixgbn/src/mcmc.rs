//! Joint MCMC over `(DAG, assignment)`: each iteration performs one
//! Metropolis–Hastings single-edge move on the DAG (with the neighborhood
//! Hastings correction `|N(G)| / |N(G*)|`) followed by one collapsed Gibbs
//! reallocation move on the assignment vector. The first half of the chain is
//! discarded as burn-in and the second half thinned by `xi`, giving
//! `R = floor(T / (2 xi))` posterior draws.

use serde::{Deserialize, Serialize};

use crate::allocation::{self, Assignment};
use crate::data::Dataset;
use crate::error::Error;
use crate::graph::{Dag, MoveKind};
use crate::numkern::{RngStream, StreamKind};
use crate::scoring::{ComponentStats, Hyperparameters, Model, ScoreCache, SubsetScorer};
use crate::Result;

/// Starting state of a chain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum InitialState {
    /// Empty DAG, all observations in one component (the default).
    EmptySingleComponent,
    /// Empty DAG with a fixed, known assignment; Gibbs moves are disabled and
    /// the assignment never changes.
    KnownLabels(Vec<usize>),
}

/// Full configuration of one chain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainConfig {
    /// Total iterations `T` (both steps per iteration).
    pub total_iters: u64,
    /// Thinning factor `xi` applied to the second half of the chain.
    pub thin: u64,
    pub model: Model,
    pub hp: Hyperparameters,
    pub seed: u64,
    /// Substream index of the chain (distinct per parallel chain).
    pub chain_id: u64,
    /// Optional cap on parent-set sizes; move enumeration respects it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_fanin: Option<usize>,
    pub init: InitialState,
    /// Optional per-edge log-prior penalty: `log p(G) = -penalty * |edges|`.
    /// The reference scheme uses a flat DAG prior; leave unset for that.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_penalty: Option<f64>,
    /// Gibbs reallocation moves per iteration (default 1).
    #[serde(default = "default_sweeps")]
    pub gibbs_sweeps: u32,
}

fn default_sweeps() -> u32 {
    1
}

impl ChainConfig {
    pub fn new(model: Model, hp: Hyperparameters, total_iters: u64, thin: u64, seed: u64) -> Self {
        ChainConfig {
            total_iters,
            thin,
            model,
            hp,
            seed,
            chain_id: 0,
            max_fanin: None,
            init: InitialState::EmptySingleComponent,
            edge_penalty: None,
            gibbs_sweeps: 1,
        }
    }

    /// Posterior sample size `R = floor(T / (2 xi))`.
    pub fn sample_size(&self) -> u64 {
        self.total_iters / (2 * self.thin)
    }

    fn validate(&self, data: &Dataset) -> Result<()> {
        if self.total_iters < 2 {
            return Err(Error::InvalidConfig("total_iters must be at least 2".into()));
        }
        if self.thin < 1 {
            return Err(Error::InvalidConfig("thin must be at least 1".into()));
        }
        if self.sample_size() < 1 {
            return Err(Error::InvalidConfig(format!(
                "no draws: floor({} / (2 * {})) = 0",
                self.total_iters, self.thin
            )));
        }
        if self.gibbs_sweeps < 1 {
            return Err(Error::InvalidConfig("gibbs_sweeps must be at least 1".into()));
        }
        self.hp.validate(data.n_vars())?;
        match &self.init {
            InitialState::EmptySingleComponent => {
                if self.hp.has_component_overrides() && self.model != Model::H {
                    return Err(Error::InvalidConfig(
                        "per-component hyperparameter overrides require known labels \
                         (components are created and deleted while sampling)"
                            .into(),
                    ));
                }
            }
            InitialState::KnownLabels(z) => {
                if z.len() != data.n_obs() {
                    return Err(Error::InvalidConfig(format!(
                        "{} labels for {} observations",
                        z.len(),
                        data.n_obs()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Current chain position with its cached marginal log likelihood.
#[derive(Debug, Clone)]
pub struct ChainState {
    g: Dag,
    a: Assignment,
    scorer: SubsetScorer,
    log_marginal: f64,
    iter: u64,
}

impl ChainState {
    /// Initial state per the configured policy.
    pub fn init(data: &Dataset, cfg: &ChainConfig, cache: &ScoreCache) -> Result<Self> {
        let g = Dag::empty(data.n_vars());
        let a = match &cfg.init {
            InitialState::EmptySingleComponent => Assignment::single(data.n_obs()),
            InitialState::KnownLabels(z) => Assignment::new(z.clone())?,
        };
        let scorer = SubsetScorer::build(data, &a, &cfg.hp, cfg.model)?;
        let log_marginal = scorer.dag_logml(&g, Some(cache))?;
        Ok(ChainState {
            g,
            a,
            scorer,
            log_marginal,
            iter: 0,
        })
    }

    pub fn dag(&self) -> &Dag {
        &self.g
    }

    pub fn assignment(&self) -> &Assignment {
        &self.a
    }

    /// Cached `log p(D | G, z)`; kept in sync by the steps via local deltas.
    pub fn log_marginal(&self) -> f64 {
        self.log_marginal
    }

    pub fn iteration(&self) -> u64 {
        self.iter
    }
}

/// Acceptance bookkeeping over a whole run.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AcceptanceStats {
    pub structure_proposed: u64,
    pub structure_accepted: u64,
    /// Proposals rejected because scoring failed (degenerate posterior
    /// matrix); each one is also logged as a warning.
    pub structure_score_errors: u64,
    pub gibbs_moves: u64,
    /// Gibbs moves whose committed label vector differs from the previous one.
    pub gibbs_reassignments: u64,
}

/// One retained posterior draw.
#[derive(Debug, Clone)]
pub struct Draw {
    pub iter: u64,
    /// Unnormalized log joint `log p(D|G,z) + log p(G) + log p(z) + log p(K)`.
    pub log_score: f64,
    pub g: Dag,
    pub z: Assignment,
}

/// Thinned second-half sample of a chain, with its configuration echo and
/// acceptance statistics.
#[derive(Debug, Clone)]
pub struct PosteriorSample {
    pub draws: Vec<Draw>,
    pub config: ChainConfig,
    pub acceptance: AcceptanceStats,
    /// Unnormalized log joint score at every iteration `1..=T`, for
    /// convergence diagnostics (trace plots).
    pub trace: Vec<f64>,
}

/// Unnormalized log joint posterior under a flat DAG prior:
/// `log p(D|G,z) + log p(z) + log p(K)` (the flat `log p(G)` constant is
/// omitted).
pub fn joint_logscore(
    data: &Dataset,
    g: &Dag,
    a: &Assignment,
    hp: &Hyperparameters,
    model: Model,
) -> Result<f64> {
    let ml = crate::scoring::dag_logml(data, a, g, hp, model, None)?;
    Ok(ml + allocation::log_p_z(a) + allocation::log_p_k(a.k(), hp.lambda))
}

fn log_graph_prior_delta(kind: MoveKind, edge_penalty: Option<f64>) -> f64 {
    let pen = match edge_penalty {
        Some(p) => p,
        None => return 0.0,
    };
    match kind {
        MoveKind::Add => -pen,
        MoveKind::Delete => pen,
        MoveKind::Reverse => 0.0,
    }
}

/// One Metropolis–Hastings move on the DAG: proposes a uniform neighbor,
/// accepts with probability `min{1, exp(delta_logml + delta_logprior) *
/// |N(G)| / |N(G*)|}`, and on acceptance updates the cached score by the
/// local delta (only factors of children touched by the move change).
/// Returns whether the proposal was accepted. Scoring errors reject the move
/// with a logged warning.
pub fn structure_step(
    state: &mut ChainState,
    rng: &mut RngStream,
    cfg: &ChainConfig,
    cache: &ScoreCache,
    stats: &mut AcceptanceStats,
) -> Result<bool> {
    let nb = state.g.neighborhood(cfg.max_fanin);
    if nb.size() == 0 {
        return Ok(false);
    }
    stats.structure_proposed += 1;
    let mv = nb.moves[rng.below(nb.size())];
    let proposal = state.g.apply_move(&mv)?;

    let affected: Vec<usize> = match mv.kind {
        MoveKind::Add | MoveKind::Delete => vec![mv.to],
        MoveKind::Reverse => vec![mv.to, mv.from],
    };
    let mut delta = 0.0;
    for &i in &affected {
        let new_term = state.scorer.node_term(i, proposal.parents(i), Some(cache));
        let old_term = state.scorer.node_term(i, state.g.parents(i), Some(cache));
        match (new_term, old_term) {
            (Ok(nt), Ok(ot)) => delta += nt - ot,
            (Err(e), _) | (_, Err(e)) => {
                log::warn!("structure move rejected, scoring failed: {e}");
                stats.structure_score_errors += 1;
                rng.uniform(); // keep the stream aligned with the accept draw
                return Ok(false);
            }
        }
    }
    let prior_delta = log_graph_prior_delta(mv.kind, cfg.edge_penalty);

    let hastings =
        (nb.size() as f64).ln() - (proposal.neighborhood_size(cfg.max_fanin) as f64).ln();
    let log_acc = delta + prior_delta + hastings;
    let u = rng.uniform();
    if u.ln() < log_acc.min(0.0) {
        state.g = proposal;
        state.log_marginal += delta;
        stats.structure_accepted += 1;
        Ok(true)
    } else {
        Ok(false)
    }
}

/// One collapsed Gibbs reallocation move: select an observation (uniform
/// component, then uniform member), remove it, and re-allocate it over the
/// remaining components plus a fresh one using the marginal-likelihood
/// weights. Only the source and target components' statistics are updated
/// (one-point mean/scatter updates); the cached score adopts the sampled
/// candidate's value.
pub fn gibbs_step(
    state: &mut ChainState,
    rng: &mut RngStream,
    data: &Dataset,
    cfg: &ChainConfig,
    cache: &ScoreCache,
    stats: &mut AcceptanceStats,
) -> Result<()> {
    stats.gibbs_moves += 1;
    let (obs, partial) = allocation::gibbs_select(rng, &state.a);

    if partial.tilde_k() == 0 {
        // single observation: the only valid successor re-creates component one
        let new_a = partial.complete(obs, 0);
        debug_assert_eq!(new_a, state.a);
        state.a = new_a;
        return Ok(());
    }

    // post-removal statistics, derived from the chain's current ones
    let source = state.a.label(obs);
    let mut minus: Vec<ComponentStats> = state.scorer.stats().to_vec();
    if state.a.counts()[source] == 1 {
        minus.remove(source);
    } else {
        let x = data.obs(obs);
        let remaining = partial.members(source);
        minus[source] = minus[source].with_point_removed(&x, remaining[0]);
    }

    let w = allocation::gibbs_weights(
        data,
        &state.g,
        &cfg.hp,
        cfg.model,
        &partial,
        obs,
        Some(minus),
        None,
    )?;
    let u = rng.uniform();
    let mut acc = 0.0;
    let mut chosen = w.probs.len() - 1;
    for (s, p) in w.probs.iter().enumerate() {
        acc += p;
        if u < acc {
            chosen = s;
            break;
        }
    }

    let new_a = w.candidates.into_iter().nth(chosen).expect("chosen in range");
    if new_a != state.a {
        stats.gibbs_reassignments += 1;
    }
    let fingerprint_changed = new_a.fingerprint() != state.a.fingerprint();
    state.a = new_a;
    state.scorer = w.scorers.into_iter().nth(chosen).expect("chosen in range");
    state.log_marginal = w.logml[chosen];
    if fingerprint_changed {
        // entries for the previous assignment cannot be hit again
        cache.clear();
    }
    Ok(())
}

/// Runs a full chain: alternates a structure step and (unless the model is
/// homogeneous or the labels are known) Gibbs reallocation each iteration,
/// then returns the thinned second-half draws.
pub fn run_chain(data: &Dataset, cfg: &ChainConfig) -> Result<PosteriorSample> {
    cfg.validate(data)?;
    let cache = ScoreCache::new();
    let mut rng = RngStream::substream(cfg.seed, StreamKind::Chain, cfg.chain_id);
    let mut state = ChainState::init(data, cfg, &cache)?;
    let mut stats = AcceptanceStats::default();

    let gibbs_enabled =
        cfg.model != Model::H && matches!(cfg.init, InitialState::EmptySingleComponent);

    let t_total = cfg.total_iters;
    let r = cfg.sample_size();
    let record_from = t_total - r * cfg.thin; // record t > record_from with (T - t) % thin == 0
    let mut draws = Vec::with_capacity(r as usize);
    let mut trace = Vec::with_capacity(t_total as usize);

    for t in 1..=t_total {
        state.iter = t;
        structure_step(&mut state, &mut rng, cfg, &cache, &mut stats)?;
        if gibbs_enabled {
            for _ in 0..cfg.gibbs_sweeps {
                gibbs_step(&mut state, &mut rng, data, cfg, &cache, &mut stats)?;
            }
        }

        // pin down one-point-update rounding drift
        if t % 4096 == 0 {
            state.scorer = SubsetScorer::build(data, &state.a, &cfg.hp, cfg.model)?;
            state.log_marginal = state.scorer.dag_logml(&state.g, Some(&cache))?;
        }

        #[cfg(debug_assertions)]
        if t % 1000 == 0 {
            let fresh = SubsetScorer::build(data, &state.a, &cfg.hp, cfg.model)?
                .dag_logml(&state.g, None)?;
            debug_assert!(
                (state.log_marginal - fresh).abs() <= 1e-8 * fresh.abs().max(1.0),
                "cached score drifted: {} vs {}",
                state.log_marginal,
                fresh
            );
        }

        let prior_part = allocation::log_p_z(&state.a)
            + allocation::log_p_k(state.a.k(), cfg.hp.lambda)
            - cfg.edge_penalty.unwrap_or(0.0) * state.g.edge_count() as f64;
        let joint = state.log_marginal + prior_part;
        trace.push(joint);

        if t > record_from && (t_total - t) % cfg.thin == 0 {
            draws.push(Draw {
                iter: t,
                log_score: joint,
                g: state.g.clone(),
                z: state.a.clone(),
            });
        }
    }
    debug_assert_eq!(draws.len() as u64, r);
    Ok(PosteriorSample {
        draws,
        config: cfg.clone(),
        acceptance: stats,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand_distr::{Distribution, StandardNormal};

    fn toy_data(m: usize, n: usize, seed: u64) -> Dataset {
        let mut rng = RngStream::new(seed);
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        Dataset::from_rows(&rows).unwrap()
    }

    fn cfg_for(data: &Dataset, iters: u64, thin: u64, seed: u64) -> ChainConfig {
        ChainConfig::new(
            Model::M2,
            Hyperparameters::default_for(data.n_vars()),
            iters,
            thin,
            seed,
        )
    }

    #[test]
    fn sample_size_and_draw_spacing() {
        let data = toy_data(6, 2, 1);
        let cfg = cfg_for(&data, 1000, 1, 42);
        let sample = run_chain(&data, &cfg).unwrap();
        assert_eq!(sample.draws.len(), 500);
        assert!(sample.draws[0].iter > 500);
        for w in sample.draws.windows(2) {
            assert_eq!(w[1].iter - w[0].iter, 1);
        }

        let cfg = cfg_for(&data, 10, 3, 42);
        let sample = run_chain(&data, &cfg).unwrap();
        assert_eq!(sample.draws.len(), 1);
        assert_eq!(sample.draws[0].iter, 10);
    }

    #[test]
    fn odd_horizon_draw_count_matches_floor() {
        let data = toy_data(5, 2, 2);
        let cfg = cfg_for(&data, 5, 1, 7);
        let sample = run_chain(&data, &cfg).unwrap();
        assert_eq!(sample.draws.len(), 2); // floor(5/2)
        assert!(sample.draws[0].iter as f64 > 2.5);
    }

    #[test]
    fn identical_seed_reproduces_the_chain() {
        let data = toy_data(8, 3, 3);
        let cfg = cfg_for(&data, 400, 2, 11);
        let a = run_chain(&data, &cfg).unwrap();
        let b = run_chain(&data, &cfg).unwrap();
        assert_eq!(a.draws.len(), b.draws.len());
        for (x, y) in a.draws.iter().zip(&b.draws) {
            assert_eq!(x.iter, y.iter);
            assert_eq!(x.log_score.to_bits(), y.log_score.to_bits());
            assert_eq!(x.g, y.g);
            assert_eq!(x.z, y.z);
        }
    }

    #[test]
    fn components_never_vanish() {
        let data = toy_data(5, 2, 4);
        let cfg = cfg_for(&data, 2000, 1, 13);
        let sample = run_chain(&data, &cfg).unwrap();
        assert!(sample.draws.iter().all(|d| d.z.k() >= 1));
    }

    #[test]
    fn known_labels_freeze_the_assignment() {
        let data = toy_data(6, 2, 5);
        let mut cfg = cfg_for(&data, 200, 1, 17);
        cfg.init = InitialState::KnownLabels(vec![0, 0, 1, 1, 0, 1]);
        let sample = run_chain(&data, &cfg).unwrap();
        assert!(sample
            .draws
            .iter()
            .all(|d| d.z.labels() == [0, 0, 1, 1, 0, 1]));
        assert_eq!(sample.acceptance.gibbs_moves, 0);
    }

    #[test]
    fn homogeneous_model_keeps_single_component() {
        let data = toy_data(6, 2, 6);
        let mut cfg = cfg_for(&data, 200, 1, 19);
        cfg.model = Model::H;
        let sample = run_chain(&data, &cfg).unwrap();
        assert!(sample.draws.iter().all(|d| d.z.k() == 1));
    }

    #[test]
    fn cached_score_matches_fresh_recomputation() {
        let data = toy_data(10, 3, 7);
        let cfg = cfg_for(&data, 500, 1, 23);
        let cache = ScoreCache::new();
        let mut rng = RngStream::substream(cfg.seed, StreamKind::Chain, 0);
        let mut state = ChainState::init(&data, &cfg, &cache).unwrap();
        let mut stats = AcceptanceStats::default();
        for t in 1..=500 {
            state.iter = t;
            structure_step(&mut state, &mut rng, &cfg, &cache, &mut stats).unwrap();
            gibbs_step(&mut state, &mut rng, &data, &cfg, &cache, &mut stats).unwrap();
        }
        let fresh = state.scorer.dag_logml(state.dag(), None).unwrap();
        assert_relative_eq!(state.log_marginal(), fresh, max_relative = 1e-8);
        assert!(stats.structure_accepted <= stats.structure_proposed);
    }

    #[test]
    fn joint_logscore_single_component_poisson_term() {
        // K = 1, lambda = 1: log p(z) = 0 and log p(K) = -1
        let data = toy_data(7, 2, 8);
        let hp = Hyperparameters::default_for(2);
        let g = Dag::empty(2);
        let a = Assignment::single(7);
        let joint = joint_logscore(&data, &g, &a, &hp, Model::M2).unwrap();
        let ml = crate::scoring::dag_logml(&data, &a, &g, &hp, Model::M2, None).unwrap();
        assert_relative_eq!(joint, ml - 1.0, max_relative = 1e-12);
    }

    #[test]
    fn latent_mode_rejects_component_overrides() {
        let data = toy_data(4, 2, 9);
        let mut cfg = cfg_for(&data, 100, 1, 29);
        cfg.hp.alpha_mu_k = Some(vec![1.0, 2.0]);
        assert!(run_chain(&data, &cfg).is_err());
    }

    #[test]
    fn config_validation_catches_degenerate_runs() {
        let data = toy_data(4, 2, 10);
        let cfg = cfg_for(&data, 1, 1, 31);
        assert!(run_chain(&data, &cfg).is_err());
        let cfg = cfg_for(&data, 4, 9, 31); // R = 0
        assert!(run_chain(&data, &cfg).is_err());
    }
}
