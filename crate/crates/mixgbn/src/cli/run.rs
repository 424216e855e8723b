//! Resolved command configurations and their implementations.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::manifest::RunManifest;
use super::{resolve_out_dir, EvaluateArgs, PredictArgs, SampleArgs, SimulateArgs};
use crate::allocation::Assignment;
use crate::error::Error;
use crate::evaluate;
use crate::graph::Dag;
use crate::mcmc::{self, ChainConfig, Draw, InitialState, PosteriorSample};
use crate::numkern::{RngStream, StreamKind, SymMatrix};
use crate::posterior::{self, ThetaDraw};
use crate::scoring::{Hyperparameters, Model};
use crate::simulate::{self, SimConfig};
use crate::Result;

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

/// Builds hyperparameters from optional flag overrides, starting from the
/// weakly informative defaults for dimension `n`.
fn hyperparameters_from_flags(
    n: usize,
    alpha_w: Option<f64>,
    alpha_mu: Option<f64>,
    lambda: Option<f64>,
    t_scale: Option<f64>,
) -> Hyperparameters {
    let mut hp = Hyperparameters::default_for(n);
    if let Some(v) = alpha_w {
        hp.alpha_w = v;
    }
    if let Some(v) = alpha_mu {
        hp.alpha_mu = v;
    }
    if let Some(v) = lambda {
        hp.lambda = v;
    }
    if let Some(c) = t_scale {
        hp.t_dagger = SymMatrix::scaled_identity(n, c);
    }
    hp
}

// ---------------------------------------------------------------------------
// simulate

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub sim: SimConfig,
    pub out: PathBuf,
}

impl SimulateConfig {
    pub fn from_args(args: SimulateArgs) -> Result<Self> {
        let mut sim = SimConfig::new(args.n, args.m, args.components, args.seed);
        sim.expected_edges = args.expected_edges;
        Ok(SimulateConfig {
            sim,
            out: resolve_out_dir(&args.out),
        })
    }
}

pub fn run_simulate(cfg: &SimulateConfig) -> Result<()> {
    let started = Instant::now();
    ensure_dir(&cfg.out)?;
    let (data, truth) = simulate::simulate_dataset(&cfg.sim)?;
    let data_path = cfg.out.join("data.csv");
    let truth_path = cfg.out.join("truth.json");
    simulate::write_csv(&data, &data_path, true)?;
    truth.write_json(&truth_path)?;
    let manifest = RunManifest::new(
        "simulate",
        cfg.sim.seed,
        serde_json::to_value(cfg)?,
        vec![],
        vec![data_path, truth_path],
        started.elapsed().as_secs_f64(),
    );
    manifest.write(&cfg.out.join("manifest.json"))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// sample

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleConfig {
    pub data: PathBuf,
    pub model: Model,
    pub iters: u64,
    pub thin: u64,
    pub seed: u64,
    pub chains: u64,
    pub standardize: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_column: Option<String>,
    /// Known-assignment mode: the label column fixing the assignment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_labels: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_fanin: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_penalty: Option<f64>,
    pub gibbs_sweeps: u32,
    pub out: PathBuf,
}

impl SampleConfig {
    pub fn from_args(args: SampleArgs) -> Result<Self> {
        let model: Model = args.model.parse()?;
        // default thinning targets a 500-draw posterior sample
        let thin = match args.thin {
            Some(t) => t,
            None => (args.iters / 1000).max(1),
        };
        let label_column = match (&args.labels, &args.label_column) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::InvalidConfig(format!(
                    "--labels {a} conflicts with --label-column {b}"
                )));
            }
            (Some(a), _) => Some(a.clone()),
            (None, other) => other.clone(),
        };
        Ok(SampleConfig {
            data: args.data,
            model,
            iters: args.iters,
            thin,
            seed: args.seed,
            chains: args.chains,
            standardize: args.standardize,
            label_column,
            known_labels: args.labels,
            alpha_w: args.alpha_w,
            alpha_mu: args.alpha_mu,
            lambda: args.lambda,
            t_scale: args.t_scale,
            max_fanin: args.max_fanin,
            edge_penalty: args.edge_penalty,
            gibbs_sweeps: args.gibbs_sweeps,
            out: resolve_out_dir(&args.out),
        })
    }
}

/// One line of the posterior-sample JSON-lines file. Node indices in `edges`
/// are zero-based; labels in `z` are one-based.
#[derive(Debug, Serialize, Deserialize)]
struct SampleRecord {
    chain: u64,
    iter: u64,
    n: usize,
    log_score: f64,
    edges: Vec<[usize; 2]>,
    z: Vec<usize>,
}

#[derive(Debug, Serialize)]
struct SampleSummary<'a> {
    model: Model,
    n: usize,
    m: usize,
    chains: u64,
    iters: u64,
    thin: u64,
    draws_per_chain: u64,
    seed: u64,
    known_labels: bool,
    hyperparameters: &'a Hyperparameters,
    acceptance: Vec<mcmc::AcceptanceStats>,
}

fn write_sample_jsonl(path: &Path, samples: &[PosteriorSample]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    for (c, sample) in samples.iter().enumerate() {
        for d in &sample.draws {
            let rec = SampleRecord {
                chain: c as u64,
                iter: d.iter,
                n: d.g.n(),
                log_score: d.log_score,
                edges: d.g.edges().into_iter().map(|(j, i)| [j, i]).collect(),
                z: d.z.labels().iter().map(|&l| l + 1).collect(),
            };
            serde_json::to_writer(&mut f, &rec)?;
            f.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Reads a posterior-sample JSON-lines file back into a [`PosteriorSample`].
/// The configuration echo is reconstructed with defaults (the authoritative
/// record lives in the run manifest and summary next to the file).
pub fn read_sample_jsonl(path: &Path) -> Result<PosteriorSample> {
    let f = fs::File::open(path)?;
    let mut draws = Vec::new();
    let mut n = 0usize;
    for (lineno, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SampleRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Parse(format!("sample line {}: {e}", lineno + 1)))?;
        n = rec.n;
        let g = Dag::from_edges(
            rec.n,
            &rec.edges.iter().map(|e| (e[0], e[1])).collect::<Vec<_>>(),
        )?;
        let labels: Vec<usize> = rec
            .z
            .iter()
            .map(|&l| {
                l.checked_sub(1)
                    .ok_or_else(|| Error::Parse("label 0 in one-based vector".into()))
            })
            .collect::<Result<_>>()?;
        draws.push(Draw {
            iter: rec.iter,
            log_score: rec.log_score,
            g,
            z: Assignment::new(labels)?,
        });
    }
    if draws.is_empty() {
        return Err(Error::Parse("posterior sample file has no draws".into()));
    }
    Ok(PosteriorSample {
        draws,
        config: ChainConfig::new(Model::M2, Hyperparameters::default_for(n), 2, 1, 0),
        acceptance: Default::default(),
        trace: Vec::new(),
    })
}

pub fn run_sample(cfg: &SampleConfig) -> Result<()> {
    let started = Instant::now();
    let data = simulate::load_csv(&cfg.data, cfg.standardize, cfg.label_column.as_deref())?;
    let hp = hyperparameters_from_flags(
        data.n_vars(),
        cfg.alpha_w,
        cfg.alpha_mu,
        cfg.lambda,
        cfg.t_scale,
    );
    let init = if cfg.known_labels.is_some() {
        InitialState::KnownLabels(data.label_assignment()?)
    } else {
        InitialState::EmptySingleComponent
    };

    let chain_cfgs: Vec<ChainConfig> = (0..cfg.chains)
        .map(|c| {
            let mut cc = ChainConfig::new(cfg.model, hp.clone(), cfg.iters, cfg.thin, cfg.seed);
            cc.chain_id = c;
            cc.max_fanin = cfg.max_fanin;
            cc.init = init.clone();
            cc.edge_penalty = cfg.edge_penalty;
            cc.gibbs_sweeps = cfg.gibbs_sweeps;
            cc
        })
        .collect();

    let samples: Vec<PosteriorSample> = chain_cfgs
        .par_iter()
        .map(|cc| mcmc::run_chain(&data, cc))
        .collect::<Result<_>>()?;

    ensure_dir(&cfg.out)?;
    let sample_path = cfg.out.join("sample.jsonl");
    write_sample_jsonl(&sample_path, &samples)?;

    let trace_path = cfg.out.join("trace.csv");
    {
        let mut f = fs::File::create(&trace_path)?;
        f.write_all(b"chain,iter,log_score\n")?;
        for (c, sample) in samples.iter().enumerate() {
            for (i, v) in sample.trace.iter().enumerate() {
                writeln!(f, "{c},{},{v}", i + 1)?;
            }
        }
    }

    let summary_path = cfg.out.join("summary.json");
    {
        let summary = SampleSummary {
            model: cfg.model,
            n: data.n_vars(),
            m: data.n_obs(),
            chains: cfg.chains,
            iters: cfg.iters,
            thin: cfg.thin,
            draws_per_chain: chain_cfgs[0].sample_size(),
            seed: cfg.seed,
            known_labels: cfg.known_labels.is_some(),
            hyperparameters: &hp,
            acceptance: samples.iter().map(|s| s.acceptance.clone()).collect(),
        };
        let mut body = serde_json::to_string_pretty(&summary)?;
        body.push('\n');
        fs::write(&summary_path, body)?;
    }

    let manifest = RunManifest::new(
        "sample",
        cfg.seed,
        serde_json::to_value(cfg)?,
        vec![cfg.data.clone()],
        vec![sample_path, trace_path, summary_path],
        started.elapsed().as_secs_f64(),
    );
    manifest.write(&cfg.out.join("manifest.json"))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// evaluate

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluateConfig {
    pub sample: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<PathBuf>,
    pub psi: f64,
    pub out: PathBuf,
}

impl EvaluateConfig {
    pub fn from_args(args: EvaluateArgs) -> Result<Self> {
        if !(0.0..=1.0).contains(&args.psi) {
            return Err(Error::InvalidConfig(format!(
                "psi = {} must lie in [0, 1]",
                args.psi
            )));
        }
        Ok(EvaluateConfig {
            sample: args.sample,
            truth: args.truth,
            psi: args.psi,
            out: resolve_out_dir(&args.out),
        })
    }
}

#[derive(Debug, Serialize)]
struct EvaluateReport {
    n: usize,
    draws: usize,
    psi: f64,
    predicted_edges: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    auc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rshd: Option<f64>,
}

pub fn run_evaluate(cfg: &EvaluateConfig) -> Result<()> {
    let started = Instant::now();
    let sample = read_sample_jsonl(&cfg.sample)?;
    let scores = evaluate::edge_scores(&sample)?;
    let coalloc = evaluate::coallocation(&sample)?;
    let prediction = evaluate::predict_network(&scores, cfg.psi);

    let (auc, rshd_value) = match &cfg.truth {
        Some(truth_path) => {
            let truth = simulate::GroundTruth::read_json(truth_path)?;
            let cpdag = truth.cpdag();
            (
                Some(evaluate::auc_pr(&scores, &cpdag)?),
                Some(evaluate::rshd(&prediction, &cpdag)?),
            )
        }
        None => (None, None),
    };

    ensure_dir(&cfg.out)?;
    let names: Vec<String> = (0..scores.n()).map(|j| format!("x{j}")).collect();
    let edge_path = cfg.out.join("edge_scores.csv");
    fs::write(&edge_path, scores.to_csv(&names))?;
    let co_path = cfg.out.join("coallocation.csv");
    fs::write(&co_path, coalloc.to_csv())?;
    let pred_path = cfg.out.join("prediction.txt");
    fs::write(&pred_path, prediction.to_edge_list_text())?;
    let report_path = cfg.out.join("report.json");
    {
        let report = EvaluateReport {
            n: scores.n(),
            draws: sample.draws.len(),
            psi: cfg.psi,
            predicted_edges: prediction.edge_count(),
            auc,
            rshd: rshd_value,
        };
        let mut body = serde_json::to_string_pretty(&report)?;
        body.push('\n');
        fs::write(&report_path, body)?;
    }

    let mut inputs = vec![cfg.sample.clone()];
    if let Some(t) = &cfg.truth {
        inputs.push(t.clone());
    }
    let manifest = RunManifest::new(
        "evaluate",
        0,
        serde_json::to_value(cfg)?,
        inputs,
        vec![edge_path, co_path, pred_path, report_path],
        started.elapsed().as_secs_f64(),
    );
    manifest.write(&cfg.out.join("manifest.json"))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// predict

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictConfig {
    pub sample: PathBuf,
    pub data: PathBuf,
    pub holdout: PathBuf,
    pub draws_per_state: u64,
    pub model: Model,
    pub standardize: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_column: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_scale: Option<f64>,
    pub seed: u64,
    pub out: PathBuf,
}

impl PredictConfig {
    pub fn from_args(args: PredictArgs) -> Result<Self> {
        if args.draws_per_state < 1 {
            return Err(Error::InvalidConfig("draws-per-state must be positive".into()));
        }
        Ok(PredictConfig {
            sample: args.sample,
            data: args.data,
            holdout: args.holdout,
            draws_per_state: args.draws_per_state,
            model: args.model.parse()?,
            standardize: args.standardize,
            label_column: args.label_column,
            alpha_w: args.alpha_w,
            alpha_mu: args.alpha_mu,
            lambda: args.lambda,
            t_scale: args.t_scale,
            seed: args.seed,
            out: resolve_out_dir(&args.out),
        })
    }
}

#[derive(Debug, Serialize)]
struct PredictReport {
    geometric_mean_log_pp: f64,
    holdout_rows: usize,
    posterior_states: usize,
    draws_per_state: u64,
    per_observation_log_density: Vec<f64>,
}

pub fn run_predict(cfg: &PredictConfig) -> Result<()> {
    let started = Instant::now();
    let sample = read_sample_jsonl(&cfg.sample)?;
    let data = simulate::load_csv(&cfg.data, cfg.standardize, cfg.label_column.as_deref())?;
    let holdout = simulate::load_csv(&cfg.holdout, cfg.standardize, cfg.label_column.as_deref())?;
    if holdout.n_vars() != data.n_vars() {
        return Err(Error::Dimension(format!(
            "holdout has {} variables, training data {}",
            holdout.n_vars(),
            data.n_vars()
        )));
    }
    let hp = hyperparameters_from_flags(
        data.n_vars(),
        cfg.alpha_w,
        cfg.alpha_mu,
        cfg.lambda,
        cfg.t_scale,
    );

    let mut rng = RngStream::substream(cfg.seed, StreamKind::ParamDraws, 0);
    let mut thetas: Vec<ThetaDraw> = Vec::with_capacity(
        sample.draws.len() * cfg.draws_per_state as usize,
    );
    for d in &sample.draws {
        for _ in 0..cfg.draws_per_state {
            thetas.push(posterior::sample_posterior_params(
                &mut rng, &data, &d.g, &d.z, &hp, cfg.model,
            )?);
        }
    }
    let gm = posterior::predictive_logprob(&thetas, &holdout)?;
    let per_obs = posterior::per_observation_logprob(&thetas, &holdout)?;

    ensure_dir(&cfg.out)?;
    let report_path = cfg.out.join("predictive.json");
    {
        let report = PredictReport {
            geometric_mean_log_pp: gm,
            holdout_rows: holdout.n_obs(),
            posterior_states: sample.draws.len(),
            draws_per_state: cfg.draws_per_state,
            per_observation_log_density: per_obs,
        };
        let mut body = serde_json::to_string_pretty(&report)?;
        body.push('\n');
        fs::write(&report_path, body)?;
    }

    let manifest = RunManifest::new(
        "predict",
        cfg.seed,
        serde_json::to_value(cfg)?,
        vec![cfg.sample.clone(), cfg.data.clone(), cfg.holdout.clone()],
        vec![report_path],
        started.elapsed().as_secs_f64(),
    );
    manifest.write(&cfg.out.join("manifest.json"))?;
    Ok(())
}
