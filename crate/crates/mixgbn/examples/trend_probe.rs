//! Temporary probe: per-replicate AUCs for H/M1/M2 at desk scale.
use mixgbn::evaluate::{auc_pr, edge_scores};
use mixgbn::mcmc::{run_chain, ChainConfig};
use mixgbn::scoring::{Hyperparameters, Model};
use mixgbn::simulate::{simulate_dataset, SimConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(10);
    let reps: u64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(3);
    let iters: u64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(100_000);
    for rep in 0..reps {
        let sim = SimConfig::new(n, 200, 4, 8000 + rep);
        let (data, truth) = simulate_dataset(&sim).unwrap();
        print!("rep {rep}: ");
        for model in [Model::H, Model::M1, Model::M2] {
            let hp = Hyperparameters::default_for(n);
            let mut cfg = ChainConfig::new(model, hp, iters, iters / 1000, 8100 + rep);
            cfg.chain_id = rep;
            let t0 = std::time::Instant::now();
            let sample = run_chain(&data, &cfg).unwrap();
            let scores = edge_scores(&sample).unwrap();
            let auc = auc_pr(&scores, &truth.cpdag()).unwrap();
            let ks: Vec<usize> = sample.draws.iter().map(|d| d.z.k()).collect();
            let kmax = ks.iter().max().unwrap();
            let kmean = ks.iter().sum::<usize>() as f64 / ks.len() as f64;
            print!("{model}: auc {auc:.3} (kmean {kmean:.1}, kmax {kmax}, {:.0?})  ", t0.elapsed());
        }
        println!();
    }
}
