//! Temporary: coarse timing of the sampler's inner pieces.
use mixgbn::allocation::{gibbs_select, gibbs_weights, Assignment};
use mixgbn::numkern::RngStream;
use mixgbn::scoring::{Hyperparameters, Model, SubsetScorer};
use mixgbn::simulate::{simulate_dataset, SimConfig};
use std::time::Instant;

fn main() {
    let n = 20;
    let sim = SimConfig::new(n, 200, 4, 8000);
    let (data, truth) = simulate_dataset(&sim).unwrap();
    let hp = Hyperparameters::default_for(n);
    let g = truth.dag().unwrap();
    let mut rng = RngStream::new(1);

    let t0 = Instant::now();
    let mut total = 0usize;
    for _ in 0..1000 {
        total += g.neighborhood(None).size();
    }
    println!("neighborhood x1000: {:?} (size {})", t0.elapsed(), total / 1000);

    let z = Assignment::new(truth.assignment_labels()).unwrap();
    let t0 = Instant::now();
    for _ in 0..1000 {
        let s = SubsetScorer::build(&data, &z, &hp, Model::M2).unwrap();
        std::hint::black_box(&s);
    }
    println!("scorer build x1000: {:?}", t0.elapsed());

    let scorer = SubsetScorer::build(&data, &z, &hp, Model::M2).unwrap();
    let t0 = Instant::now();
    for _ in 0..1000 {
        let v = scorer.dag_logml(&g, None).unwrap();
        std::hint::black_box(v);
    }
    println!("dag_logml x1000: {:?}", t0.elapsed());

    let t0 = Instant::now();
    for _ in 0..1000 {
        let (obs, partial) = gibbs_select(&mut rng, &z);
        let w = gibbs_weights(&data, &g, &hp, Model::M2, &partial, obs, None).unwrap();
        std::hint::black_box(&w);
    }
    println!("gibbs_weights x1000: {:?}", t0.elapsed());
}
