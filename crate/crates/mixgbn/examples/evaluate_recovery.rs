//! Full recovery pipeline on simulated data: sample under the homogeneous
//! and tied-covariance models, then compare network reconstruction
//! (precision-recall AUC, relative structural Hamming distance) and the
//! thresholded network prediction against the known truth.
//!
//! Run with: cargo run --release --example evaluate_recovery

use mixgbn::evaluate::{auc_pr, coallocation, edge_scores, predict_network, rshd};
use mixgbn::mcmc::{run_chain, ChainConfig};
use mixgbn::scoring::{Hyperparameters, Model};
use mixgbn::simulate::{simulate_dataset, SimConfig};

fn main() -> mixgbn::Result<()> {
    let sim = SimConfig::new(10, 200, 4, 3);
    let (data, truth) = simulate_dataset(&sim)?;
    let cpdag = truth.cpdag();
    println!(
        "truth: {} edges ({} compelled, {} reversible)",
        cpdag.edge_count(),
        cpdag.directed().len(),
        cpdag.undirected().len()
    );

    for model in [Model::H, Model::M2] {
        let hp = Hyperparameters::default_for(10);
        let cfg = ChainConfig::new(model, hp, 60_000, 60, 17);
        let sample = run_chain(&data, &cfg)?;
        let scores = edge_scores(&sample)?;
        let auc = auc_pr(&scores, &cpdag)?;
        let prediction = predict_network(&scores, 0.75);
        let shd = rshd(&prediction, &cpdag)?;
        println!(
            "{:<3} AUC {auc:.3}  rSHD {shd:.3}  predicted {} edges at psi = 0.75",
            model.to_string(),
            prediction.edge_count()
        );
        if model == Model::M2 {
            let co = coallocation(&sample)?;
            // average within-component vs cross-component co-allocation
            let z = truth.assignment_labels();
            let (mut same, mut cross, mut ns, mut nc) = (0.0, 0.0, 0u64, 0u64);
            for a in 0..data.n_obs() {
                for b in (a + 1)..data.n_obs() {
                    if z[a] == z[b] {
                        same += co.get(a, b);
                        ns += 1;
                    } else {
                        cross += co.get(a, b);
                        nc += 1;
                    }
                }
            }
            println!(
                "    co-allocation: within true components {:.3}, across {:.3}",
                same / ns as f64,
                cross / nc as f64
            );
        }
    }
    Ok(())
}
