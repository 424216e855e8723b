//! DAG equivalence classes: convert DAGs to their CPDAG representatives and
//! group all 25 three-node DAGs into the 11 Markov equivalence classes.
//!
//! Run with: cargo run --release --example cpdag_classes

use std::collections::BTreeMap;

use mixgbn::graph::{cpdag_equal, Dag};

fn all_dags(n: usize) -> Vec<Dag> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|j| (0..n).filter(move |&i| i != j).map(move |i| (j, i)))
        .collect();
    let mut out = Vec::new();
    for mask in 0u64..(1 << pairs.len()) {
        let edges: Vec<(usize, usize)> = pairs
            .iter()
            .enumerate()
            .filter(|(b, _)| mask & (1 << b) != 0)
            .map(|(_, &e)| e)
            .collect();
        if let Ok(g) = Dag::from_edges(n, &edges) {
            out.push(g);
        }
    }
    out
}

fn main() -> mixgbn::Result<()> {
    // a v-structure is compelled; a chain is fully reversible
    let v = Dag::from_edges(3, &[(0, 2), (1, 2)])?;
    println!("v-structure 0 -> 2 <- 1 becomes:\n{}", v.to_cpdag());
    let chain = Dag::from_edges(3, &[(0, 1), (1, 2)])?;
    println!("chain 0 -> 1 -> 2 becomes:\n{}", chain.to_cpdag());
    let fork = Dag::from_edges(3, &[(1, 0), (1, 2)])?;
    assert!(cpdag_equal(&chain.to_cpdag(), &fork.to_cpdag()));
    println!("the chain and the fork 0 <- 1 -> 2 share one equivalence class\n");

    let dags = all_dags(3);
    let mut classes: BTreeMap<String, usize> = BTreeMap::new();
    for g in &dags {
        *classes.entry(g.to_cpdag().to_edge_list_text()).or_default() += 1;
    }
    println!(
        "{} DAGs on 3 nodes fall into {} equivalence classes:",
        dags.len(),
        classes.len()
    );
    for (repr, count) in &classes {
        let shown = if repr.is_empty() {
            "(empty)".to_string()
        } else {
            repr.trim_end().replace('\n', ", ")
        };
        println!("  {count} DAG(s): {shown}");
    }
    Ok(())
}
