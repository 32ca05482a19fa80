#![allow(dead_code)]

use causal_bandit::model::{random_alpha, CausalDag, Instance, Intervention};
use causal_bandit::rng::stream;
use rand::Rng;

/// Random DAG: node `n` takes each earlier node as a parent with
/// probability `density`, keeping at most `max_parents`.
pub fn random_dag(nodes: usize, density: f64, max_parents: usize, seed: u64) -> CausalDag {
    let mut rng = stream(seed);
    let parents = (0..nodes)
        .map(|n| {
            let mut ps: Vec<usize> = (0..n).filter(|_| rng.gen::<f64>() < density).collect();
            while ps.len() > max_parents {
                ps.remove(rng.gen_range(0..ps.len()));
            }
            ps
        })
        .collect();
    CausalDag::new(parents).unwrap()
}

/// Each node fixed with probability `fix`, to a fair coin value.
pub fn random_intervention(nodes: usize, fix: f64, rng: &mut impl Rng) -> Intervention {
    Intervention::new(
        (0..nodes)
            .map(|_| if rng.gen::<f64>() < fix { Some(rng.gen()) } else { None })
            .collect(),
    )
}

/// Random instance with `arms` distinct interventions.
pub fn random_instance(nodes: usize, arms: usize, seed: u64) -> Instance {
    let dag = random_dag(nodes, 0.5, 3, seed);
    let alpha = random_alpha(&dag, seed ^ 0x55);
    let mut rng = stream(seed ^ 0xAA);
    let mut set: Vec<Intervention> = Vec::new();
    let mut guard = 0;
    while set.len() < arms && guard < 10_000 {
        guard += 1;
        let a = random_intervention(nodes, 0.3, &mut rng);
        if !set.contains(&a) {
            set.push(a);
        }
    }
    Instance::new(dag, alpha, set).unwrap()
}

pub fn data_path(file: &str) -> String {
    format!("{}/data/{file}", env!("CARGO_MANIFEST_DIR"))
}
