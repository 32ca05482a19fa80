// Synthetic instances: a complete binary tree with every edge pointing at the
// root, and one intervention per way of setting `budget` leaves to 1.
//
//     cargo run --example tree_instance

use causal_bandit::model::{binary_tree_dag, make_binary_tree_instance, validate};

pub fn run() -> causal_bandit::Result<()> {
    let (dag, leaves) = binary_tree_dag(4)?;
    println!("height 4: N={} C={} leaves={}", dag.node_count(), dag.row_count(), leaves.len());

    for budget in [2, 4, 8] {
        let instance = make_binary_tree_instance(4, budget, 11)?;
        let arms = instance.interventions();
        assert!(validate(instance.dag(), instance.alpha()).is_empty());
        println!("budget {budget}: |A|={} first={} last={}", arms.len(), arms[0], arms[arms.len() - 1]);
    }

    let small = make_binary_tree_instance(1, 1, 3)?;
    for n in 0..small.dag().node_count() {
        println!("node {n} parents {:?} alpha {:?}", small.dag().parents(n), small.alpha().node(n));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> causal_bandit::Result<()> {
    run()
}
