// What the first phase records: the arm chosen for each parent realization,
// the raw and truncated estimates, and which entries were truncated.
//
//     cargo run --example phase_traces

use causal_bandit::inference::SimulatedEnvironment;
use causal_bandit::model::make_binary_tree_instance;
use causal_bandit::phase1::{run_phase1, Truncation};
use causal_bandit::rng::stream;

pub fn run() -> causal_bandit::Result<()> {
    let instance = make_binary_tree_instance(1, 1, 9)?;
    let dag = instance.dag();
    let c = dag.row_count() as u64;

    for (name, rule, horizon) in [
        ("disabled", Truncation::Disabled, 30 * c),
        ("lambda=1e-4", Truncation::from_lambda(1e-4)?, 3000 * c),
    ] {
        let mut env = SimulatedEnvironment::new(&instance, stream(1));
        let out = run_phase1(&mut env, instance.structure(), rule, horizon)?;
        println!("{name}: T={horizon} per pair={} S={:?}", out.per_pair, out.s_lambda);
        for n in 0..dag.node_count() {
            let rows = dag.parent_rows(n) as u64;
            for pm in 0..rows {
                let arm = out.best_arm[n][pm as usize];
                println!(
                    "  node {n} parents {pm:0w$b}: arm {} counts {:?} alpha {:.3} raw {:.3} check {:.3}{}",
                    instance.interventions()[arm],
                    out.counts[n][pm as usize],
                    instance.alpha().get(n, pm + rows),
                    out.raw_alpha.get(n, pm + rows),
                    out.check_alpha.get(n, pm + rows),
                    if out.truncation.d_down(n, pm) { " (dropped)" } else { "" },
                    w = dag.parents(n).len().max(1),
                );
            }
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> causal_bandit::Result<()> {
    run()
}
