// Exact rewards and parent marginals by the frontier dynamic program,
// checked against full enumeration and against sampling.
//
//     cargo run --example exact_inference

use causal_bandit::inference::{brute_force, exact_beta, exact_mu, sample};
use causal_bandit::model::{make_binary_tree_instance, Intervention, ParentRealization};
use causal_bandit::rng::stream;

pub fn run() -> causal_bandit::Result<()> {
    let instance = make_binary_tree_instance(2, 2, 5)?;
    let dag = instance.dag();
    let root = dag.target();

    for a in instance.interventions().iter().take(4) {
        let mu = exact_mu(&instance, a)?;
        let reference = brute_force::mu_from_alpha(instance.alpha(), dag, a)?;
        assert!((mu - reference).abs() < 1e-12);

        let mut rng = stream(1);
        let draws = 20_000;
        let hits = (0..draws)
            .filter(|_| sample(&instance, a, &mut rng).get(root))
            .count();
        println!("{a}: mu={mu:.6} enumeration={reference:.6} sampled={:.4}", hits as f64 / draws as f64);
    }

    let observational = Intervention::observational(dag.node_count());
    for mask in 0..dag.parent_rows(root) as u64 {
        let pi = ParentRealization::over_parents(dag, root, mask)?;
        let beta = exact_beta(&instance, root, &pi, &observational)?;
        println!("beta_root({pi}, observational) = {beta:.6}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> causal_bandit::Result<()> {
    run()
}
