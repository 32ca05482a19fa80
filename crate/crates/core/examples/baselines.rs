// Graph-agnostic baselines: Successive Rejects and round-robin uniform
// allocation, on the same instance and horizon.
//
//     cargo run --example baselines

use causal_bandit::bandit::{
    contracted_experiments, exact_rewards, regret_from_rewards, run_strategy, StrategyKind,
};
use causal_bandit::inference::{Environment, SimulatedEnvironment};
use causal_bandit::model::make_binary_tree_instance;
use causal_bandit::rng::stream;

pub fn run() -> causal_bandit::Result<()> {
    let instance = make_binary_tree_instance(3, 2, 8)?;
    let mu = exact_rewards(&instance)?;
    let best = mu.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    println!("|A|={} best mu={best:.4}", mu.len());

    for horizon in [10, 200, 2000] {
        for kind in [StrategyKind::SuccessiveRejects, StrategyKind::Uniform] {
            let mut env = SimulatedEnvironment::new(&instance, stream(horizon));
            let result = run_strategy(kind, &mut env, instance.structure(), horizon, &mut stream(0))?;
            assert_eq!(env.experiments(), contracted_experiments(kind, instance.structure(), horizon));
            println!(
                "T={horizon:>5} {kind:<18} used={:>5} chosen={:>2} regret={:.4}",
                env.experiments(),
                result.chosen,
                regret_from_rewards(&mu, result.chosen)?
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> causal_bandit::Result<()> {
    run()
}
