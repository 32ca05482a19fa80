// The two-phase strategy end to end, in both modes, with the estimated
// rewards next to the exact ones.
//
//     cargo run --release --example two_phase

use causal_bandit::bandit::{exact_rewards, regret_from_rewards, run_causal_bandit};
use causal_bandit::inference::SimulatedEnvironment;
use causal_bandit::model::make_binary_tree_instance;
use causal_bandit::phase2::Mode;
use causal_bandit::rng::stream;
use causal_bandit::simplex::SolverConfig;

pub fn run() -> causal_bandit::Result<()> {
    let instance = make_binary_tree_instance(2, 2, 23)?;
    let c = instance.dag().row_count() as u64;
    let horizon = 300 * c;
    let mu = exact_rewards(&instance)?;

    for mode in [Mode::Paper, Mode::Practical] {
        let mut env = SimulatedEnvironment::new(&instance, stream(4));
        let mut rng = stream(5);
        let run = run_causal_bandit(
            &mut env,
            instance.structure(),
            horizon,
            mode,
            &SolverConfig::default(),
            &mut rng,
        )?;
        println!(
            "{mode:?}: T={horizon} used={} truncated entries={} chosen={}",
            run.result.experiments_used,
            run.phase1.truncation.d.len(),
            instance.interventions()[run.result.chosen],
        );
        for (arm, est) in &run.result.mu_hat {
            println!("  {}  mu={:.4} mu_hat={est:.4}", instance.interventions()[*arm], mu[*arm]);
        }
        println!("  regret {:.4}", regret_from_rewards(&mu, run.result.chosen)?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> causal_bandit::Result<()> {
    run()
}
