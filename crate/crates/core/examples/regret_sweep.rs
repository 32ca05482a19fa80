// A small regret sweep written as CSV, the same report the `run`
// subcommand produces.
//
//     cargo run --release --example regret_sweep

use causal_bandit::experiment::{run_sweep, ExperimentConfig};

pub fn run() -> causal_bandit::Result<()> {
    let config = ExperimentConfig::parse(
        "tree_height = 2\n\
         budgets = 1,2\n\
         multipliers = 3,6\n\
         trials = 4\n\
         seed = 2024\n",
    )?;
    let report = run_sweep(&config)?;
    print!("{}", report.to_csv());
    assert_eq!(report.rows.len(), 2 * 2 * 4);
    Ok(())
}

#[allow(dead_code)]
fn main() -> causal_bandit::Result<()> {
    run()
}
