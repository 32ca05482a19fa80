// The allocation constant gamma* and its certificate, next to the
// closed-form bounds N - min|A| <= gamma* <= min(NC, N|A|).
//
//     cargo run --example gamma_star

use causal_bandit::model::make_binary_tree_instance;
use causal_bandit::simplex::{gamma_star, SolverConfig};

pub fn run() -> causal_bandit::Result<()> {
    for (height, budget) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
        let instance = make_binary_tree_instance(height, budget, 17)?;
        let n = instance.dag().node_count();
        let c = instance.dag().row_count();
        let arms = instance.interventions();
        let min_fixed = arms.iter().map(|a| a.fixed_count()).min().unwrap();
        let sol = gamma_star(&instance, &SolverConfig::default())?;
        println!(
            "h={height} b={budget}: |A|={} gamma*={:.5} (gap {:.1e}, {} iters) bounds [{}, {}]",
            arms.len(),
            sol.value,
            sol.gap,
            sol.iterations,
            n - min_fixed,
            (n * c).min(n * arms.len()),
        );
        let (lo, hi) = ((n - min_fixed) as f64, (n * c).min(n * arms.len()) as f64);
        assert!(sol.value >= lo - sol.gap - 1e-6 && sol.value <= hi + sol.gap + 1e-6);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> causal_bandit::Result<()> {
    run()
}
