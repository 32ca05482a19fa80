// Soft interventions rewritten as hard ones: each soft table becomes an
// indicator node, and clamping the indicator reproduces the soft joint law.
//
//     cargo run --example soft_intervention

use causal_bandit::inference::{brute_force, exact_mu};
use causal_bandit::model::{soft_to_hard_reduction, AlphaTable, CausalDag, Intervention, SoftIntervention};

pub fn run() -> causal_bandit::Result<()> {
    // X0 -> X1 -> X2, plus X0 -> X2.
    let dag = CausalDag::new(vec![vec![], vec![0], vec![0, 1]])?;
    let alpha = AlphaTable::new(
        &dag,
        vec![
            vec![0.6, 0.4],
            vec![0.7, 0.2, 0.3, 0.8],
            vec![0.9, 0.5, 0.4, 0.1, 0.1, 0.5, 0.6, 0.9],
        ],
    )?;
    let soft = vec![
        SoftIntervention { label: "weak".into(), row: vec![0.5, 0.5, 0.5, 0.5] },
        SoftIntervention { label: "strong".into(), row: vec![0.05, 0.1, 0.95, 0.9] },
    ];
    let reduced = soft_to_hard_reduction(&dag, &alpha, 1, &soft)?;
    let observational = Intervention::observational(3);

    for (label, s) in soft.iter().enumerate() {
        let mut rows: Vec<Vec<f64>> = (0..3).map(|n| alpha.node(n).to_vec()).collect();
        rows[1] = s.row.clone();
        let softened = AlphaTable::new(&dag, rows)?;
        let a = &reduced.instance.interventions()[label];

        let mut worst = 0.0f64;
        for bits in 0..8u32 {
            let omega: Vec<bool> = (0..3).map(|i| bits >> i & 1 == 1).collect();
            let mut full = vec![false; reduced.instance.dag().node_count()];
            for (l, &node) in reduced.label_nodes.iter().enumerate() {
                full[node] = l == label;
            }
            for (old, &node) in reduced.original_nodes.iter().enumerate() {
                full[node] = omega[old];
            }
            let p_soft = brute_force::joint(&softened, &dag, &observational, &omega);
            let p_hard = brute_force::joint(reduced.instance.alpha(), reduced.instance.dag(), a, &full);
            worst = worst.max((p_soft - p_hard).abs());
        }
        let mu = exact_mu(&reduced.instance, a)?;
        println!("{} as {a}: mu={mu:.6} max joint difference {worst:.1e}", s.label);
        assert!(worst < 1e-12);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> causal_bandit::Result<()> {
    run()
}
