use causal_bandit::bandit::StrategyKind;
use causal_bandit::experiment::{
    cell_seed, run_sweep, ExperimentConfig, RegretReport, ReportRow, RowOutcome, CSV_HEADER,
};

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::parse(text).unwrap()
}

#[test]
fn rows_cover_the_grid_in_order() {
    let cfg = config("tree_height=2\nbudgets=1,2\nmultipliers=3,4\ntrials=2\nseed=5");
    let report = run_sweep(&cfg).unwrap();
    assert_eq!(report.rows.len(), 2 * 2 * 4);
    let keys: Vec<(usize, u64, StrategyKind)> =
        report.rows.iter().map(|r| (r.budget, r.horizon, r.strategy)).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    for r in &report.rows {
        assert_eq!(r.instance, "tree-h2");
        match r.outcome {
            RowOutcome::Done { mean_regret, std_err, runtime_ms } => {
                assert!((0.0..=1.0).contains(&mean_regret));
                assert!(std_err >= 0.0);
                assert_eq!(runtime_ms, 0.0);
            }
            RowOutcome::Failed(ref m) => panic!("unexpected failure {m}"),
        }
    }
    let csv = report.to_csv();
    assert!(csv.starts_with(&format!("{CSV_HEADER}\n")));
    assert_eq!(csv.lines().count(), 1 + report.rows.len());
}

#[test]
fn reruns_are_byte_identical() {
    let cfg = config("tree_height=2\nbudgets=2\nmultipliers=3,5\ntrials=3\nseed=77");
    assert_eq!(run_sweep(&cfg).unwrap().to_csv(), run_sweep(&cfg).unwrap().to_csv());
    let other = config("tree_height=2\nbudgets=2\nmultipliers=3,5\ntrials=3\nseed=78");
    assert_ne!(run_sweep(&cfg).unwrap().to_csv(), run_sweep(&other).unwrap().to_csv());
}

#[test]
fn single_arm_instance_has_no_regret() {
    // Height 1 has two leaves; budget 2 leaves one intervention.
    let cfg = config("tree_height=1\nbudgets=2\nmultipliers=1,2\ntrials=3\nstrategies=uniform");
    for row in run_sweep(&cfg).unwrap().rows {
        assert_eq!(
            row.outcome,
            RowOutcome::Done { mean_regret: 0.0, std_err: 0.0, runtime_ms: 0.0 }
        );
    }
}

#[test]
fn more_trials_shrink_the_standard_error() {
    let err = |trials: usize| {
        let cfg = config(&format!(
            "tree_height=3\nbudgets=2\nmultipliers=1\ntrials={trials}\nstrategies=uniform\nseed=3"
        ));
        match &run_sweep(&cfg).unwrap().rows[0].outcome {
            RowOutcome::Done { std_err, .. } => *std_err,
            RowOutcome::Failed(m) => panic!("{m}"),
        }
    };
    let ratio = err(10) / err(40);
    assert!((1.2..3.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn failed_rows_are_marked() {
    let report = RegretReport {
        rows: vec![ReportRow {
            instance: "x".into(),
            strategy: StrategyKind::ProposedPaper,
            budget: 2,
            horizon: 10,
            trials: 1,
            outcome: RowOutcome::Failed("budget".into()),
        }],
    };
    assert!(report.to_csv().ends_with("x,proposed-paper,2,10,1,FAILED,FAILED,FAILED\n"));
    assert_eq!(report.failures().count(), 1);
}

#[test]
fn cell_seeds_differ_per_field() {
    let base = cell_seed(1, 2, 3, StrategyKind::Uniform, 4);
    assert_ne!(base, cell_seed(2, 2, 3, StrategyKind::Uniform, 4));
    assert_ne!(base, cell_seed(1, 3, 3, StrategyKind::Uniform, 4));
    assert_ne!(base, cell_seed(1, 2, 4, StrategyKind::Uniform, 4));
    assert_ne!(base, cell_seed(1, 2, 3, StrategyKind::SuccessiveRejects, 4));
    assert_ne!(base, cell_seed(1, 2, 3, StrategyKind::Uniform, 5));
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(run_sweep(&config("trials=0")).is_err());
    assert!(run_sweep(&config("tree_height=1\nbudgets=3")).is_err());
    assert!(run_sweep(&config("multipliers=2\nstrategies=proposed-practical")).is_err());
}
