use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_causal-bandit");

fn cli(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn gen_prints_tree_counts() {
    let o = cli(&["gen", "--tree-height", "4", "--budgets", "2,4,8"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("N=31\n"));
    for line in ["budget=2 |A|=120", "budget=4 |A|=1820", "budget=8 |A|=12870"] {
        assert!(s.contains(line), "{s}");
    }
}

#[test]
fn gamma_on_a_single_intervention() {
    // Height 1, budget 2: one arm fixing both leaves, so gamma* = N - 2 = 1.
    let o = cli(&["gamma", "--tree-height", "1", "--budget", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("gamma_star=1.000000\n"));
}

#[test]
fn parse_bif_prints_structure() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/chain.bif");
    let o = cli(&["parse-bif", path]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("variables=2\n"));
    assert!(s.contains("1 B <- A\n"));
    assert!(s.contains("targets=A\n"));
}

#[test]
fn run_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    let out = dir.path().join("report.csv");
    std::fs::write(&cfg, "# tiny sweep\ntree_height = 2\nbudgets = 2\nmultipliers = 3\ntrials = 1\n").unwrap();
    let o = cli(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "9",
        "--set",
        "strategies=uniform,proposed-practical",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "instance,strategy,budget,horizon,trials,mean_regret,std_err,runtime_ms");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("tree-h2,proposed-practical,2,"));
    assert!(lines[2].starts_with("tree-h2,uniform,2,"));
}

#[test]
fn exit_codes() {
    assert_eq!(cli(&[]).status.code(), Some(1));
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(cli(&["gen", "--tree-height", "x"]).status.code(), Some(1));
    assert_eq!(cli(&["run", "--set", "colour=red"]).status.code(), Some(1));
    assert_eq!(cli(&["run", "--trials", "0"]).status.code(), Some(1));
    assert_eq!(cli(&["--help"]).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.bif");
    std::fs::write(&bad, "network x {\n").unwrap();
    let o = cli(&["parse-bif", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("1:11"));
    assert_eq!(cli(&["parse-bif", "/no/such/file.bif"]).status.code(), Some(2));
}
