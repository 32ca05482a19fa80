use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use causal_bandit::bif::{parse_bif, to_causal_dag};
use causal_bandit::experiment::{run_sweep, summarize, ExperimentConfig, Graph, InstanceSource};
use causal_bandit::model::{random_alpha, Instance};
use causal_bandit::simplex::{gamma_star, SolverConfig};
use causal_bandit::Error;

#[derive(Parser)]
#[command(name = "causal-bandit", version, about = "Causal bandit experiments on binary DAGs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
#[group(multiple = false)]
struct Source {
    /// Complete binary tree of this height.
    #[arg(long)]
    tree_height: Option<u32>,
    /// BIF network file.
    #[arg(long)]
    bif: Option<PathBuf>,
}

impl Source {
    fn resolve(&self) -> InstanceSource {
        match (&self.bif, self.tree_height) {
            (Some(path), _) => InstanceSource::Bif { path: path.clone() },
            (None, h) => InstanceSource::Tree { height: h.unwrap_or(4) },
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print N, C and the number of interventions per budget.
    Gen {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_delimiter = ',', default_value = "2,4,8")]
        budgets: Vec<usize>,
    },
    /// Run a regret sweep and write the CSV report.
    Run {
        /// key=value config file.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        budgets: Option<String>,
        #[arg(long)]
        multipliers: Option<String>,
        #[arg(long)]
        trials: Option<String>,
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        strategies: Option<String>,
        #[arg(long)]
        fix_alpha: bool,
        #[arg(long)]
        timing: bool,
        /// Extra key=value overrides, applied last.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute gamma* for one instance.
    Gamma {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        budget: usize,
        /// Seed of the random conditional-probability table.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2000)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
    },
    /// Validate a BIF file and print its structure.
    ParseBif { path: PathBuf },
}

fn run(cli: Cli) -> causal_bandit::Result<()> {
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Gen { source, budgets } => {
            let graph = Graph::load(&source.resolve())?;
            let rows = summarize(&graph, &budgets)?;
            writeln!(stdout, "instance={}", graph.label)?;
            writeln!(stdout, "N={}", graph.dag.node_count())?;
            writeln!(stdout, "C={}", graph.dag.row_count())?;
            writeln!(stdout, "targets={}", graph.targets.len())?;
            for r in rows {
                writeln!(stdout, "budget={} |A|={}", r.budget, r.arms)?;
            }
        }
        Command::Run {
            config,
            source,
            budgets,
            multipliers,
            trials,
            seed,
            strategies,
            fix_alpha,
            timing,
            overrides,
            out,
        } => {
            let mut cfg = match config {
                Some(p) => ExperimentConfig::load(&p)?,
                None => ExperimentConfig::default(),
            };
            if source.tree_height.is_some() || source.bif.is_some() {
                cfg.source = source.resolve();
            }
            let named = [
                ("budgets", budgets),
                ("multipliers", multipliers),
                ("trials", trials),
                ("seed", seed),
                ("strategies", strategies),
            ];
            for (k, v) in named {
                if let Some(v) = v {
                    cfg.set(k, &v)?;
                }
            }
            cfg.fix_alpha |= fix_alpha;
            cfg.timing |= timing;
            cfg.apply_overrides(overrides.iter().map(String::as_str))?;
            let report = run_sweep(&cfg)?;
            for (row, msg) in report.failures() {
                eprintln!(
                    "failed: strategy={} budget={} horizon={}: {msg}",
                    row.strategy, row.budget, row.horizon
                );
            }
            match out {
                Some(p) => std::fs::write(p, report.to_csv())?,
                None => stdout.write_all(report.to_csv().as_bytes())?,
            }
        }
        Command::Gamma {
            source,
            budget,
            seed,
            max_iters,
            tolerance,
        } => {
            let graph = Graph::load(&source.resolve())?;
            let structure = graph.structure(budget)?;
            let alpha = random_alpha(&graph.dag, seed);
            let instance = Instance::from_structure(structure, alpha)?;
            let solver = SolverConfig {
                max_iters,
                tolerance,
                ..SolverConfig::default()
            };
            let sol = gamma_star(&instance, &solver)?;
            let n = graph.dag.node_count();
            let arms = instance.interventions();
            let min_fixed = arms.iter().map(|a| a.fixed_count()).min().unwrap_or(0);
            writeln!(stdout, "gamma_star={:.6}", sol.value)?;
            writeln!(stdout, "lower_bound={:.6}", sol.lower_bound)?;
            writeln!(stdout, "gap={:.3e}", sol.gap)?;
            writeln!(stdout, "converged={} iterations={}", sol.converged, sol.iterations)?;
            writeln!(
                stdout,
                "prop2_bounds=[{}, {}]",
                n - min_fixed,
                (n * graph.dag.row_count()).min(n * arms.len())
            )?;
        }
        Command::ParseBif { path } => {
            let net = parse_bif(&std::fs::read_to_string(&path)?)?;
            let mapped = to_causal_dag(&net)?;
            let dag = &mapped.dag;
            writeln!(stdout, "network={}", net.name)?;
            writeln!(stdout, "variables={}", net.variable_count())?;
            writeln!(stdout, "edges={}", net.edge_count())?;
            writeln!(stdout, "C={}", dag.row_count())?;
            let targets: Vec<&str> = mapped.targets.iter().map(|&i| mapped.names[i].as_str()).collect();
            writeln!(stdout, "targets={}", targets.join(","))?;
            for n in 0..dag.node_count() {
                let parents: Vec<&str> = dag.parents(n).iter().map(|&p| mapped.names[p].as_str()).collect();
                writeln!(stdout, "{n} {} <- {}", mapped.names[n], parents.join(","))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Parameter(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
