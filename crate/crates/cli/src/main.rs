use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};

mod commands;
mod config;
mod failure;

use config::set;
use failure::Failure;

#[derive(Parser)]
#[command(name = "levy-transport", version, about = "Transportation distances between Lévy measures and related workflows")]
struct Cli {
    /// Master seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory (created if missing).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Transportation distance between two measure specs.
    Distance(DistanceArgs),
    /// Monte-Carlo table of T̃₁ between Pareto samples and their parent law.
    Table(TableArgs),
    /// Fit power-law exponents per regime and tail to a time series.
    Fit(FitArgs),
    /// Simulate one jump-diffusion path.
    Simulate(SimulateArgs),
    /// Coupled simulation of two jump diffusions driven by the same marks.
    Couple(CoupleArgs),
}

#[derive(Args)]
struct DistanceArgs {
    a: Option<PathBuf>,
    b: Option<PathBuf>,
    /// Order of the distance.
    #[arg(short, long)]
    p: Option<f64>,
    /// Absolute tolerance for numeric integration.
    #[arg(long)]
    tol: Option<f64>,
    /// Skip closed forms and integrate numerically.
    #[arg(long)]
    oracle: bool,
    /// Report ε·T₁ instead of T₁.
    #[arg(long)]
    normalized: bool,
    /// ε used by --normalized (default: the specs' common support gap).
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    epsilons: Option<Vec<f64>>,
    /// Sample size per replicate.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
}

#[derive(Args)]
struct FitArgs {
    /// CSV with one column (value) or two (time, value).
    series: Option<PathBuf>,
    /// The CSV has a header row.
    #[arg(long)]
    header: bool,
    #[arg(long, allow_hyphen_values = true)]
    s_star: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    eps_plus: Option<f64>,
    #[arg(long)]
    eps_minus: Option<f64>,
    #[arg(long)]
    alpha_min: Option<f64>,
    #[arg(long)]
    alpha_max: Option<f64>,
    #[arg(long)]
    alpha_step: Option<f64>,
    /// Drop increments starting inside the interpolation band.
    #[arg(long)]
    exclude_band: bool,
}

#[derive(Args)]
struct SimulateArgs {
    spec: Option<PathBuf>,
    /// Time horizon T.
    #[arg(long = "horizon", short = 'T')]
    horizon: Option<f64>,
    /// Drift step (default T/1000).
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Args)]
struct CoupleArgs {
    spec_a: Option<PathBuf>,
    spec_b: Option<PathBuf>,
    #[arg(long = "horizon", short = 'T')]
    horizon: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    replicates: Option<usize>,
    /// Attach the bound Δ and G(Δ) to the summary.
    #[arg(long)]
    bound: bool,
}

fn flag(on: bool) -> Option<bool> {
    on.then_some(true)
}

fn overlay(cli: &Cli) -> Value {
    let mut o = Value::Object(Map::new());
    set(&mut o, &["seed"], cli.seed);
    set(&mut o, &["threads"], cli.threads);
    set(&mut o, &["out"], cli.out.clone());
    match &cli.command {
        Command::Distance(a) => {
            set(&mut o, &["distance", "a"], a.a.clone());
            set(&mut o, &["distance", "b"], a.b.clone());
            set(&mut o, &["distance", "p"], a.p);
            set(&mut o, &["distance", "tol"], a.tol);
            set(&mut o, &["distance", "oracle"], flag(a.oracle));
            set(&mut o, &["distance", "normalized"], flag(a.normalized));
            set(&mut o, &["distance", "eps"], a.eps);
        }
        Command::Table(a) => {
            set(&mut o, &["table", "alphas"], a.alphas.clone());
            set(&mut o, &["table", "epsilons"], a.epsilons.clone());
            set(&mut o, &["table", "n"], a.n);
            set(&mut o, &["table", "reps"], a.reps);
        }
        Command::Fit(a) => {
            set(&mut o, &["fit", "series"], a.series.clone());
            set(&mut o, &["fit", "header"], flag(a.header));
            set(&mut o, &["fit", "regime", "s_star"], a.s_star);
            set(&mut o, &["fit", "regime", "delta"], a.delta);
            set(&mut o, &["fit", "regime", "eps_plus"], a.eps_plus);
            set(&mut o, &["fit", "regime", "eps_minus"], a.eps_minus);
            set(&mut o, &["fit", "regime", "alpha_grid", "lo"], a.alpha_min);
            set(&mut o, &["fit", "regime", "alpha_grid", "hi"], a.alpha_max);
            set(&mut o, &["fit", "regime", "alpha_grid", "step"], a.alpha_step);
            set(&mut o, &["fit", "regime", "exclude_band"], flag(a.exclude_band));
        }
        Command::Simulate(a) => {
            set(&mut o, &["simulate", "spec"], a.spec.clone());
            set(&mut o, &["simulate", "horizon"], a.horizon);
            set(&mut o, &["simulate", "dt"], a.dt);
        }
        Command::Couple(a) => {
            set(&mut o, &["couple", "spec_a"], a.spec_a.clone());
            set(&mut o, &["couple", "spec_b"], a.spec_b.clone());
            set(&mut o, &["couple", "horizon"], a.horizon);
            set(&mut o, &["couple", "dt"], a.dt);
            set(&mut o, &["couple", "replicates"], a.replicates);
            set(&mut o, &["couple", "bound"], flag(a.bound));
        }
    }
    o
}

fn run(cli: Cli) -> Result<(), Failure> {
    let file = cli.config.as_deref().map(config::load_file).transpose()?;
    let cfg = config::resolve(file, overlay(&cli))?;
    if let Some(n) = cfg.threads {
        if n == 0 {
            return Err(Failure::validation("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::validation(format!("thread pool: {e}")))?;
    }
    std::fs::create_dir_all(&cfg.out)
        .map_err(|e| Failure::io(format!("{}: {e}", cfg.out.display())))?;
    commands::write_json(&cfg.out.join("config.json"), &cfg)?;
    match cli.command {
        Command::Distance(_) => commands::distance(&cfg),
        Command::Table(_) => commands::table(&cfg),
        Command::Fit(_) => commands::fit(&cfg),
        Command::Simulate(_) => commands::simulate(&cfg),
        Command::Couple(_) => commands::couple(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
