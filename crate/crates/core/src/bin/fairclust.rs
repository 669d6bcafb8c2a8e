use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use fairclust::error::Error;
use fairclust::experiment::{run_audit, run_compare, run_solve, thread_pool, ExperimentConfig, RunOutput};
use fairclust::generators::{generate_figure_instance, FigureId, FigureParams};
use fairclust::oracle::oracle_equivalence;
use fairclust::search::SolveOptions;

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_BUDGET: u8 = 4;

/// Exact fair clustering on small instances.
///
/// Exit codes: 0 ok, 1 I/O or self-test failure, 2 invalid parameters or
/// usage, 3 infeasible, 4 search budget exceeded.
#[derive(Parser)]
#[command(name = "fairclust", version)]
struct Cli {
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; for `generate`, the instance file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    budget_nodes: Option<u64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a figure instance as JSON.
    Generate {
        #[arg(long)]
        figure: FigureId,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long = "R")]
        big_r: Option<f64>,
        #[arg(long = "Rp")]
        r_prime: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        r1: Option<f64>,
        #[arg(long)]
        r2: Option<f64>,
        #[arg(long)]
        s: Option<f64>,
    },
    /// Solve each configured notion exactly.
    Solve {
        #[arg(long)]
        k: Option<usize>,
    },
    /// Welfare comparison across notions.
    Compare {
        #[arg(long)]
        k: Option<usize>,
        /// Report every co-optimal clustering as its own row.
        #[arg(long)]
        enumerate_optima: bool,
    },
    /// Outlier and separability audit against the agnostic optimum.
    Audit {
        #[arg(long)]
        k: Option<usize>,
    },
    /// Check the exact solvers against brute force on random instances.
    Selftest {
        #[arg(long, default_value_t = 200)]
        cases: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Infeasible) => EXIT_INFEASIBLE,
        Some(Error::BudgetExceeded { .. }) => EXIT_BUDGET,
        Some(Error::Io(io)) if io.kind() != std::io::ErrorKind::NotFound => EXIT_FAILURE,
        Some(_) => EXIT_USAGE,
        None => EXIT_USAGE,
    }
}

fn load_config(cli: &Cli, k: Option<usize>) -> anyhow::Result<ExperimentConfig> {
    let Some(path) = &cli.config else {
        bail!(Error::InvalidParams("this command needs --config".into()));
    };
    let mut config = ExperimentConfig::read(path).with_context(|| format!("reading {}", path.display()))?;
    if let Some(out) = &cli.out {
        config.output_dir = out.clone();
    }
    if let Some(b) = cli.budget_nodes {
        config.budget_nodes = b;
    }
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    if let Some(t) = cli.tol {
        config.tol = t;
    }
    if k.is_some() {
        config.k = k;
    }
    Ok(config)
}

fn print_files(out: &RunOutput) {
    for f in &out.files {
        println!("{}", f.display());
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match &cli.command {
        Command::Generate { figure, r, n, m, eps, big_r, r_prime, c, r1, r2, s } => {
            let params = FigureParams {
                r: *r,
                n: *n,
                m: *m,
                eps: *eps,
                big_r: *big_r,
                r_prime: *r_prime,
                c: *c,
                r1: *r1,
                r2: *r2,
                s: *s,
            };
            let inst = generate_figure_instance(*figure, &params)?;
            let path = cli.out.clone().unwrap_or_else(|| PathBuf::from(format!("{}.json", figure.name())));
            inst.write(&path)?;
            println!("{}", path.display());
            println!("{}: n={} facilities={} colors={}", figure.name(), inst.n(), inst.n_facilities(), inst.n_colors());
        }
        Command::Solve { k } => {
            let config = load_config(&cli, *k)?;
            let out = run_solve(&config)?;
            print_files(&out);
        }
        Command::Compare { k, enumerate_optima } => {
            let mut config = load_config(&cli, *k)?;
            config.enumerate_optima |= *enumerate_optima;
            let (out, cmp) = run_compare(&config)?;
            print_files(&out);
            for row in &cmp.rows {
                println!(
                    "{}#{}: cost={} pof={} min_group_welfare={}",
                    row.notion, row.variant, row.objective_value, row.pof, row.min_group_welfare
                );
            }
        }
        Command::Audit { k } => {
            let config = load_config(&cli, *k)?;
            let (out, report) = run_audit(&config)?;
            print_files(&out);
            for e in &report.entries {
                if let Some(conf) = &e.confusion {
                    println!("{}: false_positives={} false_negatives={}", e.notion, conf.false_positives(), conf.false_negatives());
                }
            }
        }
        Command::Selftest { cases } => {
            let seed = cli.seed.unwrap_or(1);
            let tol = cli.tol.unwrap_or(1e-9);
            let opts = cli.budget_nodes.map_or_else(SolveOptions::default, SolveOptions::with_budget);
            let pool = thread_pool()?;
            let report = pool.install(|| oracle_equivalence(seed, *cases, tol, &opts))?;
            println!(
                "selftest seed={} cases={} comparisons={} mismatches={}",
                report.seed,
                report.cases,
                report.comparisons,
                report.mismatches.len()
            );
            for m in &report.mismatches {
                println!("  {m}");
            }
            if !report.passed() {
                return Ok(EXIT_FAILURE);
            }
        }
    }
    Ok(0)
}
