use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;
use slr_cli::{
    generate, relative_error, residual_error, run_bench, run_method, BenchConfig, InstanceDoc,
    Method, MethodParams, SyntheticSpec,
};

#[derive(Parser)]
#[command(
    name = "slr",
    version,
    about = "Linear regression with shuffled labels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic instance as JSON.
    Gen {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        /// Fraction of shuffled rows.
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Signal-to-noise ratio in dB, or `inf` for no noise.
        #[arg(long = "snr-db", default_value_t = f64::INFINITY)]
        snr_db: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve an instance file and print or write the solution as JSON.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Ccvmin)]
        method: Method,
        #[arg(long, default_value_t = 1e-6)]
        delta: f64,
        /// Wall-clock limit in seconds.
        #[arg(long = "time-limit")]
        time_limit: Option<f64>,
        #[arg(long = "max-nodes", default_value_t = 10_000_000)]
        max_nodes: u64,
        /// Random restarts for `am`.
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a benchmark sweep described by a TOML file and write CSV.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct SolveReport {
    method: &'static str,
    status: &'static str,
    x_hat: Vec<f64>,
    pi_hat: Vec<usize>,
    f_value: f64,
    lower_bound: Option<f64>,
    gap: Option<f64>,
    residual_error: f64,
    rel_error: Option<f64>,
    nodes_explored: Option<u64>,
    nodes_pruned: Option<u64>,
    am_calls: Option<u64>,
    wall_time_s: f64,
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Returns whether the run stopped on a limit.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Gen {
            m,
            n,
            alpha,
            snr_db,
            seed,
            out,
        } => {
            let spec = SyntheticSpec {
                m,
                n,
                alpha,
                snr_db,
                seed,
            };
            let (inst, truth) = generate(&spec)?;
            InstanceDoc::from_instance(&inst, Some(truth)).write(&out)?;
            Ok(false)
        }
        Command::Solve {
            instance,
            method,
            delta,
            time_limit,
            max_nodes,
            restarts,
            seed,
            out,
        } => {
            let doc = InstanceDoc::read(&instance)?;
            let inst = doc.to_instance()?;
            let time_limit = match time_limit {
                Some(t) if !(t >= 0.0 && t.is_finite()) => {
                    bail!("--time-limit must be a non-negative number")
                }
                t => t.map(Duration::from_secs_f64),
            };
            let params = MethodParams {
                delta,
                max_nodes,
                time_limit,
                am_restarts: restarts,
                seed,
                parallel_children: false,
            };
            let o = run_method(method, &inst, &params)?;
            let rel_error = match &doc.ground_truth {
                Some(g) => Some(relative_error(&o.x_hat, &g.x_star)?),
                None => None,
            };
            let report = SolveReport {
                method: method.as_str(),
                status: o.status,
                residual_error: residual_error(&o.x_hat, &inst)?,
                x_hat: o.x_hat,
                pi_hat: o.pi.into_vec(),
                f_value: o.f_value,
                lower_bound: o.lower_bound,
                gap: o.gap,
                rel_error,
                nodes_explored: o.nodes_explored,
                nodes_pruned: o.nodes_pruned,
                am_calls: o.am_calls,
                wall_time_s: o.wall_time.as_secs_f64(),
            };
            let mut w = output(out.as_ref())?;
            serde_json::to_writer_pretty(&mut w, &report)?;
            writeln!(w)?;
            w.flush()?;
            Ok(o.limited)
        }
        Command::Bench { config, out } => {
            let text = std::fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let config = BenchConfig::parse(&text)?;
            run_bench(&config, output(out.as_ref())?)?;
            Ok(false)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
