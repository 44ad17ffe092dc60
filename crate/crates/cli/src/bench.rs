//! Benchmark sweeps: a TOML grid in, one CSV row per (cell, trial, method) out.
//!
//! ```toml
//! seed = 7
//! trials = 10
//! methods = ["ccvmin", "am"]
//! delta = 1e-6            # optional
//! max_nodes = 1000000     # optional
//! time_limit_s = 60.0     # optional, per solve
//! am_restarts = 10        # optional
//! record_wall_time = true # optional; false leaves wall_time_s empty
//! parallel = false        # optional; run trials concurrently
//!
//! [grid]
//! m = [100]
//! n = [3]
//! alpha = [1.0]
//! snr_db = [10.0, 20.0, 30.0, 40.0, inf]
//! ```
//!
//! Cells are the cartesian product of the grid lists, iterated in the order
//! `m, n, alpha, snr_db`. Rows are ordered by cell, then trial, then the
//! listed method order, whatever `parallel` says. A failing method yields a
//! row with a non-optimal status instead of aborting the sweep.

use std::io::Write;
use std::time::Duration;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::Deserialize;
use slr_core::{Error as CoreError, ProblemInstance};

use crate::instance::GroundTruth;
use crate::methods::{run_method, Method, MethodOutcome, MethodParams};
use crate::metrics::{relative_error, residual_error};
use crate::synth::{generate, SyntheticSpec};

pub const CSV_HEADER: [&str; 13] = [
    "m",
    "n",
    "alpha",
    "snr_db",
    "seed",
    "method",
    "rel_error",
    "residual_error",
    "f_value",
    "gap",
    "status",
    "nodes_explored",
    "wall_time_s",
];

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub methods: Vec<Method>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub max_nodes: Option<u64>,
    #[serde(default)]
    pub time_limit_s: Option<f64>,
    #[serde(default = "default_restarts")]
    pub am_restarts: usize,
    #[serde(default = "default_true")]
    pub record_wall_time: bool,
    #[serde(default)]
    pub parallel: bool,
    pub grid: Grid,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub m: Vec<usize>,
    pub n: Vec<usize>,
    pub alpha: Vec<f64>,
    pub snr_db: Vec<f64>,
}

fn default_trials() -> usize {
    1
}

fn default_delta() -> f64 {
    MethodParams::default().delta
}

fn default_restarts() -> usize {
    MethodParams::default().am_restarts
}

fn default_true() -> bool {
    true
}

#[derive(Debug, thiserror::Error)]
#[error("invalid bench config: {0}")]
pub struct ConfigError(String);

impl BenchConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let config: BenchConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        if config.delta.is_nan() || config.delta <= 0.0 {
            return Err(ConfigError(format!(
                "field `delta` must be positive, got {}",
                config.delta
            )));
        }
        if let Some(t) = config.time_limit_s {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(ConfigError(format!(
                    "field `time_limit_s` must be a non-negative number, got {t}"
                )));
            }
        }
        Ok(config)
    }

    fn params(&self, seed: u64) -> MethodParams {
        let defaults = MethodParams::default();
        MethodParams {
            delta: self.delta,
            max_nodes: self.max_nodes.unwrap_or(defaults.max_nodes),
            time_limit: self.time_limit_s.map(Duration::from_secs_f64),
            am_restarts: self.am_restarts,
            seed,
            parallel_children: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub m: usize,
    pub n: usize,
    pub alpha: f64,
    pub snr_db: f64,
}

pub fn cells(grid: &Grid) -> Vec<Cell> {
    let mut out = Vec::new();
    for &m in &grid.m {
        for &n in &grid.n {
            for &alpha in &grid.alpha {
                for &snr_db in &grid.snr_db {
                    out.push(Cell {
                        m,
                        n,
                        alpha,
                        snr_db,
                    });
                }
            }
        }
    }
    out
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trial seed; depends on the cell's values, not its position in the grid.
pub fn trial_seed(base: u64, cell: &Cell, trial: usize) -> u64 {
    [
        cell.m as u64,
        cell.n as u64,
        cell.alpha.to_bits(),
        cell.snr_db.to_bits(),
        trial as u64,
    ]
    .iter()
    .fold(splitmix64(base), |acc, &v| splitmix64(acc ^ v))
}

/// One output row, already formatted.
pub type Row = [String; 13];

/// Shortest round-trip decimal, switching to exponent form outside
/// `[1e-4, 1e16)` so tiny errors stay readable.
pub fn fmt_float(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e16).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn fmt_opt_float(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

fn row_for(
    cell: &Cell,
    seed: u64,
    method: Method,
    outcome: std::result::Result<(MethodOutcome, Option<f64>, Option<f64>), String>,
    record_wall_time: bool,
) -> Row {
    let head = [
        cell.m.to_string(),
        cell.n.to_string(),
        fmt_float(cell.alpha),
        fmt_float(cell.snr_db),
        seed.to_string(),
        method.as_str().to_string(),
    ];
    let tail: [String; 7] = match outcome {
        Ok((o, rel, res)) => [
            fmt_opt_float(rel),
            fmt_opt_float(res),
            fmt_float(o.f_value),
            fmt_opt_float(o.gap),
            o.status.to_string(),
            o.nodes_explored.map(|k| k.to_string()).unwrap_or_default(),
            if record_wall_time {
                format!("{:.6}", o.wall_time.as_secs_f64())
            } else {
                String::new()
            },
        ],
        Err(status) => [
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            status,
            String::new(),
            String::new(),
        ],
    };
    let mut row: Row = Default::default();
    for (dst, src) in row.iter_mut().zip(head.into_iter().chain(tail)) {
        *dst = src;
    }
    row
}

fn evaluate(
    method: Method,
    inst: &ProblemInstance,
    truth: &GroundTruth,
    params: &MethodParams,
) -> std::result::Result<(MethodOutcome, Option<f64>, Option<f64>), String> {
    match run_method(method, inst, params) {
        Ok(o) => {
            let rel = relative_error(&o.x_hat, &truth.x_star).ok();
            let res = residual_error(&o.x_hat, inst).ok();
            Ok((o, rel, res))
        }
        Err(CoreError::TooLarge { .. }) => Err("refused".into()),
        Err(CoreError::InvalidInput(_)) if method == Method::Solve1d => Err("unsupported".into()),
        Err(_) => Err("error".into()),
    }
}

fn trial_rows(config: &BenchConfig, cell: &Cell, trial: usize) -> Vec<Row> {
    let seed = trial_seed(config.seed, cell, trial);
    let spec = SyntheticSpec {
        m: cell.m,
        n: cell.n,
        alpha: cell.alpha,
        snr_db: cell.snr_db,
        seed,
    };
    let generated = generate(&spec);
    let params = config.params(seed);
    config
        .methods
        .iter()
        .map(|&method| {
            let outcome = match &generated {
                Ok((inst, truth)) => evaluate(method, inst, truth, &params),
                Err(_) => Err("invalid-cell".into()),
            };
            row_for(cell, seed, method, outcome, config.record_wall_time)
        })
        .collect()
}

/// Runs the whole sweep and returns the rows in their canonical order.
pub fn run_rows(config: &BenchConfig) -> Vec<Row> {
    let tasks: Vec<(Cell, usize)> = cells(&config.grid)
        .into_iter()
        .flat_map(|c| (0..config.trials).map(move |t| (c, t)))
        .collect();
    let per_task: Vec<Vec<Row>> = if config.parallel {
        tasks
            .par_iter()
            .map(|(c, t)| trial_rows(config, c, *t))
            .collect()
    } else {
        tasks
            .iter()
            .map(|(c, t)| trial_rows(config, c, *t))
            .collect()
    };
    per_task.into_iter().flatten().collect()
}

/// Runs the sweep, streaming CSV to `out` (header always written).
pub fn run_bench<W: Write>(config: &BenchConfig, out: W) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    writer.write_record(CSV_HEADER)?;
    if config.parallel {
        for row in run_rows(config) {
            writer.write_record(&row)?;
        }
    } else {
        for cell in cells(&config.grid) {
            for trial in 0..config.trials {
                for row in trial_rows(config, &cell, trial) {
                    writer.write_record(&row)?;
                }
                writer.flush()?;
            }
        }
    }
    writer.flush().context("flushing CSV output")?;
    Ok(())
}
