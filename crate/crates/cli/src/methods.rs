//! Uniform entry point over the solver and the baselines.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use slr_core::{
    am_multistart, brute_force, objective_f, preprocess, recover_signal, solve, solve_1d,
    BnbConfig, Error, Permutation, ProblemInstance, Status,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Certified branch-and-bound.
    Ccvmin,
    /// Multi-start alternating minimization.
    Am,
    /// Exhaustive search, m <= 9.
    Oracle,
    /// Exact sorting solver, n = 1.
    Solve1d,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Ccvmin => "ccvmin",
            Method::Am => "am",
            Method::Oracle => "oracle",
            Method::Solve1d => "solve1d",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodParams {
    pub delta: f64,
    pub max_nodes: u64,
    pub time_limit: Option<Duration>,
    pub am_restarts: usize,
    pub seed: u64,
    pub parallel_children: bool,
}

impl Default for MethodParams {
    fn default() -> Self {
        let bnb = BnbConfig::default();
        Self {
            delta: bnb.delta,
            max_nodes: bnb.max_nodes,
            time_limit: bnb.time_limit,
            am_restarts: 10,
            seed: 0,
            parallel_children: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodOutcome {
    pub pi: Permutation,
    pub x_hat: Vec<f64>,
    pub f_value: f64,
    /// Certified optimality gap; `None` for heuristics.
    pub gap: Option<f64>,
    pub lower_bound: Option<f64>,
    pub status: &'static str,
    /// The run stopped on a node or time limit.
    pub limited: bool,
    pub nodes_explored: Option<u64>,
    pub nodes_pruned: Option<u64>,
    pub am_calls: Option<u64>,
    pub wall_time: Duration,
}

pub fn run_method(
    method: Method,
    inst: &ProblemInstance,
    params: &MethodParams,
) -> Result<MethodOutcome, Error> {
    let start = Instant::now();
    let exact = |pi: Permutation, x_hat: Vec<f64>, f_value: f64, status| MethodOutcome {
        pi,
        x_hat,
        f_value,
        gap: Some(0.0),
        lower_bound: Some(f_value),
        status,
        limited: false,
        nodes_explored: None,
        nodes_pruned: None,
        am_calls: None,
        wall_time: start.elapsed(),
    };
    match method {
        Method::Ccvmin => {
            let config = BnbConfig {
                delta: params.delta,
                max_nodes: params.max_nodes,
                time_limit: params.time_limit,
                parallel_children: params.parallel_children,
                ..BnbConfig::default()
            };
            let sol = solve(inst, &config)?;
            Ok(MethodOutcome {
                limited: matches!(sol.status, Status::NodeLimit | Status::TimeLimit),
                status: sol.status.as_str(),
                pi: sol.pi_hat,
                x_hat: sol.x_hat,
                f_value: sol.f_value,
                gap: Some(sol.gap),
                lower_bound: Some(sol.lower_bound),
                nodes_explored: Some(sol.stats.nodes_explored),
                nodes_pruned: Some(sol.stats.nodes_pruned),
                am_calls: Some(sol.stats.am_calls),
                wall_time: sol.stats.wall_time,
            })
        }
        Method::Am => {
            let run = am_multistart(inst, params.am_restarts, params.seed)?;
            let prep = preprocess(inst, slr_core::linalg::DEFAULT_RANK_TOL)?;
            let x_hat = recover_signal(&run.pi, inst, &prep)?;
            Ok(MethodOutcome {
                pi: run.pi,
                x_hat,
                f_value: run.value,
                gap: None,
                lower_bound: None,
                status: "heuristic",
                limited: false,
                nodes_explored: None,
                nodes_pruned: None,
                am_calls: Some(params.am_restarts as u64 + 1),
                wall_time: start.elapsed(),
            })
        }
        Method::Oracle => {
            let o = brute_force(inst)?;
            Ok(exact(o.pi_star, o.x_star, o.f_star, "optimal"))
        }
        Method::Solve1d => {
            if inst.n() != 1 {
                return Err(Error::InvalidInput(format!(
                    "solve1d needs n = 1, got n = {}",
                    inst.n()
                )));
            }
            let s = solve_1d(inst.y(), &inst.a().col(0))?;
            let prep = preprocess(inst, slr_core::linalg::DEFAULT_RANK_TOL)?;
            let f = objective_f(&s.pi, &prep)?;
            Ok(exact(s.pi, vec![s.x], f, "optimal"))
        }
    }
}
