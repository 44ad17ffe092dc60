//! Best-first branch-and-bound over the initial rectangle.
//!
//! Each node is a box in `z`-space with a lower bound from [`lower_bound_with`].
//! The assignment witness of every bound is a permutation, hence an upper
//! bound; witnesses that improve the incumbent are refined by alternating
//! minimization. A node is discarded once its bound reaches `q_u − δ`, and
//! the search stops with a certificate when the smallest open bound does.

use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::collections::{BinaryHeap, HashSet};
use std::hash::{Hash, Hasher};
use std::time::{Duration, Instant};

use crate::assignment::Permutation;
use crate::bounds::{
    alternating_minimization, lower_bound_with, BoundBackend, DEFAULT_AM_MAX_ITERS,
    DEFAULT_AM_REL_TOL,
};
use crate::error::{Error, Result};
use crate::linalg::DEFAULT_RANK_TOL;
use crate::problem::{
    initial_rectangle, objective_f, preprocess, recover_signal, residual_norm, Preprocessed,
    ProblemInstance, Rectangle,
};

/// Coordinates at most this wide are never split.
pub const MIN_SPLIT_WIDTH: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct BnbConfig {
    /// Absolute optimality tolerance on `f ∈ [−1, 0]`.
    pub delta: f64,
    pub max_nodes: u64,
    pub time_limit: Option<Duration>,
    /// Run alternating minimization only on witnesses that beat the incumbent.
    pub am_on_improvement_only: bool,
    pub bound_backend: BoundBackend,
    /// Bound the two children of a split concurrently.
    pub parallel_children: bool,
    pub rank_tol: f64,
    pub am_max_iters: usize,
    pub am_rel_tol: f64,
}

impl Default for BnbConfig {
    fn default() -> Self {
        Self {
            delta: 1e-6,
            max_nodes: 10_000_000,
            time_limit: None,
            am_on_improvement_only: true,
            bound_backend: BoundBackend::RankOneSort,
            parallel_children: false,
            rank_tol: DEFAULT_RANK_TOL,
            am_max_iters: DEFAULT_AM_MAX_ITERS,
            am_rel_tol: DEFAULT_AM_REL_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    /// `gap ≤ delta` is certified.
    Optimal,
    NodeLimit,
    TimeLimit,
    /// Every box shrank below [`MIN_SPLIT_WIDTH`] without closing the gap.
    Stalled,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::NodeLimit => "node-limit",
            Status::TimeLimit => "time-limit",
            Status::Stalled => "stalled",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SearchStats {
    /// Nodes selected from the queue and split.
    pub nodes_explored: u64,
    /// Nodes whose lower bound was computed, root included.
    pub nodes_bounded: u64,
    pub nodes_pruned: u64,
    pub am_calls: u64,
    pub max_depth: usize,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BnbNode {
    pub rect: Rectangle,
    pub bound: f64,
    pub witness: Permutation,
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub pi_hat: Permutation,
    pub x_hat: Vec<f64>,
    pub f_value: f64,
    /// `‖Π̂ y − A x̂‖₂`.
    pub residual: f64,
    /// Certified lower bound on the global minimum of `f`.
    pub lower_bound: f64,
    /// `f_value − lower_bound`, clamped at zero.
    pub gap: f64,
    pub status: Status,
    pub stats: SearchStats,
}

/// Progress notifications for instrumentation and tests.
#[derive(Debug)]
pub enum SearchEvent<'a> {
    /// A node received its lower bound.
    Bounded(&'a BnbNode),
    /// A node was selected from the queue and split.
    Expanded(&'a BnbNode),
    /// A node was discarded against the incumbent value `incumbent`.
    Pruned { node: &'a BnbNode, incumbent: f64 },
    /// The incumbent improved.
    Incumbent { value: f64 },
    /// Start of an iteration: the certified interval `[lower, upper]` on `f*`.
    Iteration { lower: f64, upper: f64 },
}

/// Splits the widest coordinate at its midpoint (lowest index on ties).
pub fn bisect(rect: &Rectangle) -> Result<(Rectangle, Rectangle)> {
    let mut axis = None;
    let mut widest = MIN_SPLIT_WIDTH;
    for i in 0..rect.dim() {
        let w = rect.width(i);
        if w > widest {
            widest = w;
            axis = Some(i);
        }
    }
    let axis = axis.ok_or(Error::DegenerateSplit)?;
    let mid = 0.5 * (rect.lo()[axis] + rect.hi()[axis]);
    let mut left_hi = rect.hi().to_vec();
    left_hi[axis] = mid;
    let mut right_lo = rect.lo().to_vec();
    right_lo[axis] = mid;
    Ok((
        Rectangle::from_parts_unchecked(rect.lo().to_vec(), left_hi),
        Rectangle::from_parts_unchecked(right_lo, rect.hi().to_vec()),
    ))
}

pub fn solve(inst: &ProblemInstance, config: &BnbConfig) -> Result<Solution> {
    solve_observed(inst, config, &mut |_| {})
}

pub fn solve_observed(
    inst: &ProblemInstance,
    config: &BnbConfig,
    observer: &mut dyn FnMut(SearchEvent<'_>),
) -> Result<Solution> {
    if config.delta.is_nan() || config.delta <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "delta must be positive, got {}",
            config.delta
        )));
    }
    let start = Instant::now();
    let prep = preprocess(inst, config.rank_tol)?;
    let mut search = Search::new(inst, &prep, config, observer);

    let root_rect = initial_rectangle(&prep);
    let root_lb = lower_bound_with(&root_rect, &prep, config.bound_backend);
    let root = BnbNode {
        rect: root_rect,
        bound: root_lb.bound,
        witness: root_lb.witness,
        depth: 0,
    };
    search.stats.nodes_bounded = 1;
    (search.observer)(SearchEvent::Bounded(&root));
    search.offer(&root.witness)?;
    search.admit(root);

    let status = loop {
        let Some(entry) = search.open.pop() else {
            break None;
        };
        let node = entry.node;
        (search.observer)(SearchEvent::Iteration {
            lower: node.bound.min(search.floor),
            upper: search.incumbent_value,
        });
        if node.bound >= search.incumbent_value - config.delta {
            search.floor = search.floor.min(node.bound);
            break None;
        }
        if search.stats.nodes_explored >= config.max_nodes {
            search.floor = search.floor.min(node.bound);
            break Some(Status::NodeLimit);
        }
        if config.time_limit.is_some_and(|t| start.elapsed() >= t) {
            search.floor = search.floor.min(node.bound);
            break Some(Status::TimeLimit);
        }
        let Ok((left, right)) = bisect(&node.rect) else {
            search.floor = search.floor.min(node.bound);
            continue;
        };
        search.stats.nodes_explored += 1;
        (search.observer)(SearchEvent::Expanded(&node));

        let (lb_left, lb_right) = if config.parallel_children {
            rayon::join(
                || lower_bound_with(&left, &prep, config.bound_backend),
                || lower_bound_with(&right, &prep, config.bound_backend),
            )
        } else {
            (
                lower_bound_with(&left, &prep, config.bound_backend),
                lower_bound_with(&right, &prep, config.bound_backend),
            )
        };
        search.stats.nodes_bounded += 2;
        let depth = node.depth + 1;
        search.stats.max_depth = search.stats.max_depth.max(depth);
        // a sub-box inherits its parent's bound
        let children = [(left, lb_left), (right, lb_right)].map(|(rect, lb)| BnbNode {
            rect,
            bound: lb.bound.max(node.bound),
            witness: lb.witness,
            depth,
        });
        for child in &children {
            (search.observer)(SearchEvent::Bounded(child));
            search.offer(&child.witness)?;
        }
        for child in children {
            search.admit(child);
        }
    };

    // drain whatever is still open into the certified lower bound
    while let Some(entry) = search.open.pop() {
        search.floor = search.floor.min(entry.node.bound);
    }
    let lower_bound = search.floor.min(search.incumbent_value);
    let gap = (search.incumbent_value - lower_bound).max(0.0);
    let status = status.unwrap_or(if gap <= config.delta {
        Status::Optimal
    } else {
        Status::Stalled
    });

    let pi_hat = search.incumbent.clone();
    let f_value = search.incumbent_value;
    let mut stats = std::mem::take(&mut search.stats);
    drop(search);
    let x_hat = recover_signal(&pi_hat, inst, &prep)?;
    let residual = residual_norm(&pi_hat, inst, &x_hat)?;
    stats.wall_time = start.elapsed();
    Ok(Solution {
        pi_hat,
        x_hat,
        f_value,
        residual,
        lower_bound,
        gap,
        status,
        stats,
    })
}

struct OpenNode {
    node: BnbNode,
    seq: u64,
}

impl PartialEq for OpenNode {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OpenNode {}

impl PartialOrd for OpenNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OpenNode {
    // max-heap: smallest bound first, then oldest
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .node
            .bound
            .total_cmp(&self.node.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Search<'a, 'o> {
    inst: &'a ProblemInstance,
    prep: &'a Preprocessed,
    config: &'a BnbConfig,
    observer: &'o mut dyn FnMut(SearchEvent<'_>),
    open: BinaryHeap<OpenNode>,
    seq: u64,
    incumbent: Permutation,
    incumbent_value: f64,
    /// Smallest bound among nodes removed from the queue without a split.
    floor: f64,
    refined: HashSet<u64>,
    stats: SearchStats,
}

impl<'a, 'o> Search<'a, 'o> {
    fn new(
        inst: &'a ProblemInstance,
        prep: &'a Preprocessed,
        config: &'a BnbConfig,
        observer: &'o mut dyn FnMut(SearchEvent<'_>),
    ) -> Self {
        Self {
            inst,
            prep,
            config,
            observer,
            open: BinaryHeap::new(),
            seq: 0,
            incumbent: Permutation::identity(inst.m()),
            incumbent_value: f64::INFINITY,
            floor: f64::INFINITY,
            refined: HashSet::new(),
            stats: SearchStats::default(),
        }
    }

    /// Uses a witness as an upper bound, refining it when the policy says so.
    fn offer(&mut self, witness: &Permutation) -> Result<()> {
        let value = objective_f(witness, self.prep)?;
        let improves = value < self.incumbent_value;
        if improves {
            self.set_incumbent(witness.clone(), value);
        }
        if (improves || !self.config.am_on_improvement_only)
            && self.refined.insert(fingerprint(witness))
        {
            self.stats.am_calls += 1;
            let am = alternating_minimization(
                witness,
                self.inst,
                self.prep,
                self.config.am_max_iters,
                self.config.am_rel_tol,
            )?;
            if am.value < self.incumbent_value {
                self.set_incumbent(am.pi, am.value);
            }
        }
        Ok(())
    }

    fn set_incumbent(&mut self, pi: Permutation, value: f64) {
        self.incumbent = pi;
        self.incumbent_value = value;
        (self.observer)(SearchEvent::Incumbent { value });
    }

    fn admit(&mut self, node: BnbNode) {
        if node.bound >= self.incumbent_value - self.config.delta {
            self.stats.nodes_pruned += 1;
            self.floor = self.floor.min(node.bound);
            (self.observer)(SearchEvent::Pruned {
                node: &node,
                incumbent: self.incumbent_value,
            });
        } else {
            self.seq += 1;
            self.open.push(OpenNode {
                node,
                seq: self.seq,
            });
        }
    }
}

fn fingerprint(pi: &Permutation) -> u64 {
    let mut h = DefaultHasher::new();
    pi.as_slice().hash(&mut h);
    h.finish()
}
