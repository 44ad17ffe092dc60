//! Lower bounds from the convex envelope of `g(z) = −Σ z_i²` over a box, and
//! upper bounds from alternating minimization.
//!
//! Over `[l, u]` the envelope of `g` is affine, `Σ l_i u_i − Σ (l_i + u_i) z_i`.
//! Minimizing it over the image of the Birkhoff polytope (the box constraint
//! is dropped) is a linear assignment problem with rank-one gains
//! `c_k · ȳ_j`, where `c = Σ_i (l_i + u_i) u_i`.

use crate::assignment::{lap_max, match_1d, rank_one_lap_max_presorted, CostMatrix, Permutation};
use crate::error::Result;
use crate::linalg::dot;
use crate::problem::{objective_f, Preprocessed, ProblemInstance, Rectangle};

pub const DEFAULT_AM_MAX_ITERS: usize = 100;
pub const DEFAULT_AM_REL_TOL: f64 = 1e-9;

/// Which assignment solver evaluates the lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundBackend {
    /// Sorting, `O(m log m)`.
    #[default]
    RankOneSort,
    /// Dense Jonker-Volgenant on the materialized `m × m` gains, `O(m³)`.
    GeneralLap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundResult {
    /// Valid lower bound of `f` over the permutations whose `z` lies in the box.
    pub bound: f64,
    /// Assignment argmax.
    pub witness: Permutation,
    /// Optimal value of the relaxed envelope program (equal to `bound`).
    pub envelope_min: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpperBoundResult {
    pub pi: Permutation,
    /// `f(pi)`.
    pub value: f64,
    pub iterations: usize,
    /// `‖Π y − A x‖` after each signal update, starting from the initial permutation.
    pub residuals: Vec<f64>,
}

/// Convex envelope of `−Σ z_i²` over `rect`, evaluated at `z`.
pub fn envelope_value(rect: &Rectangle, z: &[f64]) -> f64 {
    rect.lo()
        .iter()
        .zip(rect.hi())
        .zip(z)
        .map(|((l, u), zi)| l * u - (l + u) * zi)
        .sum()
}

pub fn lower_bound(rect: &Rectangle, prep: &Preprocessed) -> LowerBoundResult {
    lower_bound_with(rect, prep, BoundBackend::RankOneSort)
}

pub fn lower_bound_with(
    rect: &Rectangle,
    prep: &Preprocessed,
    backend: BoundBackend,
) -> LowerBoundResult {
    let m = prep.m();
    let mut c = vec![0.0; m];
    let mut constant = 0.0;
    for i in 0..rect.dim() {
        let (l, u) = (rect.lo()[i], rect.hi()[i]);
        constant += l * u;
        let w = l + u;
        if w != 0.0 {
            for (ck, uk) in c.iter_mut().zip(prep.basis(i)) {
                *ck += w * uk;
            }
        }
    }
    let (witness, best) = match backend {
        BoundBackend::RankOneSort => rank_one_lap_max_presorted(&c, prep.y_bar(), prep.y_order()),
        BoundBackend::GeneralLap => {
            let cost = CostMatrix::rank_one(&c, prep.y_bar()).expect("finite rank-one gains");
            lap_max(&cost)
        }
    };
    let bound = constant - best;
    LowerBoundResult {
        bound,
        witness,
        envelope_min: bound,
    }
}

/// Alternates the least-squares signal update with the sorted matching of
/// `y` to `A x`, starting from `pi0`, until the residual stops decreasing
/// by more than `rel_tol` relatively or `max_iters` rounds ran.
///
/// The residual sequence is non-increasing: a matching step that would
/// increase it (possible only through rounding) is rejected.
pub fn alternating_minimization(
    pi0: &Permutation,
    inst: &ProblemInstance,
    prep: &Preprocessed,
    max_iters: usize,
    rel_tol: f64,
) -> Result<UpperBoundResult> {
    let y = inst.y();
    // A x for the least-squares x equals the projection U Uᵀ Π y
    let fit = |pi: &Permutation| -> Result<(Vec<f64>, f64)> {
        let py = pi.apply(y)?;
        let w = prep.project(&py);
        let mut ax = vec![0.0; py.len()];
        for (i, wi) in w.iter().enumerate() {
            for (a, u) in ax.iter_mut().zip(prep.basis(i)) {
                *a += wi * u;
            }
        }
        let res = py
            .iter()
            .zip(&ax)
            .map(|(p, a)| (p - a).powi(2))
            .sum::<f64>()
            .sqrt();
        Ok((ax, res))
    };

    let mut pi = pi0.clone();
    let (mut ax, mut res) = fit(&pi)?;
    let mut residuals = vec![res];
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        let next = match_1d(y, &ax)?;
        if next == pi {
            break;
        }
        let (next_ax, next_res) = fit(&next)?;
        if next_res > res {
            break;
        }
        let decrease = res - next_res;
        pi = next;
        ax = next_ax;
        res = next_res;
        residuals.push(res);
        if decrease <= rel_tol * residuals[residuals.len() - 2] {
            break;
        }
    }
    let value = objective_f(&pi, prep)?;
    Ok(UpperBoundResult {
        pi,
        value,
        iterations,
        residuals,
    })
}

/// `g(z) = −Σ z_i²`.
pub fn concave_g(z: &[f64]) -> f64 {
    -dot(z, z)
}
