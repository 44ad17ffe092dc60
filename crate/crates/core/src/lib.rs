//! Globally optimal linear regression with unknown correspondences.
//!
//! Given `A ∈ R^{m×n}` and `y = Π* A x* + ε` with `Π*` an unknown
//! permutation, the maximum-likelihood estimate minimizes `‖Π y − A x‖`
//! jointly over permutations and signals. Eliminating `x` leaves a concave
//! quadratic in `z = Uᵀ Π ȳ ∈ Rʳ`, where `U` spans the columns of `A`; this
//! crate minimizes it by branch-and-bound over a box containing every
//! attainable `z`, with convex-envelope lower bounds (one sorting-based
//! assignment per box) and alternating-minimization upper bounds. The
//! result is certified `δ`-optimal.
//!
//! ```
//! use slr_core::{solve, BnbConfig, Matrix, ProblemInstance, Status};
//!
//! let a = Matrix::from_rows(&[
//!     vec![1.0, 0.0],
//!     vec![0.0, 1.0],
//!     vec![1.0, 1.0],
//!     vec![1.0, -1.0],
//!     vec![2.0, 1.0],
//! ]).unwrap();
//! // A x for x = (2, -1), listed out of order
//! let y = vec![3.0, 2.0, -1.0, 1.0, 3.0];
//! let inst = ProblemInstance::new(a, y).unwrap();
//! let sol = solve(&inst, &BnbConfig::default()).unwrap();
//! assert_eq!(sol.status, Status::Optimal);
//! assert!((sol.x_hat[0] - 2.0).abs() < 1e-9 && (sol.x_hat[1] + 1.0).abs() < 1e-9);
//! ```

pub mod assignment;
pub mod baselines;
pub mod bnb;
pub mod bounds;
mod error;
pub mod linalg;
pub mod problem;

#[cfg(test)]
mod testutil;

pub use assignment::{lap_max, match_1d, rank_one_lap_max, CostMatrix, Permutation};
pub use baselines::{am_multistart, brute_force, solve_1d, OracleResult, ScalarSolution};
pub use bnb::{
    bisect, solve, solve_observed, BnbConfig, BnbNode, SearchEvent, SearchStats, Solution, Status,
};
pub use bounds::{
    alternating_minimization, envelope_value, lower_bound, lower_bound_with, BoundBackend,
    LowerBoundResult, UpperBoundResult,
};
pub use error::{Error, Result};
pub use linalg::{kron_singular_basis, least_squares, thin_svd, Matrix, ThinSvd};
pub use problem::{
    initial_rectangle, objective_f, preprocess, recover_signal, residual_norm, Preprocessed,
    ProblemInstance, Rectangle,
};
