//! Reference solvers: exhaustive search, the exact sorting solver for scalar
//! signals, and multi-start alternating minimization.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::assignment::{match_1d, Permutation};
use crate::bounds::{
    alternating_minimization, UpperBoundResult, DEFAULT_AM_MAX_ITERS, DEFAULT_AM_REL_TOL,
};
use crate::error::{check_finite, check_len, Error, Result};
use crate::linalg::{dot, DEFAULT_RANK_TOL};
use crate::problem::{objective_f, preprocess, recover_signal, residual_norm, ProblemInstance};

/// Largest `m` accepted by [`brute_force`].
pub const BRUTE_FORCE_MAX_M: usize = 9;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub pi_star: Permutation,
    /// Exact minimum of `f` over all `m!` permutations.
    pub f_star: f64,
    pub x_star: Vec<f64>,
    /// `‖Π* y − A x*‖₂`.
    pub residual: f64,
}

/// Exhaustive minimization of `f` in lexicographic order; the first
/// permutation attaining the minimum wins.
pub fn brute_force(inst: &ProblemInstance) -> Result<OracleResult> {
    let m = inst.m();
    if m > BRUTE_FORCE_MAX_M {
        return Err(Error::TooLarge {
            m,
            max: BRUTE_FORCE_MAX_M,
        });
    }
    let prep = preprocess(inst, DEFAULT_RANK_TOL)?;
    let mut map: Vec<usize> = (0..m).collect();
    let mut best_map = map.clone();
    let mut best = f64::INFINITY;
    loop {
        let z = prep.project(&map.iter().map(|&j| prep.y_bar()[j]).collect::<Vec<_>>());
        let f = (-dot(&z, &z)).max(-1.0);
        if f < best {
            best = f;
            best_map.clone_from(&map);
        }
        if !next_permutation(&mut map) {
            break;
        }
    }
    let pi_star = Permutation::new(best_map)?;
    let x_star = recover_signal(&pi_star, inst, &prep)?;
    let residual = residual_norm(&pi_star, inst, &x_star)?;
    Ok(OracleResult {
        pi_star,
        f_star: best,
        x_star,
        residual,
    })
}

/// Advances to the next permutation in lexicographic order; `false` after the last.
fn next_permutation(a: &mut [usize]) -> bool {
    let Some(i) = a.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = a
        .iter()
        .rposition(|&v| v > a[i])
        .expect("pivot has a successor");
    a.swap(i, j);
    a[i + 1..].reverse();
    true
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSolution {
    pub pi: Permutation,
    pub x: f64,
    /// `‖Π y − a x‖₂`.
    pub residual: f64,
}

/// Exact estimator for `n = 1`. For a fixed sign of `x` the rearrangement
/// inequality fixes the optimal matching, so only the like-sorted (`x ≥ 0`)
/// and oppositely sorted (`x ≤ 0`) pairings are candidates.
pub fn solve_1d(y: &[f64], a: &[f64]) -> Result<ScalarSolution> {
    check_len(a.len(), y.len())?;
    check_finite("y", y)?;
    check_finite("a", a)?;
    let a_sq = dot(a, a);
    if a_sq == 0.0 {
        return Err(Error::InvalidInput("a must be non-zero".into()));
    }
    let negated: Vec<f64> = a.iter().map(|v| -v).collect();
    let mut best: Option<ScalarSolution> = None;
    for target in [a, negated.as_slice()] {
        let pi = match_1d(y, target)?;
        let py = pi.apply(y)?;
        let x = dot(a, &py) / a_sq;
        let residual = py
            .iter()
            .zip(a)
            .map(|(p, ai)| (p - ai * x).powi(2))
            .sum::<f64>()
            .sqrt();
        if best.as_ref().is_none_or(|b| residual < b.residual) {
            best = Some(ScalarSolution { pi, x, residual });
        }
    }
    Ok(best.expect("two candidates evaluated"))
}

/// Alternating minimization from the identity and `restarts` uniformly random
/// permutations drawn from a seeded generator; the best run wins, ties going
/// to the earlier start.
pub fn am_multistart(
    inst: &ProblemInstance,
    restarts: usize,
    seed: u64,
) -> Result<UpperBoundResult> {
    if restarts == 0 {
        return Err(Error::InvalidInput("restarts must be at least 1".into()));
    }
    let prep = preprocess(inst, DEFAULT_RANK_TOL)?;
    let m = inst.m();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = vec![Permutation::identity(m)];
    for _ in 0..restarts {
        let mut map: Vec<usize> = (0..m).collect();
        map.shuffle(&mut rng);
        starts.push(Permutation::new(map)?);
    }
    let runs = starts
        .par_iter()
        .map(|pi0| {
            alternating_minimization(pi0, inst, &prep, DEFAULT_AM_MAX_ITERS, DEFAULT_AM_REL_TOL)
        })
        .collect::<Result<Vec<_>>>()?;
    let best = runs
        .into_iter()
        .reduce(|best, run| if run.value < best.value { run } else { best })
        .expect("at least one start");
    debug_assert_eq!(best.value, objective_f(&best.pi, &prep)?);
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::testutil::{for_each_permutation, random_instance, random_matrix, random_vec};
    use rand::SeedableRng;

    #[test]
    fn next_permutation_enumerates_all() {
        let mut a = vec![0, 1, 2, 3];
        let mut count = 1;
        while next_permutation(&mut a) {
            count += 1;
        }
        assert_eq!(count, 24);
        assert_eq!(a, vec![3, 2, 1, 0]);
    }

    #[test]
    fn brute_force_two_points() {
        let a = Matrix::from_rows(&[vec![1.0], vec![3.0]]).unwrap();
        let inst = ProblemInstance::new(a, vec![3.2, 0.9]).unwrap();
        let oracle = brute_force(&inst).unwrap();
        let prep = preprocess(&inst, DEFAULT_RANK_TOL).unwrap();
        let resid = |pi: &Permutation| {
            let x = recover_signal(pi, &inst, &prep).unwrap();
            residual_norm(pi, &inst, &x).unwrap()
        };
        let swap = Permutation::new(vec![1, 0]).unwrap();
        assert!(resid(&swap) < resid(&Permutation::identity(2)));
        assert_eq!(oracle.pi_star, swap);
        assert!((oracle.residual - resid(&swap)).abs() < 1e-15);
    }

    #[test]
    fn brute_force_square_invertible() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let inst =
            ProblemInstance::new(random_matrix(4, 4, &mut rng), random_vec(4, &mut rng)).unwrap();
        let oracle = brute_force(&inst).unwrap();
        assert!((oracle.f_star + 1.0).abs() <= 1e-12);
    }

    #[test]
    fn brute_force_refuses_large() {
        let mut rng = ChaCha8Rng::seed_from_u64(79);
        let (inst, _, _) = random_instance(10, 2, 0.1, &mut rng);
        assert_eq!(brute_force(&inst), Err(Error::TooLarge { m: 10, max: 9 }));
    }

    #[test]
    fn solve_1d_examples() {
        let s = solve_1d(&[4.0, 2.0, 6.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!((s.x - 2.0).abs() < 1e-15);
        assert!(s.residual < 1e-14);
        assert_eq!(s.pi.as_slice(), &[1, 0, 2]);

        let s = solve_1d(&[-2.0, -5.0, -1.0, -3.0], &[3.0, 1.0, 5.0, 2.0]).unwrap();
        assert!((s.x + 1.0).abs() < 1e-15);
        assert!(s.residual < 1e-14);

        assert!(solve_1d(&[1.0, 2.0], &[0.0, 0.0]).is_err());
        assert!(solve_1d(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn solve_1d_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(83);
        for _ in 0..30 {
            let m = 6;
            let y = random_vec(m, &mut rng);
            let a = random_vec(m, &mut rng);
            let a_sq = dot(&a, &a);
            let mut best = f64::INFINITY;
            for_each_permutation(m, |map| {
                let py: Vec<f64> = map.iter().map(|&j| y[j]).collect();
                let x = dot(&a, &py) / a_sq;
                let r = py
                    .iter()
                    .zip(&a)
                    .map(|(p, ai)| (p - ai * x).powi(2))
                    .sum::<f64>()
                    .sqrt();
                best = best.min(r);
            });
            let s = solve_1d(&y, &a).unwrap();
            assert!((s.residual - best).abs() <= 1e-12);
        }
    }

    #[test]
    fn am_multistart_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(89);
        let (inst, _, _) = random_instance(12, 2, 0.0, &mut rng);
        let unshuffled = ProblemInstance::new(inst.a().clone(), {
            let x = random_vec(2, &mut rng);
            inst.a().mul_vec(&x).unwrap()
        })
        .unwrap();
        let run = am_multistart(&unshuffled, 1, 0).unwrap();
        assert!((run.value + 1.0).abs() <= 1e-12);

        let (inst, _, _) = random_instance(6, 2, 0.5, &mut rng);
        let oracle = brute_force(&inst).unwrap();
        let run = am_multistart(&inst, 50, 7).unwrap();
        assert!(run.value >= oracle.f_star - 1e-12);
        assert_eq!(run, am_multistart(&inst, 50, 7).unwrap());

        let prep = preprocess(&inst, DEFAULT_RANK_TOL).unwrap();
        let single = alternating_minimization(
            &Permutation::identity(6),
            &inst,
            &prep,
            DEFAULT_AM_MAX_ITERS,
            DEFAULT_AM_REL_TOL,
        )
        .unwrap();
        assert!(run.value <= single.value);
        assert!(am_multistart(&inst, 0, 0).is_err());
    }
}
