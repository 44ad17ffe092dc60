//! Problem instances, preprocessing and the concave objective.
//!
//! With `ȳ = y/‖y‖` and `U` an orthonormal basis of the column space of `A`,
//! the maximum-likelihood permutation minimizes
//!
//! ```text
//! f(Π) = −‖Uᵀ Π ȳ‖²  ∈ [−1, 0]
//! ```
//!
//! and the residual of the best signal for `Π` is `‖y‖² (1 + f(Π))`. The
//! branch-and-bound runs in the coordinates `z = Uᵀ Π ȳ ∈ Rʳ`.

use crate::assignment::Permutation;
use crate::error::{check_finite, check_len, Error, Result};
use crate::linalg::{dot, norm2, thin_svd, Matrix, ThinSvd};

/// The pair `(A, y)` with `y` an unknown permutation of noisy `A x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    a: Matrix,
    y: Vec<f64>,
}

impl ProblemInstance {
    pub fn new(a: Matrix, y: Vec<f64>) -> Result<Self> {
        check_len(a.rows(), y.len())?;
        check_finite("y", &y)?;
        if a.rows() < a.cols() {
            return Err(Error::InvalidInput(format!(
                "need m >= n, got m = {} and n = {}",
                a.rows(),
                a.cols()
            )));
        }
        if norm2(&y) == 0.0 {
            return Err(Error::InvalidInput("y must be non-zero".into()));
        }
        Ok(Self { a, y })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Number of measurements.
    pub fn m(&self) -> usize {
        self.a.rows()
    }

    /// Signal dimension.
    pub fn n(&self) -> usize {
        self.a.cols()
    }
}

/// Everything the bounding code reads: `ȳ`, the thin SVD of `A` and the
/// ascending order of `ȳ`.
#[derive(Debug, Clone)]
pub struct Preprocessed {
    y_bar: Vec<f64>,
    y_norm: f64,
    y_order: Vec<usize>,
    svd: ThinSvd,
    u_cols: Vec<Vec<f64>>,
}

impl Preprocessed {
    pub fn y_bar(&self) -> &[f64] {
        &self.y_bar
    }

    pub fn y_norm(&self) -> f64 {
        self.y_norm
    }

    /// Stable ascending argsort of `ȳ`.
    pub fn y_order(&self) -> &[usize] {
        &self.y_order
    }

    pub fn svd(&self) -> &ThinSvd {
        &self.svd
    }

    /// `U`, `m × r`.
    pub fn u(&self) -> &Matrix {
        &self.svd.u
    }

    /// Column `i` of `U`.
    pub fn basis(&self, i: usize) -> &[f64] {
        &self.u_cols[i]
    }

    /// Effective rank `r`, the dimension of the search space.
    pub fn rank(&self) -> usize {
        self.svd.rank
    }

    pub fn m(&self) -> usize {
        self.y_bar.len()
    }

    /// `Uᵀ v`.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        self.u_cols.iter().map(|u| dot(u, v)).collect()
    }

    /// `z(Π) = Uᵀ Π ȳ`.
    pub fn z_of(&self, pi: &Permutation) -> Result<Vec<f64>> {
        Ok(self.project(&pi.apply(&self.y_bar)?))
    }
}

pub fn preprocess(inst: &ProblemInstance, rank_tol: f64) -> Result<Preprocessed> {
    let y_norm = norm2(inst.y());
    let y_bar: Vec<f64> = inst.y().iter().map(|v| v / y_norm).collect();
    let svd = thin_svd(inst.a(), rank_tol)?;
    let u_cols = (0..svd.rank).map(|i| svd.u.col(i)).collect();
    let mut y_order: Vec<usize> = (0..y_bar.len()).collect();
    y_order.sort_by(|&a, &b| y_bar[a].total_cmp(&y_bar[b]));
    Ok(Preprocessed {
        y_bar,
        y_norm,
        y_order,
        svd,
        u_cols,
    })
}

/// `f(Π) = −‖Uᵀ Π ȳ‖²`, clamped to `[−1, 0]` against rounding.
pub fn objective_f(pi: &Permutation, prep: &Preprocessed) -> Result<f64> {
    let z = prep.z_of(pi)?;
    Ok((-dot(&z, &z)).max(-1.0))
}

/// Axis-aligned box `[lo, hi] ⊂ Rʳ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rectangle {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Rectangle {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_len(lo.len(), hi.len())?;
        check_finite("rectangle", &lo)?;
        check_finite("rectangle", &hi)?;
        if let Some(i) = (0..lo.len()).find(|&i| lo[i] > hi[i]) {
            return Err(Error::InvalidInput(format!(
                "rectangle coordinate {i} has lo {} > hi {}",
                lo[i], hi[i]
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn width(&self, i: usize) -> f64 {
        self.hi[i] - self.lo[i]
    }

    pub fn contains(&self, z: &[f64], slack: f64) -> bool {
        z.len() == self.dim()
            && z.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(&v, (&l, &h))| v >= l - slack && v <= h + slack)
    }

    /// Corner selected by the low bits of `mask` (bit `i` set picks `hi[i]`).
    pub fn corner(&self, mask: usize) -> Vec<f64> {
        (0..self.dim())
            .map(|i| {
                if mask >> i & 1 == 1 {
                    self.hi[i]
                } else {
                    self.lo[i]
                }
            })
            .collect()
    }

    pub(crate) fn from_parts_unchecked(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        debug_assert!(lo.iter().zip(&hi).all(|(l, h)| l <= h));
        Self { lo, hi }
    }
}

/// Smallest box containing every `z(Π)`: per coordinate, the extremes of
/// `⟨Π ȳ, u_i⟩` come from pairing sorted `u_i` with `ȳ` sorted the same way
/// (max) or the opposite way (min).
pub fn initial_rectangle(prep: &Preprocessed) -> Rectangle {
    let m = prep.m();
    let y_sorted: Vec<f64> = prep.y_order().iter().map(|&j| prep.y_bar()[j]).collect();
    let mut lo = Vec::with_capacity(prep.rank());
    let mut hi = Vec::with_capacity(prep.rank());
    for i in 0..prep.rank() {
        let mut u_sorted = prep.basis(i).to_vec();
        u_sorted.sort_by(f64::total_cmp);
        let max: f64 = u_sorted.iter().zip(&y_sorted).map(|(u, y)| u * y).sum();
        let min: f64 = u_sorted
            .iter()
            .zip(y_sorted.iter().rev())
            .map(|(u, y)| u * y)
            .sum();
        debug_assert_eq!(u_sorted.len(), m);
        // summation order can flip a zero-width interval by an ulp
        lo.push(min.min(max));
        hi.push(max);
    }
    Rectangle::from_parts_unchecked(lo, hi)
}

/// Minimum-norm `x` with `Σ Vᵀ x = Uᵀ Π y`, the least-squares signal for `Π`.
pub fn recover_signal(
    pi: &Permutation,
    inst: &ProblemInstance,
    prep: &Preprocessed,
) -> Result<Vec<f64>> {
    let w = prep.project(&pi.apply(inst.y())?);
    prep.svd().solve_coefficients(&w)
}

/// `‖Π y − A x‖₂`.
pub fn residual_norm(pi: &Permutation, inst: &ProblemInstance, x: &[f64]) -> Result<f64> {
    let py = pi.apply(inst.y())?;
    let ax = inst.a().mul_vec(x)?;
    Ok(py
        .iter()
        .zip(&ax)
        .map(|(p, a)| (p - a).powi(2))
        .sum::<f64>()
        .sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{least_squares, DEFAULT_RANK_TOL};
    use crate::testutil::{for_each_permutation, random_instance, random_matrix, random_vec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn prep(inst: &ProblemInstance) -> Preprocessed {
        preprocess(inst, DEFAULT_RANK_TOL).unwrap()
    }

    #[test]
    fn instance_validation() {
        let a = Matrix::identity(2);
        assert!(ProblemInstance::new(a.clone(), vec![0.0, 0.0]).is_err());
        assert!(ProblemInstance::new(a.clone(), vec![1.0]).is_err());
        assert!(ProblemInstance::new(a.clone(), vec![1.0, f64::INFINITY]).is_err());
        let wide = Matrix::new(1, 2, vec![1.0, 2.0]).unwrap();
        assert!(ProblemInstance::new(wide, vec![1.0]).is_err());
    }

    #[test]
    fn preprocess_orthonormal_a() {
        let inst = ProblemInstance::new(Matrix::identity(2), vec![3.0, 4.0]).unwrap();
        let p = prep(&inst);
        assert_eq!(p.y_bar(), &[0.6, 0.8]);
        assert_eq!(p.rank(), 2);
        assert_eq!(p.u(), &Matrix::identity(2));
        assert_eq!(p.y_norm(), 5.0);
    }

    #[test]
    fn preprocess_rank_deficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let base = random_matrix(10, 2, &mut rng);
        let rows: Vec<Vec<f64>> = base
            .to_rows()
            .into_iter()
            .map(|r| vec![r[0], r[1], r[0]])
            .collect();
        let inst =
            ProblemInstance::new(Matrix::from_rows(&rows).unwrap(), random_vec(10, &mut rng))
                .unwrap();
        let p = prep(&inst);
        assert_eq!(p.rank(), 2);
        assert_eq!(p.u().cols(), 2);
    }

    #[test]
    fn objective_matches_explicit_projector() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (inst, _, _) = random_instance(20, 3, 0.1, &mut rng);
        let p = prep(&inst);
        let proj = p.u().matmul(&p.u().transpose()).unwrap();
        for seed in 0..10 {
            let mut map: Vec<usize> = (0..20).collect();
            map.rotate_left(seed);
            let pi = Permutation::new(map).unwrap();
            let py = pi.apply(p.y_bar()).unwrap();
            let explicit = -dot(&py, &proj.mul_vec(&py).unwrap());
            assert!((objective_f(&pi, &p).unwrap() - explicit).abs() <= 1e-12);
        }
    }

    #[test]
    fn objective_matches_explicit_kronecker_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let m = 6;
        let (inst, _, _) = random_instance(m, 2, 0.3, &mut rng);
        let p = prep(&inst);
        let r = p.rank();
        let mut checked = 0;
        for_each_permutation(m, |map| {
            if checked >= 50 {
                return;
            }
            checked += 1;
            // vec(Π), column-major, with Π[i][map[i]] = 1
            let mut vec_pi = vec![0.0; m * m];
            for (i, &j) in map.iter().enumerate() {
                vec_pi[j * m + i] = 1.0;
            }
            let mut sq = 0.0;
            for a in 0..r {
                let mut row = 0.0;
                for j in 0..m {
                    for l in 0..m {
                        row += p.y_bar()[j] * p.u().get(l, a) * vec_pi[j * m + l];
                    }
                }
                sq += row * row;
            }
            let pi = Permutation::new(map.to_vec()).unwrap();
            assert!((objective_f(&pi, &p).unwrap() + sq).abs() <= 1e-12);
        });
    }

    #[test]
    fn objective_on_feasible_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (inst, _, map) = random_instance(15, 3, 0.0, &mut rng);
        let p = prep(&inst);
        // y = P0 (A x) with y[i] = (Ax)[map[i]]; Π = P0⁻¹ restores A x
        let truth = Permutation::new(map).unwrap().inverse();
        assert!((objective_f(&truth, &p).unwrap() + 1.0).abs() <= 1e-12);

        let sq =
            ProblemInstance::new(random_matrix(4, 4, &mut rng), random_vec(4, &mut rng)).unwrap();
        let ps = prep(&sq);
        for_each_permutation(4, |map| {
            let pi = Permutation::new(map.to_vec()).unwrap();
            assert!((objective_f(&pi, &ps).unwrap() + 1.0).abs() <= 1e-12);
        });
    }

    #[test]
    fn objective_bounds_and_residual_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let (inst, _, _) = random_instance(9, 3, 0.5, &mut rng);
            let p = prep(&inst);
            let mut map: Vec<usize> = (0..9).collect();
            map.reverse();
            let pi = Permutation::new(map).unwrap();
            let f = objective_f(&pi, &p).unwrap();
            assert!((-1.0..=0.0).contains(&f));
            let x = recover_signal(&pi, &inst, &p).unwrap();
            let res = residual_norm(&pi, &inst, &x).unwrap();
            let expected = p.y_norm().powi(2) * (1.0 + f);
            assert!((res * res - expected).abs() <= 1e-9 * expected);
        }
    }

    #[test]
    fn initial_rectangle_two_point_example() {
        let a = Matrix::from_rows(&[vec![1.0], vec![0.0]]).unwrap();
        let inst = ProblemInstance::new(a, vec![0.6, 0.8]).unwrap();
        let rect = initial_rectangle(&prep(&inst));
        assert!((rect.lo()[0] - 0.6).abs() < 1e-15);
        assert!((rect.hi()[0] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn initial_rectangle_constant_direction_is_degenerate() {
        let a = Matrix::from_rows(&[vec![1.0], vec![1.0], vec![1.0]]).unwrap();
        let inst = ProblemInstance::new(a, vec![1.0, 2.0, 4.0]).unwrap();
        let p = prep(&inst);
        let rect = initial_rectangle(&p);
        let expected = p.basis(0)[0] * p.y_bar().iter().sum::<f64>();
        assert!(rect.width(0) <= 1e-15);
        assert!((rect.lo()[0] - expected).abs() <= 1e-15);
    }

    #[test]
    fn initial_rectangle_is_tight_bounding_box() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..10 {
            let m = 4 + trial % 4;
            let (inst, _, _) = random_instance(m, 2, 0.2, &mut rng);
            let p = prep(&inst);
            let rect = initial_rectangle(&p);
            let mut lo_hit = [f64::INFINITY; 2];
            let mut hi_hit = [f64::NEG_INFINITY; 2];
            for_each_permutation(m, |map| {
                let z = p.z_of(&Permutation::new(map.to_vec()).unwrap()).unwrap();
                assert!(rect.contains(&z, 1e-12));
                for i in 0..2 {
                    lo_hit[i] = lo_hit[i].min(z[i]);
                    hi_hit[i] = hi_hit[i].max(z[i]);
                }
            });
            for i in 0..2 {
                assert!((lo_hit[i] - rect.lo()[i]).abs() <= 1e-12);
                assert!((hi_hit[i] - rect.hi()[i]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn recover_signal_noiseless_and_noisy() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let (inst, x_star, map) = random_instance(12, 3, 0.0, &mut rng);
        let p = prep(&inst);
        let truth = Permutation::new(map).unwrap().inverse();
        let x = recover_signal(&truth, &inst, &p).unwrap();
        let err: Vec<f64> = x.iter().zip(&x_star).map(|(a, b)| a - b).collect();
        assert!(norm2(&err) <= 1e-9 * norm2(&x_star));

        let (inst, _, _) = random_instance(12, 3, 0.5, &mut rng);
        let p = prep(&inst);
        let pi = Permutation::identity(12);
        let x = recover_signal(&pi, &inst, &p).unwrap();
        let direct = least_squares(inst.a(), inst.y()).unwrap();
        for (a, b) in x.iter().zip(&direct) {
            assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn recover_signal_minimum_norm_when_rank_deficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let base = random_matrix(8, 2, &mut rng);
        let rows: Vec<Vec<f64>> = base
            .to_rows()
            .into_iter()
            .map(|r| vec![r[0], r[1], r[1]])
            .collect();
        let inst = ProblemInstance::new(Matrix::from_rows(&rows).unwrap(), random_vec(8, &mut rng))
            .unwrap();
        let p = prep(&inst);
        let pi = Permutation::identity(8);
        let x = recover_signal(&pi, &inst, &p).unwrap();
        // minimum norm: no component along the null direction (0, 1, −1)
        assert!((x[1] - x[2]).abs() <= 1e-9 * norm2(&x));
        let w = p.project(inst.y());
        let back = p.svd().v.tr_mul_vec(&x).unwrap();
        for ((b, s), wi) in back.iter().zip(&p.svd().sigma).zip(&w) {
            assert!((b * s - wi).abs() <= 1e-9 * (1.0 + wi.abs()));
        }
    }
}
