//! Test-only oracles, independent of the solver code paths.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::Matrix;
use crate::problem::ProblemInstance;

/// Calls `f` on every permutation of `0..m` (Heap's algorithm).
pub fn for_each_permutation(m: usize, mut f: impl FnMut(&[usize])) {
    let mut a: Vec<usize> = (0..m).collect();
    let mut c = vec![0usize; m];
    f(&a);
    let mut i = 0;
    while i < m {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            f(&a);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

pub fn random_vec(len: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix {
    Matrix::new(rows, cols, random_vec(rows * cols, rng)).unwrap()
}

/// Fully shuffled instance with optional Gaussian noise; returns the signal
/// and the applied permutation map alongside.
pub fn random_instance(
    m: usize,
    n: usize,
    noise: f64,
    rng: &mut impl Rng,
) -> (ProblemInstance, Vec<f64>, Vec<usize>) {
    let a = random_matrix(m, n, rng);
    let x = random_vec(n, rng);
    let clean = a.mul_vec(&x).unwrap();
    let mut map: Vec<usize> = (0..m).collect();
    for i in (1..m).rev() {
        let j = rng.random_range(0..=i);
        map.swap(i, j);
    }
    let y: Vec<f64> = map
        .iter()
        .map(|&j| {
            let e: f64 = StandardNormal.sample(rng);
            clean[j] + noise * e
        })
        .collect();
    (ProblemInstance::new(a, y).unwrap(), x, map)
}
