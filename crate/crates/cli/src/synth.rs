//! Synthetic instances: Gaussian `A` and `x*`, a shuffle of a fraction
//! `alpha` of the entries of `A x*`, and additive Gaussian noise at a given SNR.
//!
//! The SNR is `10 log10(‖A x*‖² / (m σ²))`, signal energy over expected noise
//! energy, so `σ = ‖A x*‖ · 10^(−snr/20) / √m`. An infinite SNR means no noise.

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use slr_core::{Matrix, ProblemInstance};

use crate::instance::GroundTruth;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub m: usize,
    pub n: usize,
    /// Fraction of shuffled entries, in `[0, 1]`.
    pub alpha: f64,
    /// May be `f64::INFINITY`.
    pub snr_db: f64,
    pub seed: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("alpha must lie in [0, 1], got {0}")]
    Alpha(f64),
    #[error("need m >= n >= 1, got m = {m} and n = {n}")]
    Shape { m: usize, n: usize },
    #[error("snr_db must be a number or +inf, got {0}")]
    Snr(f64),
    #[error(transparent)]
    Instance(#[from] slr_core::Error),
}

/// Noise standard deviation for signal `ax` at `snr_db`.
pub fn noise_sigma(ax: &[f64], snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        return 0.0;
    }
    let energy: f64 = ax.iter().map(|v| v * v).sum();
    energy.sqrt() * 10f64.powf(-snr_db / 20.0) / (ax.len() as f64).sqrt()
}

/// Number of shuffled positions, `⌊alpha m⌋`.
pub fn shuffled_count(alpha: f64, m: usize) -> usize {
    // tolerate products like 0.29 * 100 = 28.999…
    ((alpha * m as f64 + 1e-9).floor() as usize).min(m)
}

pub fn generate(spec: &SyntheticSpec) -> Result<(ProblemInstance, GroundTruth), SpecError> {
    let SyntheticSpec {
        m,
        n,
        alpha,
        snr_db,
        seed,
    } = *spec;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(SpecError::Alpha(alpha));
    }
    if n == 0 || m < n {
        return Err(SpecError::Shape { m, n });
    }
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(SpecError::Snr(snr_db));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let a_data: Vec<f64> = (0..m * n).map(|_| normal()).collect();
    let x_star: Vec<f64> = (0..n).map(|_| normal()).collect();
    let a = Matrix::new(m, n, a_data)?;
    let clean = a.mul_vec(&x_star)?;

    let mut subset = index::sample(&mut rng, m, shuffled_count(alpha, m)).into_vec();
    subset.sort_unstable();
    let mut moved = subset.clone();
    moved.shuffle(&mut rng);
    let mut pi_star: Vec<usize> = (0..m).collect();
    for (&slot, &src) in subset.iter().zip(&moved) {
        pi_star[slot] = src;
    }

    let sigma = noise_sigma(&clean, snr_db);
    let mut y: Vec<f64> = pi_star.iter().map(|&j| clean[j]).collect();
    if sigma > 0.0 {
        for v in &mut y {
            let e: f64 = StandardNormal.sample(&mut rng);
            *v += sigma * e;
        }
    }
    let inst = ProblemInstance::new(a, y)?;
    Ok((
        inst,
        GroundTruth {
            x_star,
            pi_star,
            sigma,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use slr_core::Permutation;

    fn spec(m: usize, n: usize, alpha: f64, snr_db: f64, seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            m,
            n,
            alpha,
            snr_db,
            seed,
        }
    }

    #[test]
    fn unshuffled_noiseless_is_exact() {
        let (inst, gt) = generate(&spec(10, 3, 0.0, f64::INFINITY, 1)).unwrap();
        assert!(Permutation::new(gt.pi_star.clone()).unwrap().is_identity());
        assert_eq!(gt.sigma, 0.0);
        assert_eq!(inst.y(), inst.a().mul_vec(&gt.x_star).unwrap().as_slice());
    }

    #[test]
    fn same_seed_same_instance() {
        let s = spec(20, 3, 0.5, 30.0, 99);
        let (a, ga) = generate(&s).unwrap();
        let (b, gb) = generate(&s).unwrap();
        assert_eq!(a, b);
        assert_eq!(ga, gb);
        let (c, _) = generate(&SyntheticSpec { seed: 100, ..s }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn partial_shuffle_touches_only_the_chosen_fraction() {
        for alpha in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let (_, gt) = generate(&spec(100, 3, alpha, f64::INFINITY, 5)).unwrap();
            let moved = gt
                .pi_star
                .iter()
                .enumerate()
                .filter(|(i, &j)| *i != j)
                .count();
            assert!(moved <= shuffled_count(alpha, 100));
            Permutation::new(gt.pi_star).unwrap();
        }
        assert_eq!(shuffled_count(0.29, 100), 29);
    }

    #[test]
    fn snr_calibration() {
        let mut total = 0.0;
        for seed in 0..100 {
            let (inst, gt) = generate(&spec(100, 3, 1.0, 40.0, seed)).unwrap();
            let clean = inst.a().mul_vec(&gt.x_star).unwrap();
            let shuffled: Vec<f64> = gt.pi_star.iter().map(|&j| clean[j]).collect();
            let noise: f64 = inst
                .y()
                .iter()
                .zip(&shuffled)
                .map(|(y, c)| (y - c).powi(2))
                .sum();
            let signal: f64 = clean.iter().map(|v| v * v).sum();
            total += 10.0 * (signal / noise).log10();
        }
        assert!((total / 100.0 - 40.0).abs() <= 1.0);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(matches!(
            generate(&spec(10, 3, 1.5, 40.0, 0)),
            Err(SpecError::Alpha(_))
        ));
        assert!(matches!(
            generate(&spec(2, 3, 1.0, 40.0, 0)),
            Err(SpecError::Shape { .. })
        ));
        assert!(matches!(
            generate(&spec(5, 1, 1.0, f64::NAN, 0)),
            Err(SpecError::Snr(_))
        ));
    }
}
