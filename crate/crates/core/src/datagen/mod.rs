//! Synthetic data, the bisection-Newton counterexample generator and CSV
//! matrix I/O.
//!
//! Random draws use `ChaCha8Rng` seeded with `seed_from_u64` and the
//! ziggurat `StandardNormal` sampler from `rand_distr`. Outputs are
//! bit-reproducible for a fixed seed within one build of the crate and its
//! pinned dependencies.

mod bnw;
mod io;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solvers::{Covariance, DataMatrix};

pub use bnw::{cubic_real_roots, gen_bnw_counterexample, lift_to_vector, BnwInstance};
pub use io::{load_matrix, read_matrix, save_matrix, write_matrix};

pub const DEFAULT_HASTIE_SAMPLES: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HastieMode {
    Sampled,
    ExactCovariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HastieSpec {
    pub n_samples: usize,
    pub seed: u64,
    pub mode: HastieMode,
}

impl Default for HastieSpec {
    fn default() -> Self {
        Self {
            n_samples: DEFAULT_HASTIE_SAMPLES,
            seed: 0,
            mode: HastieMode::ExactCovariance,
        }
    }
}

#[derive(Debug, Clone)]
pub enum HastieData {
    Sampled(DataMatrix<f64>),
    Exact(Covariance<f64>),
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Three hidden factors `V1 ~ N(0, 290)`, `V2 ~ N(0, 300)`,
/// `V3 = −0.3 V1 + 0.925 V2 + ε`, observed through ten noisy copies:
/// four of `V1`, four of `V2`, two of `V3`, each with unit noise.
pub fn gen_hastie(spec: &HastieSpec) -> Result<HastieData> {
    match spec.mode {
        HastieMode::ExactCovariance => Ok(HastieData::Exact(hastie_covariance())),
        HastieMode::Sampled => {
            if spec.n_samples < 2 {
                return Err(Error::InvalidConfig(
                    "sampled Hastie data needs at least 2 rows".into(),
                ));
            }
            Ok(HastieData::Sampled(hastie_sample(
                spec.n_samples,
                spec.seed,
            )))
        }
    }
}

/// Population covariance of the ten observed variables.
pub fn hastie_covariance() -> Covariance<f64> {
    let var = [290.0, 300.0, 0.09 * 290.0 + 0.925 * 0.925 * 300.0 + 1.0];
    let cross = |a: usize, b: usize| -> f64 {
        match (a.min(b), a.max(b)) {
            (0, 1) => 0.0,
            (0, 2) => -0.3 * 290.0,
            (1, 2) => 0.925 * 300.0,
            _ => unreachable!(),
        }
    };
    let block = |i: usize| match i {
        0..=3 => 0,
        4..=7 => 1,
        _ => 2,
    };
    let mut s = Array2::<f64>::zeros((10, 10));
    for i in 0..10 {
        for j in 0..10 {
            let (bi, bj) = (block(i), block(j));
            s[[i, j]] = if bi == bj { var[bi] } else { cross(bi, bj) };
            if i == j {
                s[[i, j]] += 1.0;
            }
        }
    }
    Covariance::new(s).expect("symmetric by construction")
}

/// `n` rows drawn from the Hastie model.
pub fn hastie_sample(n: usize, seed: u64) -> DataMatrix<f64> {
    let mut r = rng(seed);
    let mut z = || -> f64 { StandardNormal.sample(&mut r) };
    let mut a = Array2::<f64>::zeros((n, 10));
    for mut row in a.rows_mut() {
        let v1 = 290f64.sqrt() * z();
        let v2 = 300f64.sqrt() * z();
        let v3 = -0.3 * v1 + 0.925 * v2 + z();
        for (i, x) in row.iter_mut().enumerate() {
            let v = match i {
                0..=3 => v1,
                4..=7 => v2,
                _ => v3,
            };
            *x = v + z();
        }
    }
    DataMatrix::new(a).expect("finite")
}

/// `m × n` matrix with i.i.d. `N(0, 1/m)` entries.
pub fn gen_random(m: usize, n: usize, seed: u64) -> Result<DataMatrix<f64>> {
    if m == 0 || n == 0 {
        return Err(Error::EmptyMatrix);
    }
    let mut r = rng(seed);
    let sd = 1.0 / (m as f64).sqrt();
    let a = Array2::from_shape_simple_fn((m, n), || {
        let z: f64 = StandardNormal.sample(&mut r);
        sd * z
    });
    DataMatrix::new(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hastie_covariance_entries() {
        let s = hastie_covariance();
        let s = s.view();
        for i in 0..4 {
            assert_eq!(s[[i, i]], 291.0);
            assert_eq!(s[[i + 4, i + 4]], 301.0);
            for j in 4..8 {
                assert_eq!(s[[i, j]], 0.0);
            }
            assert_eq!(s[[i, 8]], -87.0);
            assert_eq!(s[[i + 4, 9]], 277.5);
        }
        assert!((s[[8, 8]] - 284.7875).abs() < 1e-12);
        assert!((s[[8, 9]] - 283.7875).abs() < 1e-12);
    }

    #[test]
    fn random_is_deterministic() {
        let a = gen_random(5, 4, 7).unwrap();
        let b = gen_random(5, 4, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, gen_random(5, 4, 8).unwrap());
    }

    #[test]
    fn random_variance() {
        let m = 10_000;
        let a = gen_random(m, 4, 1).unwrap();
        let var = a.view().iter().map(|x| x * x).sum::<f64>() / (4 * m) as f64;
        assert!(var > 0.9 / m as f64 && var < 1.1 / m as f64);
    }

    #[test]
    fn hastie_sample_shape() {
        let HastieData::Sampled(a) = gen_hastie(&HastieSpec {
            n_samples: 50,
            seed: 3,
            mode: HastieMode::Sampled,
        })
        .unwrap() else {
            panic!("expected sampled data");
        };
        assert_eq!(a.view().dim(), (50, 10));
        assert!(gen_hastie(&HastieSpec {
            n_samples: 1,
            seed: 3,
            mode: HastieMode::Sampled
        })
        .is_err());
    }
}
