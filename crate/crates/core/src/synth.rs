//! Seeded synthetic data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{ObservationMatrix, Result};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `p` independent standard normal columns of length `d`.
pub fn standard_normal(d: usize, p: usize, seed: u64) -> Result<ObservationMatrix> {
    let mut rng = rng(seed);
    let columns = (0..p)
        .map(|_| (0..d).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    ObservationMatrix::from_columns(columns)
}

/// Standard normal columns sharing a common factor with weight `shared`, so that
/// predictors are correlated with each other (pairwise correlation about
/// `shared² / (1 + shared²)`).
pub fn correlated(d: usize, p: usize, shared: f64, seed: u64) -> Result<ObservationMatrix> {
    let mut rng = rng(seed);
    let common: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let columns = (0..p)
        .map(|_| {
            common
                .iter()
                .map(|&c| rng.sample::<f64, _>(StandardNormal) + shared * c)
                .collect()
        })
        .collect();
    ObservationMatrix::from_columns(columns)
}

/// Builds `data` with `m` extra responder columns, each a random linear mix of
/// all predictor columns plus noise of standard deviation `noise`.
pub fn with_mixed_responders(
    predictors: &ObservationMatrix,
    m: usize,
    noise: f64,
    seed: u64,
) -> Result<ObservationMatrix> {
    let mut rng = rng(seed);
    let d = predictors.d();
    let mut columns = predictors.columns().to_vec();
    for _ in 0..m {
        let weights: Vec<f64> = (0..predictors.p())
            .map(|_| rng.sample(StandardNormal))
            .collect();
        let y = (0..d)
            .map(|t| {
                let signal = predictors
                    .columns()
                    .iter()
                    .zip(&weights)
                    .fold(0.0, |acc, (col, w)| acc + w * col[t]);
                signal + noise * rng.sample::<f64, _>(StandardNormal)
            })
            .collect();
        columns.push(y);
    }
    ObservationMatrix::from_columns(columns)
}
