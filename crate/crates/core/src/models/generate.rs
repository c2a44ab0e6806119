//! Seeded synthetic data for coverage experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `v_t = slope·t + intercept + N(0, sigma²)` for `t = 1..=len`.
pub fn linear_normal(slope: f64, intercept: f64, sigma: f64, len: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    let noise = Normal::new(0.0, sigma).expect("sigma must be positive and finite");
    (1..=len)
        .map(|t| slope * t as f64 + intercept + noise.sample(&mut r))
        .collect()
}

/// `x_t = c + beta·x_{t−1} + Poisson(rate)` with `x_0 = 0`.
pub fn ar1_poisson(c: f64, beta: f64, rate: f64, len: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    let noise = Poisson::new(rate).expect("rate must be positive and finite");
    let mut prev = 0.0;
    (0..len)
        .map(|_| {
            let x = c + beta * prev + noise.sample(&mut r);
            prev = x;
            x
        })
        .collect()
}

/// `trials` one-hot draws from the categorical distribution `probs`.
pub fn multinomial_onehot(probs: &[f64], trials: usize, seed: u64) -> Vec<Vec<u8>> {
    let mut r = rng(seed);
    let total: f64 = probs.iter().sum();
    (0..trials)
        .map(|_| {
            let u: f64 = r.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = probs.len() - 1;
            for (j, &p) in probs.iter().enumerate() {
                acc += p;
                if u < acc {
                    pick = j;
                    break;
                }
            }
            let mut row = vec![0u8; probs.len()];
            row[pick] = 1;
            row
        })
        .collect()
}
