//! Seeded Monte Carlo plumbing.
//!
//! Every trial `i` draws from its own ChaCha8 stream keyed by `(seed, i)`.
//! Trials are processed in fixed-size blocks; each block is reduced
//! sequentially and the block summaries are merged in index order, so the
//! result is bit-identical for any number of worker threads.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const BLOCK: u64 = 1024;

/// Random stream for trial `index` under the master `seed`.
pub fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Mean of a complex-valued sample with its standard error.
///
/// `stderr` is `sqrt(E|X - mean|^2 / trials)`, the radius used for
/// "within k standard errors" comparisons of complex estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: Complex64,
    pub stderr: f64,
    pub trials: u64,
}

impl Estimate {
    pub fn exact(value: Complex64) -> Self {
        Self { mean: value, stderr: 0.0, trials: 1 }
    }

    /// `|mean - target| <= k * stderr`, with a small absolute floor for exact estimates.
    pub fn within(&self, target: Complex64, k: f64) -> bool {
        (self.mean - target).norm() <= k * self.stderr + 1e-12 * target.norm().max(1.0)
    }
}

/// Running mean and sum of squared deviations (per component), mergeable.
#[derive(Debug, Clone, Copy, Default)]
pub struct Moments {
    count: u64,
    mean: Complex64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: Complex64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        let delta2 = x - self.mean;
        self.m2 += delta.re * delta2.re + delta.im * delta2.im;
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        let w = other.count as f64 / total as f64;
        self.mean += delta * w;
        self.m2 += other.m2 + delta.norm_sqr() * self.count as f64 * w;
        self.count = total;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> Complex64 {
        self.mean
    }

    /// Unbiased sample variance of `|X - mean|`.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    pub fn estimate(&self) -> Estimate {
        let stderr = if self.count == 0 { 0.0 } else { (self.variance() / self.count as f64).sqrt() };
        Estimate { mean: self.mean, stderr, trials: self.count }
    }
}

/// Runs `trials` independent draws of `draw(rng, index)` and summarizes them.
pub fn estimate<F>(trials: u64, seed: u64, draw: F) -> Estimate
where
    F: Fn(&mut ChaCha8Rng, u64) -> Complex64 + Sync,
{
    let blocks = trials.div_ceil(BLOCK);
    let partial: Vec<Moments> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut m = Moments::default();
            for i in b * BLOCK..((b + 1) * BLOCK).min(trials) {
                let mut rng = rng_for(seed, i);
                m.push(draw(&mut rng, i));
            }
            m
        })
        .collect();
    let mut total = Moments::default();
    for m in &partial {
        total.merge(m);
    }
    total.estimate()
}

/// Stratified average: stratum `s` contributes the mean of `draws` values
/// `f(s, rng)`, all drawn from the stream `(seed, s)`. A stratum whose first
/// call returns `None` is excluded. Strata are weighted equally and the standard
/// error combines the within-stratum variances.
pub fn stratified_estimate<F>(strata: u64, draws: u64, seed: u64, f: F) -> Estimate
where
    F: Fn(u64, &mut ChaCha8Rng) -> Option<Complex64> + Sync,
{
    let draws = draws.max(1);
    let per: Vec<Option<Moments>> = map_indexed(strata, |s| {
        let mut rng = rng_for(seed, s);
        let mut m = Moments::default();
        for _ in 0..draws {
            m.push(f(s, &mut rng)?);
        }
        Some(m)
    });
    let kept: Vec<Moments> = per.into_iter().flatten().collect();
    if kept.is_empty() {
        return Estimate { mean: Complex64::new(0.0, 0.0), stderr: 0.0, trials: 0 };
    }
    let k = kept.len() as f64;
    let mut mean = Complex64::new(0.0, 0.0);
    let mut var = 0.0;
    for m in &kept {
        mean += m.mean();
        var += m.variance() / draws as f64;
    }
    Estimate { mean: mean / k, stderr: var.sqrt() / k, trials: kept.len() as u64 * draws }
}

/// Collects per-index summaries in parallel, preserving index order.
pub fn map_indexed<T, F>(count: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync,
{
    (0..count).into_par_iter().map(&f).collect()
}
