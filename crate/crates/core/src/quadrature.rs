//! Monte Carlo quadrature with deterministic reduction.
//!
//! Samples are indexed; sample `t` draws from stream `t` of the sampler.
//! Parallel evaluation collects per-chunk partial results in index order, so
//! the reduction is independent of thread scheduling.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::SeededSampler;

/// Number of samples folded sequentially before results are merged.
pub const CHUNK: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Estimator {
    PlainMean,
    MedianOfMeans { blocks: usize },
}

/// Sample budget and randomness for one integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub sample_count: usize,
    pub sampler: SeededSampler,
    pub estimator: Estimator,
}

impl QuadratureSpec {
    pub const DEFAULT_SAMPLES: usize = 50_000;

    pub fn new(sample_count: usize, seed: u64) -> Self {
        Self {
            sample_count,
            sampler: SeededSampler::new(seed),
            estimator: Estimator::PlainMean,
        }
    }

    pub fn with_estimator(mut self, estimator: Estimator) -> Self {
        self.estimator = estimator;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_count < 2 {
            return Err(Error::InvalidParameter(
                "quadrature needs at least 2 samples".into(),
            ));
        }
        if let Estimator::MedianOfMeans { blocks } = self.estimator {
            if blocks < 2 || blocks > self.sample_count {
                return Err(Error::InvalidParameter(format!(
                    "median-of-means needs 2 <= blocks <= N, got {blocks}"
                )));
            }
        }
        Ok(())
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self::new(Self::DEFAULT_SAMPLES, 0)
    }
}

/// A Monte Carlo value with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, stderr: 0.0 }
    }

    pub fn from_samples(samples: &[f64], estimator: Estimator) -> Self {
        match estimator {
            Estimator::PlainMean => plain_mean(samples),
            Estimator::MedianOfMeans { blocks } => median_of_means(samples, blocks),
        }
    }

    /// Standard error of the difference of two independent estimates.
    pub fn combined_stderr(&self, other: &Estimate) -> f64 {
        self.stderr.hypot(other.stderr)
    }
}

fn plain_mean(samples: &[f64]) -> Estimate {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return Estimate::exact(mean);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Estimate {
        value: mean,
        stderr: (var / n).sqrt(),
    }
}

fn median_of_means(samples: &[f64], blocks: usize) -> Estimate {
    let blocks = blocks.clamp(1, samples.len().max(1));
    let size = samples.len() / blocks;
    let mut means: Vec<f64> = (0..blocks)
        .map(|b| {
            let chunk = &samples[b * size..(b + 1) * size];
            chunk.iter().sum::<f64>() / size as f64
        })
        .collect();
    let spread = plain_mean(&means).stderr;
    means.sort_by(|a, b| a.total_cmp(b));
    let value = if blocks % 2 == 1 {
        means[blocks / 2]
    } else {
        0.5 * (means[blocks / 2 - 1] + means[blocks / 2])
    };
    // asymptotic efficiency of the median relative to the mean
    Estimate {
        value,
        stderr: spread * (std::f64::consts::PI / 2.0).sqrt(),
    }
}

/// Evaluates `f(rng, t)` for `t` in `0..count`, in index order.
pub fn sample_values<F>(count: usize, sampler: &SeededSampler, f: F) -> Vec<f64>
where
    F: Fn(&mut ChaCha8Rng, usize) -> f64 + Sync,
{
    (0..count)
        .into_par_iter()
        .with_min_len(256)
        .map(|t| {
            let mut rng = sampler.stream(t as u64);
            f(&mut rng, t)
        })
        .collect()
}

/// Monte Carlo estimate of `E[f]` under the configured estimator.
pub fn integrate<F>(q: &QuadratureSpec, f: F) -> Result<Estimate>
where
    F: Fn(&mut ChaCha8Rng, usize) -> f64 + Sync,
{
    q.validate()?;
    let values = sample_values(q.sample_count, &q.sampler, f);
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "integrand produced a non-finite value".into(),
        ));
    }
    Ok(Estimate::from_samples(&values, q.estimator))
}

/// Chunked map-fold over sample indices with an ordered merge.
///
/// `fold` consumes one sample into an accumulator; `merge` combines two
/// accumulators. Chunks are merged left to right, so the result is
/// bit-identical for any thread count.
pub fn fold_samples<A, I, F, M>(
    count: usize,
    sampler: &SeededSampler,
    init: I,
    fold: F,
    merge: M,
) -> A
where
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, &mut ChaCha8Rng, usize) + Sync,
    M: Fn(A, A) -> A,
{
    let chunks = count.div_ceil(CHUNK);
    let partials: Vec<A> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = init();
            let end = ((c + 1) * CHUNK).min(count);
            for t in c * CHUNK..end {
                let mut rng = sampler.stream(t as u64);
                fold(&mut acc, &mut rng, t);
            }
            acc
        })
        .collect();
    partials.into_iter().fold(init(), merge)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn uniform_mean_within_three_stderr() {
        let q = QuadratureSpec::new(20_000, 3);
        let est = integrate(&q, |rng, _| rng.gen::<f64>()).unwrap();
        assert!((est.value - 0.5).abs() < 3.0 * est.stderr);
        // stderr of U(0,1) mean is sqrt(1/12 / N)
        let expected = (1.0 / 12.0 / 20_000.0f64).sqrt();
        assert!((est.stderr / expected - 1.0).abs() < 0.05);
    }

    #[test]
    fn median_of_means_tracks_mean() {
        let q = QuadratureSpec::new(16_000, 4)
            .with_estimator(Estimator::MedianOfMeans { blocks: 16 });
        let est = integrate(&q, |rng, _| rng.gen::<f64>()).unwrap();
        assert!((est.value - 0.5).abs() < 4.0 * est.stderr);
    }

    #[test]
    fn rejects_tiny_budget() {
        let q = QuadratureSpec::new(1, 0);
        assert!(integrate(&q, |_, _| 1.0).is_err());
    }

    #[test]
    fn fold_is_deterministic_and_complete() {
        let s = SeededSampler::new(11);
        let run = || {
            fold_samples(
                10_000,
                &s,
                || (0usize, 0.0f64),
                |acc, rng, _| {
                    acc.0 += 1;
                    acc.1 += rng.gen::<f64>();
                },
                |a, b| (a.0 + b.0, a.1 + b.1),
            )
        };
        let a = run();
        let b = run();
        assert_eq!(a.0, 10_000);
        assert_eq!(a.1.to_bits(), b.1.to_bits());
    }
}
