//! Batched Monte-Carlo estimation.
//!
//! Samples are split into [`BATCHES`] batches, each drawn from its own
//! sub-stream. Standard errors come from the spread of batch means, which stays
//! meaningful for heavy-tailed integrands where the per-sample variance is a
//! poor guide.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{Generator, RngStream};

pub const BATCHES: usize = 32;
pub const MIN_SAMPLES: usize = 100;

/// A Monte-Carlo estimate with its batch standard error and provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
    pub stream: u64,
}

impl McEstimate {
    /// `|estimate - target| <= k * stderr`
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.estimate - target).abs() <= k * self.stderr
    }

    pub fn scaled(self, c: f64) -> Self {
        McEstimate {
            estimate: self.estimate * c,
            stderr: self.stderr * c.abs(),
            ..self
        }
    }

    /// Delta-method propagation through `x -> x^e`.
    pub fn powf(self, e: f64) -> Self {
        let v = self.estimate.powf(e);
        McEstimate {
            estimate: v,
            stderr: (e * v / self.estimate).abs() * self.stderr,
            ..self
        }
    }
}

/// Per-batch means of `k` jointly sampled quantities.
#[derive(Debug, Clone)]
pub struct BatchMeans {
    /// `means[b][j]`: mean of quantity `j` over batch `b`.
    pub means: Vec<Vec<f64>>,
    pub samples: usize,
    pub rng: RngStream,
}

pub(crate) fn check_samples(samples: usize) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(Error::domain(format!(
            "at least {MIN_SAMPLES} Monte-Carlo samples are required, got {samples}"
        )));
    }
    Ok(())
}

/// Runs `draw` `samples` times, accumulating `k` quantities per draw.
///
/// `draw` writes its `k` values into the provided slice. Batches run in parallel
/// but each has a fixed sub-stream, so results do not depend on scheduling.
pub fn batch_means<F>(samples: usize, k: usize, rng: RngStream, draw: F) -> Result<BatchMeans>
where
    F: Fn(&mut Generator, &mut [f64]) + Sync,
{
    check_samples(samples)?;
    let base = samples / BATCHES;
    let extra = samples % BATCHES;
    let means: Vec<Vec<f64>> = (0..BATCHES)
        .into_par_iter()
        .map(|b| {
            let count = base + usize::from(b < extra);
            let mut gen = rng.substream(b as u64).generator();
            let mut acc = vec![0.0; k];
            let mut buf = vec![0.0; k];
            for _ in 0..count {
                draw(&mut gen, &mut buf);
                for (a, v) in acc.iter_mut().zip(&buf) {
                    *a += v;
                }
            }
            acc.iter().map(|a| a / count as f64).collect()
        })
        .collect();
    Ok(BatchMeans { means, samples, rng })
}

impl BatchMeans {
    fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.means.iter().map(move |m| m[j])
    }

    fn wrap(&self, estimate: f64, stderr: f64) -> McEstimate {
        McEstimate {
            estimate,
            stderr,
            samples: self.samples,
            seed: self.rng.seed,
            stream: self.rng.stream,
        }
    }

    /// Mean of quantity `j`.
    pub fn mean(&self, j: usize) -> McEstimate {
        let b = self.means.len() as f64;
        let m = self.column(j).sum::<f64>() / b;
        let var = self.column(j).map(|x| (x - m) * (x - m)).sum::<f64>() / (b - 1.0);
        self.wrap(m, (var / b).sqrt())
    }

    /// Ratio of means `E[num] / E[den]` with a delta-method standard error.
    pub fn ratio(&self, num: usize, den: usize) -> McEstimate {
        let b = self.means.len() as f64;
        let mn = self.column(num).sum::<f64>() / b;
        let md = self.column(den).sum::<f64>() / b;
        let r = mn / md;
        let var = self
            .means
            .iter()
            .map(|m| {
                let e = m[num] - r * m[den];
                e * e
            })
            .sum::<f64>()
            / (b - 1.0);
        self.wrap(r, (var / b).sqrt() / md.abs())
    }
}

/// Mean of a single scalar integrand.
pub fn mean_of<F>(samples: usize, rng: RngStream, f: F) -> Result<McEstimate>
where
    F: Fn(&mut Generator) -> f64 + Sync,
{
    Ok(batch_means(samples, 1, rng, |g, out| out[0] = f(g))?.mean(0))
}
