//! Seeded, chunk-deterministic Monte Carlo probability estimation.
//!
//! Reproducibility contract: every random draw in this crate comes from a
//! ChaCha substream addressed by `(seed, lane, index)`. The lane/index pair is
//! mapped injectively onto the generator's 64-bit stream id, so substreams
//! never collide and results are bit-identical for a fixed `(seed, chunks)`
//! regardless of how many threads execute the chunks.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// A seeded, chunk-reproducible Monte Carlo probability estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MCEstimate {
    /// Mean of the indicator over all draws.
    pub mean: f64,
    /// Binomial standard error sqrt(mean (1-mean) / n).
    pub stderr: f64,
    pub n_samples: u64,
    pub seed: u64,
    pub chunks: u64,
}

/// Deterministic substream for `(seed, lane, index)`.
pub fn substream(seed: u64, lane: u32, index: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((lane as u64) << 32) | index as u64);
    rng
}

/// Lane reserved for the generic chunked estimator below.
const ESTIMATOR_LANE: u32 = 0;

/// Estimates P(indicator(sample) = true) with `n_samples` draws split across
/// `chunks` substreams. Chunk `c` draws from `substream(seed, 0, c)`; partial
/// counts are reduced in chunk order.
pub fn estimate_probability<T, S, I>(
    sampler: S,
    indicator: I,
    n_samples: u64,
    seed: u64,
    chunks: u64,
) -> Result<MCEstimate>
where
    T: Send,
    S: Fn(&mut ChaCha8Rng) -> Result<T> + Sync,
    I: Fn(&T) -> bool + Sync,
{
    if n_samples == 0 {
        return Err(Error::Domain("n_samples must be at least 1".into()));
    }
    if chunks == 0 || chunks > n_samples || chunks > u32::MAX as u64 {
        return Err(Error::Domain(format!(
            "chunks must lie in 1..=min(n_samples, 2^32-1), got {chunks}"
        )));
    }

    let base = n_samples / chunks;
    let extra = n_samples % chunks;

    let partials: Vec<Result<u64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = substream(seed, ESTIMATOR_LANE, c as u32);
            let size = base + u64::from(c < extra);
            let mut hits = 0u64;
            for rep in 0..size {
                let sample = sampler(&mut rng).map_err(|e| Error::Mc {
                    chunk: c,
                    replicate: rep,
                    source: Box::new(e),
                })?;
                if indicator(&sample) {
                    hits += 1;
                }
            }
            Ok(hits)
        })
        .collect();

    let mut total = 0u64;
    for partial in partials {
        total += partial?;
    }

    let mean = total as f64 / n_samples as f64;
    Ok(MCEstimate {
        mean,
        stderr: (mean * (1.0 - mean) / n_samples as f64).sqrt(),
        n_samples,
        seed,
        chunks,
    })
}

/// How a probability in a [`BiasReport`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::ClosedForm => "closed-form",
            Method::Quadrature => "quadrature",
            Method::MonteCarlo => "monte-carlo",
        })
    }
}

/// A bias estimate tagged with the method that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiasReport {
    pub value: f64,
    pub method: Method,
    /// Monte Carlo standard error; `None` for closed-form and quadrature values.
    pub stderr: Option<f64>,
}

impl BiasReport {
    pub fn closed_form(value: f64) -> Self {
        BiasReport { value, method: Method::ClosedForm, stderr: None }
    }

    pub fn quadrature(value: f64) -> Self {
        BiasReport { value, method: Method::Quadrature, stderr: None }
    }

    pub fn monte_carlo(est: &MCEstimate) -> Self {
        BiasReport {
            value: est.mean,
            method: Method::MonteCarlo,
            stderr: Some(est.stderr),
        }
    }
}
