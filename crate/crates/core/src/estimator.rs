//! Finite counting runs: sampled histograms and parity estimates.
//!
//! Every grid point draws from its own ChaCha20 stream: the key comes from
//! the master seed and the stream id is the point index, so a histogram does
//! not depend on which thread produced it or in which order.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::experiment::{auto_cutoff, displaced_statistics, parity_sum};
use crate::fock::{PhasePoint, PhotonStatistics, DEFAULT_TAIL_TOL};
use crate::par::{map_indexed, Execution};
use crate::quasiprob::{ChannelParams, SignalSpec};
use crate::{Error, Result};

/// Recorded in scan metadata.
pub const RNG_ALGORITHM: &str =
    "ChaCha20 (rand_chacha 0.9); key = seed_from_u64(master_seed), stream = point_index";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingConfig {
    /// Counting intervals per grid point.
    pub intervals: u64,
    /// Metadata only: counts per interval are already fixed by the state.
    pub interval_duration_us: f64,
    pub master_seed: u64,
}

impl Default for CountingConfig {
    fn default() -> Self {
        Self {
            intervals: 8000,
            interval_duration_us: 40.0,
            master_seed: 0,
        }
    }
}

impl CountingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.intervals == 0 {
            return Err(Error::InvalidParameter("intervals must be >= 1".into()));
        }
        Ok(())
    }

    pub fn stream(&self, point_index: u64) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.master_seed);
        rng.set_stream(point_index);
        rng
    }
}

/// Photon-number histogram; trailing empty bins are dropped.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountHistogram {
    pub counts: Vec<u64>,
    pub total: u64,
}

impl CountHistogram {
    pub fn from_counts(mut counts: Vec<u64>) -> Self {
        while counts.len() > 1 && counts.last() == Some(&0) {
            counts.pop();
        }
        let total = counts.iter().sum();
        Self { counts, total }
    }

    pub fn mean(&self) -> f64 {
        let weighted: u64 = self.counts.iter().enumerate().map(|(n, c)| n as u64 * c).sum();
        weighted as f64 / self.total as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParityEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// Draws `config.intervals` photon numbers from `p` by inverse-CDF lookup.
pub fn sample_counts(p: &PhotonStatistics, config: &CountingConfig, point_index: u64) -> Result<CountHistogram> {
    config.validate()?;
    let deficit = p.deficit();
    if deficit > DEFAULT_TAIL_TOL {
        return Err(Error::DefectiveDistribution {
            deficit,
            tol: DEFAULT_TAIL_TOL,
        });
    }
    let cdf: Vec<f64> = p
        .probs()
        .iter()
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect();
    // sampling is conditioned on the retained support
    let total = *cdf.last().expect("statistics are non-empty");
    let last = cdf.len() - 1;
    let mut rng = config.stream(point_index);
    let mut counts = vec![0u64; cdf.len()];
    for _ in 0..config.intervals {
        let u = rng.random::<f64>() * total;
        let n = cdf.partition_point(|c| *c <= u).min(last);
        counts[n] += 1;
    }
    Ok(CountHistogram::from_counts(counts))
}

/// `(2/π)(N_even - N_odd)/N` with binomial standard error
/// `(2/π) sqrt((1 - x²)/N)`, `x = (N_even - N_odd)/N`.
pub fn estimate_parity(hist: &CountHistogram) -> Result<ParityEstimate> {
    if hist.total == 0 {
        return Err(Error::InvalidParameter("empty histogram".into()));
    }
    let (even, odd) = hist
        .counts
        .iter()
        .enumerate()
        .fold((0u64, 0u64), |(e, o), (n, c)| if n % 2 == 0 { (e + c, o) } else { (e, o + c) });
    let n = hist.total as f64;
    let x = (even as f64 - odd as f64) / n;
    Ok(ParityEstimate {
        value: 2.0 / PI * x,
        std_error: 2.0 / PI * ((1.0 - x * x).max(0.0) / n).sqrt(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepeatSummary {
    pub repeats: usize,
    pub exact: f64,
    pub mean: f64,
    /// Sample standard deviation of the estimates (n - 1 denominator).
    pub std: f64,
    /// Mean of the per-run analytic standard errors.
    pub mean_std_error: f64,
    /// `(mean - exact) / (mean_std_error / sqrt(repeats))`.
    pub z_score: f64,
    pub estimates: Vec<f64>,
}

/// Repeats a single grid point's counting run with independent streams and
/// summarizes the estimator against the exact parity sum.
pub fn repeat_study(
    spec: &SignalSpec,
    beta: PhasePoint,
    channel: &ChannelParams,
    config: &CountingConfig,
    repeats: usize,
) -> Result<RepeatSummary> {
    repeat_study_with(spec, beta, channel, config, repeats, Execution::default())
}

pub fn repeat_study_with(
    spec: &SignalSpec,
    beta: PhasePoint,
    channel: &ChannelParams,
    config: &CountingConfig,
    repeats: usize,
    execution: Execution,
) -> Result<RepeatSummary> {
    if repeats < 2 {
        return Err(Error::InvalidParameter("repeat_study needs at least 2 repeats".into()));
    }
    config.validate()?;
    let stats = displaced_statistics(spec, beta, channel, auto_cutoff(spec, beta, channel))?;
    let exact = parity_sum(&stats);
    let runs = map_indexed(repeats, execution, |r| {
        sample_counts(&stats, config, r as u64).and_then(|h| estimate_parity(&h))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let k = repeats as f64;
    let mean = runs.iter().map(|e| e.value).sum::<f64>() / k;
    let var = runs.iter().map(|e| (e.value - mean).powi(2)).sum::<f64>() / (k - 1.0);
    let mean_std_error = runs.iter().map(|e| e.std_error).sum::<f64>() / k;
    let offset = mean - exact;
    let z_score = if mean_std_error > 0.0 {
        offset / (mean_std_error / k.sqrt())
    } else if offset.abs() < 1e-15 {
        0.0
    } else {
        f64::INFINITY.copysign(offset)
    };
    Ok(RepeatSummary {
        repeats,
        exact,
        mean,
        std: var.sqrt(),
        mean_std_error,
        z_score,
        estimates: runs.iter().map(|e| e.value).collect(),
    })
}
