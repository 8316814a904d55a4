//! Mean/std and the inter-quartile mean with a seeded percentile bootstrap.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_BOOTSTRAP: usize = 2000;

/// Below this many scores the IQM degenerates and the plain mean is used.
pub const MIN_IQM_SAMPLES: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("no scores")]
    Empty,
    #[error("bootstrap needs at least one resample")]
    NoResamples,
    #[error("scores must be finite")]
    NonFinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IqmEstimate {
    pub iqm: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Too few scores for an IQM; `iqm` and the interval are for the plain mean.
    pub plain_mean: bool,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population standard deviation (divides by n).
pub fn std_dev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn iqm_sorted(s: &[f64]) -> f64 {
    // Each sorted value owns the unit interval [i, i+1); keep the mass inside [n/4, 3n/4].
    let n = s.len() as f64;
    let (lo, hi) = (n / 4.0, 3.0 * n / 4.0);
    let mut total = 0.0;
    for (i, x) in s.iter().enumerate() {
        let w = (hi.min(i as f64 + 1.0) - lo.max(i as f64)).max(0.0);
        total += w * x;
    }
    total / (hi - lo)
}

/// Mean of the middle half with fractional weights at the cut points.
/// Equals dropping n/4 values at each end when 4 divides n.
pub fn iqm(xs: &[f64]) -> Result<f64, StatsError> {
    check(xs)?;
    Ok(iqm_sorted(&sorted(xs)))
}

fn check(xs: &[f64]) -> Result<(), StatsError> {
    if xs.is_empty() {
        return Err(StatsError::Empty);
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    Ok(())
}

/// Linear-interpolated percentile of sorted data, q in [0, 100].
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let rank = q / 100.0 * (sorted.len() - 1) as f64;
    let (i, j) = (rank.floor() as usize, rank.ceil() as usize);
    sorted[i] + (sorted[j] - sorted[i]) * (rank - i as f64)
}

/// IQM with a 95% percentile-bootstrap interval. Deterministic in `seed`
/// and independent of the order of `xs`.
pub fn iqm_ci(xs: &[f64], n_bootstrap: usize, seed: u64) -> Result<IqmEstimate, StatsError> {
    check(xs)?;
    let xs = &sorted(xs)[..];
    if n_bootstrap == 0 {
        return Err(StatsError::NoResamples);
    }
    let plain_mean = xs.len() < MIN_IQM_SAMPLES;
    let stat = |s: &mut Vec<f64>| {
        if plain_mean {
            mean(s)
        } else {
            s.sort_by(f64::total_cmp);
            iqm_sorted(s)
        }
    };
    let point = stat(&mut xs.to_vec());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buf = vec![0.0; xs.len()];
    let mut boot: Vec<f64> = (0..n_bootstrap)
        .map(|_| {
            for b in buf.iter_mut() {
                *b = xs[rng.random_range(0..xs.len())];
            }
            stat(&mut buf)
        })
        .collect();
    boot.sort_by(f64::total_cmp);
    Ok(IqmEstimate {
        iqm: point,
        ci_low: percentile(&boot, 2.5).min(point),
        ci_high: percentile(&boot, 97.5).max(point),
        plain_mean,
    })
}
