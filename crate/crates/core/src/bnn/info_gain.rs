use serde::{Deserialize, Serialize};

use super::{gaussian_kl, BnnConfig, BnnPosterior, Encoding, Group};
use crate::env::DataPool;
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng};

/// Cached per-terminal information gains and the rounds left before each
/// cached value is due for recomputation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoGainTable {
    pub values: Vec<f64>,
    pub wait: Vec<u32>,
    /// Total number of per-terminal recomputations performed so far.
    pub recomputed: u64,
}

impl InfoGainTable {
    pub fn new(num_terminals: usize) -> Self {
        InfoGainTable {
            values: vec![0.0; num_terminals],
            wait: vec![0; num_terminals],
            recomputed: 0,
        }
    }

    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            0.0
        } else {
            self.values.iter().sum::<f64>() / self.values.len() as f64
        }
    }
}

/// KL divergence between the posterior after and before one gradient step on
/// a single terminal's observed rewards. The step uses the likelihood term
/// only and the same learning rate as training.
pub fn terminal_info_gain(
    posterior: &BnnPosterior,
    x: &Encoding,
    counts: [u64; 2],
    config: &BnnConfig,
    seed: u64,
) -> Result<f64> {
    let [pos, neg] = counts;
    let n = (pos + neg) as f64;
    if n == 0.0 {
        return Ok(0.0);
    }
    let group = Group {
        x,
        count: n,
        sum: pos as f64 - neg as f64,
        sum_sq: n,
    };
    let noise = posterior.draw_noise(&mut rng(seed));
    let (_, grad) =
        posterior.grouped_loss_and_grad(&[group], n, 0.0, config.sigma_obs, &noise)?;
    let mut after = posterior.clone();
    after.apply(&grad, config.learning_rate);
    gaussian_kl(&after, posterior)
}

/// Refreshes `state` for the current round.
///
/// Terminals without observations get 0. Otherwise a terminal is recomputed
/// when its wait counter is 0; a fresh value at or above `lambda` keeps it
/// due every round, a value below `lambda` defers the next recomputation by
/// `stale_period` rounds. The noise of each recomputation is seeded from
/// `seed` and the terminal index.
#[allow(clippy::too_many_arguments)]
pub fn node_info_gains(
    posterior: &BnnPosterior,
    pool: &DataPool,
    encodings: &[Encoding],
    config: &BnnConfig,
    state: &InfoGainTable,
    lambda: f64,
    stale_period: u32,
    seed: u64,
) -> Result<InfoGainTable> {
    let n = pool.reward_counts.len();
    if encodings.len() != n || state.values.len() != n || state.wait.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: encodings.len().min(state.values.len()).min(state.wait.len()),
        });
    }
    if stale_period == 0 {
        return Err(Error::InvalidParameter("stale_period must be at least 1".into()));
    }
    let mut next = state.clone();
    #[allow(clippy::needless_range_loop)]
    for z in 0..n {
        if pool.observations(z) == 0 {
            next.values[z] = 0.0;
            next.wait[z] = 0;
            continue;
        }
        if state.wait[z] > 0 {
            next.wait[z] = state.wait[z] - 1;
            continue;
        }
        let d = terminal_info_gain(
            posterior,
            &encodings[z],
            pool.reward_counts[z],
            config,
            derive_seed(seed, "info-gain", z as u64),
        )?;
        next.values[z] = d;
        next.wait[z] = if d >= lambda { 0 } else { stale_period - 1 };
        next.recomputed += 1;
    }
    Ok(next)
}
