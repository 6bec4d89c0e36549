//! Mean-field Gaussian Bayesian neural network over terminal encodings,
//! trained by variational inference with the reparameterization trick.
//!
//! The network is `input -> tanh(hidden) -> output`. Every weight and bias
//! has a Gaussian posterior `N(mu, softplus(rho)^2)`; the prior is `N(0, 1)`.

mod encode;
mod info_gain;

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::env::DataPool;
use crate::error::{Error, Result};
use crate::seed::{rng, Rng};

pub use encode::{encode_all, encode_terminal, Encoding, ENCODING_DIM};
pub use info_gain::terminal_info_gain;
pub use info_gain::{node_info_gains, InfoGainTable};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BnnConfig {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub output_dim: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Weight of KL(posterior || prior) relative to the mean per-sample
    /// negative log likelihood.
    pub kl_weight: f64,
    /// Standard deviation of the Gaussian likelihood.
    pub sigma_obs: f64,
    /// Initial posterior standard deviation of every weight.
    pub init_sigma: f64,
}

impl BnnConfig {
    pub fn small() -> Self {
        BnnConfig {
            input_dim: ENCODING_DIM,
            hidden_dim: 32,
            output_dim: 1,
            batch_size: 500,
            learning_rate: 1e-2,
            kl_weight: 1e-3,
            sigma_obs: 0.5,
            init_sigma: 0.1,
        }
    }

    pub fn large() -> Self {
        BnnConfig {
            hidden_dim: 64,
            batch_size: 1000,
            ..Self::small()
        }
    }

    pub fn num_params(&self) -> usize {
        self.hidden_dim * self.input_dim
            + self.hidden_dim
            + self.output_dim * self.hidden_dim
            + self.output_dim
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [self.input_dim, self.hidden_dim, self.output_dim, self.batch_size];
        if dims.contains(&0) {
            return Err(Error::InvalidConfig("network sizes must be positive".into()));
        }
        if self.output_dim != 1 {
            return Err(Error::InvalidConfig("the reward model has a single output".into()));
        }
        for (name, v) in [
            ("learning_rate", self.learning_rate),
            ("sigma_obs", self.sigma_obs),
            ("init_sigma", self.init_sigma),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        if !(self.kl_weight.is_finite() && self.kl_weight >= 0.0) {
            return Err(Error::InvalidConfig("kl_weight must be nonnegative".into()));
        }
        Ok(())
    }
}

impl Default for BnnConfig {
    fn default() -> Self {
        Self::small()
    }
}

pub fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Inverse of [`softplus`].
pub fn softplus_inv(y: f64) -> f64 {
    if y > 30.0 {
        y
    } else {
        y.exp_m1().ln()
    }
}

/// Variational parameters in one flat layout: W1 (hidden x input, row
/// major), b1, W2 (output x hidden, row major), b2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BnnPosterior {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub output_dim: usize,
    pub mu: Vec<f64>,
    pub rho: Vec<f64>,
}

/// Gradient of the training loss with respect to `mu` and `rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub mu: Vec<f64>,
    pub rho: Vec<f64>,
}

/// Training example: an encoded input and a reward target.
pub type Example = (Vec<f64>, f64);

struct Layout {
    w1: usize,
    b1: usize,
    w2: usize,
    b2: usize,
}

impl BnnPosterior {
    /// Means drawn from `N(0, 1/fan_in)`, all standard deviations equal to
    /// `config.init_sigma`.
    pub fn init(config: &BnnConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut r = rng(seed);
        let mut mu = Vec::with_capacity(config.num_params());
        let s1 = (1.0 / config.input_dim as f64).sqrt();
        let s2 = (1.0 / config.hidden_dim as f64).sqrt();
        for _ in 0..config.hidden_dim * config.input_dim {
            mu.push(s1 * r.sample::<f64, _>(StandardNormal));
        }
        mu.extend(std::iter::repeat_n(0.0, config.hidden_dim));
        for _ in 0..config.output_dim * config.hidden_dim {
            mu.push(s2 * r.sample::<f64, _>(StandardNormal));
        }
        mu.extend(std::iter::repeat_n(0.0, config.output_dim));
        let rho = vec![softplus_inv(config.init_sigma); mu.len()];
        Ok(BnnPosterior {
            input_dim: config.input_dim,
            hidden_dim: config.hidden_dim,
            output_dim: config.output_dim,
            mu,
            rho,
        })
    }

    pub fn num_params(&self) -> usize {
        self.mu.len()
    }

    pub fn sigma(&self) -> Vec<f64> {
        self.rho.iter().map(|&r| softplus(r)).collect()
    }

    fn layout(&self) -> Layout {
        let w1 = 0;
        let b1 = w1 + self.hidden_dim * self.input_dim;
        let w2 = b1 + self.hidden_dim;
        let b2 = w2 + self.output_dim * self.hidden_dim;
        Layout { w1, b1, w2, b2 }
    }

    pub fn check_shape(&self, other: &BnnPosterior) -> Result<()> {
        let dims = (self.input_dim, self.hidden_dim, self.output_dim);
        let other_dims = (other.input_dim, other.hidden_dim, other.output_dim);
        if dims != other_dims
            || self.mu.len() != other.mu.len()
            || self.rho.len() != other.rho.len()
        {
            return Err(Error::ShapeMismatch(format!(
                "{dims:?} with {} parameters vs {other_dims:?} with {}",
                self.mu.len(),
                other.mu.len()
            )));
        }
        Ok(())
    }

    fn check_consistent(&self) -> Result<()> {
        let expected = self.hidden_dim * self.input_dim
            + self.hidden_dim
            + self.output_dim * self.hidden_dim
            + self.output_dim;
        if self.mu.len() != expected || self.rho.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "expected {expected} parameters, got {} means and {} scales",
                self.mu.len(),
                self.rho.len()
            )));
        }
        Ok(())
    }

    /// Weights `mu + sigma * noise`.
    pub fn weights(&self, noise: &[f64]) -> Vec<f64> {
        self.mu
            .iter()
            .zip(&self.rho)
            .zip(noise)
            .map(|((&m, &r), &e)| m + softplus(r) * e)
            .collect()
    }

    pub fn draw_noise(&self, rng: &mut Rng) -> Vec<f64> {
        (0..self.num_params())
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect()
    }

    fn forward(&self, w: &[f64], x: &[f64], hidden: &mut [f64]) -> f64 {
        let l = self.layout();
        for (j, h) in hidden.iter_mut().enumerate() {
            let row = &w[l.w1 + j * self.input_dim..l.w1 + (j + 1) * self.input_dim];
            let pre: f64 = row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + w[l.b1 + j];
            *h = pre.tanh();
        }
        w[l.w2..l.w2 + self.hidden_dim]
            .iter()
            .zip(hidden.iter())
            .map(|(a, b)| a * b)
            .sum::<f64>()
            + w[l.b2]
    }

    /// Network output for one fixed weight draw.
    pub fn output(&self, w: &[f64], x: &[f64]) -> f64 {
        let mut hidden = vec![0.0; self.hidden_dim];
        self.forward(w, x, &mut hidden)
    }

    /// Output with every weight at its posterior mean.
    pub fn mean_output(&self, x: &[f64]) -> f64 {
        self.output(&self.mu, x)
    }

    /// Monte-Carlo predictive mean over `samples` weight draws.
    pub fn predictive_mean(&self, x: &[f64], samples: usize, seed: u64) -> f64 {
        let mut r = rng(seed);
        let total: f64 = (0..samples)
            .map(|_| self.output(&self.weights(&self.draw_noise(&mut r)), x))
            .sum();
        total / samples as f64
    }

    /// KL(posterior || N(0, 1)) summed over parameters.
    pub fn kl_to_prior(&self) -> f64 {
        self.mu
            .iter()
            .zip(&self.rho)
            .map(|(&m, &r)| {
                let s = softplus(r);
                -s.ln() + 0.5 * (s * s + m * m) - 0.5
            })
            .sum()
    }

    /// Training loss (negative ELBO per example) and its gradient, for the
    /// weight draw determined by `noise`:
    ///
    /// mean over batch of `-log N(target | output, sigma_obs^2)`
    /// plus `kl_weight * KL(q || prior)`.
    pub fn loss_and_grad(
        &self,
        batch: &[Example],
        kl_weight: f64,
        sigma_obs: f64,
        noise: &[f64],
    ) -> Result<(f64, Gradient)> {
        if batch.is_empty() {
            return Err(Error::Empty("training batch"));
        }
        let groups = group_batch(batch);
        self.grouped_loss_and_grad(&groups, batch.len() as f64, kl_weight, sigma_obs, noise)
    }

    fn grouped_loss_and_grad(
        &self,
        groups: &[Group<'_>],
        n: f64,
        kl_weight: f64,
        sigma_obs: f64,
        noise: &[f64],
    ) -> Result<(f64, Gradient)> {
        self.check_consistent()?;
        if noise.len() != self.num_params() {
            return Err(Error::LengthMismatch {
                expected: self.num_params(),
                actual: noise.len(),
            });
        }
        let l = self.layout();
        let w = self.weights(noise);
        let mut gw = vec![0.0; w.len()];
        let mut hidden = vec![0.0; self.hidden_dim];
        let var = sigma_obs * sigma_obs;
        let mut nll = 0.0;
        for g in groups {
            if g.x.len() != self.input_dim {
                return Err(Error::ShapeMismatch(format!(
                    "input has {} features, network expects {}",
                    g.x.len(),
                    self.input_dim
                )));
            }
            let y = self.forward(&w, g.x, &mut hidden);
            // sum over the group of (y - t)^2 = count y^2 - 2 y sum_t + sum_t2
            nll += (g.count * y * y - 2.0 * y * g.sum + g.sum_sq) / (2.0 * var);
            let dy = (g.count * y - g.sum) / (var * n);
            gw[l.b2] += dy;
            for j in 0..self.hidden_dim {
                gw[l.w2 + j] += dy * hidden[j];
                let dpre = dy * w[l.w2 + j] * (1.0 - hidden[j] * hidden[j]);
                gw[l.b1 + j] += dpre;
                let row = l.w1 + j * self.input_dim;
                for (k, &xk) in g.x.iter().enumerate() {
                    gw[row + k] += dpre * xk;
                }
            }
        }
        let loss = nll / n + sigma_obs.ln() + HALF_LN_2PI + kl_weight * self.kl_to_prior();

        let mut grad = Gradient {
            mu: vec![0.0; w.len()],
            rho: vec![0.0; w.len()],
        };
        for i in 0..w.len() {
            let s = softplus(self.rho[i]);
            let ds = sigmoid(self.rho[i]);
            grad.mu[i] = gw[i] + kl_weight * self.mu[i];
            grad.rho[i] = (gw[i] * noise[i] + kl_weight * (s - 1.0 / s)) * ds;
        }
        Ok((loss, grad))
    }

    fn apply(&mut self, grad: &Gradient, lr: f64) {
        for (m, g) in self.mu.iter_mut().zip(&grad.mu) {
            *m -= lr * g;
        }
        for (r, g) in self.rho.iter_mut().zip(&grad.rho) {
            *r -= lr * g;
        }
    }

    /// Per-layer means and standard deviations, the checkpoint format.
    pub fn checkpoint(&self) -> Checkpoint {
        let l = self.layout();
        let sigma = self.sigma();
        let ranges = [
            ("w1", l.w1..l.b1),
            ("b1", l.b1..l.w2),
            ("w2", l.w2..l.b2),
            ("b2", l.b2..self.mu.len()),
        ];
        Checkpoint {
            input_dim: self.input_dim,
            hidden_dim: self.hidden_dim,
            output_dim: self.output_dim,
            layers: ranges
                .into_iter()
                .map(|(name, r)| CheckpointLayer {
                    name: name.to_string(),
                    mu: self.mu[r.clone()].to_vec(),
                    sigma: sigma[r].to_vec(),
                })
                .collect(),
        }
    }

    pub fn from_checkpoint(c: &Checkpoint) -> Result<Self> {
        let mut mu = Vec::new();
        let mut rho = Vec::new();
        for layer in &c.layers {
            if layer.mu.len() != layer.sigma.len() {
                return Err(Error::ShapeMismatch(format!("layer {} is ragged", layer.name)));
            }
            if layer.sigma.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
                return Err(Error::InvalidParameter(format!(
                    "layer {} has a nonpositive sigma",
                    layer.name
                )));
            }
            mu.extend_from_slice(&layer.mu);
            rho.extend(layer.sigma.iter().map(|&s| softplus_inv(s)));
        }
        let post = BnnPosterior {
            input_dim: c.input_dim,
            hidden_dim: c.hidden_dim,
            output_dim: c.output_dim,
            mu,
            rho,
        };
        post.check_consistent()?;
        Ok(post)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub output_dim: usize,
    pub layers: Vec<CheckpointLayer>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointLayer {
    pub name: String,
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
}

/// Examples sharing one input. With a single weight draw per step they share
/// the network output, so only target sums are needed.
struct Group<'a> {
    x: &'a [f64],
    count: f64,
    sum: f64,
    sum_sq: f64,
}

fn group_batch(batch: &[Example]) -> Vec<Group<'_>> {
    let mut index: std::collections::HashMap<Vec<u64>, usize> = Default::default();
    let mut groups: Vec<Group> = Vec::new();
    for (x, t) in batch {
        let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
        let i = *index.entry(key).or_insert_with(|| {
            groups.push(Group {
                x,
                count: 0.0,
                sum: 0.0,
                sum_sq: 0.0,
            });
            groups.len() - 1
        });
        groups[i].count += 1.0;
        groups[i].sum += t;
        groups[i].sum_sq += t * t;
    }
    groups
}

/// Draws `size` examples uniformly with replacement from every reward
/// observation in the pool. Returns an empty batch for an empty pool.
pub fn sample_batch(
    pool: &DataPool,
    encodings: &[Encoding],
    size: usize,
    rng: &mut Rng,
) -> Vec<Example> {
    let mut batch = Vec::with_capacity(size);
    for_each_sampled(pool, size, rng, |z, reward| {
        batch.push((encodings[z].to_vec(), reward))
    });
    batch
}

/// Per-terminal reward counts `[positive, negative]` of a uniformly drawn
/// batch. Consumes the generator exactly like [`sample_batch`], so training
/// on either form gives the same step.
pub fn sample_batch_counts(pool: &DataPool, size: usize, rng: &mut Rng) -> Vec<[u64; 2]> {
    let mut counts = vec![[0u64; 2]; pool.reward_counts.len()];
    for_each_sampled(pool, size, rng, |z, reward| {
        counts[z][usize::from(reward < 0.0)] += 1
    });
    counts
}

fn for_each_sampled(pool: &DataPool, size: usize, rng: &mut Rng, mut f: impl FnMut(usize, f64)) {
    let mut cumulative = Vec::with_capacity(2 * pool.reward_counts.len());
    let mut total = 0u64;
    for &[pos, neg] in &pool.reward_counts {
        total += pos;
        cumulative.push(total);
        total += neg;
        cumulative.push(total);
    }
    if total == 0 {
        return;
    }
    for _ in 0..size {
        let u = rng.random_range(0..total);
        let slot = cumulative.partition_point(|&c| c <= u);
        f(slot / 2, if slot % 2 == 0 { 1.0 } else { -1.0 });
    }
}

/// One gradient-descent step on the negative ELBO with a weight draw seeded
/// by `seed`. Returns the updated posterior and the loss before the step.
pub fn train_step(
    posterior: &BnnPosterior,
    batch: &[Example],
    config: &BnnConfig,
    seed: u64,
) -> Result<(BnnPosterior, f64)> {
    if batch.is_empty() {
        return Err(Error::Empty("training batch"));
    }
    step_on_groups(posterior, &group_batch(batch), batch.len() as f64, config, seed)
}

/// [`train_step`] on a batch given as per-terminal counts.
pub fn train_step_counts(
    posterior: &BnnPosterior,
    encodings: &[Encoding],
    counts: &[[u64; 2]],
    config: &BnnConfig,
    seed: u64,
) -> Result<(BnnPosterior, f64)> {
    if encodings.len() != counts.len() {
        return Err(Error::LengthMismatch {
            expected: encodings.len(),
            actual: counts.len(),
        });
    }
    let groups: Vec<Group<'_>> = encodings
        .iter()
        .zip(counts)
        .filter(|(_, c)| c[0] + c[1] > 0)
        .map(|(x, &[pos, neg])| Group {
            x,
            count: (pos + neg) as f64,
            sum: pos as f64 - neg as f64,
            sum_sq: (pos + neg) as f64,
        })
        .collect();
    if groups.is_empty() {
        return Err(Error::Empty("training batch"));
    }
    let n = groups.iter().map(|g| g.count).sum();
    step_on_groups(posterior, &groups, n, config, seed)
}

fn step_on_groups(
    posterior: &BnnPosterior,
    groups: &[Group<'_>],
    n: f64,
    config: &BnnConfig,
    seed: u64,
) -> Result<(BnnPosterior, f64)> {
    let noise = posterior.draw_noise(&mut rng(seed));
    let (loss, grad) =
        posterior.grouped_loss_and_grad(groups, n, config.kl_weight, config.sigma_obs, &noise)?;
    let mut next = posterior.clone();
    next.apply(&grad, config.learning_rate);
    Ok((next, loss))
}

/// Closed-form KL(after || before) between diagonal Gaussians.
pub fn gaussian_kl(after: &BnnPosterior, before: &BnnPosterior) -> Result<f64> {
    after.check_shape(before)?;
    Ok(after
        .mu
        .iter()
        .zip(&after.rho)
        .zip(before.mu.iter().zip(&before.rho))
        .map(|((&ma, &ra), (&mb, &rb))| {
            if ma == mb && ra == rb {
                return 0.0;
            }
            diag_kl(ma, softplus(ra), mb, softplus(rb))
        })
        .sum())
}

fn diag_kl(ma: f64, sa: f64, mb: f64, sb: f64) -> f64 {
    let d = ma - mb;
    // log(sb/sa) + (sa^2 + d^2)/(2 sb^2) - 1/2, written to stay >= 0
    let ratio = sa / sb;
    let term = 0.5 * (ratio * ratio - 1.0) - ratio.ln();
    (term.max(0.0)) + d * d / (2.0 * sb * sb)
}
