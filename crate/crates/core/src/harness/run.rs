use std::time::Instant;

use super::config::{ExperimentConfig, Variant};
use super::metrics::MetricsRow;
use crate::bnn::{
    encode_all, node_info_gains, sample_batch_counts, train_step_counts, BnnPosterior,
    InfoGainTable,
};
use crate::env::{interact, make_true_environment, sample_environment, DataPool, EnvironmentSpec};
use crate::error::{Error, Result};
use crate::eval::exploitability;
use crate::game::{GameTree, StrategyProfile};
use crate::seed::{derive_seed, derived_rng};
use crate::solver::{
    apply_dcfr_discount, augment_rewards, average_strategy, cfr_round, mccfr_os_round,
    random_policy, AugmentedRewards, SolverState,
};

/// Everything an experiment produces besides the metrics rows.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub rows: Vec<MetricsRow>,
    pub true_env: EnvironmentSpec,
    pub pool: DataPool,
    pub average: StrategyProfile,
    pub posterior: Option<BnnPosterior>,
    /// How many times the information-gain table was read to build rewards.
    pub info_gain_reads: u64,
    /// Per-terminal information-gain recomputations.
    pub info_gain_recomputed: u64,
    /// Total observations in the pool after each outer round.
    pub pool_sizes: Vec<u64>,
}

/// Seed of the hidden environment for a master seed. Variants run with the
/// same master seed face the same environment.
pub fn true_env_seed(master: u64) -> u64 {
    derive_seed(master, "true-env", 0)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<MetricsRow>> {
    Ok(run_experiment_report(config)?.rows)
}

pub fn run_experiment_report(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let tree = config.game.build();
    let true_env = make_true_environment(&tree, true_env_seed(config.seed));
    run_with_environment(config, &tree, true_env)
}

struct Model {
    posterior: BnnPosterior,
    gains: InfoGainTable,
    encodings: Vec<crate::bnn::Encoding>,
    loss: f64,
}

/// The outer learning loop against a given hidden environment.
pub fn run_with_environment(
    config: &ExperimentConfig,
    tree: &GameTree,
    true_env: EnvironmentSpec,
) -> Result<ExperimentReport> {
    config.validate()?;
    true_env.validate(tree)?;
    let seed = config.seed;
    let bnn_config = config.bnn_config();
    let cfr = config.cfr_params();
    let dcfr = config.dcfr_params();
    let started = Instant::now();

    let mut pool = DataPool::new(tree);
    let mut state = SolverState::new(tree);
    let mut model = if config.variant.uses_info_gain() {
        Some(Model {
            posterior: BnnPosterior::init(&bnn_config, derive_seed(seed, "bnn-init", 0))?,
            gains: InfoGainTable::new(tree.num_terminals()),
            encodings: encode_all(tree),
            loss: 0.0,
        })
    } else {
        None
    };
    let mut rows = Vec::new();
    let mut pool_sizes = Vec::with_capacity(config.outer_rounds as usize);
    let mut info_gain_reads = 0;

    for t in 1..=config.outer_rounds {
        let abort = |e: Error| Error::Aborted {
            round: t,
            source: Box::new(e),
        };
        let sampled = sample_environment(tree, &pool, derive_seed(seed, "posterior", t));

        let rewards = match model.as_mut() {
            Some(m) => {
                if pool.total_episodes() > 0 {
                    let mut batch_rng = derived_rng(seed, "bnn-batch", t);
                    for step in 0..config.bnn_steps_per_round {
                        let counts =
                            sample_batch_counts(&pool, bnn_config.batch_size, &mut batch_rng);
                        let noise_seed = derive_seed(
                            seed,
                            "bnn-noise",
                            t * config.bnn_steps_per_round as u64 + step as u64,
                        );
                        let (next, loss) = train_step_counts(
                            &m.posterior,
                            &m.encodings,
                            &counts,
                            &bnn_config,
                            noise_seed,
                        )
                        .map_err(abort)?;
                        m.posterior = next;
                        m.loss = loss;
                    }
                }
                m.gains = node_info_gains(
                    &m.posterior,
                    &pool,
                    &m.encodings,
                    &bnn_config,
                    &m.gains,
                    config.lambda,
                    config.stale_period,
                    derive_seed(seed, "info-gain-round", t),
                )
                .map_err(abort)?;
                info_gain_reads += 1;
                augment_rewards(&sampled.expected_rewards(), &m.gains, config.eta).map_err(abort)?
            }
            None => AugmentedRewards::plain(sampled.expected_rewards()),
        };

        for inner in 0..config.inner_rounds {
            match config.variant {
                Variant::MccfrOs => mccfr_os_round(
                    tree,
                    &sampled,
                    &rewards,
                    &mut state,
                    config.epsilon,
                    derive_seed(seed, "mccfr", t * config.inner_rounds as u64 + inner as u64),
                ),
                v => {
                    cfr_round(tree, &sampled, &rewards, &mut state, &cfr);
                    if v.discounted() {
                        let round = state.t;
                        apply_dcfr_discount(&mut state, round, &dcfr).map_err(abort)?;
                    }
                }
            }
        }

        let average = average_strategy(&state);
        let behaviour = if config.variant == Variant::Random {
            random_policy(tree, derive_seed(seed, "random-policy", t))
        } else {
            average
        };
        let trajectories = interact(
            tree,
            &true_env,
            &behaviour,
            config.episodes_per_round,
            derive_seed(seed, "interact", t),
        );
        pool.record(tree, &trajectories);
        pool_sizes.push(pool.total_episodes());

        if t % config.eval_every == 0 || t == config.outer_rounds {
            let expl = exploitability(tree, &true_env, &average_strategy(&state));
            let (mean_dkl, elbo) = model
                .as_ref()
                .map(|m| (m.gains.mean(), m.loss))
                .unwrap_or((0.0, 0.0));
            let ms = if config.record_timing {
                started.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            };
            rows.push(MetricsRow {
                round: t,
                exploitability: expl,
                episodes: pool.total_episodes(),
                mean_dkl,
                elbo,
                ms,
            });
        }
    }

    let info_gain_recomputed = model.as_ref().map(|m| m.gains.recomputed).unwrap_or(0);
    Ok(ExperimentReport {
        rows,
        true_env,
        pool,
        average: average_strategy(&state),
        posterior: model.map(|m| m.posterior),
        info_gain_reads,
        info_gain_recomputed,
        pool_sizes,
    })
}
