use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use cfrlab::env::{make_true_environment, EnvironmentSpec};
use cfrlab::eval::{best_response, regret_bound_report};
use cfrlab::files::{read_json, write_json};
use cfrlab::game::{dump_tree, GameKind, GameTree, Player};
use cfrlab::harness::{
    emit_metrics, run_experiment_report, run_with_environment, ExperimentConfig, ProfileFile,
    Variant,
};
use cfrlab::seed::derive_seed;
use cfrlab::solver::{
    apply_dcfr_discount, average_strategy, cfr_round, mccfr_os_round, AugmentedRewards,
    CfrParams, DcfrParams, SolverState,
};

#[derive(Parser)]
#[command(name = "cfrlab", version, about = "CFR with information-gain exploration in unknown poker environments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a game tree and write it in the text dump format.
    BuildGame {
        #[arg(long)]
        game: GameKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw a hidden environment for a game and write it as JSON.
    MakeEnv {
        #[arg(long)]
        game: GameKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Rewards proportional to chip payoffs instead of a random draw.
        #[arg(long)]
        chip_scaled: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one experiment from a config file and write its metrics.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Solve a game against a known environment, or learn it by interaction
    /// for the learning variants, and write the average strategy.
    Solve {
        #[arg(long)]
        game: GameKind,
        #[arg(long, value_enum)]
        variant: SolveVariant,
        #[arg(long)]
        rounds: u64,
        /// Environment JSON; a seeded draw when omitted.
        #[arg(long)]
        env: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write the solver state, for the bound report of `eval`.
        #[arg(long)]
        state_out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Exploitability and best-response values of a strategy file.
    Eval {
        #[arg(long)]
        strategy: PathBuf,
        #[arg(long)]
        true_env: PathBuf,
        /// Solver state written by `solve --state-out`; adds the bound report.
        #[arg(long)]
        state: Option<PathBuf>,
    },
}

#[derive(clap::Args, Default)]
struct Overrides {
    #[arg(long)]
    bnn_hidden: Option<usize>,
    #[arg(long)]
    bnn_batch: Option<usize>,
    /// Information-gain threshold below which recomputation is deferred.
    #[arg(long)]
    kl_threshold: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
}

impl Overrides {
    fn apply(&self, config: &mut ExperimentConfig) {
        if let Some(h) = self.bnn_hidden {
            config.bnn_hidden = Some(h);
        }
        if let Some(b) = self.bnn_batch {
            config.bnn_batch = Some(b);
        }
        if let Some(l) = self.kl_threshold {
            config.lambda = l;
        }
        if let Some(e) = self.eta {
            config.eta = e;
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolveVariant {
    Cfr,
    Dcfr,
    MccfrOs,
    Vcfr,
    Vdcfr,
    Naive,
    Random,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::BuildGame { game, out } => build_game(game, &out),
        Command::MakeEnv {
            game,
            seed,
            chip_scaled,
            out,
        } => {
            let tree = game.build();
            let env = if chip_scaled {
                EnvironmentSpec::chip_scaled(&tree)
            } else {
                make_true_environment(&tree, seed)
            };
            write_json(&out, &env)?;
            Ok(())
        }
        Command::Run {
            config,
            seed,
            out,
            overrides,
        } => run(&config, seed, &out, &overrides),
        Command::Solve {
            game,
            variant,
            rounds,
            env,
            seed,
            out,
            state_out,
            overrides,
        } => solve(game, variant, rounds, env.as_deref(), seed, &out, state_out.as_deref(), &overrides),
        Command::Eval {
            strategy,
            true_env,
            state,
        } => eval(&strategy, &true_env, state.as_deref()),
    }
}

fn build_game(game: GameKind, out: &Path) -> Result<()> {
    let tree = game.build();
    fs::write(out, dump_tree(&tree)?).with_context(|| format!("writing {}", out.display()))?;
    println!(
        "{}: {} nodes, {} infosets, {} terminals",
        tree.name(),
        tree.num_nodes(),
        tree.num_infosets(),
        tree.num_terminals()
    );
    Ok(())
}

fn run(config_path: &Path, seed: Option<u64>, out: &Path, overrides: &Overrides) -> Result<()> {
    let mut config = ExperimentConfig::load(config_path)
        .with_context(|| format!("loading {}", config_path.display()))?;
    if let Some(s) = seed {
        config.seed = s;
    }
    overrides.apply(&mut config);
    config.validate()?;
    fs::create_dir_all(out)?;
    let report = run_experiment_report(&config)?;
    emit_metrics(&report.rows, out.join("metrics.csv"))?;
    let tree = config.game.build();
    write_json(out.join("true_env.json"), &report.true_env)?;
    write_json(out.join("strategy.json"), &ProfileFile::new(&tree, &report.average))?;
    if let Some(posterior) = &report.posterior {
        write_json(out.join("posterior.json"), &posterior.checkpoint())?;
    }
    let last = report.rows.last().expect("at least one row");
    println!(
        "{} {} seed={} round={} exploitability={} episodes={}",
        config.game, config.variant, config.seed, last.round, last.exploitability, last.episodes
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn solve(
    game: GameKind,
    variant: SolveVariant,
    rounds: u64,
    env_path: Option<&Path>,
    seed: u64,
    out: &Path,
    state_out: Option<&Path>,
    overrides: &Overrides,
) -> Result<()> {
    if rounds == 0 {
        bail!("--rounds must be at least 1");
    }
    let tree = game.build();
    let env: EnvironmentSpec = match env_path {
        Some(p) => read_json(p).with_context(|| format!("reading {}", p.display()))?,
        None => make_true_environment(&tree, derive_seed(seed, "true-env", 0)),
    };
    env.validate(&tree)?;

    let learning = match variant {
        SolveVariant::Vcfr => Some(Variant::Vcfr),
        SolveVariant::Vdcfr => Some(Variant::Vdcfr),
        SolveVariant::Naive => Some(Variant::Naive),
        SolveVariant::Random => Some(Variant::Random),
        _ => None,
    };
    let average = match learning {
        Some(v) => {
            if state_out.is_some() {
                bail!("--state-out is only available for cfr, dcfr and mccfr-os");
            }
            let mut config = ExperimentConfig {
                game,
                variant: v,
                outer_rounds: rounds,
                eval_every: rounds,
                seed,
                ..Default::default()
            };
            overrides.apply(&mut config);
            run_with_environment(&config, &tree, env)?.average
        }
        None => {
            let state = solve_known(&tree, &env, variant, rounds, seed)?;
            if let Some(p) = state_out {
                write_json(p, &state)?;
            }
            average_strategy(&state)
        }
    };
    write_json(out, &ProfileFile::new(&tree, &average))?;
    Ok(())
}

fn solve_known(
    tree: &GameTree,
    env: &EnvironmentSpec,
    variant: SolveVariant,
    rounds: u64,
    seed: u64,
) -> Result<SolverState> {
    let rewards = AugmentedRewards::plain(env.expected_rewards());
    let mut state = SolverState::new(tree);
    let cfr = CfrParams::default();
    let dcfr = DcfrParams::default();
    let epsilon = ExperimentConfig::default().epsilon;
    for t in 1..=rounds {
        match variant {
            SolveVariant::MccfrOs => mccfr_os_round(
                tree,
                env,
                &rewards,
                &mut state,
                epsilon,
                derive_seed(seed, "mccfr", t),
            ),
            SolveVariant::Dcfr => {
                cfr_round(tree, env, &rewards, &mut state, &cfr);
                apply_dcfr_discount(&mut state, t, &dcfr)?;
            }
            _ => cfr_round(tree, env, &rewards, &mut state, &cfr),
        }
    }
    Ok(state)
}

fn eval(strategy: &Path, true_env: &Path, state: Option<&Path>) -> Result<()> {
    let file: ProfileFile =
        read_json(strategy).with_context(|| format!("reading {}", strategy.display()))?;
    let game: GameKind = file.game.parse()?;
    let tree = game.build();
    let profile = file.to_profile(&tree)?;
    let env: EnvironmentSpec =
        read_json(true_env).with_context(|| format!("reading {}", true_env.display()))?;
    env.validate(&tree)?;

    let br = Player::BOTH.map(|p| best_response(&tree, &env, &profile, p).value);
    let (rounds, bound, slack) = match state {
        Some(path) => {
            let state: SolverState = read_json(path)?;
            if state.regrets.len() != tree.num_infosets() {
                bail!("solver state does not belong to {}", tree.name());
            }
            let report = regret_bound_report(&state, &tree, &env)?;
            (
                report.rounds.to_string(),
                report.bound.to_string(),
                report.slack().to_string(),
            )
        }
        None => (String::new(), String::new(), String::new()),
    };
    println!("exploitability,br_player1,br_player2,rounds,bound,slack");
    println!("{},{},{},{rounds},{bound},{slack}", br[0] + br[1], br[0], br[1]);
    Ok(())
}
