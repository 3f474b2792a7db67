//! Training and evaluation protocol.
//!
//! Every episode starts from a fresh economy. The first `burn_in_steps` steps
//! run with all C-firms on the heuristic; afterwards firms `0..num_rl_agents`
//! switch to Q-learning control for `sim_steps` more steps. Q-tables persist
//! across training episodes, the economy does not.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::analysis::{self, FirmSummary, GdpStats, StrategyLabel, StrategyThresholds};
use crate::economy::{EconomyState, FirmDecision, MetricsFrame};
use crate::heuristic;
use crate::math::powi;
use crate::rl::{self, ActionIndex, DiscreteState, PolicyMode, PolicySet, RLConfig};
use crate::rng::{stream_rng, Stream};
use crate::{ConfigError, Error, ModelParams};

/// Offset separating test-episode seeds from training seeds.
pub const TEST_SEED_OFFSET: u64 = 1_000_000;
/// Offset of impulse-response seeds.
pub const IRF_SEED_OFFSET: u64 = 2_000_000;

fn default_gdp_window() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub num_rl_agents: usize,
    pub train_episodes: usize,
    pub test_episodes: usize,
    /// Steps under RL control per episode.
    pub sim_steps: usize,
    /// Heuristic-only steps before RL agents take over.
    pub burn_in_steps: usize,
    pub base_seed: u64,
    /// Reuse `base_seed` for every training episode instead of `base_seed + tau`.
    #[serde(default)]
    pub fixed_training_seed: bool,
    /// Trailing window of the GDP statistics.
    #[serde(default = "default_gdp_window")]
    pub gdp_window: usize,
    pub model: ModelParams,
    pub rl: RLConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "default".into(),
            num_rl_agents: 1,
            train_episodes: 100,
            test_episodes: 20,
            sim_steps: 5000,
            burn_in_steps: 300,
            base_seed: 0,
            fixed_training_seed: false,
            gdp_window: default_gdp_window(),
            model: ModelParams::default(),
            rl: RLConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.model.validate()?;
        self.rl.validate()?;
        if self.num_rl_agents > self.model.num_cfirms {
            return Err(ConfigError::TooManyAgents {
                agents: self.num_rl_agents,
                firms: self.model.num_cfirms,
            });
        }
        for (field, value) in [
            ("train_episodes", self.train_episodes),
            ("test_episodes", self.test_episodes),
            ("sim_steps", self.sim_steps),
            ("burn_in_steps", self.burn_in_steps),
            ("gdp_window", self.gdp_window),
        ] {
            if value == 0 {
                return Err(ConfigError::NotPositive { field });
            }
        }
        Ok(())
    }

    pub fn episode_len(&self) -> usize {
        self.burn_in_steps + self.sim_steps
    }

    pub fn train_seed(&self, episode: usize) -> u64 {
        if self.fixed_training_seed {
            self.base_seed
        } else {
            self.base_seed.wrapping_add(episode as u64)
        }
    }

    pub fn test_seed(&self, k: usize) -> u64 {
        self.base_seed.wrapping_add(TEST_SEED_OFFSET + k as u64)
    }

    pub fn fresh_policies(&self) -> PolicySet {
        PolicySet::new(self.rl.policy_mode, self.num_rl_agents, &self.rl)
    }

    pub fn is_rl(&self, firm: usize) -> bool {
        firm < self.num_rl_agents
    }

    pub fn check_policies(&self, policies: &PolicySet) -> Result<(), Error> {
        if self.num_rl_agents > 0 && !policies.fits(self.num_rl_agents) {
            return Err(Error::PolicyMismatch(alloc::format!(
                "{} {} table(s) for {} agents",
                policies.tables.len(),
                policies.mode,
                self.num_rl_agents
            )));
        }
        let shape_ok = policies
            .tables
            .iter()
            .all(|t| t.n_states() == self.rl.n_states && t.n_actions() == self.rl.n_actions);
        if !shape_ok {
            return Err(Error::PolicyMismatch("table shape differs from the grid".into()));
        }
        Ok(())
    }
}

/// `max(0.9^(tau-1), 0.01)` for 1-based training episode `tau`.
pub fn epsilon_schedule(tau: usize) -> f64 {
    let decayed = powi(0.9, tau.saturating_sub(1).min(i32::MAX as usize) as i32);
    decayed.max(0.01)
}

/// A multiplicative demand shock on both consumption propensities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemandShock {
    /// First shocked step (1-based, same clock as [`MetricsFrame::step`]).
    pub at_step: u64,
    pub duration: u64,
    /// Relative increase, 0.3 for +30%.
    pub size: f64,
}

impl DemandShock {
    fn scale_at(&self, t: u64) -> f64 {
        if t >= self.at_step && t < self.at_step + self.duration {
            1.0 + self.size
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeOptions {
    pub seed: u64,
    pub epsilon: f64,
    /// Update Q-tables (training) or only act greedily on them (testing).
    pub learning: bool,
    pub shock: Option<DemandShock>,
}

impl EpisodeOptions {
    pub fn training(seed: u64, epsilon: f64) -> Self {
        Self {
            seed,
            epsilon,
            learning: true,
            shock: None,
        }
    }

    pub fn testing(seed: u64) -> Self {
        Self {
            seed,
            epsilon: 0.0,
            learning: false,
            shock: None,
        }
    }
}

/// Running means over the post-burn-in window of one episode.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTotals {
    pub rl_reward_sum: f64,
    pub rl_steps: u64,
    pub rl_bankruptcies: u64,
    pub heuristic_profit_sum: f64,
    pub heuristic_steps: u64,
}

impl EpisodeTotals {
    pub fn mean_rl_reward(&self) -> Option<f64> {
        (self.rl_steps > 0).then(|| self.rl_reward_sum / self.rl_steps as f64)
    }

    pub fn mean_heuristic_profit(&self) -> Option<f64> {
        (self.heuristic_steps > 0).then(|| self.heuristic_profit_sum / self.heuristic_steps as f64)
    }
}

struct Pending {
    state: DiscreteState,
    action: ActionIndex,
}

/// Runs one episode, passing every frame to `sink` as it is produced.
///
/// With `learning` set, each RL agent makes one epsilon-greedy choice and one
/// Q-update per post-burn-in step, in agent-id order. Without it the agents
/// act greedily and no table is touched.
pub fn run_episode_with<F: FnMut(&MetricsFrame)>(
    cfg: &ExperimentConfig,
    policies: &mut PolicySet,
    opts: &EpisodeOptions,
    mut sink: F,
) -> Result<EpisodeTotals, Error> {
    cfg.validate()?;
    cfg.check_policies(policies)?;
    let mut state = EconomyState::new(cfg.model.clone(), opts.seed)?;
    let rl_cfg = &cfg.rl;
    let n_agents = cfg.num_rl_agents;
    let burn_in = cfg.burn_in_steps as u64;
    let total = cfg.episode_len() as u64;
    let epsilon = if opts.learning { opts.epsilon } else { 0.0 };
    let (rho, eta_bar) = (cfg.model.quantity_adjustment, cfg.model.price_adjustment_max);

    let mut decisions: Vec<FirmDecision> = Vec::with_capacity(cfg.model.num_cfirms);
    let mut pending: Vec<Pending> = Vec::with_capacity(n_agents);
    let mut totals = EpisodeTotals::default();

    for t in 1..=total {
        let rl_active = t > burn_in && n_agents > 0;
        if t == burn_in + 1 {
            state.request_price_rebase();
        }
        state.propensity_scale = opts.shock.map_or(1.0, |s| s.scale_at(t));

        let mut pricing = stream_rng(opts.seed, t, Stream::Pricing);
        let mut policy_rng = stream_rng(opts.seed, t, Stream::Policy);
        decisions.clear();
        pending.clear();
        for (i, firm) in state.cfirms.iter().enumerate() {
            if rl_active && i < n_agents {
                let s = rl_cfg.discretize_observation(&rl::observe(firm, state.avg_price));
                let a = rl::select_action(policies.table(i), s, epsilon, &mut policy_rng);
                decisions.push(rl::apply_action(firm.price, firm.target_output, rl_cfg.action_pair(a)));
                pending.push(Pending { state: s, action: a });
            } else {
                let inputs = heuristic::HeuristicInputs::from_cfirm(firm, state.avg_price);
                decisions.push(heuristic::heuristic_decide(&inputs, rho, eta_bar, &mut pricing));
            }
        }

        let mut frame = state.step(&decisions)?;

        for (i, p) in pending.iter().enumerate() {
            let m = &mut frame.firms[i];
            let reward = rl::compute_reward(m.profit, m.assets, rl_cfg.bankruptcy_penalty);
            m.reward = Some(reward);
            totals.rl_reward_sum += reward;
            totals.rl_steps += 1;
            totals.rl_bankruptcies += m.bankrupt as u64;
            if opts.learning {
                let next = rl_cfg.discretize_observation(&rl::observe(&state.cfirms[i], state.avg_price));
                rl::q_update(
                    policies.table_mut(i),
                    p.state,
                    p.action,
                    reward,
                    next,
                    rl_cfg.learning_rate,
                    rl_cfg.discount,
                );
            }
        }
        if t > burn_in {
            for m in frame.firms.iter().skip(n_agents) {
                totals.heuristic_profit_sum += m.profit;
                totals.heuristic_steps += 1;
            }
        }
        sink(&frame);
    }
    Ok(totals)
}

/// Runs one episode and returns all of its frames.
pub fn run_episode(
    cfg: &ExperimentConfig,
    policies: &mut PolicySet,
    opts: &EpisodeOptions,
) -> Result<Vec<MetricsFrame>, Error> {
    let mut frames = Vec::with_capacity(cfg.episode_len());
    run_episode_with(cfg, policies, opts, |f| frames.push(f.clone()))?;
    Ok(frames)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedPolicySet {
    pub policies: PolicySet,
    pub config: ExperimentConfig,
    pub final_epsilon: f64,
    pub episodes_trained: usize,
}

impl TrainedPolicySet {
    pub fn mode(&self) -> PolicyMode {
        self.policies.mode
    }
}

/// Per-episode point of the training curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub episode: usize,
    pub seed: u64,
    pub epsilon: f64,
    /// Mean per-step reward over the RL window, averaged over agents.
    pub mean_rl_reward: f64,
    pub mean_heuristic_profit: f64,
    pub rl_bankruptcies: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingOutcome {
    pub trained: TrainedPolicySet,
    pub curve: Vec<CurvePoint>,
}

/// Trains from empty tables over `train_episodes` episodes with seeds
/// `base_seed + tau` and epsilon from [`epsilon_schedule`].
pub fn train(cfg: &ExperimentConfig) -> Result<TrainingOutcome, Error> {
    train_with(cfg, |_| {})
}

/// [`train`] with a callback after every episode (progress reporting).
pub fn train_with<F: FnMut(&CurvePoint)>(cfg: &ExperimentConfig, mut progress: F) -> Result<TrainingOutcome, Error> {
    cfg.validate()?;
    let mut policies = cfg.fresh_policies();
    let mut curve = Vec::with_capacity(cfg.train_episodes);
    let mut epsilon = epsilon_schedule(1);
    if cfg.num_rl_agents > 0 {
        for tau in 1..=cfg.train_episodes {
            epsilon = epsilon_schedule(tau);
            let seed = cfg.train_seed(tau);
            let totals = run_episode_with(cfg, &mut policies, &EpisodeOptions::training(seed, epsilon), |_| {})?;
            let point = CurvePoint {
                episode: tau,
                seed,
                epsilon,
                mean_rl_reward: totals.mean_rl_reward().unwrap_or(0.0),
                mean_heuristic_profit: totals.mean_heuristic_profit().unwrap_or(0.0),
                rl_bankruptcies: totals.rl_bankruptcies,
            };
            progress(&point);
            curve.push(point);
        }
    }
    Ok(TrainingOutcome {
        trained: TrainedPolicySet {
            policies,
            config: cfg.clone(),
            final_epsilon: epsilon,
            episodes_trained: curve.len(),
        },
        curve,
    })
}

/// Results of one greedy test episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub episode: usize,
    pub seed: u64,
    /// Every C-firm, over the RL window.
    pub firms: Vec<FirmSummary>,
    /// Strategy of each RL agent.
    pub labels: Vec<StrategyLabel>,
    /// Median over heuristic firms of their median sales.
    pub heuristic_median_sales: f64,
    pub heuristic_mean_profit: f64,
    /// Mean per-step reward, averaged over agents.
    pub rl_mean_reward: Option<f64>,
    /// Sum over agents of each agent's undiscounted cumulative reward.
    pub rl_total_reward: f64,
    /// Sum over agents of the discounted return.
    pub rl_total_return: f64,
    pub rl_bankruptcies: u64,
    pub gdp_mean: f64,
    pub gdp_std: f64,
}

impl EpisodeSummary {
    /// Summarises an episode from its post-burn-in frames.
    pub fn from_frames(
        cfg: &ExperimentConfig,
        episode: usize,
        seed: u64,
        window: &[MetricsFrame],
        thresholds: &StrategyThresholds,
    ) -> Result<Self, Error> {
        let n_agents = cfg.num_rl_agents;
        let firms = (0..cfg.model.num_cfirms)
            .map(|i| analysis::summarize_firm(window, i))
            .collect::<Result<Vec<_>, _>>()?;
        let mut heuristic_sales: Vec<f64> = firms[n_agents..].iter().map(|s| s.median_sales).collect();
        let heuristic_median_sales = if heuristic_sales.is_empty() {
            0.0
        } else {
            analysis::median(&mut heuristic_sales)
        };
        let labels = firms[..n_agents]
            .iter()
            .map(|s| analysis::classify_strategy(s, heuristic_median_sales, thresholds))
            .collect();

        let mut rl_total_reward = 0.0;
        let mut rl_total_return = 0.0;
        let mut rl_bankruptcies = 0;
        let mut rewards = Vec::with_capacity(window.len());
        for i in 0..n_agents {
            rewards.clear();
            rewards.extend(window.iter().map(|f| f.firms[i].reward.unwrap_or(f.firms[i].profit)));
            rl_total_reward += rewards.iter().sum::<f64>();
            rl_total_return += rl::cumulative_return(&rewards, cfg.rl.discount);
            rl_bankruptcies += window.iter().filter(|f| f.firms[i].bankrupt).count() as u64;
        }
        let rl_mean_reward = (n_agents > 0)
            .then(|| firms[..n_agents].iter().map(|s| s.mean_reward).sum::<f64>() / n_agents as f64);
        let heuristic_count = cfg.model.num_cfirms - n_agents;
        let heuristic_mean_profit = if heuristic_count == 0 {
            0.0
        } else {
            firms[n_agents..].iter().map(|s| s.mean_reward).sum::<f64>() / heuristic_count as f64
        };

        let gdp: Vec<f64> = window.iter().map(|f| f.real_gdp).collect();
        let (gdp_mean, gdp_std) = analysis::window_moments(&gdp, cfg.gdp_window.min(gdp.len()))?;

        Ok(Self {
            episode,
            seed,
            firms,
            labels,
            heuristic_median_sales,
            heuristic_mean_profit,
            rl_mean_reward,
            rl_total_reward,
            rl_total_return,
            rl_bankruptcies,
            gdp_mean,
            gdp_std,
        })
    }
}

/// Mean and one standard deviation across episodes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Sample standard deviation; 0 for a single value.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self::default();
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            crate::math::sqrt(values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64)
        } else {
            0.0
        };
        Self { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub episodes: Vec<EpisodeSummary>,
    pub rl_mean_reward: Option<MeanStd>,
    pub rl_total_reward: MeanStd,
    pub heuristic_mean_profit: MeanStd,
    /// Per RL agent: median log price delta and median sales across episodes.
    pub agent_price_delta: Vec<MeanStd>,
    pub agent_sales: Vec<MeanStd>,
    pub gdp: GdpStats,
}

impl Evaluation {
    /// Reduces per-episode summaries (in episode order).
    pub fn from_episodes(n_agents: usize, mut episodes: Vec<EpisodeSummary>) -> Result<Self, Error> {
        if episodes.is_empty() {
            return Err(Error::Empty("no test episodes"));
        }
        episodes.sort_by_key(|e| e.episode);
        let collect = |f: &dyn Fn(&EpisodeSummary) -> f64| episodes.iter().map(f).collect::<Vec<f64>>();
        let rl_mean_reward = (n_agents > 0).then(|| MeanStd::of(&collect(&|e| e.rl_mean_reward.unwrap_or(0.0))));
        let agent_price_delta = (0..n_agents)
            .map(|i| MeanStd::of(&collect(&|e| e.firms[i].median_log_price_delta)))
            .collect();
        let agent_sales = (0..n_agents)
            .map(|i| MeanStd::of(&collect(&|e| e.firms[i].median_sales)))
            .collect();
        let gdp = analysis::combine_gdp_moments(
            &episodes.iter().map(|e| (e.gdp_mean, e.gdp_std)).collect::<Vec<_>>(),
        )?;
        Ok(Self {
            rl_mean_reward,
            rl_total_reward: MeanStd::of(&collect(&|e| e.rl_total_reward)),
            heuristic_mean_profit: MeanStd::of(&collect(&|e| e.heuristic_mean_profit)),
            agent_price_delta,
            agent_sales,
            gdp,
            episodes,
        })
    }
}

/// One greedy test episode, summarised. Frames are handed to `sink` first.
pub fn test_episode<F: FnMut(&[MetricsFrame])>(
    cfg: &ExperimentConfig,
    policies: &PolicySet,
    k: usize,
    thresholds: &StrategyThresholds,
    mut sink: F,
) -> Result<EpisodeSummary, Error> {
    let seed = cfg.test_seed(k);
    // Testing never writes to the tables; the clone keeps the caller's copy untouched.
    let mut tables = policies.clone();
    let frames = run_episode(cfg, &mut tables, &EpisodeOptions::testing(seed))?;
    sink(&frames);
    EpisodeSummary::from_frames(cfg, k, seed, &frames[cfg.burn_in_steps..], thresholds)
}

/// Runs `test_episodes` greedy episodes sequentially and aggregates them.
pub fn evaluate(cfg: &ExperimentConfig, policies: &PolicySet) -> Result<Evaluation, Error> {
    cfg.validate()?;
    cfg.check_policies(policies)?;
    let thresholds = StrategyThresholds::default();
    let episodes = (0..cfg.test_episodes)
        .map(|k| test_episode(cfg, policies, k, &thresholds, |_| {}))
        .collect::<Result<Vec<_>, _>>()?;
    Evaluation::from_episodes(cfg.num_rl_agents, episodes)
}
