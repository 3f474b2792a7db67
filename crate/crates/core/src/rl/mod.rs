//! Tabular Q-learning firms.
//!
//! An RL firm observes the log-ratio of its price to the market average and
//! of its output to its demand, snaps both onto a grid of poles, picks a pair
//! of multiplicative log-adjustments for price and target output, and is
//! rewarded with its real profit, or a fixed penalty when it goes bankrupt.

mod qtable;

use serde::{Deserialize, Serialize};

pub use self::qtable::{q_update, select_action, ActionIndex, PolicySet, QTable};
use crate::economy::{CFirm, FirmDecision};
use crate::math::{exp, ln, powi};
use crate::ConfigError;

/// Floor applied to quantities before taking logarithms.
pub const QUANTITY_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyMode {
    /// All agents read and update one table.
    Shared,
    /// One table per agent.
    Independent,
}

impl core::fmt::Display for PolicyMode {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            PolicyMode::Shared => "shared",
            PolicyMode::Independent => "independent",
        })
    }
}

impl core::str::FromStr for PolicyMode {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "shared" => Ok(PolicyMode::Shared),
            "independent" => Ok(PolicyMode::Independent),
            other => Err(ConfigError::Invalid(alloc::format!(
                "unknown policy mode `{other}` (expected `shared` or `independent`)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RLConfig {
    /// Poles per observation dimension.
    pub n_states: usize,
    pub obs_min: f64,
    pub obs_max: f64,
    /// Grid points per action dimension.
    pub n_actions: usize,
    pub act_min: f64,
    pub act_max: f64,
    pub discount: f64,
    pub learning_rate: f64,
    pub bankruptcy_penalty: f64,
    pub policy_mode: PolicyMode,
}

impl Default for RLConfig {
    fn default() -> Self {
        Self {
            n_states: 21,
            obs_min: -1.0,
            obs_max: 1.0,
            n_actions: 7,
            act_min: -0.1,
            act_max: 0.1,
            discount: 0.95,
            learning_rate: 0.1,
            bankruptcy_penalty: -100.0,
            policy_mode: PolicyMode::Shared,
        }
    }
}

impl RLConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_states < 2 {
            return Err(ConfigError::Invalid("`n_states` must be at least 2".into()));
        }
        if self.n_actions < 2 {
            return Err(ConfigError::Invalid("`n_actions` must be at least 2".into()));
        }
        if !(self.obs_min < self.obs_max) {
            return Err(ConfigError::Invalid("`obs_min` must be below `obs_max`".into()));
        }
        if !(self.act_min < self.act_max) {
            return Err(ConfigError::Invalid("`act_min` must be below `act_max`".into()));
        }
        if !(0.0..1.0).contains(&self.discount) {
            return Err(ConfigError::OutOfRange {
                field: "discount",
                value: self.discount,
                range: "[0, 1)",
            });
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(ConfigError::OutOfRange {
                field: "learning_rate",
                value: self.learning_rate,
                range: "(0, 1]",
            });
        }
        if !self.bankruptcy_penalty.is_finite() {
            return Err(ConfigError::Invalid("`bankruptcy_penalty` must be finite".into()));
        }
        Ok(())
    }

    /// Log-adjustment of action grid point `k`.
    pub fn action_value(&self, k: usize) -> f64 {
        pole(k, self.n_actions, self.act_min, self.act_max)
    }

    pub fn action_pair(&self, a: ActionIndex) -> ActionPair {
        ActionPair {
            price: self.action_value(a.price),
            quantity: self.action_value(a.quantity),
        }
    }

    pub fn discretize_observation(&self, obs: &Observation) -> DiscreteState {
        DiscreteState {
            price_bin: discretize(obs.log_price_delta, self.n_states, self.obs_min, self.obs_max),
            stock_bin: discretize(obs.log_stock, self.n_states, self.obs_min, self.obs_max),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub log_price_delta: f64,
    pub log_stock: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiscreteState {
    pub price_bin: usize,
    pub stock_bin: usize,
}

/// Log-adjustments applied to price and target output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionPair {
    pub price: f64,
    pub quantity: f64,
}

/// `(ln(P_i / P_t), ln(Y_i / Y_d))` with both quantities floored at [`QUANTITY_FLOOR`].
pub fn observe(firm: &CFirm, avg_price: f64) -> Observation {
    observe_raw(firm.price, avg_price, firm.output, firm.demand)
}

pub fn observe_raw(price: f64, avg_price: f64, output: f64, demand: f64) -> Observation {
    Observation {
        log_price_delta: ln(price / avg_price),
        log_stock: ln(output.max(QUANTITY_FLOOR) / demand.max(QUANTITY_FLOOR)),
    }
}

/// Position of pole `k` among `n` equally spaced poles on `[lo, hi]`.
pub fn pole(k: usize, n: usize, lo: f64, hi: f64) -> f64 {
    if k + 1 == n {
        hi
    } else {
        lo + k as f64 * (hi - lo) / (n - 1) as f64
    }
}

/// Index of the pole nearest to `x`; ties go to the lower index and values
/// outside `[lo, hi]` snap to the end poles.
pub fn discretize(x: f64, n: usize, lo: f64, hi: f64) -> usize {
    if x.is_nan() || x <= lo {
        return 0;
    }
    if x >= hi {
        return n - 1;
    }
    let spacing = (hi - lo) / (n - 1) as f64;
    let below = (((x - lo) / spacing) as usize).min(n - 2);
    let d_low = (x - pole(below, n, lo, hi)).abs();
    let d_high = (pole(below + 1, n, lo, hi) - x).abs();
    if d_high < d_low {
        below + 1
    } else {
        below
    }
}

/// Multiplicative update in log space, `exp(ln P + a_P) = P * e^a_P` and
/// likewise for the target. A zero target is floored so it can grow again.
pub fn apply_action(price: f64, target: f64, action: ActionPair) -> FirmDecision {
    FirmDecision {
        next_price: price * exp(action.price),
        next_target_output: target.max(QUANTITY_FLOOR) * exp(action.quantity),
    }
}

/// Profit while solvent, the penalty otherwise.
pub fn compute_reward(profit: f64, assets: f64, penalty: f64) -> f64 {
    if assets > 0.0 {
        profit
    } else {
        penalty
    }
}

/// `sum_{t=1..T} gamma^t r_t`: the first reward is already discounted once.
pub fn cumulative_return(rewards: &[f64], gamma: f64) -> f64 {
    rewards
        .iter()
        .enumerate()
        .map(|(i, r)| powi(gamma, i as i32 + 1) * r)
        .sum()
}
