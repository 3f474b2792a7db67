use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{DiscreteState, PolicyMode, RLConfig};

/// (price action, quantity action) grid indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ActionIndex {
    pub price: usize,
    pub quantity: usize,
}

/// Action values over (price bin, stock bin) x (price action, quantity action).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    n_states: usize,
    n_actions: usize,
    values: Vec<f64>,
    counts: Vec<u32>,
}

impl QTable {
    /// All-zero table.
    pub fn new(n_states: usize, n_actions: usize) -> Self {
        let len = n_states * n_states * n_actions * n_actions;
        Self {
            n_states,
            n_actions,
            values: vec![0.0; len],
            counts: vec![0; len],
        }
    }

    pub fn for_config(cfg: &RLConfig) -> Self {
        Self::new(cfg.n_states, cfg.n_actions)
    }

    /// Rebuilds a table from raw parts; `None` if the lengths do not match the shape.
    pub fn from_parts(n_states: usize, n_actions: usize, values: Vec<f64>, counts: Vec<u32>) -> Option<Self> {
        let len = n_states * n_states * n_actions * n_actions;
        (values.len() == len && counts.len() == len).then_some(Self {
            n_states,
            n_actions,
            values,
            counts,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    fn row(&self, s: DiscreteState) -> usize {
        let per_state = self.n_actions * self.n_actions;
        (s.price_bin * self.n_states + s.stock_bin) * per_state
    }

    fn index(&self, s: DiscreteState, a: ActionIndex) -> usize {
        self.row(s) + a.price * self.n_actions + a.quantity
    }

    pub fn get(&self, s: DiscreteState, a: ActionIndex) -> f64 {
        self.values[self.index(s, a)]
    }

    pub fn set(&mut self, s: DiscreteState, a: ActionIndex, v: f64) {
        let i = self.index(s, a);
        self.values[i] = v;
    }

    pub fn update_count(&self, s: DiscreteState, a: ActionIndex) -> u32 {
        self.counts[self.index(s, a)]
    }

    /// The n_A x n_A action values of one state.
    pub fn state_values(&self, s: DiscreteState) -> &[f64] {
        let r = self.row(s);
        &self.values[r..r + self.n_actions * self.n_actions]
    }

    pub fn max_value(&self, s: DiscreteState) -> f64 {
        self.state_values(s).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    fn action_at(&self, flat: usize) -> ActionIndex {
        ActionIndex {
            price: flat / self.n_actions,
            quantity: flat % self.n_actions,
        }
    }

    /// Greedy action; ties are broken uniformly at random.
    pub fn greedy<R: Rng + ?Sized>(&self, s: DiscreteState, rng: &mut R) -> ActionIndex {
        let values = self.state_values(s);
        let mut best = 0;
        let mut ties = 0u32;
        for (i, &v) in values.iter().enumerate() {
            if v > values[best] {
                best = i;
                ties = 1;
            } else if v == values[best] {
                ties += 1;
                // Reservoir sampling over the tied maximisers.
                if ties > 1 && rng.gen_range(0..ties) == 0 {
                    best = i;
                }
            }
        }
        self.action_at(best)
    }

    /// Order-sensitive 64-bit FNV-1a fingerprint of values and counts.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for b in bytes {
                h ^= *b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        eat(&(self.n_states as u64).to_le_bytes());
        eat(&(self.n_actions as u64).to_le_bytes());
        for v in &self.values {
            eat(&v.to_bits().to_le_bytes());
        }
        for c in &self.counts {
            eat(&c.to_le_bytes());
        }
        h
    }
}

/// Epsilon-greedy: a uniformly random action pair with probability `epsilon`,
/// the greedy one otherwise.
pub fn select_action<R: Rng + ?Sized>(q: &QTable, s: DiscreteState, epsilon: f64, rng: &mut R) -> ActionIndex {
    if rng.gen::<f64>() < epsilon {
        ActionIndex {
            price: rng.gen_range(0..q.n_actions),
            quantity: rng.gen_range(0..q.n_actions),
        }
    } else {
        q.greedy(s, rng)
    }
}

/// `Q(s,a) <- (1 - alpha) Q(s,a) + alpha (r + gamma max_a' Q(s',a'))`.
pub fn q_update(
    q: &mut QTable,
    s: DiscreteState,
    a: ActionIndex,
    reward: f64,
    next: DiscreteState,
    alpha: f64,
    gamma: f64,
) {
    let target = reward + gamma * q.max_value(next);
    let i = q.index(s, a);
    q.values[i] = (1.0 - alpha) * q.values[i] + alpha * target;
    q.counts[i] = q.counts[i].saturating_add(1);
}

/// The tables of a group of RL agents: one shared table, or one per agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySet {
    pub mode: PolicyMode,
    pub tables: Vec<QTable>,
}

impl PolicySet {
    pub fn new(mode: PolicyMode, num_agents: usize, cfg: &RLConfig) -> Self {
        let count = match mode {
            PolicyMode::Shared => 1,
            PolicyMode::Independent => num_agents,
        };
        Self {
            mode,
            tables: (0..count).map(|_| QTable::for_config(cfg)).collect(),
        }
    }

    /// Which table agent `agent` reads and writes.
    pub fn table_of(&self, agent: usize) -> usize {
        match self.mode {
            PolicyMode::Shared => 0,
            PolicyMode::Independent => agent,
        }
    }

    pub fn table(&self, agent: usize) -> &QTable {
        &self.tables[self.table_of(agent)]
    }

    pub fn table_mut(&mut self, agent: usize) -> &mut QTable {
        let i = self.table_of(agent);
        &mut self.tables[i]
    }

    /// Whether the set can drive `num_agents` agents.
    pub fn fits(&self, num_agents: usize) -> bool {
        match self.mode {
            PolicyMode::Shared => self.tables.len() == 1,
            PolicyMode::Independent => self.tables.len() == num_agents,
        }
    }

    pub fn fingerprint(&self) -> u64 {
        self.tables
            .iter()
            .fold(self.tables.len() as u64, |h, t| h.rotate_left(17) ^ t.fingerprint())
    }
}
