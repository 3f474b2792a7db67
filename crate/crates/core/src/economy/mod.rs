//! The basis economy: agents, the within-step market sequence and the
//! aggregate statistics.
//!
//! One call to [`EconomyState::step`] runs, in order: firm decisions, labour
//! market, credit market, capital market, production, consumption market,
//! settlement (including bankruptcy and entry) and aggregate statistics.
//!
//! Money is held as household deposits, firm cash (`assets`) and bank equity,
//! with loans as the bank's claim on firms. `deposits + assets + equity -
//! loans` is constant across steps; [`EconomyState::step`] panics if it drifts.

mod accounting;
mod capital;
mod consumption;
mod credit;
mod labour;
mod production;
mod stats;

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::heuristic::{self, HeuristicInputs};
use crate::math::ceil_count;
use crate::rng::{stream_rng, Stream};
use crate::{Error, ModelParams};

pub use self::stats::{average_price, gdp};

/// Relative tolerance of the money-conservation check.
const INTEGRITY_TOLERANCE: f64 = 1e-6;
/// Share of the workforce the initial firms try to employ.
const INITIAL_EMPLOYMENT: f64 = 0.85;
/// Initial firm cash in units of the initial wage bill.
const INITIAL_ASSET_STEPS: f64 = 20.0;
const INITIAL_DEPOSITS: f64 = 1.0;
const INITIAL_PRICE: f64 = 1.0;
const K_MARKUP: f64 = 0.0;
/// Largest `ln(price / average)` a C-firm may post. Households spend their
/// leftover budget at any price, so an unchecked price can compound to infinity.
pub const MAX_LOG_PRICE_DELTA: f64 = 30.0;

/// A (price, target output) pair emitted by every C-firm policy each step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirmDecision {
    pub next_price: f64,
    pub next_target_output: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Employer {
    CFirm(usize),
    KFirm(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Household {
    pub id: usize,
    pub is_capitalist: bool,
    pub employer: Option<Employer>,
    /// Income received at the last settlement.
    pub income: f64,
    pub deposits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Loan {
    pub principal: f64,
    pub outstanding: f64,
    pub remaining_steps: u32,
    /// Step during which the loan was granted; repayment starts the step after.
    pub issued: u64,
}

impl Loan {
    /// Principal share plus interest on what is still outstanding.
    pub fn instalment(&self, duration: u32, rate: f64) -> (f64, f64) {
        let amortization = if self.remaining_steps <= 1 {
            self.outstanding
        } else {
            (self.principal / duration as f64).min(self.outstanding)
        };
        (amortization, rate * self.outstanding)
    }
}

/// Per-step cash flows of a firm, reset when decisions are applied.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Flows {
    pub revenue: f64,
    pub wage_bill: f64,
    pub investment: f64,
    pub instalments: f64,
    pub interest: f64,
    pub dividends: f64,
    pub new_loans: f64,
    pub nominal_profit: f64,
}

/// Consumption-good firm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CFirm {
    pub id: usize,
    pub price: f64,
    pub target_output: f64,
    pub output: f64,
    pub demand: f64,
    pub sales: f64,
    /// Cash; can turn non-positive during settlement, which triggers exit.
    pub assets: f64,
    pub capital: f64,
    pub workers: Vec<usize>,
    pub loans: Vec<Loan>,
    /// Last settled profit deflated by the price index.
    pub profit: f64,
    pub bankrupt: bool,
    pub flows: Flows,
    /// Capital units the firm wants to buy this step.
    pub planned_investment: f64,
}

impl CFirm {
    pub fn workforce(&self) -> usize {
        self.workers.len()
    }

    pub fn debt(&self) -> f64 {
        self.loans.iter().map(|l| l.outstanding).sum()
    }
}

/// Capital-good firm. Capital goods are storable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KFirm {
    pub id: usize,
    pub price: f64,
    pub target_output: f64,
    /// Produced this step.
    pub output: f64,
    pub inventory: f64,
    /// Inventory on offer when the capital market opened.
    pub supply: f64,
    pub demand: f64,
    pub sales: f64,
    pub assets: f64,
    pub workers: Vec<usize>,
    pub loans: Vec<Loan>,
    pub profit: f64,
    pub bankrupt: bool,
    pub flows: Flows,
}

impl KFirm {
    pub fn workforce(&self) -> usize {
        self.workers.len()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BankState {
    pub total_deposits: f64,
    pub outstanding_loans: f64,
    pub equity: f64,
}

/// Everything that evolves during a simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EconomyState {
    pub params: ModelParams,
    pub seed: u64,
    pub step: u64,
    pub households: Vec<Household>,
    pub cfirms: Vec<CFirm>,
    pub kfirms: Vec<KFirm>,
    pub bank: BankState,
    /// Sales-weighted mean C-firm price of the last step.
    pub avg_price: f64,
    /// Sales-weighted mean K-firm price of the last step.
    pub avg_kprice: f64,
    pub base_price: f64,
    pub price_index: f64,
    pub nominal_gdp: f64,
    pub real_gdp: f64,
    pub consumption: f64,
    /// Multiplier on both consumption propensities; 1 outside demand shocks.
    pub propensity_scale: f64,
    /// When set, the next step's average price becomes the price-index base.
    pub rebase_pending: bool,
    /// `deposits + assets + equity - loans` at initialization.
    pub money_supply: f64,
}

/// Per-firm record inside a [`MetricsFrame`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirmMetrics {
    pub price: f64,
    pub sales: f64,
    pub output: f64,
    pub demand: f64,
    /// Real profit.
    pub profit: f64,
    /// Filled by the harness for RL-controlled firms.
    pub reward: Option<f64>,
    pub assets: f64,
    pub bankrupt: bool,
}

/// Observables of one step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsFrame {
    pub step: u64,
    pub firms: Vec<FirmMetrics>,
    pub avg_price: f64,
    pub nominal_gdp: f64,
    pub real_gdp: f64,
    pub price_index: f64,
    pub employment: usize,
    pub consumption: f64,
}

impl MetricsFrame {
    pub fn log_price_delta(&self, firm: usize) -> f64 {
        crate::math::ln(self.firms[firm].price / self.avg_price)
    }
}

/// Scratch buffers reused across phases.
pub(crate) struct Scratch {
    pub picks: Vec<usize>,
}

impl EconomyState {
    pub fn new(params: ModelParams, seed: u64) -> Result<Self, Error> {
        params.validate()?;
        let mut rng = stream_rng(seed, 0, Stream::Init);
        let p = &params;

        let goods_labour = 1.0 / p.labour_productivity
            + p.capital_depreciation / (p.capital_productivity * p.labour_productivity);
        let target =
            INITIAL_EMPLOYMENT * p.num_workers as f64 / p.num_cfirms as f64 / goods_labour;
        let capital = ceil_count(target / p.capital_productivity) as f64;
        let c_workers = ceil_count(target / p.labour_productivity);
        let c_assets = INITIAL_ASSET_STEPS * p.wage * c_workers as f64;

        // Prices start scattered around 1: with every price equal the pricing
        // rule can only ever move quantities.
        let spread = 0.5 * p.price_adjustment_max;
        let cfirms: Vec<CFirm> = (0..p.num_cfirms)
            .map(|id| CFirm {
                id,
                price: INITIAL_PRICE * (1.0 + rng.gen_range(-spread..=spread)),
                target_output: target,
                output: target,
                demand: target,
                sales: target,
                assets: c_assets,
                capital,
                workers: Vec::new(),
                loans: Vec::new(),
                profit: 0.0,
                bankrupt: false,
                flows: Flows::default(),
                planned_investment: 0.0,
            })
            .collect();

        let k_target = p.capital_depreciation * capital * p.num_cfirms as f64 / p.num_kfirms as f64;
        let k_workers = ceil_count(k_target / p.labour_productivity);
        let kfirms: Vec<KFirm> = (0..p.num_kfirms)
            .map(|id| KFirm {
                id,
                price: INITIAL_PRICE * (1.0 + rng.gen_range(-spread..=spread)),
                target_output: k_target,
                output: k_target,
                inventory: k_target,
                supply: k_target,
                demand: k_target,
                sales: k_target,
                assets: INITIAL_ASSET_STEPS * p.wage * k_workers as f64,
                workers: Vec::new(),
                loans: Vec::new(),
                profit: 0.0,
                bankrupt: false,
                flows: Flows::default(),
            })
            .collect();

        let households: Vec<Household> = (0..p.num_households())
            .map(|id| Household {
                id,
                is_capitalist: id >= p.num_workers,
                employer: None,
                income: 0.0,
                deposits: INITIAL_DEPOSITS,
            })
            .collect();

        let mut state = Self {
            params,
            seed,
            step: 0,
            households,
            cfirms,
            kfirms,
            bank: BankState::default(),
            avg_price: INITIAL_PRICE,
            avg_kprice: INITIAL_PRICE,
            base_price: INITIAL_PRICE,
            price_index: 1.0,
            nominal_gdp: 0.0,
            real_gdp: 0.0,
            consumption: 0.0,
            propensity_scale: 1.0,
            rebase_pending: false,
            money_supply: 0.0,
        };

        // Initial hires in random order, each employed worker starts with one wage of income.
        let mut order: Vec<usize> = (0..state.params.num_workers).collect();
        order.shuffle(&mut rng);
        let mut next = order.into_iter();
        'fill: for f in 0..state.cfirms.len() {
            for _ in 0..c_workers {
                let Some(h) = next.next() else { break 'fill };
                state.cfirms[f].workers.push(h);
                state.households[h].employer = Some(Employer::CFirm(f));
            }
        }
        'fill_k: for f in 0..state.kfirms.len() {
            for _ in 0..k_workers {
                let Some(h) = next.next() else { break 'fill_k };
                state.kfirms[f].workers.push(h);
                state.households[h].employer = Some(Employer::KFirm(f));
            }
        }
        let wage = state.params.wage;
        for h in &mut state.households {
            if h.employer.is_some() {
                h.income = wage;
            }
        }
        state.bank.total_deposits = state.households.iter().map(|h| h.deposits).sum();
        state.money_supply = state.money_in_circulation();
        Ok(state)
    }

    /// `deposits + firm cash + bank equity - loans`.
    pub fn money_in_circulation(&self) -> f64 {
        let deposits: f64 = self.households.iter().map(|h| h.deposits).sum();
        let cash: f64 = self.cfirms.iter().map(|f| f.assets).sum::<f64>()
            + self.kfirms.iter().map(|f| f.assets).sum::<f64>();
        deposits + cash + self.bank.equity - self.bank.outstanding_loans
    }

    /// Current (price, target) of every C-firm; feeding these back is a no-op decision.
    pub fn current_decisions(&self) -> Vec<FirmDecision> {
        self.cfirms
            .iter()
            .map(|f| FirmDecision {
                next_price: f.price,
                next_target_output: f.target_output,
            })
            .collect()
    }

    pub fn heuristic_inputs(&self, firm: usize) -> HeuristicInputs {
        HeuristicInputs::from_cfirm(&self.cfirms[firm], self.avg_price)
    }

    /// Makes the next step's average price the base of the price index.
    pub fn request_price_rebase(&mut self) {
        self.rebase_pending = true;
    }

    pub fn employment(&self) -> usize {
        self.cfirms.iter().map(|f| f.workforce()).sum::<usize>()
            + self.kfirms.iter().map(|f| f.workforce()).sum::<usize>()
    }

    /// Advances one step and returns its metrics.
    ///
    /// # Panics
    ///
    /// If money is created or destroyed by more than a relative `1e-6`.
    pub fn step(&mut self, decisions: &[FirmDecision]) -> Result<MetricsFrame, Error> {
        if decisions.len() != self.cfirms.len() {
            return Err(Error::DecisionCount {
                expected: self.cfirms.len(),
                got: decisions.len(),
            });
        }
        if let Some((firm, d)) = decisions
            .iter()
            .enumerate()
            .find(|(_, d)| !(d.next_price > 0.0) || !d.next_price.is_finite())
        {
            return Err(Error::BadPrice {
                firm,
                price: d.next_price,
            });
        }
        let t = self.step + 1;
        let mut scratch = Scratch { picks: Vec::new() };

        self.apply_decisions(decisions, t);
        labour::labour_market(self, &mut stream_rng(self.seed, t, Stream::Labour), &mut scratch);
        credit::credit_market(self, t);
        capital::capital_market(self, &mut stream_rng(self.seed, t, Stream::Capital), &mut scratch);
        production::production(self);
        consumption::consumption_market(
            self,
            &mut stream_rng(self.seed, t, Stream::Consumption),
            &mut scratch,
        );
        stats::update_prices(self);
        let frame = accounting::settle_accounting(self, t);
        stats::update_aggregates(self);
        self.step = t;
        self.check_integrity();

        Ok(MetricsFrame {
            step: t,
            avg_price: self.avg_price,
            nominal_gdp: self.nominal_gdp,
            real_gdp: self.real_gdp,
            price_index: self.price_index,
            employment: self.employment(),
            consumption: self.consumption,
            firms: frame,
        })
    }

    fn apply_decisions(&mut self, decisions: &[FirmDecision], t: u64) {
        let ceiling = self.avg_price * crate::math::exp(MAX_LOG_PRICE_DELTA);
        for (f, d) in self.cfirms.iter_mut().zip(decisions) {
            f.price = d.next_price.min(ceiling);
            f.target_output = d.next_target_output.max(0.0);
            f.flows = Flows::default();
            f.bankrupt = false;
        }
        // K-firms follow the same trend-following rule against the K-price
        // average. Capital goods keep, so the rule sets the units on offer and
        // production only tops up what is left in inventory.
        let mut rng = stream_rng(self.seed, t, Stream::CapitalPricing);
        let (rho, eta_bar) = (self.params.quantity_adjustment, self.params.price_adjustment_max);
        let avg_kprice = self.avg_kprice;
        let price_floor = (1.0 + K_MARKUP) * self.params.wage / self.params.labour_productivity;
        for k in &mut self.kfirms {
            let inputs = HeuristicInputs {
                price: k.price,
                output: k.supply,
                target: k.target_output + k.inventory,
                firm_stock: k.supply - k.demand,
                price_delta: k.price - avg_kprice,
            };
            let d = heuristic::heuristic_decide(&inputs, rho, eta_bar, &mut rng);
            // Machines are never sold below labour cost plus a normal markup.
            k.price = d.next_price.max(price_floor);
            k.target_output = (d.next_target_output - k.inventory).max(0.0);
            k.flows = Flows::default();
            k.bankrupt = false;
        }
    }

    fn check_integrity(&self) {
        let money = self.money_in_circulation();
        // Relative to the gross balance sheet so large loan books don't trip on rounding.
        let gross: f64 = self.households.iter().map(|h| h.deposits.abs()).sum::<f64>()
            + self.cfirms.iter().map(|f| f.assets.abs()).sum::<f64>()
            + self.kfirms.iter().map(|f| f.assets.abs()).sum::<f64>()
            + self.bank.equity.abs()
            + self.bank.outstanding_loans.abs();
        let scale = gross.max(self.money_supply.abs()).max(1.0);
        assert!(
            (money - self.money_supply).abs() <= INTEGRITY_TOLERANCE * scale,
            "accounting integrity violated at step {}: money {} vs {}",
            self.step,
            money,
            self.money_supply
        );
    }
}
