//! Trend-following price/quantity rule of the bounded-rational firms.
//!
//! Prices move toward the market average when the firm is out of line with
//! its stock signal; target quantities chase last step's demand gap. The
//! (sign of stock, sign of price delta) quadrant selects exactly one of the
//! two adjustments:
//!
//! | stock `dY` | price delta `dP` | adjustment                  |
//! |------------|------------------|-----------------------------|
//! | `<= 0`     | `< 0`            | price `* (1 + eta)`         |
//! | `> 0`      | `>= 0`           | price `* (1 - eta)`         |
//! | `<= 0`     | `>= 0`           | target `Y + rho * abs(dY)`  |
//! | `> 0`      | `< 0`            | target `Y - rho * abs(dY)`  |

use rand::Rng;

use crate::economy::{CFirm, FirmDecision};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeuristicInputs {
    pub price: f64,
    pub output: f64,
    pub target: f64,
    /// Output minus demand.
    pub firm_stock: f64,
    /// Own price minus the market average price.
    pub price_delta: f64,
}

impl HeuristicInputs {
    pub fn from_cfirm(firm: &CFirm, avg_price: f64) -> Self {
        Self {
            price: firm.price,
            output: firm.output,
            target: firm.target_output,
            firm_stock: firm.output - firm.demand,
            price_delta: firm.price - avg_price,
        }
    }
}

/// Applies the rule with a fixed price adjustment `eta`.
pub fn adjust(inputs: &HeuristicInputs, rho: f64, eta: f64) -> FirmDecision {
    let stock_short = inputs.firm_stock <= 0.0;
    let cheap = inputs.price_delta < 0.0;
    let gap = inputs.firm_stock.abs();
    let (price, target) = match (stock_short, cheap) {
        (true, true) => (inputs.price * (1.0 + eta), inputs.target),
        (false, false) => (inputs.price * (1.0 - eta), inputs.target),
        (true, false) => (inputs.price, inputs.output + rho * gap),
        (false, true) => (inputs.price, inputs.output - rho * gap),
    };
    FirmDecision {
        next_price: price,
        next_target_output: target.max(0.0),
    }
}

/// Draws `eta ~ U(0, eta_bar)` and applies the rule.
pub fn heuristic_decide<R: Rng + ?Sized>(
    inputs: &HeuristicInputs,
    rho: f64,
    eta_bar: f64,
    rng: &mut R,
) -> FirmDecision {
    let eta = rng.gen::<f64>() * eta_bar;
    adjust(inputs, rho, eta)
}
