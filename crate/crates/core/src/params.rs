use serde::{Deserialize, Serialize};

use crate::ConfigError;

/// Structural constants of the economy.
///
/// Population sizes and the consumer search depth default to the reference
/// experiment (1000 workers, 100 C-firms, 20 K-firms, `search_depth` 5). The
/// remaining defaults are calibration choices for this implementation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub num_workers: usize,
    pub num_cfirms: usize,
    pub num_kfirms: usize,
    pub num_capitalists: usize,
    /// C-firms each household compares per step (`z_c`).
    pub search_depth: usize,
    /// Goods per worker.
    pub labour_productivity: f64,
    /// Goods per unit of capital.
    pub capital_productivity: f64,
    /// Share of the stock gap closed by a quantity adjustment (`rho`).
    pub quantity_adjustment: f64,
    /// Upper bound of the uniform price adjustment draw (`eta_bar`).
    pub price_adjustment_max: f64,
    pub wage: f64,
    pub propensity_income: f64,
    pub propensity_wealth: f64,
    /// Per-step interest on outstanding loan principal.
    pub interest_rate: f64,
    /// Share of positive pre-dividend profits paid out.
    pub dividend_rate: f64,
    pub capital_depreciation: f64,
    /// Entrant assets as a share of the mean surviving incumbent assets.
    pub entrant_asset_fraction: f64,
    /// Loans are repaid in this many equal principal instalments.
    pub loan_duration: u32,
    pub capital_search_depth: usize,
    pub labour_search_depth: usize,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            num_workers: 1000,
            num_cfirms: 100,
            num_kfirms: 20,
            num_capitalists: 50,
            search_depth: 5,
            labour_productivity: 0.5,
            capital_productivity: 1.0 / 3.0,
            quantity_adjustment: 0.9,
            price_adjustment_max: 0.1,
            wage: 1.0,
            propensity_income: 1.0,
            propensity_wealth: 0.05,
            interest_rate: 0.01,
            dividend_rate: 0.1,
            capital_depreciation: 0.02,
            entrant_asset_fraction: 0.5,
            loan_duration: 20,
            capital_search_depth: 2,
            labour_search_depth: 2,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let counts: [(&'static str, usize); 7] = [
            ("num_workers", self.num_workers),
            ("num_cfirms", self.num_cfirms),
            ("num_kfirms", self.num_kfirms),
            ("num_capitalists", self.num_capitalists),
            ("search_depth", self.search_depth),
            ("capital_search_depth", self.capital_search_depth),
            ("labour_search_depth", self.labour_search_depth),
        ];
        for (field, value) in counts {
            if value == 0 {
                return Err(ConfigError::NotPositive { field });
            }
        }
        if self.loan_duration == 0 {
            return Err(ConfigError::NotPositive {
                field: "loan_duration",
            });
        }
        for (field, value) in [
            ("labour_productivity", self.labour_productivity),
            ("capital_productivity", self.capital_productivity),
            ("wage", self.wage),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(ConfigError::NotPositive { field });
            }
        }
        check_range("quantity_adjustment", self.quantity_adjustment, false, true, "(0, 1]")?;
        check_range("price_adjustment_max", self.price_adjustment_max, false, false, "(0, 1)")?;
        check_range("propensity_income", self.propensity_income, false, true, "(0, 1]")?;
        check_range("propensity_wealth", self.propensity_wealth, false, true, "(0, 1]")?;
        check_range("interest_rate", self.interest_rate, true, false, "[0, 1)")?;
        check_range("dividend_rate", self.dividend_rate, true, true, "[0, 1]")?;
        check_range("capital_depreciation", self.capital_depreciation, true, true, "[0, 1]")?;
        check_range("entrant_asset_fraction", self.entrant_asset_fraction, false, true, "(0, 1]")?;
        if self.search_depth > self.num_cfirms {
            return Err(ConfigError::SearchTooDeep {
                field: "search_depth",
                depth: self.search_depth,
                available: self.num_cfirms,
            });
        }
        if self.capital_search_depth > self.num_kfirms {
            return Err(ConfigError::SearchTooDeep {
                field: "capital_search_depth",
                depth: self.capital_search_depth,
                available: self.num_kfirms,
            });
        }
        Ok(())
    }

    /// Workers plus capitalists.
    pub fn num_households(&self) -> usize {
        self.num_workers + self.num_capitalists
    }
}

fn check_range(
    field: &'static str,
    value: f64,
    closed_low: bool,
    closed_high: bool,
    range: &'static str,
) -> Result<(), ConfigError> {
    let low_ok = if closed_low { value >= 0.0 } else { value > 0.0 };
    let high_ok = if closed_high { value <= 1.0 } else { value < 1.0 };
    if low_ok && high_ok && value.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::OutOfRange {
            field,
            value,
            range,
        })
    }
}
