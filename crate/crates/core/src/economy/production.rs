use super::EconomyState;

/// Leontief output for C-firms; K-firms add labour-only output to inventory.
/// Consumption goods are produced fresh every step; nothing carries over.
pub(crate) fn production(state: &mut EconomyState) {
    let p = &state.params;
    for f in &mut state.cfirms {
        f.output = leontief(
            p.labour_productivity,
            f.workforce() as f64,
            p.capital_productivity,
            f.capital,
        );
        f.demand = 0.0;
        f.sales = 0.0;
    }
    for k in &mut state.kfirms {
        k.output = p.labour_productivity * k.workforce() as f64;
        k.inventory += k.output;
    }
}

pub fn leontief(labour_productivity: f64, workers: f64, capital_productivity: f64, capital: f64) -> f64 {
    (labour_productivity * workers).min(capital_productivity * capital)
}
