use super::EconomyState;

/// Sales-weighted mean price; the plain mean when nothing was sold.
pub fn average_price(prices: impl Iterator<Item = (f64, f64)> + Clone) -> f64 {
    let (mut weighted, mut volume, mut sum, mut n) = (0.0, 0.0, 0.0, 0usize);
    for (price, sales) in prices {
        weighted += price * sales;
        volume += sales;
        sum += price;
        n += 1;
    }
    if volume > 0.0 {
        weighted / volume
    } else if n > 0 {
        sum / n as f64
    } else {
        0.0
    }
}

/// (nominal, real) GDP from the value of goods sold and the price index.
pub fn gdp(value_sold: f64, price_index: f64) -> (f64, f64) {
    (value_sold, value_sold / price_index)
}

/// Average prices, price index and GDP once both markets have cleared.
pub(crate) fn update_prices(state: &mut EconomyState) {
    state.avg_price = average_price(state.cfirms.iter().map(|f| (f.price, f.sales)));
    state.avg_kprice = average_price(state.kfirms.iter().map(|f| (f.price, f.sales)));
    if state.rebase_pending {
        state.base_price = state.avg_price;
        state.rebase_pending = false;
    }
    state.price_index = state.avg_price / state.base_price;
    let value_sold = state.cfirms.iter().map(|f| f.flows.revenue).sum::<f64>()
        + state.kfirms.iter().map(|f| f.flows.revenue).sum::<f64>();
    let (nominal, real) = gdp(value_sold, state.price_index);
    state.nominal_gdp = nominal;
    state.real_gdp = real;
}

pub(crate) fn update_aggregates(state: &mut EconomyState) {
    state.bank.total_deposits = state.households.iter().map(|h| h.deposits).sum();
}
