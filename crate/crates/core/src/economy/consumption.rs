use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::{EconomyState, Scratch};
use crate::rng::{DistinctSampler, SimRng};

/// Consumption budget: `c_y * income + c_w * deposits`, never more than the deposits.
pub fn household_budget(income: f64, deposits: f64, c_y: f64, c_w: f64, scale: f64) -> f64 {
    (scale * (c_y * income + c_w * deposits)).min(deposits).max(0.0)
}

/// Search-and-matching market for consumption goods.
///
/// Households, in random order, visit `search_depth` distinct C-firms, sort
/// them by price and buy from the cheapest first until their budget or the
/// visited shelves are exhausted. Every quantity a household tries to buy
/// counts toward the firm's demand, served or not.
pub(crate) fn consumption_market(state: &mut EconomyState, rng: &mut SimRng, scratch: &mut Scratch) {
    let p = &state.params;
    let (c_y, c_w, scale, depth) = (
        p.propensity_income,
        p.propensity_wealth,
        state.propensity_scale,
        p.search_depth,
    );
    let mut order: Vec<usize> = (0..state.households.len()).collect();
    order.shuffle(rng);
    let mut sampler = DistinctSampler::new(state.cfirms.len());
    let mut total = 0.0;

    for h in order {
        let household = &mut state.households[h];
        let mut remaining = household_budget(household.income, household.deposits, c_y, c_w, scale);
        if remaining <= 0.0 {
            continue;
        }
        sampler.sample(rng, depth, &mut scratch.picks);
        let firms = &state.cfirms;
        scratch.picks.sort_by(|&a, &b| firms[a].price.total_cmp(&firms[b].price));

        let mut spent = 0.0;
        for &f in &scratch.picks {
            let firm = &mut state.cfirms[f];
            let wanted = remaining / firm.price;
            firm.demand += wanted;
            let available = firm.output - firm.sales;
            if wanted <= available {
                firm.sales += wanted;
                firm.flows.revenue += remaining;
                spent += remaining;
                remaining = 0.0;
                break;
            }
            if available > 0.0 {
                let cost = available * firm.price;
                firm.sales = firm.output;
                firm.flows.revenue += cost;
                spent += cost;
                remaining -= cost;
            }
        }
        household.deposits -= spent;
        total += spent;
    }

    for f in &mut state.cfirms {
        f.sales = f.output.min(f.demand);
    }
    state.consumption = total;
}
