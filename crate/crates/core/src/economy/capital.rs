use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::{EconomyState, Scratch};
use crate::rng::{DistinctSampler, SimRng};

const EPS: f64 = 1e-12;

/// C-firms, in random order, visit `capital_search_depth` K-firms and buy
/// from the cheapest first until the planned purchase is met, inventories run
/// dry or the cash left after the wage bill is spent. A seller's demand is
/// what the buyer asked of it and could pay for. Capital then depreciates
/// and the purchase is installed.
pub(crate) fn capital_market(state: &mut EconomyState, rng: &mut SimRng, scratch: &mut Scratch) {
    for k in &mut state.kfirms {
        k.supply = k.inventory;
        k.demand = 0.0;
        k.sales = 0.0;
    }
    let wage = state.params.wage;
    let depth = state.params.capital_search_depth;
    let mut order: Vec<usize> = (0..state.cfirms.len()).collect();
    order.shuffle(rng);
    let mut sampler = DistinctSampler::new(state.kfirms.len());

    for f in order {
        let firm = &mut state.cfirms[f];
        let mut remaining = firm.planned_investment;
        let mut bought = 0.0;
        if remaining > EPS {
            let mut budget = (firm.assets - wage * firm.workforce() as f64).max(0.0);
            sampler.sample(rng, depth, &mut scratch.picks);
            let kfirms = &state.kfirms;
            scratch.picks.sort_by(|&a, &b| kfirms[a].price.total_cmp(&kfirms[b].price));
            for &k in &scratch.picks {
                let seller = &mut state.kfirms[k];
                let affordable = remaining.min(budget / seller.price);
                seller.demand += affordable;
                let qty = affordable.min(seller.inventory);
                if qty > 0.0 {
                    let cost = qty * seller.price;
                    seller.inventory -= qty;
                    seller.sales += qty;
                    seller.flows.revenue += cost;
                    firm.flows.investment += cost;
                    budget -= cost;
                    remaining -= qty;
                    bought += qty;
                }
                if remaining <= EPS || budget <= EPS {
                    break;
                }
            }
        }
        firm.capital = (1.0 - state.params.capital_depreciation) * firm.capital + bought;
    }
}
