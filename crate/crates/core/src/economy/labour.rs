use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{CFirm, EconomyState, Employer, Scratch};
use crate::math::ceil_count;
use crate::rng::{DistinctSampler, SimRng};

/// Machines a C-firm can add: cash left after wages buys them at the average
/// capital price.
fn affordable_expansion(state: &EconomyState, firm: &CFirm) -> f64 {
    let spare = (firm.assets - state.params.wage * firm.workforce() as f64).max(0.0);
    spare / state.avg_kprice
}

/// Workers a C-firm wants: enough for its target, and no more than the
/// machines it holds plus those it can afford to add can equip.
fn cfirm_labour_demand(state: &EconomyState, f: usize) -> usize {
    let p = &state.params;
    let firm = &state.cfirms[f];
    let reachable = firm.capital + affordable_expansion(state, firm);
    let by_target = ceil_count(firm.target_output / p.labour_productivity);
    let by_capital = ceil_count(p.capital_productivity * reachable / p.labour_productivity);
    by_target.min(by_capital)
}

pub(crate) fn labour_market(state: &mut EconomyState, rng: &mut SimRng, scratch: &mut Scratch) {
    let mut postings: Vec<(Employer, usize)> = Vec::new();

    for f in 0..state.cfirms.len() {
        let wanted = cfirm_labour_demand(state, f);
        let workers = &mut state.cfirms[f].workers;
        while workers.len() > wanted {
            let h = workers.swap_remove(rng.gen_range(0..workers.len()));
            state.households[h].employer = None;
        }
        if workers.len() < wanted {
            postings.push((Employer::CFirm(f), wanted - workers.len()));
        }
    }
    for f in 0..state.kfirms.len() {
        let wanted = ceil_count(state.kfirms[f].target_output / state.params.labour_productivity);
        let workers = &mut state.kfirms[f].workers;
        while workers.len() > wanted {
            let h = workers.swap_remove(rng.gen_range(0..workers.len()));
            state.households[h].employer = None;
        }
        if workers.len() < wanted {
            postings.push((Employer::KFirm(f), wanted - workers.len()));
        }
    }

    let mut open: usize = postings.iter().map(|p| p.1).sum();
    if open == 0 {
        plan_investment(state);
        return;
    }
    let mut unemployed: Vec<usize> = state
        .households
        .iter()
        .filter(|h| !h.is_capitalist && h.employer.is_none())
        .map(|h| h.id)
        .collect();
    unemployed.shuffle(rng);

    let visits = state.params.labour_search_depth.min(postings.len());
    let mut sampler = DistinctSampler::new(postings.len());
    for h in unemployed {
        if open == 0 {
            break;
        }
        sampler.sample(rng, visits, &mut scratch.picks);
        let Some(&slot) = scratch.picks.iter().find(|&&i| postings[i].1 > 0) else {
            continue;
        };
        let (employer, ref mut vacancies) = postings[slot];
        *vacancies -= 1;
        open -= 1;
        match employer {
            Employer::CFirm(f) => state.cfirms[f].workers.push(h),
            Employer::KFirm(f) => state.kfirms[f].workers.push(h),
        }
        state.households[h].employer = Some(employer);
    }
    plan_investment(state);
}

/// Capital beyond what the hired workforce can operate would sit idle, so the
/// purchase covers depreciation plus the gap to the smaller of the target and
/// the workforce's capacity, as far as cash allows.
pub(crate) fn plan_investment(state: &mut EconomyState) {
    for f in 0..state.cfirms.len() {
        let p = &state.params;
        let firm = &state.cfirms[f];
        let usable = firm.target_output.min(p.labour_productivity * firm.workforce() as f64);
        let desired = ceil_count(usable / p.capital_productivity) as f64;
        let planned = (p.capital_depreciation * firm.capital + (desired - firm.capital).max(0.0))
            .min(affordable_expansion(state, firm));
        state.cfirms[f].planned_investment = planned;
    }
}
