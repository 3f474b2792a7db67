use alloc::vec::Vec;

use super::{BankState, EconomyState, FirmMetrics, Flows, Household, Loan};

const DUST: f64 = 1e-12;
/// Wage bills of cash a K-firm keeps before paying the rest out.
const K_RESERVE_STEPS: f64 = 20.0;

/// Services every loan granted before step `t`; returns (amortization, interest).
fn service_loans(loans: &mut Vec<Loan>, t: u64, duration: u32, rate: f64, bank: &mut BankState) -> (f64, f64) {
    let (mut amortization, mut interest) = (0.0, 0.0);
    for loan in loans.iter_mut().filter(|l| l.issued < t) {
        let (a, i) = loan.instalment(duration, rate);
        loan.outstanding -= a;
        loan.remaining_steps = loan.remaining_steps.saturating_sub(1);
        amortization += a;
        interest += i;
    }
    loans.retain(|l| l.remaining_steps > 0 && l.outstanding > DUST);
    bank.outstanding_loans -= amortization;
    bank.equity += interest;
    (amortization, interest)
}

/// Nominal profit after dividends and the dividend itself, from the flows.
pub fn settle_profit(flows: &Flows, dividend_rate: f64) -> (f64, f64) {
    let before = flows.revenue - flows.wage_bill - flows.investment - flows.instalments - flows.interest;
    let dividends = dividend_rate * before.max(0.0);
    (before - dividends, dividends)
}

/// Pays wages, debt service and dividends, books profits, and replaces every
/// firm whose cash is no longer positive with an entrant. Returns the per
/// C-firm metrics as they stood before any replacement.
pub(crate) fn settle_accounting(state: &mut EconomyState, t: u64) -> Vec<FirmMetrics> {
    let p = state.params.clone();
    let index = state.price_index;
    let mut dividend_pool = 0.0;
    let mut metrics = Vec::with_capacity(state.cfirms.len());

    for f in &mut state.cfirms {
        let (amortization, interest) = service_loans(&mut f.loans, t, p.loan_duration, p.interest_rate, &mut state.bank);
        f.flows.instalments = amortization;
        f.flows.interest = interest;
        f.flows.wage_bill = p.wage * f.workforce() as f64;
        let (nominal, dividends) = settle_profit(&f.flows, p.dividend_rate);
        f.flows.dividends = dividends;
        f.flows.nominal_profit = nominal;
        f.assets += nominal;
        f.profit = nominal / index;
        f.bankrupt = f.assets <= 0.0;
        dividend_pool += dividends;
        metrics.push(FirmMetrics {
            price: f.price,
            sales: f.sales,
            output: f.output,
            demand: f.demand,
            profit: f.profit,
            reward: None,
            assets: f.assets,
            bankrupt: f.bankrupt,
        });
    }
    for k in &mut state.kfirms {
        let (amortization, interest) = service_loans(&mut k.loans, t, p.loan_duration, p.interest_rate, &mut state.bank);
        k.flows.instalments = amortization;
        k.flows.interest = interest;
        k.flows.wage_bill = p.wage * k.workforce() as f64;
        // K-firms have nothing to invest in: rather than a share of profit,
        // cash beyond a reserve of wage bills goes to the owners.
        let (mut nominal, mut dividends) = settle_profit(&k.flows, 0.0);
        let excess = k.assets + nominal - K_RESERVE_STEPS * k.flows.wage_bill.max(p.wage);
        if excess > 0.0 {
            dividends += excess;
            nominal -= excess;
        }
        k.flows.dividends = dividends;
        k.flows.nominal_profit = nominal;
        k.assets += nominal;
        k.profit = nominal / index;
        k.bankrupt = k.assets <= 0.0;
        dividend_pool += dividends;
    }

    let dividend_share = dividend_pool / p.num_capitalists as f64;
    for h in &mut state.households {
        h.income = if h.is_capitalist {
            dividend_share
        } else if h.employer.is_some() {
            p.wage
        } else {
            0.0
        };
        h.deposits += h.income;
    }

    replace_bankrupt(state);
    metrics
}

fn release(households: &mut [Household], workers: &mut Vec<usize>) {
    for &h in workers.iter() {
        households[h].employer = None;
    }
    workers.clear();
}

fn mean_of_survivors(values: impl Iterator<Item = (bool, f64)>) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for (alive, v) in values {
        if alive {
            sum += v;
            n += 1;
        }
    }
    (n > 0).then(|| sum / n as f64)
}

/// Entrants take the failed firm's slot at the market price with a share of
/// the average surviving cash and machinery, and no debt. The bank writes off the
/// failed firm's debt and overdraft and funds the entrant.
fn replace_bankrupt(state: &mut EconomyState) {
    let frac = state.params.entrant_asset_fraction;
    let fallback_assets = state.params.wage;

    if state.cfirms.iter().any(|f| f.bankrupt) {
        let assets = mean_of_survivors(state.cfirms.iter().map(|f| (!f.bankrupt, f.assets)))
            .unwrap_or(fallback_assets);
        let target = mean_of_survivors(state.cfirms.iter().map(|f| (!f.bankrupt, f.target_output)))
            .unwrap_or_else(|| state.cfirms.iter().map(|f| f.target_output).sum::<f64>() / state.cfirms.len() as f64);
        let capital = mean_of_survivors(state.cfirms.iter().map(|f| (!f.bankrupt, f.capital))).unwrap_or(0.0);
        let price = state.avg_price;
        for f in state.cfirms.iter_mut().filter(|f| f.bankrupt) {
            let debt = f.debt();
            state.bank.outstanding_loans -= debt;
            state.bank.equity -= debt;
            state.bank.equity += f.assets;
            release(&mut state.households, &mut f.workers);
            f.loans.clear();
            f.price = price;
            f.target_output = target;
            f.output = target;
            f.demand = target;
            f.sales = target;
            f.capital = frac * capital;
            f.assets = frac * assets;
            state.bank.equity -= f.assets;
        }
    }

    if state.kfirms.iter().any(|f| f.bankrupt) {
        let assets = mean_of_survivors(state.kfirms.iter().map(|f| (!f.bankrupt, f.assets)))
            .unwrap_or(fallback_assets);
        let target = mean_of_survivors(state.kfirms.iter().map(|f| (!f.bankrupt, f.target_output)))
            .unwrap_or_else(|| state.kfirms.iter().map(|f| f.target_output).sum::<f64>() / state.kfirms.len() as f64);
        let price = state.avg_kprice;
        for k in state.kfirms.iter_mut().filter(|k| k.bankrupt) {
            let debt: f64 = k.loans.iter().map(|l| l.outstanding).sum();
            state.bank.outstanding_loans -= debt;
            state.bank.equity -= debt;
            state.bank.equity += k.assets;
            release(&mut state.households, &mut k.workers);
            k.loans.clear();
            k.price = price;
            k.target_output = target;
            k.inventory = 0.0;
            k.supply = target;
            k.demand = target;
            k.sales = target;
            k.assets = frac * assets;
            state.bank.equity -= k.assets;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_flows_zero_profit() {
        assert_eq!(settle_profit(&Flows::default(), 0.1), (0.0, 0.0));
    }

    #[test]
    fn profit_arithmetic() {
        let flows = Flows {
            revenue: 10.0,
            wage_bill: 4.0,
            instalments: 1.0,
            ..Flows::default()
        };
        assert_eq!(settle_profit(&flows, 0.0), (5.0, 0.0));
        let (profit, div) = settle_profit(&flows, 0.1);
        assert!((div - 0.5).abs() < 1e-12);
        assert!((profit - 4.5).abs() < 1e-12);
    }

    #[test]
    fn losses_pay_no_dividend() {
        let flows = Flows {
            revenue: 1.0,
            wage_bill: 4.0,
            ..Flows::default()
        };
        assert_eq!(settle_profit(&flows, 0.1), (-3.0, 0.0));
    }
}
