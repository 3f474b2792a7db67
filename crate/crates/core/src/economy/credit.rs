use super::{EconomyState, Loan};

/// Every firm whose wage bill exceeds its cash borrows the shortfall. The bank
/// grants every request; machines are paid for out of retained cash.
pub(crate) fn credit_market(state: &mut EconomyState, t: u64) {
    let wage = state.params.wage;
    let duration = state.params.loan_duration;
    let bank = &mut state.bank;

    let mut grant = |assets: &mut f64, loans: &mut alloc::vec::Vec<Loan>, outlays: f64| -> f64 {
        let shortfall = outlays - *assets;
        if shortfall <= 0.0 {
            return 0.0;
        }
        loans.push(Loan {
            principal: shortfall,
            outstanding: shortfall,
            remaining_steps: duration,
            issued: t,
        });
        *assets += shortfall;
        bank.outstanding_loans += shortfall;
        shortfall
    };

    for f in &mut state.cfirms {
        let outlays = wage * f.workforce() as f64;
        f.flows.new_loans = grant(&mut f.assets, &mut f.loans, outlays);
    }
    for f in &mut state.kfirms {
        let outlays = wage * f.workforce() as f64;
        f.flows.new_loans = grant(&mut f.assets, &mut f.loans, outlays);
    }
}
