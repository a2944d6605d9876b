use super::market::{purchase, Order};
use crate::engine::{EconomyState, MonthFlows};
use crate::shocks::kurzarbeit_payment;

/// Ad-valorem tax on a money flow.
pub fn sales_tax(flow: f64, rate: f64) -> f64 {
    flow * rate
}

pub fn unemployment_benefit(last_wage: f64, ratio: f64) -> f64 {
    ratio * last_wage
}

/// Transfers and purchases of the government for one month.
///
/// Sales taxes were already collected at each sale. Pays benefits to every
/// unemployed worker, short-time pay to participating firms, then buys the
/// table's government column scaled by the per-sector consumption factors.
pub fn government_step(state: &mut EconomyState, flows: &mut MonthFlows, sellers: &[Vec<usize>]) {
    let model = state.model.clone();
    let k = &model.constants;
    state.government.transfer_ledger = 0.0;

    for w in state.workers.iter_mut().filter(|w| w.employer.is_none()) {
        let b = unemployment_benefit(w.last_wage, k.benefit_ratio);
        w.wealth += b;
        w.income_accrued += b;
        state.government.wealth -= b;
        state.government.transfer_ledger += b;
        flows.benefits += b;
        flows.household_income += b;
    }

    for f in state.firms.iter_mut() {
        let pay = kurzarbeit_payment(f, k.kurzarbeit_wage_share);
        if pay > 0.0 {
            f.wealth += pay;
            state.government.wealth -= pay;
            state.government.transfer_ledger += pay;
            flows.kurzarbeit += pay;
        }
    }

    let chunks = k.purchase_chunks as f64;
    for i in 0..model.sector_count() {
        let planned = model.government_demand[i] * state.government.consumption_factors[i];
        if planned <= 0.0 {
            continue;
        }
        let rate = model.sales_tax_rate(i);
        for _ in 0..k.purchase_chunks {
            let chunk = planned / chunks;
            let p = purchase(
                &mut state.firms,
                &sellers[i],
                Order::Budget(chunk),
                f64::INFINITY,
                k.logit_gamma,
                rate,
                &mut state.rng,
            );
            state.government.wealth += p.taxes - p.spent;
            flows.government.record(i, &p, chunk, p.unmet);
        }
    }
}
