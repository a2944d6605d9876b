use super::market::{purchase, Order};
use crate::engine::{EconomyState, MonthFlows};

/// Export purchases for one month.
///
/// The rest of the world buys `export_demand × export_factor` units of each
/// sector's good, split into several orders so logit choice spreads them
/// over sellers. Payments are receipts from abroad.
pub fn external_step(
    state: &mut EconomyState,
    flows: &mut MonthFlows,
    sellers: &[Vec<usize>],
    mean_prices: &[f64],
) {
    let model = state.model.clone();
    let k = &model.constants;
    for i in 0..model.sector_count() {
        let units = state.external.export_demand[i] * state.external.export_factor[i];
        if units <= 0.0 {
            continue;
        }
        let rate = model.sales_tax_rate(i);
        let chunk = units / k.purchase_chunks as f64;
        for _ in 0..k.purchase_chunks {
            let p = purchase(
                &mut state.firms,
                &sellers[i],
                Order::Quantity(chunk),
                f64::INFINITY,
                k.logit_gamma,
                rate,
                &mut state.rng,
            );
            state.government.wealth += p.taxes;
            flows.net_external += p.spent;
            flows
                .exports
                .record(i, &p, chunk * mean_prices[i], p.unmet * mean_prices[i]);
        }
    }
}

/// Imports delivered to a firm of sector `user`: `wanted` units scaled by
/// the sector's import factor and limited by `cash`. Returns
/// `(units, payment)`; the payment leaves the economy.
pub fn supply_imports(state: &EconomyState, user: usize, wanted: f64, cash: f64) -> (f64, f64) {
    let price = state.external.import_price;
    let units = (wanted * state.external.import_factor[user])
        .min(cash.max(0.0) / price)
        .max(0.0);
    (units, units * price)
}
