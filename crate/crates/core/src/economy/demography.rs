use rand::Rng;

use super::{desired_headcount, Firm, FirmId};
use crate::engine::{EconomyState, MonthFlows};

/// Removes every firm with negative wealth.
///
/// The government absorbs the debt, employees become unemployed asking for
/// their last wage, and stocks are written off.
pub fn cull_firms(state: &mut EconomyState, flows: &mut MonthFlows) -> Vec<FirmId> {
    let mut removed = Vec::new();
    let mut kept = Vec::with_capacity(state.firms.len());
    for mut firm in std::mem::take(&mut state.firms) {
        if firm.is_alive() {
            kept.push(firm);
            continue;
        }
        let debt = -firm.wealth;
        state.government.wealth -= debt;
        firm.wealth = 0.0;
        flows.absorbed_losses += debt;
        for &w in &firm.employees {
            let worker = &mut state.workers[w];
            worker.employer = None;
            worker.last_wage = firm.offer_wage;
            worker.asking_wage = firm.offer_wage;
        }
        removed.push(firm.id);
    }
    state.firms = kept;
    flows.deaths += removed.len();
    removed
}

/// Pushes this month's unmet-demand ratios into the persistence window.
pub fn record_unmet(state: &mut EconomyState, ratios: &[f64]) {
    let window = state.model.constants.entry_window;
    for (hist, &r) in state.unmet_history.iter_mut().zip(ratios) {
        hist.push_back(r);
        while hist.len() > window {
            hist.pop_front();
        }
    }
}

/// Mean unmet ratio per sector over a full window; `None` until the window
/// has filled.
pub fn persistent_unmet(state: &EconomyState) -> Vec<Option<f64>> {
    let window = state.model.constants.entry_window;
    state
        .unmet_history
        .iter()
        .map(|h| {
            if h.len() < window {
                None
            } else {
                Some(h.iter().sum::<f64>() / h.len() as f64)
            }
        })
        .collect()
}

/// At most one new firm per sector whose persistent unmet-demand ratio is
/// above the entry threshold and which has an unemployed worker to found it.
///
/// `unmet_units[i]` is this month's unserved demand for good `i` in units;
/// it sizes the entrant's expected sales. The founder credit comes from the
/// government.
pub fn spawn_firms(
    state: &mut EconomyState,
    flows: &mut MonthFlows,
    unmet_units: &[f64],
) -> Vec<FirmId> {
    let model = state.model.clone();
    let k = &model.constants;
    let n = model.sector_count();
    let signal = persistent_unmet(state);
    let means = state.sector_mean_prices();
    let mut born = Vec::new();

    for j in 0..n {
        if !model.active[j] {
            continue;
        }
        let Some(ratio) = signal[j] else { continue };
        if ratio <= k.entry_threshold {
            continue;
        }
        let pool: Vec<usize> = state
            .workers
            .iter()
            .filter(|w| w.sector == j && w.employer.is_none())
            .map(|w| w.id)
            .collect();
        if pool.is_empty() {
            continue;
        }
        let founder = pool[state.rng.random_range(0..pool.len())];

        let incumbents: Vec<&Firm> = state.firms.iter().filter(|f| f.sector == j).collect();
        let offer = if incumbents.is_empty() {
            model.base_wage[j]
        } else {
            incumbents.iter().map(|f| f.offer_wage).sum::<f64>() / incumbents.len() as f64
        };
        let price = means[j].unwrap_or(state.cpi);

        let id = FirmId(state.next_firm_id);
        state.next_firm_id += 1;
        let mut firm = Firm::new(id, j, n, price, offer, state.month);
        // Expected sales cover the unmet demand the idle workers of the
        // sector could serve.
        let pi = model.productivity[j];
        let reachable = (pool.len() as f64 * pi).min(model.monthly_output[j]);
        firm.avg_monthly_sales = unmet_units[j].clamp(pi, pi.max(reachable));
        // Equipment is endowed in kind; only the founder credit is money.
        firm.fixed_capital = model.capital_target(j, firm.avg_monthly_sales);
        // The credit covers the wage bill of the workforce the entrant plans
        // to hire, at the sector's going wage.
        let heads = desired_headcount(firm.avg_monthly_sales, pi, k.labor_tolerance).max(1);
        let credit = k.founder_credit_months * offer * heads as f64;
        firm.wealth = credit;
        state.government.wealth -= credit;
        flows.founder_credit += credit;

        let w = &mut state.workers[founder];
        w.employer = Some(id);
        firm.employees.push(founder);
        state.unmet_history[j].clear();
        state.firms.push(firm);
        born.push(id);
    }
    flows.births += born.len();
    born
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::economy::ModelConstants;
    use crate::engine::test_support::synthetic_model;

    fn state() -> EconomyState {
        EconomyState::initial(synthetic_model(ModelConstants::with_scale(8)), 11)
    }

    #[test]
    fn negative_wealth_removed_zero_survives() {
        let mut s = state();
        s.firms[0].wealth = -0.01;
        s.firms[1].wealth = 0.0;
        let before = s.total_wealth();
        let mut flows = MonthFlows::new(4);
        let gone = cull_firms(&mut s, &mut flows);
        assert_eq!(gone.len(), 1);
        assert_eq!(s.firms.len(), 3);
        assert!(s.firms.iter().all(|f| f.wealth >= 0.0));
        assert!((s.total_wealth() - before).abs() < 1e-12);
    }

    #[test]
    fn solvent_economy_loses_nobody() {
        let mut s = state();
        let mut flows = MonthFlows::new(4);
        assert!(cull_firms(&mut s, &mut flows).is_empty());
    }

    #[test]
    fn culled_workers_keep_last_wage() {
        let mut s = state();
        s.firms[0].wealth = -5.0;
        s.firms[0].offer_wage = 3.25;
        let w = s.firms[0].employees[0];
        let mut flows = MonthFlows::new(4);
        cull_firms(&mut s, &mut flows);
        assert_eq!(s.workers[w].employer, None);
        assert_eq!(s.workers[w].last_wage, 3.25);
    }

    #[test]
    fn no_signal_no_entry() {
        let mut s = state();
        for _ in 0..3 {
            record_unmet(&mut s, &[0.0; 4]);
        }
        let mut flows = MonthFlows::new(4);
        assert!(spawn_firms(&mut s, &mut flows, &[0.0; 4]).is_empty());
    }

    #[test]
    fn persistent_gap_with_one_unemployed_spawns_one() {
        let mut s = state();
        // leave exactly one unemployed worker in sector 3
        let mut spare = 0;
        for w in s.workers.iter_mut() {
            if w.sector == 3 && w.employer.is_none() {
                spare += 1;
                if spare > 1 {
                    w.employer = Some(FirmId(999));
                }
            }
        }
        for _ in 0..3 {
            record_unmet(&mut s, &[0.0, 0.0, 0.0, 0.10]);
        }
        let before = s.total_wealth();
        let mut flows = MonthFlows::new(4);
        let born = spawn_firms(&mut s, &mut flows, &[0.0, 0.0, 0.0, 5.0]);
        assert_eq!(born.len(), 1);
        let f = s.firms.last().unwrap();
        assert_eq!(f.sector, 3);
        assert_eq!(f.headcount(), 1);
        assert!(f.input_stocks.iter().all(|x| *x == 0.0));
        assert!((s.total_wealth() - before).abs() < 1e-9);
    }

    #[test]
    fn no_unemployed_no_entry() {
        let mut s = state();
        for w in s.workers.iter_mut() {
            if w.employer.is_none() {
                w.employer = Some(FirmId(999));
            }
        }
        for _ in 0..3 {
            record_unmet(&mut s, &[0.5; 4]);
        }
        let mut flows = MonthFlows::new(4);
        assert!(spawn_firms(&mut s, &mut flows, &[1.0; 4]).is_empty());
    }

    #[test]
    fn short_history_is_not_persistent() {
        let mut s = state();
        record_unmet(&mut s, &[0.5; 4]);
        record_unmet(&mut s, &[0.5; 4]);
        let mut flows = MonthFlows::new(4);
        assert!(spawn_firms(&mut s, &mut flows, &[1.0; 4]).is_empty());
    }
}
