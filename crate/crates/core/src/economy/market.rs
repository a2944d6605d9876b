//! Posted-price goods market with logit seller choice.

use rand::Rng;

use super::Firm;

/// Selection probabilities `∝ exp(-γ p / p̄)` with `p̄` the mean of `prices`.
pub fn logit_probabilities(prices: &[f64], gamma: f64) -> Vec<f64> {
    if prices.is_empty() {
        return Vec::new();
    }
    let mean = prices.iter().sum::<f64>() / prices.len() as f64;
    let scaled: Vec<f64> = prices
        .iter()
        .map(|p| if mean > 0.0 { -gamma * p / mean } else { 0.0 })
        .collect();
    let top = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = scaled.iter().map(|s| (s - top).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| w / total).collect()
}

/// Draws an index from a probability vector.
pub fn draw_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    probs.len() - 1
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Order {
    /// Buy this many units.
    Quantity(f64),
    /// Spend up to this much money.
    Budget(f64),
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Purchase {
    pub quantity: f64,
    pub spent: f64,
    /// Sales taxes the sellers owe on this purchase.
    pub taxes: f64,
    /// Part of the order that could not be served by any seller,
    /// in units of the order (quantity or money).
    pub unmet: f64,
}

const DUST: f64 = 1e-12;

/// Fills `order` from `sellers` (indices into `firms`, all in one sector).
///
/// Sellers are drawn one at a time by logit over those with stock left;
/// each draw buys as much as the seller holds, the order needs, and `cash`
/// allows. Seller revenue net of `tax_rate` is credited to the firm; the
/// buyer's payment and the tax receipt are left to the caller.
pub fn purchase<R: Rng + ?Sized>(
    firms: &mut [Firm],
    sellers: &[usize],
    order: Order,
    cash: f64,
    gamma: f64,
    tax_rate: f64,
    rng: &mut R,
) -> Purchase {
    let (mut want, by_value) = match order {
        Order::Quantity(q) => (q, false),
        Order::Budget(b) => (b, true),
    };
    let mut out = Purchase::default();
    if !(want > 0.0) {
        return out;
    }
    let floor = want * DUST;
    let mut cash_left = cash.max(0.0);
    let mut open: Vec<usize> = sellers
        .iter()
        .copied()
        .filter(|&k| firms[k].inventory > DUST)
        .collect();
    let mut prices: Vec<f64> = Vec::with_capacity(open.len());
    let cash_floor = if cash.is_finite() {
        DUST * cash.abs().max(1.0)
    } else {
        0.0
    };

    while want > floor && !open.is_empty() && cash_left > cash_floor {
        prices.clear();
        prices.extend(open.iter().map(|&k| firms[k].price));
        let pick = if open.len() == 1 {
            0
        } else {
            draw_index(&logit_probabilities(&prices, gamma), rng)
        };
        let firm = &mut firms[open[pick]];
        let units_wanted = if by_value { want / firm.price } else { want };
        let q = units_wanted.min(firm.inventory).min(cash_left / firm.price);
        let value = q * firm.price;
        let tax = value * tax_rate;
        firm.inventory -= q;
        firm.sold += q;
        firm.wealth += value - tax;
        out.quantity += q;
        out.spent += value;
        out.taxes += tax;
        cash_left -= value;
        want -= if by_value { value } else { q };
        if firm.inventory <= DUST * firm.available.max(1.0) {
            open.remove(pick);
        } else if q < units_wanted {
            // Seller still has stock, so the buyer ran out of cash.
            break;
        }
    }
    if open.is_empty() && want > floor {
        out.unmet = want;
    }
    out
}
