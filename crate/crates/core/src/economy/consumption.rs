use rand::Rng;

use super::market::{purchase, Order, Purchase};
use super::Firm;

/// Per-sector record of one buyer category's purchases in a month.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandLedger {
    pub spent: Vec<f64>,
    pub quantity: Vec<f64>,
    /// Demand that found no seller, in money at the sector's mean price.
    pub unmet: Vec<f64>,
    /// Demand attempted, in money at the sector's mean price.
    pub attempted: Vec<f64>,
    pub taxes: f64,
}

impl DemandLedger {
    pub fn new(sectors: usize) -> Self {
        Self {
            spent: vec![0.0; sectors],
            quantity: vec![0.0; sectors],
            unmet: vec![0.0; sectors],
            attempted: vec![0.0; sectors],
            taxes: 0.0,
        }
    }

    pub fn total_spent(&self) -> f64 {
        self.spent.iter().sum()
    }

    pub fn total_quantity(&self) -> f64 {
        self.quantity.iter().sum()
    }

    /// Books a purchase of sector `i` goods. `order_value` is the order in
    /// money, `unmet_value` the unserved part in money.
    pub fn record(&mut self, i: usize, p: &Purchase, order_value: f64, unmet_value: f64) {
        self.spent[i] += p.spent;
        self.quantity[i] += p.quantity;
        self.taxes += p.taxes;
        self.attempted[i] += order_value;
        self.unmet[i] += unmet_value;
    }

    pub fn absorb(&mut self, other: &DemandLedger) {
        for i in 0..self.spent.len() {
            self.spent[i] += other.spent[i];
            self.quantity[i] += other.quantity[i];
            self.unmet[i] += other.unmet[i];
            self.attempted[i] += other.attempted[i];
        }
        self.taxes += other.taxes;
    }
}

/// Spends `budget` across sectors by `weights`, choosing sellers by logit.
///
/// `sellers[i]` lists indices into `firms` of sector `i`; `tax_rates[i]` is
/// the sales tax of sector `i`. A sector without sellers leaves its share
/// unspent and records it as unmet. Returns the total spent.
#[allow(clippy::too_many_arguments)]
pub fn consume<R: Rng + ?Sized>(
    firms: &mut [Firm],
    sellers: &[Vec<usize>],
    budget: f64,
    weights: &[f64],
    gamma: f64,
    tax_rates: &[f64],
    ledger: &mut DemandLedger,
    rng: &mut R,
) -> f64 {
    let mut total = 0.0;
    if !(budget > 0.0) {
        return 0.0;
    }
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        let share = budget * w;
        let p = purchase(
            firms,
            &sellers[i],
            Order::Budget(share),
            share,
            gamma,
            tax_rates[i],
            rng,
        );
        ledger.record(i, &p, share, p.unmet);
        total += p.spent;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::economy::FirmId;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn stocked(id: u64, sector: usize, price: f64, stock: f64) -> Firm {
        let mut f = Firm::new(FirmId(id), sector, 2, price, 1.0, 0);
        f.inventory = stock;
        f.available = stock;
        f
    }

    #[test]
    fn budget_follows_basket_weights() {
        let mut firms = vec![stocked(0, 0, 1.0, 100.0), stocked(1, 1, 2.0, 100.0)];
        let sellers = vec![vec![0], vec![1]];
        let mut ledger = DemandLedger::new(2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let spent = consume(
            &mut firms,
            &sellers,
            10.0,
            &[0.3, 0.7],
            4.0,
            &[0.0, 0.0],
            &mut ledger,
            &mut rng,
        );
        assert!((spent - 10.0).abs() < 1e-12);
        assert!((ledger.spent[0] - 3.0).abs() < 1e-12);
        assert!((ledger.quantity[1] - 3.5).abs() < 1e-12);
    }

    #[test]
    fn missing_sellers_leave_share_unspent() {
        let mut firms = vec![stocked(0, 0, 1.0, 100.0)];
        let sellers = vec![vec![0], vec![]];
        let mut ledger = DemandLedger::new(2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let spent = consume(
            &mut firms,
            &sellers,
            10.0,
            &[0.5, 0.5],
            4.0,
            &[0.0, 0.0],
            &mut ledger,
            &mut rng,
        );
        assert!((spent - 5.0).abs() < 1e-12);
        assert!((ledger.unmet[1] - 5.0).abs() < 1e-12);
        assert!((ledger.attempted[1] - 5.0).abs() < 1e-12);
    }
}
