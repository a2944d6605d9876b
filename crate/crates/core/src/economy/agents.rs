use serde::{Deserialize, Serialize};

/// Stable firm identifier; never reused within a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FirmId(pub u64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Worker {
    pub id: usize,
    pub sector: usize,
    pub employer: Option<FirmId>,
    pub asking_wage: f64,
    pub last_wage: f64,
    pub wealth: f64,
    /// Income received since the last consumption decision.
    pub income_accrued: f64,
    pub work_capacity_factor: f64,
}

impl Worker {
    pub fn is_employed(&self) -> bool {
        self.employer.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Firm {
    pub id: FirmId,
    pub sector: usize,
    /// Worker ids in hiring order; the last one hired is the first fired.
    pub employees: Vec<usize>,
    pub wealth: f64,
    pub price: f64,
    /// Stock of each domestic good held as input, indexed by supplying sector.
    pub input_stocks: Vec<f64>,
    /// Stock of the imported input bundle.
    pub import_stock: f64,
    /// Finished goods available for sale.
    pub inventory: f64,
    /// Productive capital, in base-price units.
    pub fixed_capital: f64,
    pub avg_monthly_sales: f64,
    pub offer_wage: f64,
    pub founded_month: i64,
    pub subsidy_eligible: bool,
    pub capacity_factor: f64,

    // Flows of the current month.
    pub produced: f64,
    pub available: f64,
    pub sold: f64,
    pub kurzarbeit: bool,
}

impl Firm {
    pub fn new(
        id: FirmId,
        sector: usize,
        sectors: usize,
        price: f64,
        offer_wage: f64,
        month: i64,
    ) -> Self {
        Self {
            id,
            sector,
            employees: Vec::new(),
            wealth: 0.0,
            price,
            input_stocks: vec![0.0; sectors],
            import_stock: 0.0,
            inventory: 0.0,
            fixed_capital: 0.0,
            avg_monthly_sales: 0.0,
            offer_wage,
            founded_month: month,
            subsidy_eligible: true,
            capacity_factor: 1.0,
            produced: 0.0,
            available: 0.0,
            sold: 0.0,
            kurzarbeit: false,
        }
    }

    pub fn headcount(&self) -> usize {
        self.employees.len()
    }

    pub fn wage_bill(&self) -> f64 {
        self.offer_wage * self.employees.len() as f64
    }

    pub fn is_alive(&self) -> bool {
        self.wealth >= 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Government {
    pub wealth: f64,
    pub tax_rate_production: Vec<f64>,
    pub tax_rate_products: Vec<f64>,
    /// OP_RES + OP_NRES levied at the same point as the other taxes.
    pub levy_rate: Vec<f64>,
    /// Per-sector price adjustment applied to planned purchases.
    pub consumption_factors: Vec<f64>,
    /// Transfers paid out in the current month.
    pub transfer_ledger: f64,
}

impl Government {
    /// Combined ad-valorem rate charged on sales of sector `j`.
    pub fn sales_tax_rate(&self, j: usize) -> f64 {
        self.tax_rate_production[j] + self.tax_rate_products[j] + self.levy_rate[j]
    }

    /// Spending-weighted average of the consumption factors.
    pub fn weighted_factor(&self, weights: &[f64]) -> f64 {
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return 1.0;
        }
        weights
            .iter()
            .zip(&self.consumption_factors)
            .map(|(w, f)| w * f)
            .sum::<f64>()
            / total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalSector {
    /// Quantity per month bought from each domestic sector at factor 1.
    pub export_demand: Vec<f64>,
    pub export_factor: Vec<f64>,
    pub import_factor: Vec<f64>,
    pub import_price: f64,
}

impl ExternalSector {
    pub fn new(export_demand: Vec<f64>) -> Self {
        let n = export_demand.len();
        Self {
            export_demand,
            export_factor: vec![1.0; n],
            import_factor: vec![1.0; n],
            import_price: 1.0,
        }
    }
}

/// Employment size classes used for industrial-organization statistics.
pub const SIZE_CLASSES: [(usize, usize); 4] = [(0, 9), (10, 49), (50, 249), (250, usize::MAX)];

pub fn size_class(headcount: usize) -> usize {
    SIZE_CLASSES
        .iter()
        .position(|(lo, hi)| headcount >= *lo && headcount <= *hi)
        .unwrap_or(3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_class_boundaries() {
        assert_eq!(size_class(0), 0);
        assert_eq!(size_class(9), 0);
        assert_eq!(size_class(10), 1);
        assert_eq!(size_class(49), 1);
        assert_eq!(size_class(50), 2);
        assert_eq!(size_class(250), 3);
    }

    #[test]
    fn zero_wealth_survives() {
        let mut f = Firm::new(FirmId(0), 0, 1, 1.0, 1.0, 0);
        assert!(f.is_alive());
        f.wealth = -0.01;
        assert!(!f.is_alive());
    }
}
