use crate::economy::DemandLedger;
use crate::io_table::SquareMatrix;

/// Money and quantity flows accumulated while a month is simulated.
#[derive(Debug, Clone)]
pub struct MonthFlows {
    pub household: DemandLedger,
    pub durables: DemandLedger,
    pub government: DemandLedger,
    pub exports: DemandLedger,
    pub investment: DemandLedger,
    pub inputs: DemandLedger,
    /// Domestic intermediate purchases in money, `[supplier][user]`.
    pub intermediate: SquareMatrix,
    /// Import payments by using sector.
    pub imports: Vec<f64>,
    pub import_quantity: f64,
    /// Physical use of each domestic good as intermediate input.
    pub input_use: Vec<f64>,
    pub output: Vec<f64>,
    pub wages: Vec<f64>,
    pub benefits: f64,
    pub kurzarbeit: f64,
    pub subsidies: f64,
    pub dividends: f64,
    pub founder_credit: f64,
    pub absorbed_losses: f64,
    /// Receipts from abroad minus payments abroad.
    pub net_external: f64,
    /// Household income booked this month (wages, benefits, dividends).
    pub household_income: f64,
    pub births: usize,
    pub deaths: usize,
}

impl MonthFlows {
    pub fn new(n: usize) -> Self {
        Self {
            household: DemandLedger::new(n),
            durables: DemandLedger::new(n),
            government: DemandLedger::new(n),
            exports: DemandLedger::new(n),
            investment: DemandLedger::new(n),
            inputs: DemandLedger::new(n),
            intermediate: SquareMatrix::zeros(n),
            imports: vec![0.0; n],
            import_quantity: 0.0,
            input_use: vec![0.0; n],
            output: vec![0.0; n],
            wages: vec![0.0; n],
            benefits: 0.0,
            kurzarbeit: 0.0,
            subsidies: 0.0,
            dividends: 0.0,
            founder_credit: 0.0,
            absorbed_losses: 0.0,
            net_external: 0.0,
            household_income: 0.0,
            births: 0,
            deaths: 0,
        }
    }

    pub fn ledgers(&self) -> [&DemandLedger; 6] {
        [
            &self.household,
            &self.durables,
            &self.government,
            &self.exports,
            &self.investment,
            &self.inputs,
        ]
    }

    pub fn taxes(&self) -> f64 {
        self.ledgers().iter().map(|l| l.taxes).sum()
    }

    /// Sales in money of each sector to every buyer category.
    pub fn sales(&self) -> Vec<f64> {
        let n = self.output.len();
        (0..n)
            .map(|i| self.ledgers().iter().map(|l| l.spent[i]).sum())
            .collect()
    }

    /// Unmet share of attempted demand per sector, over every buyer category.
    pub fn unmet_ratio(&self) -> Vec<f64> {
        let n = self.output.len();
        (0..n)
            .map(|i| {
                let attempted: f64 = self.ledgers().iter().map(|l| l.attempted[i]).sum();
                let unmet: f64 = self.ledgers().iter().map(|l| l.unmet[i]).sum();
                if attempted > 0.0 {
                    unmet / attempted
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Gross money moved this month; the scale for the accounting tolerance.
    pub fn turnover(&self) -> f64 {
        let spent: f64 = self.ledgers().iter().map(|l| l.total_spent()).sum();
        spent
            + self.imports.iter().sum::<f64>()
            + self.wages.iter().sum::<f64>()
            + self.benefits
            + self.kurzarbeit
            + self.subsidies
            + self.dividends
            + self.founder_credit
            + self.absorbed_losses
    }
}
