use serde::{Deserialize, Serialize};

/// Behavioral constants shared by every country and year.
///
/// The first block is fixed by the model definition. The second block holds
/// implementation choices that the model leaves open; they are exposed so
/// sensitivity runs can vary them, but they are never fitted to data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConstants {
    /// Input stocks are replenished up to this many months of usage.
    pub stock_target_months: f64,
    pub price_step: f64,
    pub wage_step: f64,
    pub logit_gamma: f64,
    /// Weight of the current month in smoothed sales.
    pub smoothing_alpha: f64,
    pub k_to_fixcap: f64,
    pub benefit_ratio: f64,
    pub kurzarbeit_wage_share: f64,
    pub workers_per_sector: usize,

    /// Finished-goods inventory target, in months of smoothed sales.
    pub finished_goods_months: f64,
    /// Relative dead band around the inventory target inside which prices
    /// stay put.
    pub price_band: f64,
    pub producer_depreciation: f64,
    pub household_depreciation: f64,
    /// Capital target relative to the capital needed for smoothed sales.
    pub capital_headroom: f64,
    /// Largest capital purchase in one month, as a share of the target.
    pub max_investment_share: f64,
    /// Cash a firm keeps before paying dividends, in months of costs.
    pub reserve_months: f64,
    /// Founder credit in months of the sector-average wage bill.
    pub founder_credit_months: f64,
    /// Unmet-demand ratio above which entry is triggered.
    pub entry_threshold: f64,
    /// Months the unmet-demand ratio is averaged over for entry.
    pub entry_window: usize,
    /// Matching rounds per month; each hiring firm meets one worker per round.
    pub hiring_rounds: usize,
    /// Labor requirement slack before rounding up to whole workers.
    pub labor_tolerance: f64,
    /// Monthly propensity to spend out of wealth on top of income.
    pub wealth_effect: f64,
    /// Smoothing weight of the household and government spending factors.
    pub factor_smoothing: f64,
    /// Government and export demand is split into this many orders so that
    /// it spreads across sellers.
    pub purchase_chunks: usize,
}

impl Default for ModelConstants {
    fn default() -> Self {
        Self {
            stock_target_months: 2.5,
            price_step: 0.005,
            wage_step: 0.005,
            logit_gamma: 4.0,
            smoothing_alpha: 0.02,
            k_to_fixcap: 0.05,
            benefit_ratio: 0.80,
            kurzarbeit_wage_share: 0.90,
            workers_per_sector: 32,

            finished_goods_months: 0.5,
            price_band: 0.25,
            producer_depreciation: 0.02,
            household_depreciation: 0.01,
            capital_headroom: 1.25,
            max_investment_share: 0.25,
            reserve_months: 2.0,
            founder_credit_months: 3.0,
            entry_threshold: 0.05,
            entry_window: 3,
            hiring_rounds: 4,
            labor_tolerance: 0.05,
            wealth_effect: 0.0,
            factor_smoothing: 0.1,
            purchase_chunks: 8,
        }
    }
}

impl ModelConstants {
    pub fn with_scale(workers_per_sector: usize) -> Self {
        Self {
            workers_per_sector,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("stock_target_months", self.stock_target_months),
            ("price_step", self.price_step),
            ("wage_step", self.wage_step),
            ("logit_gamma", self.logit_gamma),
            ("smoothing_alpha", self.smoothing_alpha),
            ("k_to_fixcap", self.k_to_fixcap),
            ("benefit_ratio", self.benefit_ratio),
            ("kurzarbeit_wage_share", self.kurzarbeit_wage_share),
            ("finished_goods_months", self.finished_goods_months),
            ("producer_depreciation", self.producer_depreciation),
            ("household_depreciation", self.household_depreciation),
            ("capital_headroom", self.capital_headroom),
            ("max_investment_share", self.max_investment_share),
            ("factor_smoothing", self.factor_smoothing),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        if self.workers_per_sector < 1
            || self.hiring_rounds < 1
            || self.purchase_chunks < 1
            || self.entry_window < 1
        {
            return Err("workers_per_sector, hiring_rounds, purchase_chunks and entry_window must be at least 1".into());
        }
        Ok(())
    }
}
