use std::collections::VecDeque;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::economy::{size_class, ExternalSector, Firm, FirmId, Government, Model, Worker};
use crate::shocks::PandemicTimeline;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Phase {
    PreCalibration,
    Assisted,
    Transition,
    FreeMarket,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::PreCalibration => "pre_calibration",
            Phase::Assisted => "assisted",
            Phase::Transition => "transition",
            Phase::FreeMarket => "free_market",
        }
    }
}

/// Complete simulation state at a month boundary.
#[derive(Debug, Clone)]
pub struct EconomyState {
    pub model: Arc<Model>,
    pub seed: u64,
    pub month: i64,
    pub phase: Phase,
    pub workers: Vec<Worker>,
    pub firms: Vec<Firm>,
    pub government: Government,
    pub external: ExternalSector,
    pub rng: ChaCha8Rng,
    /// Separate stream for short-time-work participation draws.
    pub kurzarbeit_rng: ChaCha8Rng,
    pub timeline: Option<PandemicTimeline>,
    /// Absolute month at which the free-market phase began.
    pub free_market_start: Option<i64>,
    pub subsidy_rate: f64,
    /// Share of accrued income households spend.
    pub household_factor: f64,
    pub smoothed_income: f64,
    /// Laspeyres base prices; 1.0 until frozen at free-market entry.
    pub base_prices: Vec<f64>,
    pub cpi: f64,
    /// Recent monthly unmet-demand ratios per sector, newest last.
    pub unmet_history: Vec<VecDeque<f64>>,
    pub household_durables: f64,
    pub next_firm_id: u64,
    pub collapsed: bool,
}

impl EconomyState {
    fn blank(model: Arc<Model>, seed: u64) -> Self {
        let n = model.sector_count();
        let mut kurzarbeit_rng = ChaCha8Rng::seed_from_u64(seed);
        kurzarbeit_rng.set_stream(1);
        let coeffs = &model.coeffs;
        let government = Government {
            wealth: 0.0,
            tax_rate_production: coeffs.tax_rate_production.clone(),
            tax_rate_products: coeffs.tax_rate_products.clone(),
            levy_rate: coeffs.other_coeff.clone(),
            consumption_factors: vec![1.0; n],
            transfer_ledger: 0.0,
        };
        let external = ExternalSector::new(model.export_demand.clone());
        let mut workers = Vec::with_capacity(model.worker_count());
        for j in 0..n {
            for _ in 0..model.sector_workers[j] {
                let wage = model.base_wage[j];
                workers.push(Worker {
                    id: workers.len(),
                    sector: j,
                    employer: None,
                    asking_wage: wage,
                    last_wage: wage,
                    wealth: 0.0,
                    income_accrued: 0.0,
                    work_capacity_factor: 1.0,
                });
            }
        }
        Self {
            seed,
            month: 0,
            phase: Phase::PreCalibration,
            workers,
            firms: Vec::new(),
            government,
            external,
            rng: ChaCha8Rng::seed_from_u64(seed),
            kurzarbeit_rng,
            timeline: None,
            free_market_start: None,
            subsidy_rate: 1.0,
            household_factor: 1.0,
            smoothed_income: 0.0,
            base_prices: vec![1.0; n],
            cpi: 1.0,
            unmet_history: vec![VecDeque::new(); n],
            household_durables: 0.0,
            next_firm_id: 0,
            collapsed: false,
            model,
        }
    }

    /// Economy with workers but no firms; everyone is unemployed.
    pub fn empty(model: Arc<Model>, seed: u64) -> Self {
        let mut s = Self::blank(model, seed);
        s.phase = Phase::FreeMarket;
        s.subsidy_rate = 0.0;
        s.free_market_start = Some(0);
        s
    }

    fn base_firm(&mut self, j: usize, hires: usize) -> Firm {
        let m = self.model.clone();
        let k = &m.constants;
        let avg = m.monthly_output[j];
        let id = FirmId(self.next_firm_id);
        self.next_firm_id += 1;
        let mut f = Firm::new(id, j, m.sector_count(), 1.0, m.base_wage[j], self.month);
        f.avg_monthly_sales = avg;
        f.inventory = k.finished_goods_months * avg;
        for (i, a) in m.coeffs.inputs_of(j) {
            f.input_stocks[i] = k.stock_target_months * avg * a;
        }
        f.import_stock = k.stock_target_months * avg * m.coeffs.import_coeff[j];
        f.fixed_capital = m.capital_target(j, avg);
        f.wealth = m.reserve(j, 1.0, avg);
        let mut taken = 0;
        for w in self.workers.iter_mut() {
            if taken == hires {
                break;
            }
            if w.sector == j && w.employer.is_none() {
                w.employer = Some(id);
                f.employees.push(w.id);
                taken += 1;
            }
        }
        f
    }

    /// Household income per month at the base-period fixed point: wages,
    /// dividends of every producer and benefits of the unemployed.
    fn base_income(&self) -> (f64, f64, f64) {
        let m = &self.model;
        let k = &m.constants;
        let n = m.sector_count();
        let wages: f64 = (0..n)
            .map(|j| m.base_wage[j] * m.employment_target[j] as f64)
            .sum();
        let dividends: f64 = (0..n)
            .filter(|&j| m.active[j])
            .map(|j| {
                let avg = m.monthly_output[j];
                let surplus = m.coeffs.capital_coeff[j] * avg;
                surplus - k.producer_depreciation * m.capital_target(j, avg)
            })
            .sum();
        let benefits: f64 = (0..n)
            .map(|j| {
                k.benefit_ratio
                    * m.base_wage[j]
                    * (m.sector_workers[j] - m.employment_target[j]) as f64
            })
            .sum();
        (wages, dividends, benefits)
    }

    /// Starting point of calibration: one firm per active sector, each run
    /// by a single founder, with stocks, capital and inventory at target.
    pub fn initial(model: Arc<Model>, seed: u64) -> Self {
        let mut s = Self::blank(model.clone(), seed);
        for &j in &model.init_order {
            let f = s.base_firm(j, 1);
            s.firms.push(f);
        }
        let ratio = model.constants.benefit_ratio;
        for w in s.workers.iter_mut() {
            w.wealth = 2.0 * w.last_wage;
            if w.employer.is_none() {
                w.income_accrued = ratio * w.last_wage;
            }
        }
        let (wages, dividends, benefits) = s.base_income();
        let income = wages + dividends + benefits;
        s.smoothed_income = income;
        s.household_factor = if income > 0.0 {
            model.household_target / income
        } else {
            1.0
        };
        s
    }

    /// Analytic fixed point of the base period: one firm per sector at
    /// target employment, every stock at target and last month's dividends
    /// and benefits already accrued, so that one month reproduces the
    /// table's flows divided by twelve.
    pub fn steady_state(model: Arc<Model>, seed: u64) -> Self {
        let mut s = Self::blank(model.clone(), seed);
        for &j in &model.init_order {
            let f = s.base_firm(j, model.employment_target[j]);
            s.firms.push(f);
        }
        let (wages, dividends, benefits) = s.base_income();
        let per_worker = dividends / s.workers.len().max(1) as f64;
        let ratio = model.constants.benefit_ratio;
        for w in s.workers.iter_mut() {
            w.income_accrued = per_worker;
            if w.employer.is_none() {
                w.income_accrued += ratio * w.last_wage;
            }
            w.wealth = 24.0 * w.last_wage + w.income_accrued;
        }
        let income = wages + dividends + benefits;
        s.smoothed_income = income;
        s.household_factor = if income > 0.0 {
            model.household_target / income
        } else {
            1.0
        };
        s.phase = Phase::FreeMarket;
        s.subsidy_rate = 0.0;
        s.free_market_start = Some(0);
        s
    }

    pub fn with_timeline(mut self, timeline: Option<PandemicTimeline>) -> Self {
        self.timeline = timeline;
        self
    }

    /// Sum of the wealth of every domestic agent.
    pub fn total_wealth(&self) -> f64 {
        let workers: f64 = self.workers.iter().map(|w| w.wealth).sum();
        let firms: f64 = self.firms.iter().map(|f| f.wealth).sum();
        workers + firms + self.government.wealth
    }

    pub fn unemployed_count(&self) -> usize {
        self.workers.iter().filter(|w| w.employer.is_none()).count()
    }

    pub fn unemployment_rate(&self) -> f64 {
        if self.workers.is_empty() {
            return 1.0;
        }
        self.unemployed_count() as f64 / self.workers.len() as f64
    }

    /// Indices of firms per sector.
    pub fn sellers_by_sector(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.model.sector_count()];
        for (k, f) in self.firms.iter().enumerate() {
            out[f.sector].push(k);
        }
        out
    }

    /// Mean posted price per sector; `None` where the sector has no firm.
    pub fn sector_mean_prices(&self) -> Vec<Option<f64>> {
        let n = self.model.sector_count();
        let mut sum = vec![0.0; n];
        let mut count = vec![0usize; n];
        for f in &self.firms {
            sum[f.sector] += f.price;
            count[f.sector] += 1;
        }
        (0..n)
            .map(|j| {
                if count[j] > 0 {
                    Some(sum[j] / count[j] as f64)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Share of firms with at most 9 employees; `None` without firms.
    pub fn micro_firm_share(&self) -> Option<f64> {
        if self.firms.is_empty() {
            return None;
        }
        let micro = self
            .firms
            .iter()
            .filter(|f| size_class(f.headcount()) == 0)
            .count();
        Some(micro as f64 / self.firms.len() as f64)
    }

    /// Months elapsed since free-market entry, if it happened.
    pub fn free_market_month(&self) -> Option<i64> {
        self.free_market_start.map(|s| self.month - s)
    }

    /// Absolute month after which newly founded firms get no short-time pay.
    pub fn kurzarbeit_cutoff(&self) -> Option<i64> {
        let start = self.free_market_start?;
        self.timeline.as_ref().map(|t| start + t.eligibility_cutoff)
    }

    /// Switches to the free-market phase and freezes the Laspeyres base prices.
    pub fn enter_free_market(&mut self) {
        self.phase = Phase::FreeMarket;
        self.subsidy_rate = 0.0;
        self.free_market_start = Some(self.month);
        let means = self.sector_mean_prices();
        self.base_prices = means.iter().map(|p| p.unwrap_or(1.0)).collect();
    }
}
