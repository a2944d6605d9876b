use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{firm_size_distribution, ols_growth, ForecastError, GrowthFit, SizeDistribution};
use crate::calibration::{calibrate, CalibrationError, CalibrationSchedule, CalibrationTrace};
use crate::economy::Model;
use crate::engine::{step_month, EconomyState, EngineError, MonthReport};
use crate::shocks::PandemicTimeline;

/// The twelve seeds of the reference ensemble.
pub const DEFAULT_SEEDS: [u64; 12] = [
    5489, 12345, 67890, 31415, 99999, 54321, 11111, 77777, 22222, 33333, 44444, 55555,
];

/// Free-market months the growth trend is fitted over.
pub const GROWTH_WINDOW: usize = 12;

/// One seed's calibration and free-market months.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: u64,
    /// Reports of the calibration months.
    pub calibration: Vec<MonthReport>,
    pub trace: CalibrationTrace,
    /// Free-market reports; empty when calibration timed out.
    pub monthly: Vec<MonthReport>,
    pub converged: bool,
    pub collapsed: bool,
    pub free_market_month: Option<i64>,
    /// Firm sizes after the last simulated month.
    pub firm_sizes: Option<SizeDistribution>,
}

impl SeedRun {
    pub fn real_gdp(&self) -> Vec<f64> {
        self.monthly.iter().map(|r| r.real_gdp).collect()
    }

    /// OLS growth of real GDP over the first twelve free-market months.
    pub fn growth(&self) -> Result<GrowthFit, ForecastError> {
        let y = self.real_gdp();
        if y.len() < GROWTH_WINDOW {
            return Err(ForecastError::TooShort {
                len: y.len(),
                need: GROWTH_WINDOW,
            });
        }
        ols_growth(&y[..GROWTH_WINDOW])
    }

    /// Mean free-market nominal GDP, annualized.
    pub fn mean_annual_nominal_gdp(&self) -> f64 {
        mean(self.monthly.iter().map(|r| r.nominal_gdp)) * 12.0
    }

    pub fn mean_unemployment(&self) -> f64 {
        mean(self.monthly.iter().map(|r| r.unemployment_rate))
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// Calibrates a fresh economy with `seed` and runs `free_market_months`
/// months of free market under `timeline`. A calibration timeout is an
/// outcome, reported through `converged`.
pub fn run_seed(
    model: Arc<Model>,
    seed: u64,
    schedule: &CalibrationSchedule,
    free_market_months: usize,
    timeline: Option<PandemicTimeline>,
) -> Result<SeedRun, EngineError> {
    let state = EconomyState::initial(model, seed).with_timeline(timeline);
    match calibrate(state, schedule) {
        Ok(cal) => {
            let mut state = cal.state;
            let mut monthly = Vec::with_capacity(free_market_months);
            for _ in 0..free_market_months {
                monthly.push(step_month(&mut state)?);
            }
            let collapsed = monthly.iter().any(|r| r.collapsed);
            let firm_sizes = firm_size_distribution(&state).ok();
            Ok(SeedRun {
                seed,
                calibration: cal.reports,
                trace: cal.trace,
                monthly,
                converged: true,
                collapsed,
                free_market_month: Some(cal.free_market_month),
                firm_sizes,
            })
        }
        Err(CalibrationError::Timeout { trace, .. }) => Ok(SeedRun {
            seed,
            calibration: Vec::new(),
            collapsed: trace.rows.last().is_some_and(|r| r.firms == 0),
            trace: *trace,
            monthly: Vec::new(),
            converged: false,
            free_market_month: None,
            firm_sizes: None,
        }),
        Err(CalibrationError::Engine(e)) => Err(e),
    }
}

/// Thresholds for keeping a seed in the ensemble. Both bounds are inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterPolicy {
    /// Minimum mean annualized nominal GDP as a share of the table's GDP.
    pub min_gdp_share: f64,
    pub max_unemployment: f64,
    /// When set, runs with |growth| above this many percent are dropped.
    pub outlier_growth: Option<f64>,
}

impl Default for FilterPolicy {
    fn default() -> Self {
        Self {
            min_gdp_share: 0.8,
            max_unemployment: 0.2,
            outlier_growth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Exclusion {
    NotConverged,
    Collapsed,
    LowGdp {
        share: f64,
    },
    HighUnemployment {
        rate: f64,
    },
    UndefinedGrowth {
        reason: String,
    },
    Outlier {
        growth: f64,
    },
    /// The run stopped with an error; set by drivers, never by the filter.
    Failed {
        message: String,
    },
}

impl Exclusion {
    /// Short rule name, as used in the serialized form.
    pub fn rule(&self) -> &'static str {
        match self {
            Exclusion::NotConverged => "not_converged",
            Exclusion::Collapsed => "collapsed",
            Exclusion::LowGdp { .. } => "low_gdp",
            Exclusion::HighUnemployment { .. } => "high_unemployment",
            Exclusion::UndefinedGrowth { .. } => "undefined_growth",
            Exclusion::Outlier { .. } => "outlier",
            Exclusion::Failed { .. } => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedSeed {
    pub seed: u64,
    pub reasons: Vec<Exclusion>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub kept: Vec<u64>,
    pub excluded: Vec<ExcludedSeed>,
}

/// Reasons `run` fails `policy`; empty when it is kept.
fn exclusions(run: &SeedRun, gdp_target: f64, policy: &FilterPolicy) -> Vec<Exclusion> {
    if !run.converged {
        return vec![Exclusion::NotConverged];
    }
    let mut out = Vec::new();
    if run.collapsed {
        out.push(Exclusion::Collapsed);
    }
    // Inclusive bounds; the slack absorbs rounding in the monthly means.
    let share = run.mean_annual_nominal_gdp() / gdp_target;
    if !(share >= policy.min_gdp_share * (1.0 - 1e-12)) {
        out.push(Exclusion::LowGdp { share });
    }
    let rate = run.mean_unemployment();
    if !(rate <= policy.max_unemployment * (1.0 + 1e-12)) {
        out.push(Exclusion::HighUnemployment { rate });
    }
    match run.growth() {
        Ok(fit) => {
            if let Some(limit) = policy.outlier_growth {
                if fit.growth.abs() > limit {
                    out.push(Exclusion::Outlier { growth: fit.growth });
                }
            }
        }
        Err(e) => out.push(Exclusion::UndefinedGrowth {
            reason: e.to_string(),
        }),
    }
    out
}

/// Splits `runs` into kept runs and an exclusion report. Kept runs keep
/// their input order.
pub fn filter_seeds<'a>(
    runs: &'a [SeedRun],
    gdp_target: f64,
    policy: &FilterPolicy,
) -> (Vec<&'a SeedRun>, FilterReport) {
    let mut kept = Vec::new();
    let mut report = FilterReport::default();
    for run in runs {
        let reasons = exclusions(run, gdp_target, policy);
        if reasons.is_empty() {
            kept.push(run);
            report.kept.push(run.seed);
        } else {
            report.excluded.push(ExcludedSeed {
                seed: run.seed,
                reasons,
            });
        }
    }
    (kept, report)
}

/// Summary of the per-seed growth forecasts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub kept_seeds: Vec<u64>,
    pub growths: Vec<f64>,
    pub r_squared: Vec<f64>,
    pub mean_growth: f64,
    /// Sample standard deviation; `None` for a single run.
    pub sd: Option<f64>,
    pub sem: Option<f64>,
    /// Mean of the first k growths, k = 1..n.
    pub running_mean: Vec<f64>,
}

/// Statistics over the OLS growths of `kept`. Runs whose growth is
/// undefined are skipped; `filter_seeds` already excludes them.
pub fn ensemble_stats(kept: &[&SeedRun]) -> Result<EnsembleResult, ForecastError> {
    let mut kept_seeds = Vec::new();
    let mut growths = Vec::new();
    let mut r_squared = Vec::new();
    for run in kept {
        if let Ok(fit) = run.growth() {
            kept_seeds.push(run.seed);
            growths.push(fit.growth);
            r_squared.push(fit.r2);
        }
    }
    if growths.is_empty() {
        return Err(ForecastError::Empty);
    }
    let n = growths.len() as f64;
    let mean_growth = growths.iter().sum::<f64>() / n;
    let sd = (growths.len() > 1).then(|| {
        (growths
            .iter()
            .map(|g| (g - mean_growth).powi(2))
            .sum::<f64>()
            / (n - 1.0))
            .sqrt()
    });
    let sem = sd.map(|s| s / n.sqrt());
    let mut running_mean = Vec::with_capacity(growths.len());
    let mut acc = 0.0;
    for (k, g) in growths.iter().enumerate() {
        acc += g;
        running_mean.push(acc / (k + 1) as f64);
    }
    Ok(EnsembleResult {
        kept_seeds,
        growths,
        r_squared,
        mean_growth,
        sd,
        sem,
        running_mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::economy::ModelConstants;
    use crate::engine::test_support::synthetic_model;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// A converged run with a linear real-GDP path and constant nominal GDP
    /// and unemployment.
    pub(crate) fn scripted(
        seed: u64,
        growth_pct: f64,
        annual_gdp: f64,
        unemployment: f64,
    ) -> SeedRun {
        let model = synthetic_model(ModelConstants::with_scale(4));
        let mut state = EconomyState::steady_state(model, seed);
        let template = step_month(&mut state).unwrap();
        let slope = growth_pct / 100.0 / 12.0 * 100.0;
        let monthly = (0..12)
            .map(|t| {
                let mut r = template.clone();
                r.month = t;
                r.real_gdp = 100.0 + slope * t as f64;
                r.nominal_gdp = annual_gdp / 12.0;
                r.unemployment_rate = unemployment;
                r.collapsed = false;
                r
            })
            .collect();
        SeedRun {
            seed,
            calibration: Vec::new(),
            trace: CalibrationTrace::default(),
            monthly,
            converged: true,
            collapsed: false,
            free_market_month: Some(0),
            firm_sizes: None,
        }
    }

    #[test]
    fn scripted_growth_is_recovered() {
        let run = scripted(1, 2.5, 1000.0, 0.05);
        assert_relative_eq!(run.growth().unwrap().growth, 2.5, max_relative = 1e-12);
        assert_relative_eq!(run.mean_annual_nominal_gdp(), 1000.0, max_relative = 1e-12);
    }

    #[test]
    fn gdp_and_unemployment_bounds_are_inclusive() {
        let runs = vec![
            scripted(1, 1.0, 799.0, 0.05),
            scripted(2, 1.0, 801.0, 0.05),
            scripted(3, 1.0, 1000.0, 0.201),
            scripted(4, 1.0, 1000.0, 0.199),
            scripted(5, 1.0, 800.0, 0.2),
        ];
        let (kept, report) = filter_seeds(&runs, 1000.0, &FilterPolicy::default());
        let seeds: Vec<u64> = kept.iter().map(|r| r.seed).collect();
        assert_eq!(seeds, vec![2, 4, 5]);
        assert_eq!(report.kept, seeds);
        assert!(matches!(
            report.excluded[0].reasons[0],
            Exclusion::LowGdp { .. }
        ));
        assert!(matches!(
            report.excluded[1].reasons[0],
            Exclusion::HighUnemployment { .. }
        ));
    }

    #[test]
    fn failed_runs_are_excluded() {
        let mut timed_out = scripted(1, 1.0, 1000.0, 0.05);
        timed_out.converged = false;
        let mut collapsed = scripted(2, 1.0, 1000.0, 0.05);
        collapsed.collapsed = true;
        let runs = [timed_out, collapsed];
        let (kept, report) = filter_seeds(&runs, 1000.0, &FilterPolicy::default());
        assert!(kept.is_empty());
        assert_eq!(report.excluded[0].reasons, vec![Exclusion::NotConverged]);
        assert_eq!(report.excluded[1].reasons, vec![Exclusion::Collapsed]);
    }

    #[test]
    fn outlier_rule_is_optional() {
        let runs = [
            scripted(1, 25.0, 1000.0, 0.05),
            scripted(2, 2.0, 1000.0, 0.05),
        ];
        let (kept, _) = filter_seeds(&runs, 1000.0, &FilterPolicy::default());
        assert_eq!(kept.len(), 2);
        let policy = FilterPolicy {
            outlier_growth: Some(20.0),
            ..FilterPolicy::default()
        };
        let (kept, report) = filter_seeds(&runs, 1000.0, &policy);
        assert_eq!(kept.len(), 1);
        assert!(matches!(
            report.excluded[0].reasons[0],
            Exclusion::Outlier { .. }
        ));
    }

    #[test]
    fn rule_names_match_serialization() {
        let all = [
            Exclusion::NotConverged,
            Exclusion::Collapsed,
            Exclusion::LowGdp { share: 0.5 },
            Exclusion::HighUnemployment { rate: 0.3 },
            Exclusion::UndefinedGrowth {
                reason: String::new(),
            },
            Exclusion::Outlier { growth: 30.0 },
            Exclusion::Failed {
                message: String::new(),
            },
        ];
        for e in all {
            let json = serde_json::to_value(&e).unwrap();
            assert_eq!(json["rule"], e.rule());
        }
    }

    #[test]
    fn textbook_stats() {
        let runs = [
            scripted(1, 1.0, 1.0, 0.0),
            scripted(2, 2.0, 1.0, 0.0),
            scripted(3, 3.0, 1.0, 0.0),
        ];
        let refs: Vec<&SeedRun> = runs.iter().collect();
        let e = ensemble_stats(&refs).unwrap();
        assert_relative_eq!(e.mean_growth, 2.0, max_relative = 1e-12);
        assert_relative_eq!(e.sd.unwrap(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(e.sem.unwrap(), 1.0 / 3f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(e.running_mean[1], 1.5, max_relative = 1e-12);
    }

    #[test]
    fn single_run_has_no_spread() {
        let runs = [scripted(1, 2.0, 1.0, 0.0)];
        let e = ensemble_stats(&[&runs[0]]).unwrap();
        assert_relative_eq!(e.mean_growth, 2.0, max_relative = 1e-12);
        assert_eq!(e.sd, None);
        assert_eq!(e.sem, None);
    }

    #[test]
    fn identical_growths() {
        let runs: Vec<SeedRun> = (0..12).map(|s| scripted(s, 1.5, 1.0, 0.0)).collect();
        let refs: Vec<&SeedRun> = runs.iter().collect();
        let e = ensemble_stats(&refs).unwrap();
        assert!(e.sd.unwrap() < 1e-12);
        assert!(e.running_mean.iter().all(|m| (m - 1.5).abs() < 1e-12));
    }

    #[test]
    fn empty_ensemble_is_an_error() {
        assert_eq!(ensemble_stats(&[]), Err(ForecastError::Empty));
    }

    #[test]
    fn timeout_becomes_unconverged_run() {
        let model = synthetic_model(ModelConstants::with_scale(4));
        let mut schedule = CalibrationSchedule::default();
        schedule.criteria.timeout_months = 25;
        let run = run_seed(model, 7, &schedule, 12, None).unwrap();
        assert!(!run.converged);
        assert!(run.monthly.is_empty());
        assert_eq!(run.trace.len(), 25);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn filter_ignores_order(
            specs in prop::collection::vec((700.0f64..1200.0, 0.0f64..0.3), 1..6),
            rot in 0usize..6,
        ) {
            let runs: Vec<SeedRun> = specs
                .iter()
                .enumerate()
                .map(|(i, (g, u))| scripted(i as u64, 1.0, *g, *u))
                .collect();
            let mut shuffled = runs.clone();
            let len = shuffled.len();
            shuffled.rotate_left(rot % len);
            let (_, a) = filter_seeds(&runs, 1000.0, &FilterPolicy::default());
            let (_, b) = filter_seeds(&shuffled, 1000.0, &FilterPolicy::default());
            let mut ka = a.kept.clone();
            let mut kb = b.kept.clone();
            ka.sort();
            kb.sort();
            prop_assert_eq!(ka, kb);
        }

        #[test]
        fn mean_survives_duplication(growths in prop::collection::vec(-5.0f64..5.0, 1..6)) {
            let runs: Vec<SeedRun> = growths.iter().enumerate().map(|(i, g)| scripted(i as u64, *g, 1.0, 0.0)).collect();
            let once: Vec<&SeedRun> = runs.iter().collect();
            let twice: Vec<&SeedRun> = runs.iter().chain(runs.iter()).collect();
            let a = ensemble_stats(&once).unwrap().mean_growth;
            let b = ensemble_stats(&twice).unwrap().mean_growth;
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
