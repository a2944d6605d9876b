//! Four-stage calibration: pre-calibration, assisted production, subsidy
//! phase-out and the hand-off to the free market.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::economy::Model;
use crate::engine::{step_month, EconomyState, EngineError, MonthReport, Phase};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCriteria {
    /// Unemployment SMA must stay at or below this multiple of the NAIRU.
    pub unemployment_factor: f64,
    pub window: usize,
    /// Maximum relative change of a consumption factor across the window.
    pub stability_threshold: f64,
    pub timeout_months: i64,
}

impl Default for ConvergenceCriteria {
    fn default() -> Self {
        Self {
            unemployment_factor: 1.36,
            window: 12,
            stability_threshold: 0.02,
            timeout_months: 600,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSchedule {
    pub pre_calibration_months: i64,
    pub transition_months: i64,
    pub criteria: ConvergenceCriteria,
}

impl Default for CalibrationSchedule {
    fn default() -> Self {
        Self {
            pre_calibration_months: 24,
            transition_months: 36,
            criteria: ConvergenceCriteria::default(),
        }
    }
}

/// Share of a firm's negative wealth the government covers at close.
pub fn subsidy_rate(phase: Phase, month_in_phase: i64, transition_months: i64) -> f64 {
    match phase {
        Phase::PreCalibration | Phase::Assisted => 1.0,
        Phase::Transition => {
            if transition_months <= 0 {
                return 0.0;
            }
            (1.0 - month_in_phase as f64 / transition_months as f64).clamp(0.0, 1.0)
        }
        Phase::FreeMarket => 0.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub month: i64,
    pub phase: Phase,
    pub unemployment: f64,
    /// Mean unemployment over the last `window` months (fewer at the start).
    pub unemployment_sma: f64,
    pub household_factor: f64,
    pub government_factor: f64,
    pub micro_firm_share: Option<f64>,
    pub subsidy_rate: f64,
    pub firms: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTrace {
    /// Micro-firm share before the first month.
    pub initial_micro_firm_share: Option<f64>,
    pub rows: Vec<TraceRow>,
}

impl CalibrationTrace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn push(&mut self, report: &MonthReport, window: usize) {
        let start = self.rows.len() + 1 - window.min(self.rows.len() + 1);
        let recent = self.rows[start..]
            .iter()
            .map(|r| r.unemployment)
            .chain([report.unemployment_rate]);
        let count = self.rows.len() + 1 - start;
        let sma = recent.sum::<f64>() / count as f64;
        self.rows.push(TraceRow {
            month: report.month,
            phase: report.phase,
            unemployment: report.unemployment_rate,
            unemployment_sma: sma,
            household_factor: report.household_factor,
            government_factor: report.government_factor,
            micro_firm_share: report.micro_firm_share,
            subsidy_rate: report.subsidy_rate,
            firms: report.firms,
        });
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "month",
            "phase",
            "unemployment",
            "unemployment_sma",
            "household_factor",
            "government_factor",
            "micro_firm_share",
            "subsidy_rate",
            "firms",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.month.to_string(),
                r.phase.as_str().to_string(),
                r.unemployment.to_string(),
                r.unemployment_sma.to_string(),
                r.household_factor.to_string(),
                r.government_factor.to_string(),
                r.micro_firm_share
                    .map(|v| v.to_string())
                    .unwrap_or_default(),
                r.subsidy_rate.to_string(),
                r.firms.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergenceVerdict {
    pub unemployment: bool,
    pub household_factor: bool,
    pub government_factor: bool,
}

impl ConvergenceVerdict {
    pub fn overall(&self) -> bool {
        self.unemployment && self.household_factor && self.government_factor
    }
}

fn stable(first: f64, last: f64, threshold: f64) -> bool {
    if first == last {
        return true;
    }
    let scale = last.abs();
    scale > 0.0 && (last - first).abs() / scale < threshold
}

/// Evaluates the three convergence conditions on the last `window` rows.
/// `None` while the trace is shorter than the window.
pub fn check_convergence(
    trace: &[TraceRow],
    nairu: f64,
    crit: &ConvergenceCriteria,
) -> Option<ConvergenceVerdict> {
    if crit.window < 2 || trace.len() < crit.window {
        return None;
    }
    let recent = &trace[trace.len() - crit.window..];
    let sma = recent.iter().map(|r| r.unemployment).sum::<f64>() / crit.window as f64;
    let first = &recent[0];
    let last = &recent[crit.window - 1];
    Some(ConvergenceVerdict {
        // Inclusive bound; the slack absorbs rounding in the window mean.
        unemployment: sma <= crit.unemployment_factor * nairu * (1.0 + 1e-12),
        household_factor: stable(
            first.household_factor,
            last.household_factor,
            crit.stability_threshold,
        ),
        government_factor: stable(
            first.government_factor,
            last.government_factor,
            crit.stability_threshold,
        ),
    })
}

/// Fraction of firms with 0–9 employees; `None` without firms.
pub fn micro_firm_share(state: &EconomyState) -> Option<f64> {
    state.micro_firm_share()
}

#[derive(Debug, Clone)]
pub struct CalibratedEconomy {
    /// State at the first free-market month.
    pub state: EconomyState,
    pub trace: CalibrationTrace,
    pub reports: Vec<MonthReport>,
    pub free_market_month: i64,
    pub verdict: ConvergenceVerdict,
}

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("no convergence within {months} months (last verdict {verdict:?})")]
    Timeout {
        months: i64,
        verdict: Option<ConvergenceVerdict>,
        trace: Box<CalibrationTrace>,
    },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Calibrates a fresh economy built from `model`.
pub fn run_calibration(
    model: Arc<Model>,
    seed: u64,
    schedule: &CalibrationSchedule,
) -> Result<CalibratedEconomy, CalibrationError> {
    calibrate(EconomyState::initial(model, seed), schedule)
}

/// Drives `state` through the calibration phases until the free market
/// begins or the timeout is reached.
pub fn calibrate(
    mut state: EconomyState,
    schedule: &CalibrationSchedule,
) -> Result<CalibratedEconomy, CalibrationError> {
    let crit = &schedule.criteria;
    let nairu = state.model.params.nairu;
    let mut trace = CalibrationTrace {
        initial_micro_firm_share: state.micro_firm_share(),
        rows: Vec::new(),
    };
    let mut reports = Vec::new();
    let mut phase_start = state.month;
    state.phase = Phase::PreCalibration;
    state.free_market_start = None;
    let mut verdict = None;
    let check_from = schedule.pre_calibration_months + crit.window as i64;

    loop {
        let in_phase = state.month - phase_start;
        state.subsidy_rate = subsidy_rate(state.phase, in_phase, schedule.transition_months);
        let report = step_month(&mut state)?;
        trace.push(&report, crit.window);
        reports.push(report);

        if state.month >= check_from {
            verdict = check_convergence(&trace.rows, nairu, crit);
        }
        let converged = verdict.is_some_and(|v| v.overall());
        match state.phase {
            Phase::PreCalibration if state.month >= schedule.pre_calibration_months => {
                state.phase = Phase::Assisted;
                phase_start = state.month;
            }
            Phase::Assisted if converged => {
                state.phase = Phase::Transition;
                phase_start = state.month;
            }
            Phase::Transition
                if converged && state.month - phase_start >= schedule.transition_months =>
            {
                state.enter_free_market();
                return Ok(CalibratedEconomy {
                    free_market_month: state.month,
                    verdict: verdict.expect("converged implies a verdict"),
                    state,
                    trace,
                    reports,
                });
            }
            _ => {}
        }
        if state.month >= crit.timeout_months {
            return Err(CalibrationError::Timeout {
                months: state.month,
                verdict,
                trace: Box::new(trace),
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(u: f64, h: f64, g: f64) -> TraceRow {
        TraceRow {
            month: 0,
            phase: Phase::Assisted,
            unemployment: u,
            unemployment_sma: u,
            household_factor: h,
            government_factor: g,
            micro_firm_share: Some(1.0),
            subsidy_rate: 1.0,
            firms: 1,
        }
    }

    #[test]
    fn subsidy_schedule() {
        assert_eq!(subsidy_rate(Phase::FreeMarket, 7, 36), 0.0);
        assert_eq!(subsidy_rate(Phase::Transition, 18, 36), 0.5);
        assert_eq!(subsidy_rate(Phase::Assisted, 0, 36), 1.0);
        assert_eq!(subsidy_rate(Phase::Transition, 50, 36), 0.0);
    }

    #[test]
    fn unemployment_bound_is_inclusive() {
        let trace = vec![row(0.068, 1.0, 1.0); 12];
        let v = check_convergence(&trace, 0.05, &ConvergenceCriteria::default()).unwrap();
        assert!(v.unemployment);
        let trace = vec![row(0.0681, 1.0, 1.0); 12];
        assert!(
            !check_convergence(&trace, 0.05, &ConvergenceCriteria::default())
                .unwrap()
                .unemployment
        );
    }

    #[test]
    fn small_factor_drift_is_stable() {
        let mut trace = vec![row(0.05, 1.0, 1.0); 12];
        trace[11].household_factor = 1.019;
        let v = check_convergence(&trace, 0.05, &ConvergenceCriteria::default()).unwrap();
        assert!(v.household_factor);
        trace[11].household_factor = 1.03;
        let v = check_convergence(&trace, 0.05, &ConvergenceCriteria::default()).unwrap();
        assert!(!v.household_factor);
        assert!(!v.overall());
    }

    #[test]
    fn flat_trace_converges() {
        let trace = vec![row(0.05, 0.9, 1.1); 20];
        assert!(
            check_convergence(&trace, 0.05, &ConvergenceCriteria::default())
                .unwrap()
                .overall()
        );
    }

    #[test]
    fn short_trace_has_no_verdict() {
        let trace = vec![row(0.05, 1.0, 1.0); 11];
        assert_eq!(
            check_convergence(&trace, 0.05, &ConvergenceCriteria::default()),
            None
        );
    }

    #[test]
    fn verdict_shifts_with_the_trace() {
        let mut trace = vec![row(0.5, 1.0, 1.0); 5];
        trace.extend(vec![row(0.05, 1.0, 1.0); 12]);
        let crit = ConvergenceCriteria::default();
        assert!(check_convergence(&trace, 0.05, &crit).unwrap().overall());
        assert!(!check_convergence(&trace[..16], 0.05, &crit)
            .unwrap()
            .overall());
    }
}
