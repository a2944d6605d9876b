//! Exogenous shock timelines applied during free-market months.
//!
//! A timeline is written as an INI-like block:
//!
//! ```text
//! start_month = 0          # free-market month at which month.0 applies
//! eligibility_cutoff = 0   # firms founded after this free-market month get no short-time pay
//!
//! [month.0]
//! capacity.I = 0.03        # exact sector code
//! capacity.C* = 0.80       # every sector whose code starts with C
//! capacity.* = 0.95        # all remaining sectors
//! export.* = 0.85
//! import.* = 0.90
//! kurzarbeit = 0.70        # share of eligible firms that take short-time pay
//! ```
//!
//! Unlisted sectors and factors default to 1.0 and `kurzarbeit` to 0.
//! When several patterns match a sector the exact code wins, then the
//! longest prefix, then `*`. Months between declared ones are no-op months.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::economy::Firm;
use crate::engine::EconomyState;

#[derive(Debug, Error, PartialEq)]
pub enum ShockError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: capacity {value} for `{pattern}` is outside [0, 1]")]
    CapacityRange {
        line: usize,
        pattern: String,
        value: f64,
    },
    #[error("line {line}: factor {value} for `{pattern}` is negative")]
    NegativeFactor {
        line: usize,
        pattern: String,
        value: f64,
    },
    #[error("line {line}: month {month} declared twice")]
    DuplicateMonth { line: usize, month: usize },
    #[error("timeline declares no months")]
    Empty,
    #[error("eligibility_cutoff {cutoff} is after start_month {start}")]
    CutoffAfterStart { cutoff: i64, start: i64 },
}

/// Sector-pattern assignments, resolved against sector codes on use.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SectorValues(pub Vec<(String, f64)>);

impl SectorValues {
    pub fn value_for(&self, code: &str) -> f64 {
        let mut best: Option<(usize, f64)> = None;
        for (pattern, v) in &self.0 {
            let rank = if pattern == code {
                usize::MAX
            } else if let Some(prefix) = pattern.strip_suffix('*') {
                if code.starts_with(prefix) {
                    prefix.len()
                } else {
                    continue;
                }
            } else {
                continue;
            };
            if best.is_none_or(|(r, _)| rank > r) {
                best = Some((rank, *v));
            }
        }
        best.map(|(_, v)| v).unwrap_or(1.0)
    }

    pub fn resolve(&self, sectors: &[String]) -> Vec<f64> {
        sectors.iter().map(|s| self.value_for(s)).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MonthShock {
    pub sector_capacity: SectorValues,
    pub export_factor: SectorValues,
    pub import_factor: SectorValues,
    pub kurzarbeit_participation: f64,
}

impl MonthShock {
    pub fn resolve(&self, sectors: &[String]) -> ResolvedShock {
        ResolvedShock {
            capacity: self.sector_capacity.resolve(sectors),
            export_factor: self.export_factor.resolve(sectors),
            import_factor: self.import_factor.resolve(sectors),
            kurzarbeit_participation: self.kurzarbeit_participation,
        }
    }
}

/// A month's shock expanded to one value per sector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedShock {
    pub capacity: Vec<f64>,
    pub export_factor: Vec<f64>,
    pub import_factor: Vec<f64>,
    pub kurzarbeit_participation: f64,
}

impl ResolvedShock {
    pub fn neutral(sectors: usize) -> Self {
        Self {
            capacity: vec![1.0; sectors],
            export_factor: vec![1.0; sectors],
            import_factor: vec![1.0; sectors],
            kurzarbeit_participation: 0.0,
        }
    }

    pub fn is_neutral(&self) -> bool {
        self.capacity.iter().all(|c| *c == 1.0)
            && self.export_factor.iter().all(|c| *c == 1.0)
            && self.import_factor.iter().all(|c| *c == 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PandemicTimeline {
    pub start_month: i64,
    pub eligibility_cutoff: i64,
    pub months: Vec<MonthShock>,
}

impl PandemicTimeline {
    pub fn len(&self) -> usize {
        self.months.len()
    }

    pub fn is_empty(&self) -> bool {
        self.months.is_empty()
    }

    /// Shock for free-market month `fm_month`, if the timeline covers it.
    pub fn shock_at(&self, fm_month: i64) -> Option<&MonthShock> {
        let k = fm_month - self.start_month;
        if k < 0 {
            return None;
        }
        self.months.get(k as usize)
    }
}

fn parse_number(value: &str, line: usize) -> Result<f64, ShockError> {
    let v: f64 = value.parse().map_err(|_| ShockError::Syntax {
        line,
        message: format!("`{value}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(ShockError::Syntax {
            line,
            message: format!("`{value}` is not finite"),
        });
    }
    Ok(v)
}

/// Parses a timeline block. `first_line` is the line number of the block's
/// first line inside its file, so diagnostics point at the right place.
pub fn parse_timeline_at(text: &str, first_line: usize) -> Result<PandemicTimeline, ShockError> {
    let mut start_month = 0i64;
    let mut cutoff: Option<i64> = None;
    let mut declared: Vec<(usize, MonthShock)> = Vec::new();
    let mut current: Option<usize> = None;

    for (k, raw) in text.lines().enumerate() {
        let line = first_line + k;
        let content = raw.split('#').next().unwrap_or_default().trim();
        if content.is_empty() {
            continue;
        }
        if let Some(header) = content.strip_prefix('[') {
            let name = header.strip_suffix(']').ok_or_else(|| ShockError::Syntax {
                line,
                message: format!("unterminated section header `{content}`"),
            })?;
            let month = name
                .trim()
                .strip_prefix("month.")
                .and_then(|m| m.parse::<usize>().ok())
                .ok_or_else(|| ShockError::Syntax {
                    line,
                    message: format!("expected [month.N], got `{content}`"),
                })?;
            if declared.iter().any(|(m, _)| *m == month) {
                return Err(ShockError::DuplicateMonth { line, month });
            }
            declared.push((month, MonthShock::default()));
            current = Some(declared.len() - 1);
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ShockError::Syntax {
            line,
            message: format!("expected key = value, got `{content}`"),
        })?;
        let key = key.trim();
        let value = value.trim();
        let Some(slot) = current else {
            match key {
                "start_month" => start_month = parse_number(value, line)? as i64,
                "eligibility_cutoff" => cutoff = Some(parse_number(value, line)? as i64),
                other => {
                    return Err(ShockError::Syntax {
                        line,
                        message: format!("unknown timeline key `{other}`"),
                    })
                }
            }
            continue;
        };
        let shock = &mut declared[slot].1;
        if value.is_empty() {
            continue;
        }
        let v = parse_number(value, line)?;
        if key == "kurzarbeit" {
            if !(0.0..=1.0).contains(&v) {
                return Err(ShockError::Syntax {
                    line,
                    message: format!("kurzarbeit participation {v} is outside [0, 1]"),
                });
            }
            shock.kurzarbeit_participation = v;
            continue;
        }
        let (kind, pattern) = key.split_once('.').ok_or_else(|| ShockError::Syntax {
            line,
            message: format!("unknown month key `{key}`"),
        })?;
        let pattern = pattern.to_string();
        let target = match kind {
            "capacity" => {
                if !(0.0..=1.0).contains(&v) {
                    return Err(ShockError::CapacityRange {
                        line,
                        pattern,
                        value: v,
                    });
                }
                &mut shock.sector_capacity
            }
            "export" | "import" => {
                if v < 0.0 {
                    return Err(ShockError::NegativeFactor {
                        line,
                        pattern,
                        value: v,
                    });
                }
                if kind == "export" {
                    &mut shock.export_factor
                } else {
                    &mut shock.import_factor
                }
            }
            other => {
                return Err(ShockError::Syntax {
                    line,
                    message: format!("unknown factor kind `{other}`"),
                })
            }
        };
        if target.0.iter().any(|(p, _)| *p == pattern) {
            return Err(ShockError::Syntax {
                line,
                message: format!("`{key}` set twice in this month"),
            });
        }
        target.0.push((pattern, v));
    }

    if declared.is_empty() {
        return Err(ShockError::Empty);
    }
    let len = declared.iter().map(|(m, _)| m + 1).max().unwrap_or(0);
    let mut months = vec![MonthShock::default(); len];
    for (m, shock) in declared {
        months[m] = shock;
    }
    let eligibility_cutoff = cutoff.unwrap_or(start_month);
    if eligibility_cutoff > start_month {
        return Err(ShockError::CutoffAfterStart {
            cutoff: eligibility_cutoff,
            start: start_month,
        });
    }
    Ok(PandemicTimeline {
        start_month,
        eligibility_cutoff,
        months,
    })
}

pub fn parse_timeline(text: &str) -> Result<PandemicTimeline, ShockError> {
    parse_timeline_at(text, 1)
}

pub fn load_timeline(path: impl AsRef<Path>) -> Result<PandemicTimeline, ShockError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ShockError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_timeline(&text)
}

/// Sets capacity factors on firms and workers and trade factors on the
/// external sector, then draws short-time-work participation.
///
/// Participation is drawn only for eligible firms that actually have idle
/// labor, from a random stream separate from the market's, so a neutral
/// shock leaves the trajectory untouched.
pub fn apply_month_shock(state: &mut EconomyState, shock: &ResolvedShock) {
    for firm in state.firms.iter_mut() {
        firm.capacity_factor = shock.capacity[firm.sector];
        firm.kurzarbeit = false;
    }
    for worker in state.workers.iter_mut() {
        worker.work_capacity_factor = shock.capacity[worker.sector];
    }
    state
        .external
        .export_factor
        .clone_from(&shock.export_factor);
    state
        .external
        .import_factor
        .clone_from(&shock.import_factor);

    if shock.kurzarbeit_participation <= 0.0 {
        return;
    }
    let cutoff = state.kurzarbeit_cutoff();
    for firm in state.firms.iter_mut() {
        if firm.capacity_factor >= 1.0 {
            continue;
        }
        firm.subsidy_eligible = cutoff.is_none_or(|c| firm.founded_month <= c);
        if !firm.subsidy_eligible {
            continue;
        }
        let u: f64 = state.kurzarbeit_rng.random();
        firm.kurzarbeit = u < shock.kurzarbeit_participation;
    }
}

/// Short-time-work pay for one firm this month: `share` of the wage bill of
/// the idle part of its workforce, if it participates.
pub fn kurzarbeit_payment(firm: &Firm, share: f64) -> f64 {
    if !firm.kurzarbeit || !firm.subsidy_eligible {
        return 0.0;
    }
    share * firm.wage_bill() * (1.0 - firm.capacity_factor).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::economy::FirmId;

    #[test]
    fn hospitality_at_three_percent() {
        let t = parse_timeline("[month.0]\ncapacity.I = 0.03\n").unwrap();
        let sectors = vec!["C10T12".to_string(), "I".to_string()];
        let r = t.months[0].resolve(&sectors);
        assert_eq!(r.capacity, vec![1.0, 0.03]);
        assert_eq!(r.export_factor, vec![1.0, 1.0]);
    }

    #[test]
    fn empty_month_is_neutral() {
        let t = parse_timeline("[month.0]\ncapacity.* =\n").unwrap();
        let r = t.months[0].resolve(&["A".to_string()]);
        assert!(r.is_neutral());
        assert_eq!(r.kurzarbeit_participation, 0.0);
    }

    #[test]
    fn nineteen_months() {
        let text: String = (0..19)
            .map(|m| format!("[month.{m}]\nkurzarbeit = 0.5\n"))
            .collect();
        assert_eq!(parse_timeline(&text).unwrap().len(), 19);
    }

    #[test]
    fn pattern_precedence() {
        let v = SectorValues(vec![
            ("*".into(), 0.9),
            ("C*".into(), 0.8),
            ("C2*".into(), 0.7),
            ("C26".into(), 0.1),
        ]);
        assert_eq!(v.value_for("C26"), 0.1);
        assert_eq!(v.value_for("C27"), 0.7);
        assert_eq!(v.value_for("C10T12"), 0.8);
        assert_eq!(v.value_for("K64"), 0.9);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(matches!(
            parse_timeline("[month.0]\ncapacity.I = 1.2"),
            Err(ShockError::CapacityRange { line: 2, .. })
        ));
        assert!(matches!(
            parse_timeline("[month.0]\nexport.* = -0.1"),
            Err(ShockError::NegativeFactor { line: 2, .. })
        ));
        assert!(matches!(
            parse_timeline("[month.0]\n[month.1]\n[month.0]\n"),
            Err(ShockError::DuplicateMonth { line: 3, month: 0 })
        ));
        assert_eq!(parse_timeline("start_month = 2\n"), Err(ShockError::Empty));
        assert!(matches!(
            parse_timeline("start_month = 0\neligibility_cutoff = 3\n[month.0]"),
            Err(ShockError::CutoffAfterStart { .. })
        ));
    }

    #[test]
    fn gaps_become_neutral_months() {
        let t =
            parse_timeline("start_month = 2\n[month.0]\ncapacity.A=0\n[month.3]\ncapacity.A=0.5\n")
                .unwrap();
        assert_eq!(t.len(), 4);
        assert!(t.months[1].resolve(&["A".into()]).is_neutral());
        assert!(t.shock_at(1).is_none());
        assert_eq!(t.shock_at(5).unwrap().sector_capacity.value_for("A"), 0.5);
        assert!(t.shock_at(6).is_none());
    }

    #[test]
    fn payment_covers_idle_share_of_wage_bill() {
        let mut f = Firm::new(FirmId(0), 0, 1, 1.0, 100.0, 0);
        f.employees = vec![0, 1, 2, 3];
        f.capacity_factor = 0.25;
        assert_eq!(kurzarbeit_payment(&f, 0.9), 0.0);
        f.kurzarbeit = true;
        assert!((kurzarbeit_payment(&f, 0.9) - 0.9 * 400.0 * 0.75).abs() < 1e-9);
        f.subsidy_eligible = false;
        assert_eq!(kurzarbeit_payment(&f, 0.9), 0.0);
    }
}
