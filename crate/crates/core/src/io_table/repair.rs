use std::fmt;

use serde::{Deserialize, Serialize};

use super::{CountryParams, SocialAccountingMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepairPolicy {
    /// Sectors with gross output below this fraction of total output are
    /// marked inactive.
    pub inactive_output_share: f64,
    /// Operating surplus is floored at this fraction of gross output.
    pub gos_floor_share: f64,
}

impl Default for RepairPolicy {
    fn default() -> Self {
        Self {
            inactive_output_share: 1e-9,
            gos_floor_share: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RepairKind {
    InactiveSector,
    GosFloored,
    /// Reported only; the value is kept.
    NegativeProductionTaxes,
    CpiReset,
}

impl fmt::Display for RepairKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RepairKind::InactiveSector => "sector inactive (near-zero output)",
            RepairKind::GosFloored => "GOS floored",
            RepairKind::NegativeProductionTaxes => "negative production taxes kept",
            RepairKind::CpiReset => "initial CPI reset",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairEntry {
    pub kind: RepairKind,
    /// Sector code, or `None` for country-level parameters.
    pub sector: Option<String>,
    pub before: f64,
    pub after: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RepairReport {
    pub entries: Vec<RepairEntry>,
}

impl RepairReport {
    pub fn is_clean(&self) -> bool {
        self.entries.is_empty()
    }

    /// True when at least one value was changed (flags alone do not count).
    pub fn changed_anything(&self) -> bool {
        self.entries
            .iter()
            .any(|e| e.kind != RepairKind::NegativeProductionTaxes)
    }

    pub fn sectors_with(&self, kind: RepairKind) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|e| e.kind == kind)
            .filter_map(|e| e.sector.as_deref())
            .collect()
    }

    pub fn merge(&mut self, other: RepairReport) {
        self.entries.extend(other.entries);
    }
}

impl fmt::Display for RepairReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return writeln!(f, "no repairs needed");
        }
        for e in &self.entries {
            let who = e.sector.as_deref().unwrap_or("country");
            writeln!(f, "{who}: {} ({} -> {})", e.kind, e.before, e.after)?;
        }
        Ok(())
    }
}

pub fn repair_sam(
    mut sam: SocialAccountingMatrix,
    policy: &RepairPolicy,
) -> (SocialAccountingMatrix, RepairReport) {
    let n = sam.sector_count();
    let mut report = RepairReport::default();
    if sam.inactive.len() != n {
        sam.inactive = vec![false; n];
    }
    let total: f64 = sam.gross_output.iter().filter(|x| **x > 0.0).sum();
    let threshold = policy.inactive_output_share * total;

    for j in 0..n {
        let code = sam.sectors[j].clone();
        let x = sam.gross_output[j];
        if !sam.inactive[j] && (x <= 0.0 || x < threshold) {
            sam.inactive[j] = true;
            report.entries.push(RepairEntry {
                kind: RepairKind::InactiveSector,
                sector: Some(code.clone()),
                before: x,
                after: x,
            });
        }
        if sam.inactive[j] {
            continue;
        }
        let floor = policy.gos_floor_share * x;
        if sam.operating_surplus[j] < floor {
            report.entries.push(RepairEntry {
                kind: RepairKind::GosFloored,
                sector: Some(code.clone()),
                before: sam.operating_surplus[j],
                after: floor,
            });
            sam.operating_surplus[j] = floor;
        }
        if sam.taxes_production[j] < 0.0 {
            report.entries.push(RepairEntry {
                kind: RepairKind::NegativeProductionTaxes,
                sector: Some(code),
                before: sam.taxes_production[j],
                after: sam.taxes_production[j],
            });
        }
    }
    (sam, report)
}

pub fn repair_params(mut params: CountryParams) -> (CountryParams, RepairReport) {
    let mut report = RepairReport::default();
    if !(params.initial_cpi > 0.0) {
        report.entries.push(RepairEntry {
            kind: RepairKind::CpiReset,
            sector: None,
            before: params.initial_cpi,
            after: 1.0,
        });
        params.initial_cpi = 1.0;
    }
    (params, report)
}
