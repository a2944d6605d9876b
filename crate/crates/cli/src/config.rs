//! Run configuration: a TOML file with an optional trailing
//! `[PANDEMIC_TIMELINE]` block in the timeline grammar.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use ioeco_core::calibration::CalibrationSchedule;
use ioeco_core::forecast::DEFAULT_SEEDS;
use ioeco_core::shocks::{load_timeline, parse_timeline_at};
use ioeco_core::{PandemicTimeline, RepairPolicy};
use serde::Deserialize;

use crate::error::CliError;

pub const TIMELINE_HEADER: &str = "[PANDEMIC_TIMELINE]";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamFormat {
    /// The crate's own long-format SAM CSV.
    #[default]
    Sam,
    Figaro,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRepair {
    inactive_output_share: Option<f64>,
    gos_floor_share: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: Option<String>,
    sam_path: PathBuf,
    #[serde(default)]
    sam_format: SamFormat,
    country: Option<String>,
    params_path: PathBuf,
    scale: Option<usize>,
    free_market_months: Option<usize>,
    seeds: Option<Vec<u64>>,
    timeline_path: Option<PathBuf>,
    timeout_months: Option<i64>,
    pre_calibration_months: Option<i64>,
    transition_months: Option<i64>,
    outlier_filter: Option<f64>,
    #[serde(default)]
    repair: RawRepair,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Names the output directory.
    pub name: String,
    pub sam_path: PathBuf,
    pub sam_format: SamFormat,
    pub country: Option<String>,
    pub params_path: PathBuf,
    /// Workers per active sector.
    pub scale: usize,
    pub free_market_months: usize,
    pub seeds: Vec<u64>,
    pub timeline: Option<PandemicTimeline>,
    pub schedule: CalibrationSchedule,
    /// Growth above this many percent in magnitude excludes a seed.
    pub outlier_filter: Option<f64>,
    pub repair: RepairPolicy,
}

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seeds: Vec<u64>,
    pub timeout_months: Option<i64>,
    pub scale: Option<usize>,
    pub outlier_filter: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Parses `text`; relative paths resolve against `path`'s directory and
    /// diagnostics name `path`.
    pub fn parse(text: &str, path: &Path) -> Result<Self, CliError> {
        let base = path.parent().unwrap_or(Path::new(""));
        let (body, embedded) = split_timeline(text);
        let raw: RawConfig =
            toml::from_str(body).map_err(|e| CliError::input(path, e.to_string().trim_end()))?;

        let timeline = match (embedded, &raw.timeline_path) {
            (Some(_), Some(_)) => {
                return Err(CliError::input(
                    path,
                    "both timeline_path and an embedded timeline are given",
                ))
            }
            (Some((first_line, block)), None) => {
                Some(parse_timeline_at(block, first_line).map_err(|e| CliError::input(path, e))?)
            }
            (None, Some(p)) => {
                let p = base.join(p);
                Some(load_timeline(&p).map_err(|e| CliError::input(&p, e))?)
            }
            (None, None) => None,
        };

        let mut schedule = CalibrationSchedule::default();
        if let Some(m) = raw.timeout_months {
            schedule.criteria.timeout_months = m;
        }
        if let Some(m) = raw.pre_calibration_months {
            schedule.pre_calibration_months = m;
        }
        if let Some(m) = raw.transition_months {
            schedule.transition_months = m;
        }
        let defaults = RepairPolicy::default();
        let name = raw.name.unwrap_or_else(|| {
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "run".to_string())
        });
        let config = RunConfig {
            name,
            sam_path: base.join(raw.sam_path),
            sam_format: raw.sam_format,
            country: raw.country,
            params_path: base.join(raw.params_path),
            scale: raw.scale.unwrap_or(32),
            free_market_months: raw.free_market_months.unwrap_or(12),
            seeds: raw.seeds.unwrap_or_else(|| DEFAULT_SEEDS.to_vec()),
            timeline,
            schedule,
            outlier_filter: raw.outlier_filter,
            repair: RepairPolicy {
                inactive_output_share: raw
                    .repair
                    .inactive_output_share
                    .unwrap_or(defaults.inactive_output_share),
                gos_floor_share: raw
                    .repair
                    .gos_floor_share
                    .unwrap_or(defaults.gos_floor_share),
            },
        };
        config.validate().map_err(|m| CliError::input(path, m))?;
        Ok(config)
    }

    pub fn apply(&mut self, o: &Overrides, path: &Path) -> Result<(), CliError> {
        if !o.seeds.is_empty() {
            self.seeds = o.seeds.clone();
        }
        if let Some(m) = o.timeout_months {
            self.schedule.criteria.timeout_months = m;
        }
        if let Some(w) = o.scale {
            self.scale = w;
        }
        if o.outlier_filter.is_some() {
            self.outlier_filter = o.outlier_filter;
        }
        self.validate().map_err(|m| CliError::input(path, m))
    }

    fn validate(&self) -> Result<(), String> {
        if self.scale < 4 {
            return Err(format!("scale = {} is below the minimum of 4", self.scale));
        }
        if self.free_market_months < 12 {
            return Err(format!(
                "free_market_months = {} is shorter than the 12-month growth window",
                self.free_market_months
            ));
        }
        if self.seeds.is_empty() {
            return Err("seeds is empty".into());
        }
        let unique: BTreeSet<u64> = self.seeds.iter().copied().collect();
        if unique.len() != self.seeds.len() {
            return Err("seeds contains duplicates".into());
        }
        if self.schedule.criteria.timeout_months <= 0 {
            return Err("timeout_months must be positive".into());
        }
        if self.schedule.pre_calibration_months < 0 || self.schedule.transition_months < 0 {
            return Err("phase lengths must not be negative".into());
        }
        if self.sam_format == SamFormat::Figaro && self.country.is_none() {
            return Err("a FIGARO table needs `country`".into());
        }
        if let Some(limit) = self.outlier_filter {
            if !(limit > 0.0) {
                return Err(format!("outlier_filter = {limit} must be positive"));
            }
        }
        Ok(())
    }
}

/// Splits off the timeline block. Returns the TOML part and, if present,
/// the 1-based line number of the block's first line with its text.
fn split_timeline(text: &str) -> (&str, Option<(usize, &str)>) {
    let mut offset = 0;
    for (k, line) in text.split_inclusive('\n').enumerate() {
        if line.trim() == TIMELINE_HEADER {
            let rest = offset + line.len();
            return (&text[..offset], Some((k + 2, &text[rest..])));
        }
        offset += line.len();
    }
    (text, None)
}
