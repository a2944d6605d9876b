//! Multi-year panels: one forecast per year joined to observed growth.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ioeco_core::forecast::{error_metrics, ErrorMetrics};
use serde::{Deserialize, Serialize};

use crate::config::{Overrides, RunConfig};
use crate::error::CliError;
use crate::run::{run_ensemble, write_metadata, Inputs};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PanelYear {
    /// Forecast year.
    pub year: i32,
    /// Run config whose ensemble mean is the forecast.
    pub config: Option<PathBuf>,
    /// A forecast given directly, in percent.
    pub forecast: Option<f64>,
    /// Counts towards the normal-year metrics.
    #[serde(default)]
    pub normal: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPanel {
    name: Option<String>,
    benchmark_path: PathBuf,
    #[serde(rename = "year")]
    years: Vec<PanelYear>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanelConfig {
    pub name: String,
    pub benchmark_path: PathBuf,
    pub years: Vec<PanelYear>,
}

impl PanelConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self, CliError> {
        let base = path.parent().unwrap_or(Path::new(""));
        let raw: RawPanel =
            toml::from_str(text).map_err(|e| CliError::input(path, e.to_string().trim_end()))?;
        if raw.years.is_empty() {
            return Err(CliError::input(path, "panel has no [[year]] entries"));
        }
        let mut years = raw.years;
        for y in years.iter_mut() {
            match (&y.config, y.forecast) {
                (Some(_), Some(_)) | (None, None) => {
                    return Err(CliError::input(
                        path,
                        format!(
                            "year {}: give exactly one of `config` and `forecast`",
                            y.year
                        ),
                    ))
                }
                _ => {}
            }
            y.config = y.config.as_ref().map(|c| base.join(c));
        }
        let name = raw.name.unwrap_or_else(|| {
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "panel".to_string())
        });
        Ok(PanelConfig {
            name,
            benchmark_path: base.join(raw.benchmark_path),
            years,
        })
    }
}

#[derive(Debug, Deserialize)]
struct BenchmarkRow {
    year: i32,
    actual: f64,
}

/// Reads a `year,actual` CSV of observed growth in percent.
pub fn load_benchmark(path: &Path) -> Result<Vec<(i32, f64)>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::input(path, e))?;
    let mut out: Vec<(i32, f64)> = Vec::new();
    for row in reader.deserialize::<BenchmarkRow>() {
        let row = row.map_err(|e| CliError::input(path, e))?;
        if out.iter().any(|(y, _)| *y == row.year) {
            return Err(CliError::input(
                path,
                format!("year {} listed twice", row.year),
            ));
        }
        out.push((row.year, row.actual));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PanelRow {
    pub year: i32,
    pub normal: bool,
    pub forecast: Option<f64>,
    pub actual: Option<f64>,
    /// Forecast − actual.
    pub error: Option<f64>,
    pub kept_seeds: Option<usize>,
    /// Why the row has no error.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PanelReport {
    pub name: String,
    pub rows: Vec<PanelRow>,
    pub all_years: Option<ErrorMetrics>,
    pub normal_years: Option<ErrorMetrics>,
}

/// A year with its forecast, kept seed count and note.
pub type YearForecast = (PanelYear, Option<f64>, Option<usize>, Option<String>);
type MetricLine<'a> = (&'a str, &'a dyn Fn(&ErrorMetrics) -> String);

impl PanelReport {
    /// Joins forecasts to the benchmark and computes the metrics over rows
    /// that have both.
    pub fn build(name: String, forecasts: Vec<YearForecast>, benchmark: &[(i32, f64)]) -> Self {
        let rows: Vec<PanelRow> = forecasts
            .into_iter()
            .map(|(y, forecast, kept_seeds, note)| {
                let actual = benchmark
                    .iter()
                    .find(|(by, _)| *by == y.year)
                    .map(|(_, a)| *a);
                let note = match (forecast, actual) {
                    (None, _) => note.or_else(|| Some("no forecast".into())),
                    (Some(_), None) => Some("year missing from benchmark".into()),
                    _ => None,
                };
                PanelRow {
                    year: y.year,
                    normal: y.normal,
                    forecast,
                    actual,
                    error: forecast.zip(actual).map(|(f, a)| f - a),
                    kept_seeds,
                    note,
                }
            })
            .collect();
        let metrics = |pick: &dyn Fn(&PanelRow) -> bool| {
            let (f, a): (Vec<f64>, Vec<f64>) = rows
                .iter()
                .filter(|r| pick(r))
                .filter_map(|r| r.forecast.zip(r.actual))
                .unzip();
            error_metrics(&f, &a).ok()
        };
        let all_years = metrics(&|_| true);
        let normal_years = metrics(&|r| r.normal);
        PanelReport {
            name,
            rows,
            all_years,
            normal_years,
        }
    }

    /// Plain-text summary table.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<6} {:>9} {:>9} {:>9}",
            "year", "forecast", "actual", "error"
        );
        let num = |v: Option<f64>, signed: bool| match v {
            Some(x) if signed => format!("{x:+.2}"),
            Some(x) => format!("{x:.2}"),
            None => "-".to_string(),
        };
        for r in &self.rows {
            let tag = match (&r.note, r.normal) {
                (Some(n), _) => n.clone(),
                (None, true) => "normal".into(),
                (None, false) => String::new(),
            };
            let _ = writeln!(
                s,
                "{:<6} {:>9} {:>9} {:>9}  {}",
                r.year,
                num(r.forecast, false),
                num(r.actual, false),
                num(r.error, true),
                tag
            );
        }
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "{:<24} {:>12} {:>14}",
            "metric", "all years", "normal years"
        );
        let pick = |m: &Option<ErrorMetrics>, f: &dyn Fn(&ErrorMetrics) -> String| {
            m.as_ref().map(f).unwrap_or_else(|| "-".into())
        };
        let lines: [MetricLine; 4] = [
            ("MAE (pp)", &|m| format!("{:.2}", m.mae)),
            ("RMSE (pp)", &|m| format!("{:.2}", m.rmse)),
            ("mean signed error (pp)", &|m| {
                format!("{:+.2}", m.mean_signed)
            }),
            ("years within 1 pp", &|m| {
                format!("{}/{}", m.within_1pp, m.n)
            }),
        ];
        for (label, f) in lines {
            let _ = writeln!(
                s,
                "{:<24} {:>12} {:>14}",
                label,
                pick(&self.all_years, f),
                pick(&self.normal_years, f)
            );
        }
        s
    }

    fn write_csv(&self, path: &Path) -> Result<(), CliError> {
        let mut buf = Vec::new();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            let res: csv::Result<()> = (|| {
                w.write_record([
                    "year",
                    "normal",
                    "forecast",
                    "actual",
                    "error",
                    "kept_seeds",
                    "note",
                ])?;
                for r in &self.rows {
                    w.write_record([
                        r.year.to_string(),
                        r.normal.to_string(),
                        opt(r.forecast),
                        opt(r.actual),
                        opt(r.error),
                        r.kept_seeds.map(|k| k.to_string()).unwrap_or_default(),
                        r.note.clone().unwrap_or_default(),
                    ])?;
                }
                w.flush()?;
                Ok(())
            })();
            res.map_err(|e| CliError::io(path, std::io::Error::other(e)))?;
        }
        fs::write(path, buf).map_err(|e| CliError::io(path, e))
    }
}

/// Runs or collects each year's forecast and writes `panel.csv` and
/// `panel.json` under `root`.
pub fn run_panel(
    panel: &PanelConfig,
    panel_path: &Path,
    overrides: &Overrides,
    jobs: usize,
    root: &Path,
) -> Result<PanelReport, CliError> {
    let benchmark = load_benchmark(&panel.benchmark_path)?;
    let mut inputs = Vec::new();
    for y in &panel.years {
        if let Some(path) = &y.config {
            let mut config = RunConfig::load(path)?;
            config.apply(overrides, path)?;
            inputs.push((y.year, Inputs::load(config)?));
        }
    }

    fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
    let mut forecasts = Vec::new();
    for y in &panel.years {
        if let Some(f) = y.forecast {
            forecasts.push((y.clone(), Some(f), None, None));
            continue;
        }
        let (_, inp) = inputs
            .iter()
            .find(|(year, _)| *year == y.year)
            .expect("loaded above");
        let outcome = run_ensemble(inp, jobs, &root.join(format!("year-{}", y.year)))?;
        let stats = outcome.summary.stats;
        let note = stats.is_none().then(|| "empty ensemble".to_string());
        forecasts.push((
            y.clone(),
            stats.as_ref().map(|s| s.mean_growth),
            Some(stats.as_ref().map(|s| s.growths.len()).unwrap_or(0)),
            note,
        ));
    }
    let report = PanelReport::build(panel.name.clone(), forecasts, &benchmark);
    report.write_csv(&root.join("panel.csv"))?;
    let mut json = serde_json::to_vec_pretty(&report).expect("report serializes");
    json.push(b'\n');
    let path = root.join("panel.json");
    fs::write(&path, json).map_err(|e| CliError::io(&path, e))?;
    write_metadata(root, "panel", panel_path)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn year(year: i32, forecast: f64, normal: bool) -> PanelYear {
        PanelYear {
            year,
            config: None,
            forecast: Some(forecast),
            normal,
        }
    }

    #[test]
    fn two_years_by_hand() {
        let f = vec![
            (year(2011, 2.0, true), Some(2.0), None, None),
            (year(2012, 3.0, false), Some(3.0), None, None),
        ];
        let r = PanelReport::build("t".into(), f, &[(2011, 1.5), (2012, 1.0)]);
        let m = r.all_years.unwrap();
        assert!((m.mae - 1.25).abs() < 1e-12);
        assert_eq!(r.normal_years.unwrap().n, 1);
    }

    #[test]
    fn missing_benchmark_year_is_flagged() {
        let f = vec![
            (year(2011, 2.0, false), Some(2.0), None, None),
            (year(2012, 3.0, false), Some(3.0), None, None),
        ];
        let r = PanelReport::build("t".into(), f, &[(2011, 1.0)]);
        assert_eq!(
            r.rows[1].note.as_deref(),
            Some("year missing from benchmark")
        );
        assert_eq!(r.rows[1].error, None);
        assert_eq!(r.all_years.unwrap().n, 1);
        assert_eq!(r.normal_years, None);
    }

    #[test]
    fn config_requires_one_source() {
        let bad = "benchmark_path = \"b.csv\"\n[[year]]\nyear = 2011\n";
        assert!(PanelConfig::parse(bad, Path::new("p.toml")).is_err());
        let ok = "benchmark_path = \"b.csv\"\n[[year]]\nyear = 2011\nforecast = 2.0\n";
        let p = PanelConfig::parse(ok, Path::new("d/p.toml")).unwrap();
        assert_eq!(p.name, "p");
        assert_eq!(p.benchmark_path, PathBuf::from("d/b.csv"));
    }
}
