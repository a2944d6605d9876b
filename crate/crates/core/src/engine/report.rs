use std::io::Write;

use serde::{Deserialize, Serialize};

use super::Phase;
use crate::io_table::SquareMatrix;

/// Aggregates of one simulated month.
///
/// Money values are per month in the table's currency units; quantities
/// are in base-price units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthReport {
    pub month: i64,
    pub phase: Phase,
    pub subsidy_rate: f64,
    /// Final expenditure minus imports.
    pub nominal_gdp: f64,
    /// Value added at Laspeyres base prices.
    pub real_gdp: f64,
    pub cpi: f64,
    /// False when no consumed sector had a seller; `cpi` then repeats the
    /// previous value.
    pub cpi_defined: bool,
    pub unemployment_rate: f64,
    pub firms: usize,
    pub firm_births: usize,
    pub firm_deaths: usize,
    /// Share of firms with at most 9 employees; `None` without firms.
    pub micro_firm_share: Option<f64>,
    pub household_consumption: f64,
    pub household_investment: f64,
    pub government_consumption: f64,
    pub investment: f64,
    pub exports: f64,
    pub imports: f64,
    pub intermediate_sales: f64,
    pub wages: f64,
    pub taxes: f64,
    pub benefits: f64,
    pub kurzarbeit: f64,
    pub subsidies: f64,
    pub dividends: f64,
    pub net_external_flow: f64,
    pub accounting_residual: f64,
    pub household_factor: f64,
    pub government_factor: f64,
    pub collapsed: bool,
    /// Per-sector vectors, in table order.
    pub output: Vec<f64>,
    pub sales: Vec<f64>,
    pub prices: Vec<f64>,
    pub household_by_sector: Vec<f64>,
    pub government_by_sector: Vec<f64>,
    pub exports_by_sector: Vec<f64>,
    pub investment_by_sector: Vec<f64>,
    pub imports_by_sector: Vec<f64>,
    pub wages_by_sector: Vec<f64>,
    pub taxes_by_sector: Vec<f64>,
    pub unmet_ratio: Vec<f64>,
    /// Intermediate purchases in money, `[supplier][user]`.
    pub intermediate_flows: SquareMatrix,
}

/// Scalar columns of the monthly CSV, in order.
pub const SCALAR_COLUMNS: [&str; 31] = [
    "month",
    "phase",
    "subsidy_rate",
    "nominal_gdp",
    "real_gdp",
    "cpi",
    "cpi_defined",
    "unemployment_rate",
    "firms",
    "firm_births",
    "firm_deaths",
    "micro_firm_share",
    "household_consumption",
    "household_investment",
    "government_consumption",
    "investment",
    "exports",
    "imports",
    "intermediate_sales",
    "wages",
    "taxes",
    "benefits",
    "kurzarbeit",
    "subsidies",
    "dividends",
    "net_external_flow",
    "accounting_residual",
    "household_factor",
    "government_factor",
    "collapsed",
    "sectors",
];

/// Writes reports as CSV: the scalar columns, then `output_<code>` and
/// `price_<code>` for every sector. Floats use Rust's shortest round-trip
/// formatting, so equal reports give byte-identical files.
pub fn write_reports_csv<W: Write>(
    reports: &[MonthReport],
    sectors: &[String],
    out: W,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = SCALAR_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend(sectors.iter().map(|s| format!("output_{s}")));
    header.extend(sectors.iter().map(|s| format!("price_{s}")));
    w.write_record(&header)?;
    for r in reports {
        let mut rec: Vec<String> = vec![
            r.month.to_string(),
            r.phase.as_str().to_string(),
            r.subsidy_rate.to_string(),
            r.nominal_gdp.to_string(),
            r.real_gdp.to_string(),
            r.cpi.to_string(),
            r.cpi_defined.to_string(),
            r.unemployment_rate.to_string(),
            r.firms.to_string(),
            r.firm_births.to_string(),
            r.firm_deaths.to_string(),
            r.micro_firm_share
                .map(|v| v.to_string())
                .unwrap_or_default(),
            r.household_consumption.to_string(),
            r.household_investment.to_string(),
            r.government_consumption.to_string(),
            r.investment.to_string(),
            r.exports.to_string(),
            r.imports.to_string(),
            r.intermediate_sales.to_string(),
            r.wages.to_string(),
            r.taxes.to_string(),
            r.benefits.to_string(),
            r.kurzarbeit.to_string(),
            r.subsidies.to_string(),
            r.dividends.to_string(),
            r.net_external_flow.to_string(),
            r.accounting_residual.to_string(),
            r.household_factor.to_string(),
            r.government_factor.to_string(),
            r.collapsed.to_string(),
            sectors.len().to_string(),
        ];
        rec.extend(r.output.iter().map(|v| v.to_string()));
        rec.extend(r.prices.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
