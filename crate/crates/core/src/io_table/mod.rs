//! Input-output tables: parsing, anomaly repair and coefficient derivation.
//!
//! Two input layouts are understood:
//!
//! * the FIGARO inter-country industry-by-industry matrix, where every row
//!   and column label has the form `COUNTRY_CODE` (see [`figaro`]);
//! * a normalized single-country layout ([`sam_csv`]) used by fixtures and
//!   by anyone who has already extracted one country.
//!
//! Money values are kept exactly as read (millions per year for FIGARO).

mod coefficients;
pub mod figaro;
mod matrix;
mod params;
mod repair;
pub mod sam_csv;

pub use coefficients::{technical_coefficients, CoefficientError, CoefficientMatrix};
pub use figaro::{parse_figaro_csv, parse_figaro_reader, FigaroOptions};
pub use matrix::SquareMatrix;
pub use params::{parse_country_params, CountryParams, ParamsError};
pub use repair::{repair_params, repair_sam, RepairEntry, RepairKind, RepairPolicy, RepairReport};
pub use sam_csv::{parse_sam_csv, parse_sam_reader, write_sam_csv};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a sector inside one table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SectorId(pub usize);

impl SectorId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Error)]
pub enum IoTableError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("line {line}, column {column}: `{value}` is not a number")]
    NonNumeric {
        line: u64,
        column: usize,
        value: String,
    },
    #[error("country `{0}` does not appear in the table")]
    MissingCountry(String),
    #[error("expected {expected} sectors for country {country}, found {found}")]
    SectorCount {
        country: String,
        expected: usize,
        found: usize,
    },
    #[error("missing block `{0}`")]
    MissingBlock(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Single-country social accounting matrix extracted from one I-O table.
///
/// Intermediates are indexed `[supplier][user]`. Every vector has one entry
/// per sector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocialAccountingMatrix {
    pub country: String,
    pub sectors: Vec<String>,
    pub intermediates: SquareMatrix,
    pub compensation: Vec<f64>,
    pub operating_surplus: Vec<f64>,
    pub taxes_production: Vec<f64>,
    pub taxes_products: Vec<f64>,
    pub op_res: Vec<f64>,
    pub op_nres: Vec<f64>,
    pub household_consumption: Vec<f64>,
    pub government_consumption: Vec<f64>,
    pub gfcf: Vec<f64>,
    pub exports: Vec<f64>,
    pub imports: Vec<f64>,
    pub gross_output: Vec<f64>,
    /// Sectors flagged by repair as too small to model.
    #[serde(default)]
    pub inactive: Vec<bool>,
}

impl SocialAccountingMatrix {
    pub fn zeroed(country: impl Into<String>, sectors: Vec<String>) -> Self {
        let n = sectors.len();
        Self {
            country: country.into(),
            sectors,
            intermediates: SquareMatrix::zeros(n),
            compensation: vec![0.0; n],
            operating_surplus: vec![0.0; n],
            taxes_production: vec![0.0; n],
            taxes_products: vec![0.0; n],
            op_res: vec![0.0; n],
            op_nres: vec![0.0; n],
            household_consumption: vec![0.0; n],
            government_consumption: vec![0.0; n],
            gfcf: vec![0.0; n],
            exports: vec![0.0; n],
            imports: vec![0.0; n],
            gross_output: vec![0.0; n],
            inactive: vec![false; n],
        }
    }

    pub fn sector_count(&self) -> usize {
        self.sectors.len()
    }

    pub fn sector_index(&self, code: &str) -> Option<SectorId> {
        self.sectors.iter().position(|c| c == code).map(SectorId)
    }

    pub fn is_active(&self, sector: usize) -> bool {
        !self.inactive.get(sector).copied().unwrap_or(false)
    }

    /// Value added of one sector: the six primary-input accounts.
    pub fn value_added(&self, sector: usize) -> f64 {
        self.compensation[sector]
            + self.operating_surplus[sector]
            + self.taxes_production[sector]
            + self.taxes_products[sector]
            + self.op_res[sector]
            + self.op_nres[sector]
    }

    /// Domestic final demand plus exports for one product row.
    pub fn final_demand(&self, sector: usize) -> f64 {
        self.household_consumption[sector]
            + self.government_consumption[sector]
            + self.gfcf[sector]
            + self.exports[sector]
    }

    /// Named per-sector vectors, in the order of the single-country CSV layout.
    pub fn named_vectors(&self) -> [(&'static str, &Vec<f64>); 12] {
        [
            ("compensation", &self.compensation),
            ("operating_surplus", &self.operating_surplus),
            ("taxes_production", &self.taxes_production),
            ("taxes_products", &self.taxes_products),
            ("op_res", &self.op_res),
            ("op_nres", &self.op_nres),
            ("household_consumption", &self.household_consumption),
            ("government_consumption", &self.government_consumption),
            ("gfcf", &self.gfcf),
            ("exports", &self.exports),
            ("imports", &self.imports),
            ("gross_output", &self.gross_output),
        ]
    }

    pub(crate) fn vector_mut(&mut self, name: &str) -> Option<&mut Vec<f64>> {
        Some(match name {
            "compensation" => &mut self.compensation,
            "operating_surplus" => &mut self.operating_surplus,
            "taxes_production" => &mut self.taxes_production,
            "taxes_products" => &mut self.taxes_products,
            "op_res" => &mut self.op_res,
            "op_nres" => &mut self.op_nres,
            "household_consumption" => &mut self.household_consumption,
            "government_consumption" => &mut self.government_consumption,
            "gfcf" => &mut self.gfcf,
            "exports" => &mut self.exports,
            "imports" => &mut self.imports,
            "gross_output" => &mut self.gross_output,
            _ => return None,
        })
    }

    /// Column identity: intermediate inputs + imports + value added.
    pub fn column_total(&self, sector: usize) -> f64 {
        self.intermediates.column_sum(sector) + self.imports[sector] + self.value_added(sector)
    }

    /// Row identity: intermediate sales + final demand.
    pub fn row_total(&self, sector: usize) -> f64 {
        self.intermediates.row_sum(sector) + self.final_demand(sector)
    }
}

/// Annual GDP at market prices: the sum over sectors of compensation,
/// operating surplus, both tax accounts and the two OP accounts.
pub fn gdp_target(sam: &SocialAccountingMatrix) -> f64 {
    (0..sam.sector_count()).map(|j| sam.value_added(j)).sum()
}
