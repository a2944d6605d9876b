//! FIGARO inter-country industry-by-industry matrices.
//!
//! The first row holds column labels and the first column holds row labels,
//! both of the form `COUNTRY_CODE` (`AT_C10T12`, `DE_P3_S14`, `W2_D1`).
//! Columns whose code is a final-demand account are routed to the demand
//! vectors; rows whose code is a primary-input account are routed to the
//! value-added vectors. Everything else is an industry.
//!
//! For the selected country:
//! * domestic industry rows into domestic industry columns fill the
//!   intermediates block;
//! * domestic industry rows into any foreign column are summed into exports;
//! * foreign industry rows into domestic industry columns are summed, per
//!   using industry, into imports.
//!
//! Foreign rows into domestic final-demand columns are not carried: the
//! model's final demand is domestic production only.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use super::{IoTableError, SocialAccountingMatrix, SquareMatrix};

#[derive(Debug, Clone)]
pub struct FigaroOptions {
    /// Sector count every country must have; `None` disables the check.
    pub expected_sectors: Option<usize>,
    pub government_columns: Vec<String>,
    pub household_columns: Vec<String>,
    pub gfcf_columns: Vec<String>,
    /// Any other final-demand codes (ignored for the SAM but not industries).
    pub other_final_demand: Vec<String>,
    pub compensation_rows: Vec<String>,
    pub operating_surplus_rows: Vec<String>,
    pub taxes_production_rows: Vec<String>,
    /// Editions differ in how product taxes are labelled; every listed code
    /// is summed into `taxes_products`.
    pub taxes_products_rows: Vec<String>,
    pub op_res_rows: Vec<String>,
    pub op_nres_rows: Vec<String>,
}

fn codes(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

impl Default for FigaroOptions {
    fn default() -> Self {
        Self {
            expected_sectors: Some(64),
            government_columns: codes(&["P3_S13"]),
            household_columns: codes(&["P3_S14", "P3_S15"]),
            gfcf_columns: codes(&["P51G", "P5M"]),
            other_final_demand: codes(&["P5", "P52", "P53", "P3"]),
            compensation_rows: codes(&["D1"]),
            operating_surplus_rows: codes(&["B2A3G"]),
            taxes_production_rows: codes(&["D29X39"]),
            taxes_products_rows: codes(&["D21X31"]),
            op_res_rows: codes(&["OP_RES"]),
            op_nres_rows: codes(&["OP_NRES"]),
        }
    }
}

impl FigaroOptions {
    /// Options for small synthetic tables: no sector-count check.
    pub fn any_size() -> Self {
        Self {
            expected_sectors: None,
            ..Self::default()
        }
    }

    fn final_demand(&self, code: &str) -> Option<Demand> {
        let hit = |v: &Vec<String>| v.iter().any(|c| c == code);
        if hit(&self.government_columns) {
            Some(Demand::Government)
        } else if hit(&self.household_columns) {
            Some(Demand::Household)
        } else if hit(&self.gfcf_columns) {
            Some(Demand::Gfcf)
        } else if hit(&self.other_final_demand) {
            Some(Demand::Other)
        } else {
            None
        }
    }

    fn primary_input(&self, code: &str) -> Option<Primary> {
        let hit = |v: &Vec<String>| v.iter().any(|c| c == code);
        if hit(&self.compensation_rows) {
            Some(Primary::Compensation)
        } else if hit(&self.operating_surplus_rows) {
            Some(Primary::OperatingSurplus)
        } else if hit(&self.taxes_production_rows) {
            Some(Primary::TaxesProduction)
        } else if hit(&self.taxes_products_rows) {
            Some(Primary::TaxesProducts)
        } else if hit(&self.op_res_rows) {
            Some(Primary::OpRes)
        } else if hit(&self.op_nres_rows) {
            Some(Primary::OpNres)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Demand {
    Government,
    Household,
    Gfcf,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Primary {
    Compensation,
    OperatingSurplus,
    TaxesProduction,
    TaxesProducts,
    OpRes,
    OpNres,
}

#[derive(Debug, Clone, Copy)]
enum Column {
    /// Domestic industry with its sector index.
    Domestic(usize),
    DomesticDemand(Demand),
    Foreign,
}

fn split_label(label: &str) -> Option<(&str, &str)> {
    let (country, code) = label.split_once('_')?;
    if country.is_empty() || code.is_empty() {
        None
    } else {
        Some((country, code))
    }
}

pub fn parse_figaro_csv(
    path: impl AsRef<Path>,
    country: &str,
    options: &FigaroOptions,
) -> Result<SocialAccountingMatrix, IoTableError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| IoTableError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_figaro_reader(file, country, options)
}

pub fn parse_figaro_reader<R: Read>(
    reader: R,
    country: &str,
    options: &FigaroOptions,
) -> Result<SocialAccountingMatrix, IoTableError> {
    if country.len() != 2 {
        return Err(IoTableError::Malformed {
            line: 0,
            message: format!("country code `{country}` must have two letters"),
        });
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();

    let header = records.next().ok_or_else(|| IoTableError::Malformed {
        line: 1,
        message: "empty file".into(),
    })??;

    let mut sectors: Vec<String> = Vec::new();
    let mut columns = Vec::with_capacity(header.len().saturating_sub(1));
    for (k, label) in header.iter().enumerate().skip(1) {
        let (c, code) = split_label(label).ok_or_else(|| IoTableError::Malformed {
            line: 1,
            message: format!("column {} label `{label}` is not COUNTRY_CODE", k + 1),
        })?;
        let col = if c != country {
            Column::Foreign
        } else if let Some(d) = options.final_demand(code) {
            Column::DomesticDemand(d)
        } else {
            sectors.push(code.to_string());
            Column::Domestic(sectors.len() - 1)
        };
        columns.push(col);
    }
    if sectors.is_empty() {
        return Err(IoTableError::MissingCountry(country.to_string()));
    }
    if let Some(expected) = options.expected_sectors {
        if sectors.len() != expected {
            return Err(IoTableError::SectorCount {
                country: country.to_string(),
                expected,
                found: sectors.len(),
            });
        }
    }

    let n = sectors.len();
    let mut sam = SocialAccountingMatrix::zeroed(country, sectors.clone());
    let mut z = SquareMatrix::zeros(n);
    let mut seen_rows = vec![false; n];

    for record in records {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let label = record.get(0).unwrap_or_default();
        let (row_country, code) = split_label(label).ok_or_else(|| IoTableError::Malformed {
            line,
            message: format!("row label `{label}` is not COUNTRY_CODE"),
        })?;

        let primary = options.primary_input(code);
        let domestic_row =
            if primary.is_none() && row_country == country {
                let i = sectors.iter().position(|s| s == code).ok_or_else(|| {
                    IoTableError::Malformed {
                        line,
                        message: format!("row `{label}` has no matching column"),
                    }
                })?;
                seen_rows[i] = true;
                Some(i)
            } else {
                None
            };

        for (k, cell) in record.iter().enumerate().skip(1) {
            let col = columns[k - 1];
            // Foreign-to-foreign blocks are the bulk of the file; skip them
            // without parsing.
            if domestic_row.is_none() && primary.is_none() && !matches!(col, Column::Domestic(_)) {
                continue;
            }
            let value: f64 = cell.parse().map_err(|_| IoTableError::NonNumeric {
                line,
                column: k + 1,
                value: cell.to_string(),
            })?;
            match (domestic_row, primary, col) {
                (Some(i), _, Column::Domestic(j)) => z.add(i, j, value),
                (Some(i), _, Column::DomesticDemand(d)) => match d {
                    Demand::Government => sam.government_consumption[i] += value,
                    Demand::Household => sam.household_consumption[i] += value,
                    Demand::Gfcf => sam.gfcf[i] += value,
                    Demand::Other => {}
                },
                (Some(i), _, Column::Foreign) => sam.exports[i] += value,
                (None, Some(p), Column::Domestic(j)) => {
                    let slot = match p {
                        Primary::Compensation => &mut sam.compensation,
                        Primary::OperatingSurplus => &mut sam.operating_surplus,
                        Primary::TaxesProduction => &mut sam.taxes_production,
                        Primary::TaxesProducts => &mut sam.taxes_products,
                        Primary::OpRes => &mut sam.op_res,
                        Primary::OpNres => &mut sam.op_nres,
                    };
                    slot[j] += value;
                }
                (None, None, Column::Domestic(j)) => sam.imports[j] += value,
                _ => {}
            }
        }
    }

    if let Some(i) = seen_rows.iter().position(|s| !s) {
        return Err(IoTableError::MissingBlock(format!(
            "row {country}_{}",
            sectors[i]
        )));
    }
    sam.intermediates = z;
    sam.gross_output = (0..n).map(|j| sam.column_total(j)).collect();
    Ok(sam)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Two countries with two industries each. Every cell value is distinct
    // so that misrouted flows show up in the sums.
    const TOY: &str = "\
rowLabels,AT_A,AT_B,DE_A,DE_B,AT_P3_S13,AT_P3_S14,AT_P51G,DE_P3_S14
AT_A,10,20,3,4,5,30,7,8
AT_B,11,12,13,14,15,16,17,18
DE_A,1,2,40,41,9,9,9,50
DE_B,5,6,42,43,9,9,9,51
W2_D1,40,50,30,30,0,0,0,0
W2_B2A3G,25,18,10,10,0,0,0,0
W2_D29X39,1,2,1,1,0,0,0,0
W2_D21X31,3,4,1,1,0,0,0,0
";

    fn toy() -> SocialAccountingMatrix {
        parse_figaro_reader(TOY.as_bytes(), "AT", &FigaroOptions::any_size()).unwrap()
    }

    #[test]
    fn domestic_block_fills_intermediates() {
        let sam = toy();
        assert_eq!(sam.sectors, vec!["A", "B"]);
        assert_eq!(sam.intermediates.row(0), &[10.0, 20.0]);
        assert_eq!(sam.intermediates.row(1), &[11.0, 12.0]);
    }

    #[test]
    fn imports_sum_foreign_rows_into_domestic_columns() {
        // by hand: AT_A column gets DE_A 1 + DE_B 5; AT_B gets 2 + 6
        let sam = toy();
        assert_eq!(sam.imports, vec![6.0, 8.0]);
    }

    #[test]
    fn exports_sum_domestic_rows_into_foreign_columns() {
        // AT_A: 3 + 4 + 8 ; AT_B: 13 + 14 + 18
        let sam = toy();
        assert_eq!(sam.exports, vec![15.0, 45.0]);
    }

    #[test]
    fn final_demand_and_value_added_routed() {
        let sam = toy();
        assert_eq!(sam.government_consumption, vec![5.0, 15.0]);
        assert_eq!(sam.household_consumption, vec![30.0, 16.0]);
        assert_eq!(sam.gfcf, vec![7.0, 17.0]);
        assert_eq!(sam.compensation, vec![40.0, 50.0]);
        assert_eq!(sam.operating_surplus, vec![25.0, 18.0]);
        assert_eq!(sam.taxes_production, vec![1.0, 2.0]);
        assert_eq!(sam.taxes_products, vec![3.0, 4.0]);
        // column totals: 10+11+6+40+25+1+3 = 96 ; 20+12+8+50+18+2+4 = 114
        assert_eq!(sam.gross_output, vec![96.0, 114.0]);
    }

    #[test]
    fn other_country_extracts_its_own_view() {
        let de = parse_figaro_reader(TOY.as_bytes(), "DE", &FigaroOptions::any_size()).unwrap();
        // DE imports: AT rows into DE columns
        assert_eq!(de.imports, vec![3.0 + 13.0, 4.0 + 14.0]);
        // DE exports: DE rows into AT columns (industries and final demand)
        assert_eq!(de.exports, vec![1.0 + 2.0 + 27.0, 5.0 + 6.0 + 27.0]);
    }

    #[test]
    fn missing_country_is_an_error() {
        let err =
            parse_figaro_reader(TOY.as_bytes(), "FR", &FigaroOptions::any_size()).unwrap_err();
        assert!(matches!(err, IoTableError::MissingCountry(c) if c == "FR"));
    }

    #[test]
    fn sector_count_checked_in_figaro_mode() {
        let err = parse_figaro_reader(TOY.as_bytes(), "AT", &FigaroOptions::default()).unwrap_err();
        assert!(matches!(
            err,
            IoTableError::SectorCount {
                expected: 64,
                found: 2,
                ..
            }
        ));
    }

    #[test]
    fn non_numeric_cell_reports_position() {
        let bad = TOY.replace("AT_B,11,12", "AT_B,11,x12");
        let err =
            parse_figaro_reader(bad.as_bytes(), "AT", &FigaroOptions::any_size()).unwrap_err();
        match err {
            IoTableError::NonNumeric {
                line,
                column,
                value,
            } => {
                assert_eq!(line, 3);
                assert_eq!(column, 3);
                assert_eq!(value, "x12");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_header_rejected() {
        let bad = TOY.replacen("AT_B", "ATB", 1);
        let err =
            parse_figaro_reader(bad.as_bytes(), "AT", &FigaroOptions::any_size()).unwrap_err();
        assert!(matches!(err, IoTableError::Malformed { line: 1, .. }));
    }
}
