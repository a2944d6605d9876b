//! Normalized single-country SAM layout.
//!
//! ```text
//! # comments start with '#'
//! country,XX                       (optional)
//! sector,A,C,G,K                   header: sector codes in column order
//! A,30,80,14,36                    one intermediates row per supplying sector
//! C,...
//! compensation,75,160,280,900      one row per named vector
//! operating_surplus,...
//! ...
//! ```
//!
//! Named vectors: `compensation`, `operating_surplus`, `taxes_production`,
//! `taxes_products`, `op_res`, `op_nres`, `household_consumption`,
//! `government_consumption`, `gfcf`, `exports`, `imports`, `gross_output`.
//! `op_res` and `op_nres` default to zero; a missing `gross_output` row is
//! filled from the column identity.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{IoTableError, SocialAccountingMatrix, SquareMatrix};

const OPTIONAL: [&str; 3] = ["op_res", "op_nres", "gross_output"];

pub fn parse_sam_csv(path: impl AsRef<Path>) -> Result<SocialAccountingMatrix, IoTableError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| IoTableError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_sam_reader(file)
}

pub fn parse_sam_reader<R: Read>(reader: R) -> Result<SocialAccountingMatrix, IoTableError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut country = String::new();
    let mut sectors: Option<Vec<String>> = None;
    let mut rows: Vec<Option<Vec<f64>>> = Vec::new();
    let mut vectors: Vec<(String, Vec<f64>, u64)> = Vec::new();

    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let label = record.get(0).unwrap_or_default();
        match (label, &sectors) {
            ("country", _) => {
                country = record.get(1).unwrap_or_default().to_string();
            }
            ("sector", None) => {
                let codes: Vec<String> = record.iter().skip(1).map(str::to_string).collect();
                if codes.is_empty() {
                    return Err(IoTableError::Malformed {
                        line,
                        message: "sector header lists no sectors".into(),
                    });
                }
                rows = vec![None; codes.len()];
                sectors = Some(codes);
            }
            ("sector", Some(_)) => {
                return Err(IoTableError::Malformed {
                    line,
                    message: "duplicate sector header".into(),
                })
            }
            (_, None) => {
                return Err(IoTableError::Malformed {
                    line,
                    message: format!("row `{label}` appears before the sector header"),
                })
            }
            (_, Some(codes)) => {
                let values = numeric_cells(&record, codes.len(), line)?;
                if let Some(i) = codes.iter().position(|c| c == label) {
                    if rows[i].is_some() {
                        return Err(IoTableError::Malformed {
                            line,
                            message: format!("duplicate intermediates row `{label}`"),
                        });
                    }
                    rows[i] = Some(values);
                } else {
                    if vectors.iter().any(|(n, _, _)| n == label) {
                        return Err(IoTableError::Malformed {
                            line,
                            message: format!("duplicate row `{label}`"),
                        });
                    }
                    vectors.push((label.to_string(), values, line));
                }
            }
        }
    }

    let sectors = sectors.ok_or_else(|| IoTableError::MissingBlock("sector".into()))?;
    let n = sectors.len();
    let mut sam = SocialAccountingMatrix::zeroed(country, sectors.clone());
    let mut full_rows = Vec::with_capacity(n);
    for (code, row) in sectors.iter().zip(rows) {
        full_rows.push(
            row.ok_or_else(|| IoTableError::MissingBlock(format!("intermediates row {code}")))?,
        );
    }
    sam.intermediates = SquareMatrix::from_rows(&full_rows);

    let mut seen: Vec<String> = Vec::new();
    for (name, values, line) in vectors {
        match sam.vector_mut(&name) {
            Some(slot) => *slot = values,
            None => {
                return Err(IoTableError::Malformed {
                    line,
                    message: format!("unknown row `{name}`"),
                })
            }
        }
        seen.push(name);
    }
    for (name, _) in sam.named_vectors() {
        if !OPTIONAL.contains(&name) && !seen.iter().any(|s| s == name) {
            return Err(IoTableError::MissingBlock(name.to_string()));
        }
    }
    if !seen.iter().any(|s| s == "gross_output") {
        sam.gross_output = (0..n).map(|j| sam.column_total(j)).collect();
    }
    Ok(sam)
}

fn numeric_cells(
    record: &csv::StringRecord,
    n: usize,
    line: u64,
) -> Result<Vec<f64>, IoTableError> {
    let cells: Vec<&str> = record.iter().skip(1).collect();
    if cells.len() != n {
        return Err(IoTableError::Malformed {
            line,
            message: format!(
                "row `{}` has {} values, expected {n}",
                record.get(0).unwrap_or_default(),
                cells.len()
            ),
        });
    }
    cells
        .iter()
        .enumerate()
        .map(|(k, cell)| {
            cell.parse::<f64>().map_err(|_| IoTableError::NonNumeric {
                line,
                column: k + 2,
                value: cell.to_string(),
            })
        })
        .collect()
}

pub fn write_sam_csv<W: Write>(sam: &SocialAccountingMatrix, out: W) -> Result<(), IoTableError> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    if !sam.country.is_empty() {
        w.write_record(["country", sam.country.as_str()])?;
    }
    let mut header = vec!["sector".to_string()];
    header.extend(sam.sectors.iter().cloned());
    w.write_record(&header)?;
    for (i, code) in sam.sectors.iter().enumerate() {
        let mut rec = vec![code.clone()];
        rec.extend(sam.intermediates.row(i).iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    for (name, values) in sam.named_vectors() {
        let mut rec = vec![name.to_string()];
        rec.extend(values.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|source| IoTableError::Io {
        path: "<writer>".into(),
        source,
    })?;
    Ok(())
}
