use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{SocialAccountingMatrix, SquareMatrix};

#[derive(Debug, Error, PartialEq)]
pub enum CoefficientError {
    #[error("sector {sector} is active but has gross output {output}; run repair first")]
    NonPositiveOutput { sector: String, output: f64 },
}

/// Per-unit-of-output coefficients of every active sector.
///
/// Inactive sectors have all-zero columns, and their rows are zeroed as
/// well since nobody can supply them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientMatrix {
    pub a: SquareMatrix,
    pub labor_coeff: Vec<f64>,
    pub capital_coeff: Vec<f64>,
    pub tax_rate_production: Vec<f64>,
    pub tax_rate_products: Vec<f64>,
    /// OP_RES + OP_NRES per unit of output.
    pub other_coeff: Vec<f64>,
    pub import_coeff: Vec<f64>,
    pub active: Vec<bool>,
}

impl CoefficientMatrix {
    pub fn sector_count(&self) -> usize {
        self.active.len()
    }

    /// Sum of every coefficient in column `j`; 1 for a balanced table.
    pub fn column_total(&self, j: usize) -> f64 {
        self.a.column_sum(j)
            + self.labor_coeff[j]
            + self.capital_coeff[j]
            + self.tax_rate_production[j]
            + self.tax_rate_products[j]
            + self.other_coeff[j]
            + self.import_coeff[j]
    }

    /// Suppliers of sector `j` with a nonzero input coefficient.
    pub fn inputs_of(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.a.column(j).enumerate().filter(|(_, v)| *v > 0.0)
    }
}

pub fn technical_coefficients(
    sam: &SocialAccountingMatrix,
) -> Result<CoefficientMatrix, CoefficientError> {
    let n = sam.sector_count();
    let active: Vec<bool> = (0..n).map(|j| sam.is_active(j)).collect();
    let mut out = CoefficientMatrix {
        a: SquareMatrix::zeros(n),
        labor_coeff: vec![0.0; n],
        capital_coeff: vec![0.0; n],
        tax_rate_production: vec![0.0; n],
        tax_rate_products: vec![0.0; n],
        other_coeff: vec![0.0; n],
        import_coeff: vec![0.0; n],
        active: active.clone(),
    };
    for j in 0..n {
        if !active[j] {
            continue;
        }
        let x = sam.gross_output[j];
        if !(x > 0.0) || !x.is_finite() {
            return Err(CoefficientError::NonPositiveOutput {
                sector: sam.sectors[j].clone(),
                output: x,
            });
        }
        for i in 0..n {
            if active[i] {
                out.a.set(i, j, sam.intermediates.get(i, j) / x);
            }
        }
        out.labor_coeff[j] = sam.compensation[j] / x;
        out.capital_coeff[j] = sam.operating_surplus[j] / x;
        out.tax_rate_production[j] = sam.taxes_production[j] / x;
        out.tax_rate_products[j] = sam.taxes_products[j] / x;
        out.other_coeff[j] = (sam.op_res[j] + sam.op_nres[j]) / x;
        out.import_coeff[j] = sam.imports[j] / x;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_sector() -> SocialAccountingMatrix {
        let mut sam = SocialAccountingMatrix::zeroed("XX", vec!["A".into(), "B".into()]);
        sam.gross_output = vec![800.0, 1000.0];
        sam
    }

    #[test]
    fn input_coefficient_is_flow_over_user_output() {
        let mut sam = two_sector();
        sam.intermediates.set(0, 1, 200.0);
        let c = technical_coefficients(&sam).unwrap();
        assert_eq!(c.a.get(0, 1), 0.2);
        assert_eq!(c.a.get(1, 0), 0.0);
    }

    #[test]
    fn half_diagonal_gives_half_identity() {
        let mut sam = two_sector();
        sam.intermediates.set(0, 0, 400.0);
        sam.intermediates.set(1, 1, 500.0);
        let c = technical_coefficients(&sam).unwrap();
        let mut expected = SquareMatrix::identity(2);
        expected.scale(0.5);
        assert_eq!(c.a, expected);
    }

    #[test]
    fn active_zero_output_is_an_error() {
        let mut sam = two_sector();
        sam.gross_output[1] = 0.0;
        let err = technical_coefficients(&sam).unwrap_err();
        assert!(matches!(err, CoefficientError::NonPositiveOutput { .. }));
    }

    #[test]
    fn inactive_sector_excluded() {
        let mut sam = two_sector();
        sam.gross_output[1] = 0.0;
        sam.inactive = vec![false, true];
        sam.intermediates.set(1, 0, 80.0);
        let c = technical_coefficients(&sam).unwrap();
        assert_eq!(c.a.get(1, 0), 0.0);
        assert_eq!(c.column_total(1), 0.0);
    }

    fn build_table(shares: &[Vec<f64>], outputs: &[f64]) -> SocialAccountingMatrix {
        // each share row: n input shares followed by labor, capital, tp, td, other, imports
        let n = outputs.len();
        let mut sam =
            SocialAccountingMatrix::zeroed("XX", (0..n).map(|i| format!("S{i}")).collect());
        for j in 0..n {
            let x = outputs[j];
            let col = &shares[j];
            for i in 0..n {
                sam.intermediates.set(i, j, col[i] * x);
            }
            sam.compensation[j] = col[n] * x;
            sam.operating_surplus[j] = col[n + 1] * x;
            sam.taxes_production[j] = col[n + 2] * x;
            sam.taxes_products[j] = col[n + 3] * x;
            sam.op_res[j] = col[n + 4] * x;
            sam.imports[j] = col[n + 5] * x;
            sam.gross_output[j] = x;
        }
        sam
    }

    fn column_shares(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.01f64..1.0, n + 6).prop_map(|raw| {
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|v| v / total).collect()
        })
    }

    proptest! {
        #[test]
        fn coefficients_round_trip(
            (shares, outputs) in (2usize..6).prop_flat_map(|n| (
                prop::collection::vec(column_shares(n), n),
                prop::collection::vec(1.0f64..1e6, n),
            ))
        ) {
            let n = outputs.len();
            let sam = build_table(&shares, &outputs);
            let c = technical_coefficients(&sam).unwrap();
            for j in 0..n {
                for i in 0..n {
                    prop_assert!((c.a.get(i, j) - shares[j][i]).abs() <= 1e-12);
                }
                prop_assert!((c.labor_coeff[j] - shares[j][n]).abs() <= 1e-12);
                prop_assert!((c.capital_coeff[j] - shares[j][n + 1]).abs() <= 1e-12);
                prop_assert!((c.import_coeff[j] - shares[j][n + 5]).abs() <= 1e-12);
                prop_assert!((c.column_total(j) - 1.0).abs() <= 1e-12);
            }
        }
    }
}
