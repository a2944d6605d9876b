use serde::{Deserialize, Serialize};

use super::ForecastError;

/// Least-squares line `a + b·t` through a monthly series, `t = 0, 1, …`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub intercept: f64,
    pub slope: f64,
    /// Annualized growth in percent: `12 · b / a · 100`.
    pub growth: f64,
    /// Coefficient of determination; 0 for a series without variance.
    pub r2: f64,
}

/// Annual growth from an OLS trend through monthly values.
pub fn ols_growth(series: &[f64]) -> Result<GrowthFit, ForecastError> {
    let n = series.len();
    if n < 2 {
        return Err(ForecastError::TooShort { len: n, need: 2 });
    }
    if series.iter().any(|y| !y.is_finite()) {
        return Err(ForecastError::NonFinite);
    }
    let nf = n as f64;
    let t_mean = (nf - 1.0) / 2.0;
    let y_mean = series.iter().sum::<f64>() / nf;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (t, y) in series.iter().enumerate() {
        let dt = t as f64 - t_mean;
        sxy += dt * (y - y_mean);
        sxx += dt * dt;
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * t_mean;
    if intercept == 0.0 {
        return Err(ForecastError::ZeroIntercept);
    }
    let sst: f64 = series.iter().map(|y| (y - y_mean).powi(2)).sum();
    let r2 = if sst > 0.0 {
        let sse: f64 = series
            .iter()
            .enumerate()
            .map(|(t, y)| (y - intercept - slope * t as f64).powi(2))
            .sum();
        (1.0 - sse / sst).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ok(GrowthFit {
        intercept,
        slope,
        growth: 12.0 * slope / intercept * 100.0,
        r2,
    })
}

/// Percent change from the first to the `span`-th value.
pub fn point_to_point_growth(series: &[f64], span: usize) -> Result<f64, ForecastError> {
    let need = span.max(2);
    if series.len() < need {
        return Err(ForecastError::TooShort {
            len: series.len(),
            need,
        });
    }
    let first = series[0];
    let last = series[need - 1];
    if !first.is_finite() || !last.is_finite() {
        return Err(ForecastError::NonFinite);
    }
    if first == 0.0 {
        return Err(ForecastError::ZeroBase);
    }
    Ok(100.0 * (last / first - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Normal equations solved by explicit sums, without centering.
    fn oracle(y: &[f64]) -> (f64, f64) {
        let n = y.len() as f64;
        let st: f64 = (0..y.len()).map(|t| t as f64).sum();
        let stt: f64 = (0..y.len()).map(|t| (t * t) as f64).sum();
        let sy: f64 = y.iter().sum();
        let sty: f64 = y.iter().enumerate().map(|(t, v)| t as f64 * v).sum();
        let det = n * stt - st * st;
        let b = (n * sty - st * sy) / det;
        let a = (sy * stt - st * sty) / det;
        (a, b)
    }

    #[test]
    fn straight_line_gives_twelve_percent() {
        let y: Vec<f64> = (0..12).map(|t| 100.0 + t as f64).collect();
        let fit = ols_growth(&y).unwrap();
        assert_relative_eq!(fit.growth, 12.0, max_relative = 1e-12);
        assert_relative_eq!(fit.r2, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn flat_series_has_zero_growth_and_r2() {
        let fit = ols_growth(&[100.0; 12]).unwrap();
        assert_eq!(fit.growth, 0.0);
        assert_eq!(fit.r2, 0.0);
    }

    #[test]
    fn degenerate_series_are_rejected() {
        assert_eq!(ols_growth(&[0.0; 12]), Err(ForecastError::ZeroIntercept));
        assert_eq!(
            ols_growth(&[1.0]),
            Err(ForecastError::TooShort { len: 1, need: 2 })
        );
        assert_eq!(ols_growth(&[1.0, f64::NAN]), Err(ForecastError::NonFinite));
    }

    #[test]
    fn point_to_point_cases() {
        let mut y = vec![100.0; 12];
        y[11] = 110.0;
        assert_relative_eq!(
            point_to_point_growth(&y, 12).unwrap(),
            10.0,
            max_relative = 1e-12
        );
        assert_eq!(point_to_point_growth(&[5.0; 12], 12).unwrap(), 0.0);
        assert_eq!(
            point_to_point_growth(&[0.0; 12], 12),
            Err(ForecastError::ZeroBase)
        );
        assert!(point_to_point_growth(&[1.0; 5], 12).is_err());
    }

    #[test]
    fn u_shape_separates_the_two_measures() {
        // Early trough, detrended so the fitted slope is zero.
        let dip: Vec<f64> = (0..12)
            .map(|t| 100.0 - 15.0 * (-((t as f64 - 3.0).powi(2)) / 6.0).exp())
            .collect();
        let (_, b) = oracle(&dip);
        let y: Vec<f64> = dip
            .iter()
            .enumerate()
            .map(|(t, v)| v - b * t as f64)
            .collect();
        let ols = ols_growth(&y).unwrap().growth;
        let p2p = point_to_point_growth(&y, 12).unwrap();
        assert!(ols.abs() < 1e-9);
        assert!(p2p < -5.0);
    }

    proptest! {
        #[test]
        fn matches_normal_equations(y in prop::collection::vec(50.0f64..150.0, 12)) {
            let fit = ols_growth(&y).unwrap();
            let (a, b) = oracle(&y);
            let expected = 12.0 * b / a * 100.0;
            prop_assert!((fit.growth - expected).abs() <= 1e-10 * expected.abs().max(1e-3));
            prop_assert!((0.0..=1.0).contains(&fit.r2));
        }

        #[test]
        fn growth_is_scale_free(y in prop::collection::vec(50.0f64..150.0, 12), k in 0.01f64..100.0) {
            let scaled: Vec<f64> = y.iter().map(|v| v * k).collect();
            let g1 = ols_growth(&y).unwrap().growth;
            let g2 = ols_growth(&scaled).unwrap().growth;
            prop_assert!((g1 - g2).abs() <= 1e-9 * g1.abs().max(1.0));
        }
    }
}
