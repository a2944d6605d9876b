use serde::{Deserialize, Serialize};

use super::ForecastError;

/// Forecast accuracy against outturns, all in percentage points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    pub n: usize,
    pub mae: f64,
    pub rmse: f64,
    /// Mean of forecast − actual.
    pub mean_signed: f64,
    /// Years with |forecast − actual| ≤ 1 pp.
    pub within_1pp: usize,
}

pub fn error_metrics(forecasts: &[f64], actuals: &[f64]) -> Result<ErrorMetrics, ForecastError> {
    if forecasts.len() != actuals.len() {
        return Err(ForecastError::LengthMismatch {
            forecasts: forecasts.len(),
            actuals: actuals.len(),
        });
    }
    if forecasts.is_empty() {
        return Err(ForecastError::Empty);
    }
    let errors: Vec<f64> = forecasts.iter().zip(actuals).map(|(f, a)| f - a).collect();
    let n = errors.len() as f64;
    Ok(ErrorMetrics {
        n: errors.len(),
        mae: errors.iter().map(|e| e.abs()).sum::<f64>() / n,
        rmse: (errors.iter().map(|e| e * e).sum::<f64>() / n).sqrt(),
        mean_signed: errors.iter().sum::<f64>() / n,
        // Inputs are quoted to two decimals; the slack keeps 1.00 inside.
        within_1pp: errors.iter().filter(|e| e.abs() <= 1.0 + 1e-9).count(),
    })
}
