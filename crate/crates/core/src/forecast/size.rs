use serde::{Deserialize, Serialize};

use super::ForecastError;
use crate::economy::{size_class, SIZE_CLASSES};
use crate::engine::EconomyState;

/// Firm-count and employment shares by size class: 0–9, 10–49, 50–249 and
/// 250+ employees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeDistribution {
    pub firms: [f64; 4],
    pub employment: [f64; 4],
}

pub fn firm_size_distribution(state: &EconomyState) -> Result<SizeDistribution, ForecastError> {
    distribution(state.firms.iter().map(|f| f.headcount()))
}

fn distribution(
    headcounts: impl Iterator<Item = usize>,
) -> Result<SizeDistribution, ForecastError> {
    let mut firms = [0.0; SIZE_CLASSES.len()];
    let mut employment = [0.0; SIZE_CLASSES.len()];
    for h in headcounts {
        let c = size_class(h);
        firms[c] += 1.0;
        employment[c] += h as f64;
    }
    let count: f64 = firms.iter().sum();
    if count == 0.0 {
        return Err(ForecastError::NoFirms);
    }
    let employed: f64 = employment.iter().sum();
    for v in firms.iter_mut() {
        *v /= count;
    }
    if employed > 0.0 {
        for v in employment.iter_mut() {
            *v /= employed;
        }
    }
    Ok(SizeDistribution { firms, employment })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::economy::ModelConstants;
    use crate::engine::test_support::synthetic_model;

    #[test]
    fn nine_micro_one_small() {
        let d = distribution(std::iter::repeat_n(1, 9).chain([20])).unwrap();
        assert_eq!(d.firms, [0.9, 0.1, 0.0, 0.0]);
        assert_eq!(d.employment, [9.0 / 29.0, 20.0 / 29.0, 0.0, 0.0]);
    }

    #[test]
    fn single_class() {
        let d = distribution([60, 60, 60].into_iter()).unwrap();
        assert_eq!(d.firms, [0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn no_firms() {
        assert_eq!(
            distribution(std::iter::empty()),
            Err(ForecastError::NoFirms)
        );
    }

    #[test]
    fn initial_economy_is_all_micro() {
        let state = EconomyState::initial(synthetic_model(ModelConstants::with_scale(8)), 1);
        let d = firm_size_distribution(&state).unwrap();
        assert_eq!(d.firms[0], 1.0);
    }
}
