use super::EconomyState;

/// Consumer price index: basket-weighted mean sector price relative to
/// `base_prices`.
///
/// Sectors without a seller are skipped and the remaining weights
/// renormalized; `None` if no weighted sector has a seller.
pub fn cpi_index(mean_prices: &[Option<f64>], base_prices: &[f64], weights: &[f64]) -> Option<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for ((p, b), w) in mean_prices.iter().zip(base_prices).zip(weights) {
        if let Some(p) = p {
            if *w > 0.0 && *b > 0.0 {
                num += w * p / b;
                den += w;
            }
        }
    }
    (den > 0.0).then(|| num / den)
}

/// CPI of the current state against the initial price level of 1.
pub fn compute_cpi(state: &EconomyState) -> Option<f64> {
    let n = state.model.sector_count();
    cpi_index(
        &state.sector_mean_prices(),
        &vec![1.0; n],
        &state.model.household_weights,
    )
}

/// Quantities valued at fixed base prices.
pub fn compute_real_gdp(quantities: &[f64], base_prices: &[f64]) -> f64 {
    quantities.iter().zip(base_prices).map(|(q, p)| q * p).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_prices_give_one() {
        let p = [Some(1.0), Some(1.0), Some(1.0)];
        assert_eq!(cpi_index(&p, &[1.0; 3], &[0.2, 0.3, 0.5]), Some(1.0));
    }

    #[test]
    fn single_sector_passthrough() {
        assert_eq!(cpi_index(&[Some(1.05)], &[1.0], &[1.0]), Some(1.05));
    }

    #[test]
    fn symmetric_prices_cancel() {
        let cpi = cpi_index(&[Some(1.1), Some(0.9)], &[1.0, 1.0], &[0.5, 0.5]).unwrap();
        assert!((cpi - 1.0).abs() < 1e-15);
    }

    #[test]
    fn missing_sellers_renormalize() {
        let cpi = cpi_index(&[Some(1.2), None], &[1.0, 1.0], &[0.25, 0.75]).unwrap();
        assert!((cpi - 1.2).abs() < 1e-15);
        assert_eq!(cpi_index(&[None, None], &[1.0, 1.0], &[0.5, 0.5]), None);
    }

    #[test]
    fn real_gdp_is_a_dot_product() {
        assert_eq!(compute_real_gdp(&[2.0, 3.0], &[1.0, 2.0]), 8.0);
    }

    #[test]
    fn real_gdp_homogeneous_in_quantities() {
        let q = [1.5, 4.0, 0.25];
        let p = [0.9, 1.3, 2.0];
        let doubled: Vec<f64> = q.iter().map(|x| 2.0 * x).collect();
        assert!((compute_real_gdp(&doubled, &p) - 2.0 * compute_real_gdp(&q, &p)).abs() < 1e-12);
    }

    #[test]
    fn base_quantities_give_base_nominal() {
        let q = [10.0, 20.0];
        let p = [1.1, 0.95];
        let nominal: f64 = q.iter().zip(&p).map(|(a, b)| a * b).sum();
        assert_eq!(compute_real_gdp(&q, &p), nominal);
    }
}
