/// Capital purchase orders of one producer.
///
/// The gap between `target` and `fixed_capital` (capped at
/// `max_share × target` per month) is split over supplying sectors by
/// `gfcf_weights`. Returned values are base-price quantities per sector;
/// the buyer pays current prices for them.
pub fn investment_orders(
    fixed_capital: f64,
    target: f64,
    max_share: f64,
    gfcf_weights: &[f64],
) -> Vec<f64> {
    let gap = (target - fixed_capital).max(0.0).min(max_share * target);
    gfcf_weights.iter().map(|w| gap * w).collect()
}

/// Fixed capital after one month of wear.
pub fn depreciate(fixed_capital: f64, rate: f64) -> f64 {
    fixed_capital * (1.0 - rate)
}
